"""Thin-client command line interface.

Every subcommand speaks HTTP to the service: either to a remote server
(``--server http://host:port``) or, by default, to an in-process ASGI
instance of the same app, so no daemon is needed for local work. Errors
arrive as structured JSON on stderr and a nonzero exit code.
"""

from __future__ import annotations

import asyncio
import json

import click
import httpx

from . import __version__


def _call(server: str | None, method: str, path: str, payload: dict | None = None):
    """One request against a remote server or the in-process app."""
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            response = client.request(method, path, json=payload)
        return response.status_code, response.json()

    from .service import create_app

    async def run():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://arom.local", timeout=600.0
        ) as client:
            response = await client.request(method, path, json=payload)
            return response.status_code, response.json()

    return asyncio.run(run())


def _invoke(ctx: click.Context, method: str, path: str, payload: dict | None = None) -> dict:
    server = ctx.obj.get("server")
    status, body = _call(server, method, path, payload)
    if status >= 400:
        error = body.get("error") or {"type": f"HTTP{status}", "message": str(body)}
        click.echo(json.dumps({"error": error}), err=True)
        ctx.exit(1)
    return body


def _emit(body: dict) -> None:
    click.echo(json.dumps(body, indent=2))


@click.group()
@click.version_option(version=__version__, prog_name="arom")
@click.option(
    "--server",
    default=None,
    envvar="AROM_SERVER",
    help="Base URL of a running service; defaults to in-process execution.",
)
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Encoding-language pipeline and evaluation harness client."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.pass_context
def health(ctx: click.Context) -> None:
    """Check service availability and version."""
    _emit(_invoke(ctx, "GET", "/health"))


@main.command()
@click.argument("path", type=click.Path())
@click.pass_context
def inspect(ctx: click.Context, path: str) -> None:
    """Summarize a feature (.arom), language (.arlg), or dictionary (.ardc) file."""
    _emit(_invoke(ctx, "POST", "/inspect", {"path": path}))


@main.command()
@click.pass_context
def presets(ctx: click.Context) -> None:
    """List the built-in per-dataset configuration presets."""
    _emit(_invoke(ctx, "GET", "/presets"))


@main.command("fit-language")
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--out", "output_path", required=True, type=click.Path())
@click.option("--alphabet", required=True, type=int, help="Alphabet size (PCA components).")
@click.option("--vocab", required=True, type=int, help="Vocabulary size (k-means centroids).")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--cap", default=None, type=int, help="Max training rows used for the fit.")
@click.option("--whiten", is_flag=True, help="Variance-normalize alphabet axes before clustering.")
@click.pass_context
def fit_language_cmd(ctx, input_path, output_path, alphabet, vocab, seed, cap, whiten):
    """Fit the Stage-1 encoding language from (label-stripped) features."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/language/fit",
            {
                "features_path": input_path,
                "output_path": output_path,
                "alphabet_size": alphabet,
                "vocab_size": vocab,
                "seed": seed,
                "sample_cap": cap,
                "whiten": whiten,
            },
        )
    )


@main.command("fit-dictionary")
@click.option("--lang", "language_path", required=True, type=click.Path())
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--out", "output_path", required=True, type=click.Path())
@click.option("--ridge", default=1e-6, type=float, show_default=True)
@click.option("--shrinkage", default=1e-4, type=float, show_default=True)
@click.option("--rank", default=None, type=int, help="Override the discriminant rank.")
@click.option("--classical-scatter", is_flag=True, help="Use unnormalized within-class scatter.")
@click.option("--cap-per-class", default=None, type=int)
@click.option("--seed", default=0, type=int, show_default=True)
@click.pass_context
def fit_dictionary_cmd(
    ctx, language_path, input_path, output_path, ridge, shrinkage, rank,
    classical_scatter, cap_per_class, seed,
):
    """Fit the Stage-2 concept dictionary from labeled features."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/dictionary/fit",
            {
                "features_path": input_path,
                "language_path": language_path,
                "output_path": output_path,
                "ridge": ridge,
                "shrinkage": shrinkage,
                "rank": rank,
                "classical_scatter": classical_scatter,
                "cap_per_class": cap_per_class,
                "seed": seed,
            },
        )
    )


@main.command()
@click.option("--lang", "language_path", required=True, type=click.Path())
@click.option("--dict", "dictionary_path", required=True, type=click.Path())
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--k", default=15, type=int, show_default=True)
@click.option("--score-mode", default="inverse_distance", show_default=True,
              type=click.Choice(["inverse_distance", "votes"]))
@click.option("--out", "output_path", default=None, type=click.Path(),
              help="Also write predictions JSON here.")
@click.pass_context
def classify(ctx, language_path, dictionary_path, input_path, k, score_mode, output_path):
    """Classify every row of a feature file; one prediction per row."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/classify",
            {
                "language_path": language_path,
                "dictionary_path": dictionary_path,
                "features_path": input_path,
                "k": k,
                "score_mode": score_mode,
                "output_path": output_path,
            },
        )
    )


@main.command()
@click.option("--lang", "language_path", required=True, type=click.Path())
@click.option("--dict", "dictionary_path", required=True, type=click.Path())
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--row", "row_index", default=0, type=int, show_default=True)
@click.option("--k", default=10, type=int, show_default=True)
@click.option("--out", "output_path", default=None, type=click.Path())
@click.pass_context
def evidence(ctx, language_path, dictionary_path, input_path, row_index, k, output_path):
    """Export the neighbor-evidence record for one query row."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/evidence",
            {
                "language_path": language_path,
                "dictionary_path": dictionary_path,
                "features_path": input_path,
                "row_index": row_index,
                "k": k,
                "output_path": output_path,
            },
        )
    )


@main.command()
@click.option("--predictions", "predictions_path", required=True, type=click.Path())
@click.option("--truth", "truth_path", required=True, type=click.Path(),
              help="Labeled feature file aligned with the predictions.")
@click.option("--out", "output_path", default=None, type=click.Path())
@click.pass_context
def metrics(ctx, predictions_path, truth_path, output_path):
    """Accuracy, macro AUC, and confusion counts for a prediction file."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/metrics",
            {
                "predictions_path": predictions_path,
                "truth_features_path": truth_path,
                "output_path": output_path,
            },
        )
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "output_dir", required=True, type=click.Path())
@click.option("--workers", default=1, type=int, show_default=True)
@click.pass_context
def sweep(ctx, config_path, output_dir, workers):
    """Run the layer x alphabet x vocabulary grid sweep from a TOML config."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/sweep",
            {"config_path": config_path, "output_dir": output_dir, "workers": workers},
        )
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "output_dir", required=True, type=click.Path())
@click.pass_context
def fewshot(ctx, config_path, output_dir):
    """Run the few-shot label-efficiency protocol from a TOML config."""
    _emit(
        _invoke(
            ctx,
            "POST",
            "/fewshot",
            {"config_path": config_path, "output_dir": output_dir},
        )
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8315, type=int, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
