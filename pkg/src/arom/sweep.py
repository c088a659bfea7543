"""Layer x alphabet x vocabulary grid sweeps.

Each grid cell fits a language on capped unlabeled training rows, builds
a dictionary from capped labeled rows, and scores accuracy on capped
validation rows. Cells are independent jobs executed by a work queue;
results are aggregated in cell-index order regardless of completion
order, and per-cell seeds derive deterministically from (seed, layer, A,
V) so a cell's result does not depend on which other cells run.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .concepts import fit_dictionary
from .encoder import encode_batch, fit_language
from .errors import AromError, ConfigError
from .feature_store import (
    FeatureSet,
    read_features,
    sample_rows,
    subsample_per_class,
)
from .inference import classify
from .metrics import accuracy

GRID_CSV_COLUMNS = (
    "layer",
    "alphabet_size",
    "vocab_size",
    "k",
    "n_language",
    "n_dictionary",
    "n_eval",
    "accuracy",
    "status",
    "error",
)
BEST_CSV_COLUMNS = ("layer", "alphabet_size", "vocab_size", "accuracy")


@dataclass(frozen=True)
class SweepConfig:
    layer_indices: tuple[int, ...]
    alphabet_sizes: tuple[int, ...]
    vocab_sizes: tuple[int, ...]
    k: int = 3
    language_sample_cap: int = 1000
    dict_cap_per_class: int = 64
    eval_cap: int = 200
    seed: int = 0
    ridge: float = 1e-6
    shrinkage: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("layer_indices", "alphabet_sizes", "vocab_sizes"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        for name in ("language_sample_cap", "dict_cap_per_class", "eval_cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")

    def to_dict(self) -> dict:
        return {
            "layer_indices": list(self.layer_indices),
            "alphabet_sizes": list(self.alphabet_sizes),
            "vocab_sizes": list(self.vocab_sizes),
            "k": self.k,
            "language_sample_cap": self.language_sample_cap,
            "dict_cap_per_class": self.dict_cap_per_class,
            "eval_cap": self.eval_cap,
            "seed": self.seed,
            "ridge": self.ridge,
            "shrinkage": self.shrinkage,
        }


@dataclass(frozen=True)
class LayerFiles:
    """Feature-file paths for one layer (test is optional for sweeps)."""

    train: Path
    val: Path
    test: Path | None = None


@dataclass
class CellResult:
    layer: int
    alphabet_size: int
    vocab_size: int
    k: int
    n_language: int = 0
    n_dictionary: int = 0
    n_eval: int = 0
    accuracy: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def csv_row(self) -> list[str]:
        return [
            str(self.layer),
            str(self.alphabet_size),
            str(self.vocab_size),
            str(self.k),
            str(self.n_language),
            str(self.n_dictionary),
            str(self.n_eval),
            "" if self.accuracy is None else repr(self.accuracy),
            "ok" if self.ok else "error",
            self.error or "",
        ]


@dataclass
class SweepReport:
    config: dict
    cells: list[CellResult]
    best_per_layer: dict[int, CellResult] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "cells": [
                {
                    "layer": c.layer,
                    "alphabet_size": c.alphabet_size,
                    "vocab_size": c.vocab_size,
                    "k": c.k,
                    "n_language": c.n_language,
                    "n_dictionary": c.n_dictionary,
                    "n_eval": c.n_eval,
                    "accuracy": c.accuracy,
                    "status": "ok" if c.ok else "error",
                    "error": c.error,
                }
                for c in self.cells
            ],
            "best_per_layer": {
                str(layer): {
                    "alphabet_size": c.alphabet_size,
                    "vocab_size": c.vocab_size,
                    "accuracy": c.accuracy,
                }
                for layer, c in sorted(self.best_per_layer.items())
            },
        }


def _cell_seeds(base_seed: int, layer: int, a: int, v: int) -> tuple[int, int, int, int]:
    """Four independent 32-bit seeds derived stably from the cell address."""
    ss = np.random.SeedSequence([base_seed, layer, a, v])
    return tuple(int(s) for s in ss.generate_state(4))


def run_cell(
    train: FeatureSet,
    val: FeatureSet,
    layer: int,
    a_size: int,
    v_size: int,
    cfg: SweepConfig,
) -> CellResult:
    """One grid cell: fit language + dictionary, score validation accuracy."""
    result = CellResult(layer=layer, alphabet_size=a_size, vocab_size=v_size, k=cfg.k)
    lang_seed, kmeans_seed, dict_seed, eval_seed = _cell_seeds(
        cfg.seed, layer, a_size, v_size
    )
    try:
        lang_rows = sample_rows(train.num_samples, cfg.language_sample_cap, lang_seed)
        language_set = train.select(lang_rows).without_labels()
        result.n_language = language_set.num_samples
        language = fit_language(language_set, a_size, v_size, kmeans_seed)

        dict_set = subsample_per_class(train, cfg.dict_cap_per_class, dict_seed)
        result.n_dictionary = dict_set.num_samples
        encodings, labels = encode_batch(language, dict_set)
        dictionary = fit_dictionary(
            encodings,
            labels,
            ridge=cfg.ridge,
            shrinkage=cfg.shrinkage,
            language_fingerprint=language.fingerprint(),
        )

        eval_rows = sample_rows(val.num_samples, cfg.eval_cap, eval_seed)
        eval_set = val.select(eval_rows)
        result.n_eval = eval_set.num_samples
        eval_encodings, _ = encode_batch(language, eval_set)
        predicted = np.array(
            [
                classify(dictionary, eval_encodings[i], cfg.k).label
                for i in range(eval_set.num_samples)
            ]
        )
        result.accuracy = accuracy(predicted, eval_set.labels)
    except AromError as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def run_sweep(
    layer_files: dict[int, LayerFiles],
    cfg: SweepConfig,
    workers: int = 1,
) -> SweepReport:
    """Evaluate every (layer, A, V) cell; cell failures are recorded, not fatal."""
    missing = [layer for layer in cfg.layer_indices if layer not in layer_files]
    if missing:
        raise ConfigError(f"no feature files configured for layers {missing}")
    for layer in cfg.layer_indices:
        for path in (layer_files[layer].train, layer_files[layer].val):
            if not Path(path).exists():
                raise ConfigError(f"missing feature file for layer {layer}: {path}")

    cells: list[tuple[int, int, int]] = [
        (layer, a, v)
        for layer in cfg.layer_indices
        for a in cfg.alphabet_sizes
        for v in cfg.vocab_sizes
    ]

    splits: dict[int, tuple[FeatureSet, FeatureSet]] = {}
    datasets: set[str] = set()
    for layer in cfg.layer_indices:
        files = layer_files[layer]
        train = read_features(files.train)
        val = read_features(files.val)
        for name, fs in (("train", train), ("val", val)):
            if fs.layer_index != layer:
                raise ConfigError(
                    f"{name} file for layer {layer} carries layer_index "
                    f"{fs.layer_index}"
                )
            datasets.add(fs.source_dataset)
        splits[layer] = (train, val)
    if len(datasets) > 1:
        raise ConfigError(
            f"sweep inputs span multiple datasets: {sorted(datasets)}"
        )

    def job(cell: tuple[int, int, int]) -> CellResult:
        layer, a, v = cell
        train, val = splits[layer]
        return run_cell(train, val, layer, a, v, cfg)

    if workers <= 1:
        results = [job(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, cells))

    report = SweepReport(config=cfg.to_dict(), cells=results)
    for cell in results:
        if not cell.ok:
            continue
        best = report.best_per_layer.get(cell.layer)
        if best is None or cell.accuracy > best.accuracy:
            report.best_per_layer[cell.layer] = cell
    return report


def write_sweep_reports(report: SweepReport, out_dir: str | Path) -> dict[str, str]:
    """Write grid CSV, best-cell CSV, and the JSON report; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid_path = out / "sweep_grid.csv"
    with grid_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(GRID_CSV_COLUMNS)
        for cell in report.cells:
            writer.writerow(cell.csv_row())
    best_path = out / "sweep_best.csv"
    with best_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(BEST_CSV_COLUMNS)
        for layer in sorted(report.best_per_layer):
            cell = report.best_per_layer[layer]
            writer.writerow(
                [
                    str(cell.layer),
                    str(cell.alphabet_size),
                    str(cell.vocab_size),
                    repr(cell.accuracy),
                ]
            )
    json_path = out / "sweep_report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return {
        "grid_csv": str(grid_path),
        "best_csv": str(best_path),
        "report_json": str(json_path),
    }
