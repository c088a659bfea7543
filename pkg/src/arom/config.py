"""TOML experiment configuration for sweeps and few-shot runs.

A sweep config names either an explicit grid or a preset plus the
per-layer feature-file locations (template strings with ``{layer}`` and
``{dataset}`` placeholders, or an explicit per-layer table). Loaded
configs are echoed verbatim into every report they produce.

Example::

    [sweep]
    layers = [0, 1]
    alphabet_sizes = [16, 32]
    vocab_sizes = [8, 16]
    k = 3
    seed = 7

    [data]
    dataset = "blobs"
    train = "features/{dataset}_train_L{layer}.arom"
    val = "features/{dataset}_val_L{layer}.arom"
"""

from __future__ import annotations

from pathlib import Path

import tomli

from .errors import ConfigError
from .fewshot import FewShotConfig
from .presets import (
    COARSE_DICT_PER_CLASS,
    COARSE_EVAL_ROWS,
    COARSE_K,
    COARSE_LANGUAGE_ROWS,
    get_preset,
)
from .sweep import LayerFiles, SweepConfig


def _load_toml(path: str | Path) -> dict:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        return tomli.loads(config_path.read_text())
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{config_path}: {exc}") from exc


def _resolve_path(template: str, dataset: str, layer: int, base: Path) -> Path:
    rendered = template.format(dataset=dataset, layer=layer)
    path = Path(rendered)
    return path if path.is_absolute() else base / path


def _layer_files(
    data: dict, layers: tuple[int, ...], base: Path
) -> dict[int, LayerFiles]:
    dataset = data.get("dataset", "")
    out: dict[int, LayerFiles] = {}
    for layer in layers:
        try:
            train = _resolve_path(data["train"], dataset, layer, base)
            val_template = data.get("val") or data.get("test")
            if val_template is None:
                raise KeyError("val")
            val = _resolve_path(val_template, dataset, layer, base)
        except KeyError as exc:
            raise ConfigError(f"[data] section missing key {exc}") from exc
        test = (
            _resolve_path(data["test"], dataset, layer, base)
            if "test" in data
            else None
        )
        out[layer] = LayerFiles(train=train, val=val, test=test)
    return out


def load_sweep_config(
    path: str | Path,
) -> tuple[SweepConfig, dict[int, LayerFiles], dict]:
    """Parse a sweep TOML file into (config, per-layer files, raw echo)."""
    raw = _load_toml(path)
    base = Path(path).resolve().parent
    section = raw.get("sweep", {})

    preset_name = section.get("preset")
    if preset_name:
        preset = get_preset(preset_name)
        layers = tuple(section.get("layers", [preset.layer]))
        alphabet_sizes = tuple(section.get("alphabet_sizes", [preset.alphabet_size]))
        vocab_sizes = tuple(section.get("vocab_sizes", [preset.vocab_size]))
        k = int(section.get("k", preset.k))
    else:
        try:
            layers = tuple(section["layers"])
            alphabet_sizes = tuple(section["alphabet_sizes"])
            vocab_sizes = tuple(section["vocab_sizes"])
        except KeyError as exc:
            raise ConfigError(f"[sweep] section missing key {exc}") from exc
        k = int(section.get("k", COARSE_K))

    cfg = SweepConfig(
        layer_indices=layers,
        alphabet_sizes=alphabet_sizes,
        vocab_sizes=vocab_sizes,
        k=k,
        language_sample_cap=int(
            section.get("language_sample_cap", COARSE_LANGUAGE_ROWS)
        ),
        dict_cap_per_class=int(section.get("dict_cap_per_class", COARSE_DICT_PER_CLASS)),
        eval_cap=int(section.get("eval_cap", COARSE_EVAL_ROWS)),
        seed=int(section.get("seed", 0)),
        ridge=float(section.get("ridge", 1e-6)),
        shrinkage=float(section.get("shrinkage", 1e-4)),
    )
    files = _layer_files(raw.get("data", {}), cfg.layer_indices, base)
    return cfg, files, raw


def load_fewshot_config(
    path: str | Path,
) -> tuple[FewShotConfig, dict[str, Path], dict]:
    """Parse a few-shot TOML file into (config, data paths, raw echo).

    The [data] section must name ``train``, ``test``, and ``language``
    paths (the language is fixed for the whole protocol).
    """
    raw = _load_toml(path)
    base = Path(path).resolve().parent
    section = raw.get("fewshot", {})
    try:
        shots = tuple(section["shots"])
        repeats = int(section["repeats"])
    except KeyError as exc:
        raise ConfigError(f"[fewshot] section missing key {exc}") from exc
    cfg = FewShotConfig(
        shots=shots,
        repeats=repeats,
        k=int(section.get("k", 15)),
        seeds=tuple(section.get("seeds", ())),
        ridge=float(section.get("ridge", 1e-6)),
        shrinkage=float(section.get("shrinkage", 1e-4)),
    )
    data = raw.get("data", {})
    paths: dict[str, Path] = {}
    for key in ("train", "test", "language"):
        if key not in data:
            raise ConfigError(f"[data] section missing key '{key}'")
        value = Path(data[key])
        paths[key] = value if value.is_absolute() else base / value
    return cfg, paths, raw
