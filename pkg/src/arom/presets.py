"""Per-dataset configuration presets for the supported benchmark suite.

Layer indexing follows the extractor convention: 0 is the patch-embedding
output, 1-24 the transformer block outputs, so "final" is layer 24.
These presets only apply when real extracted feature files are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

BENCHMARK_K = 15
BENCHMARK_CAP_PER_CLASS = 5000
COARSE_K = 3
COARSE_LANGUAGE_ROWS = 1000
COARSE_DICT_PER_CLASS = 64
COARSE_EVAL_ROWS = 200
COARSE_ALPHABET_GRID = (64, 256, 512)
COARSE_VOCAB_GRID = (64, 256, 512)


@dataclass(frozen=True)
class Preset:
    dataset: str
    layer: int
    alphabet_size: int
    vocab_size: int
    k: int = BENCHMARK_K
    cap_per_class: int = BENCHMARK_CAP_PER_CLASS


PRESETS: dict[str, Preset] = {
    p.dataset: p
    for p in (
        Preset("pathmnist", layer=13, alphabet_size=224, vocab_size=56),
        Preset("dermamnist", layer=15, alphabet_size=512, vocab_size=88),
        Preset("octmnist", layer=20, alphabet_size=512, vocab_size=48),
        Preset("pneumoniamnist", layer=24, alphabet_size=224, vocab_size=480),
        Preset("retinamnist", layer=22, alphabet_size=488, vocab_size=56),
        Preset("breastmnist", layer=18, alphabet_size=248, vocab_size=32),
        Preset("bloodmnist", layer=18, alphabet_size=496, vocab_size=488),
        Preset("tissuemnist", layer=17, alphabet_size=512, vocab_size=288),
        Preset("organamnist", layer=13, alphabet_size=248, vocab_size=288),
        Preset("organcmnist", layer=16, alphabet_size=248, vocab_size=72),
        Preset("organsmnist", layer=16, alphabet_size=272, vocab_size=96),
    )
}


def get_preset(name: str) -> Preset:
    key = name.strip().lower()
    if key not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    return PRESETS[key]
