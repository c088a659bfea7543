"""Stage 1: the encoding language and full-encoding vectors.

An :class:`EncodingLanguage` pairs a PCA "alphabet" with a k-means
"vocabulary" fitted in alphabet space. Encoding a latent vector yields
the alphabet projection concatenated with the Euclidean distances to
every vocabulary centroid.

The batch encoder intentionally projects row by row (GEMV) rather than
with one large GEMM: BLAS GEMM blocking changes last-ulp results between
batch shapes, and batch output is contractually bit-identical to a
per-sample loop.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DegenerateInputError,
    DimensionMismatchError,
    NonFiniteDataError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .feature_store import FeatureSet
from .linalg import PcaModel, fit_pca
from .vocab import CentroidSet, fit_kmeans

LANGUAGE_MAGIC = b"ARLG"
LANGUAGE_VERSION = 1
_LANG_HEADER = struct.Struct("<4sHIIIH")


@dataclass(frozen=True)
class EncodingLanguage:
    """Frozen Stage-1 artifact: alphabet (PCA) plus vocabulary (centroids)."""

    pca: PcaModel
    vocabulary: CentroidSet
    feature_dim: int
    layer_index: int

    def __post_init__(self) -> None:
        if self.vocabulary.dim != self.pca.num_components:
            raise DimensionMismatchError(
                f"vocabulary dim {self.vocabulary.dim} != alphabet size "
                f"{self.pca.num_components}"
            )

    @property
    def alphabet_size(self) -> int:
        return self.pca.num_components

    @property
    def vocab_size(self) -> int:
        return self.vocabulary.size

    @property
    def encoded_dim(self) -> int:
        return self.alphabet_size + self.vocab_size

    def fingerprint(self) -> str:
        """SHA-256 of the serialized language; binds dictionaries to it."""
        return hashlib.sha256(serialize_language(self)).hexdigest()


@dataclass(frozen=True)
class FullEncoding:
    """Alphabet part, word (centroid-distance) part, and their concatenation."""

    alphabet: np.ndarray
    word: np.ndarray

    @property
    def combined(self) -> np.ndarray:
        return np.concatenate([self.alphabet, self.word])


def fit_language(
    unlabeled: FeatureSet,
    a_size: int,
    v_size: int,
    seed: int,
    whiten: bool = False,
) -> EncodingLanguage:
    """Fit alphabet and vocabulary from unlabeled features.

    ``whiten`` rescales each alphabet axis by 1/sqrt(variance) before the
    vocabulary fit; the scaling is folded into the stored components so
    encoding needs no extra state. Off by default: the projection is a
    plain centered rotation.
    """
    n = unlabeled.num_samples
    if a_size > unlabeled.feature_dim:
        raise DegenerateInputError(
            f"alphabet size {a_size} exceeds feature_dim {unlabeled.feature_dim}"
        )
    if n < max(a_size + 1, v_size):
        raise DegenerateInputError(
            f"need at least max(a_size+1, v_size)={max(a_size + 1, v_size)} "
            f"samples, got {n}"
        )
    features = unlabeled.features.astype(np.float64)
    pca = fit_pca(features, a_size)
    if whiten:
        scale = 1.0 / np.sqrt(np.maximum(pca.explained_variance, 1e-300))
        pca = PcaModel(
            mean=pca.mean,
            components=pca.components * scale[None, :],
            explained_variance=np.ones_like(pca.explained_variance),
        )
    projected = np.empty((n, a_size), dtype=np.float64)
    for i in range(n):
        projected[i] = pca.transform(features[i])
    vocabulary = fit_kmeans(projected, v_size, seed)
    return EncodingLanguage(
        pca=pca,
        vocabulary=vocabulary,
        feature_dim=unlabeled.feature_dim,
        layer_index=unlabeled.layer_index,
    )


def _encode_row(language: EncodingLanguage, row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    alphabet = language.pca.transform(row)
    diff = alphabet[None, :] - language.vocabulary.centroids
    word = np.sqrt(np.einsum("vd,vd->v", diff, diff))
    return alphabet, word


def encode(language: EncodingLanguage, z: np.ndarray) -> FullEncoding:
    """Encode one latent vector into alphabet + word parts."""
    row = np.asarray(z, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != language.feature_dim:
        raise DimensionMismatchError(
            f"latent vector must have dim {language.feature_dim}, got shape {row.shape}"
        )
    if not np.isfinite(row).all():
        raise NonFiniteDataError("latent vector contains NaN or infinite entries")
    alphabet, word = _encode_row(language, row)
    return FullEncoding(alphabet=alphabet, word=word)


def encode_batch(
    language: EncodingLanguage, feature_set: FeatureSet
) -> tuple[np.ndarray, np.ndarray | None]:
    """Encode every row of a feature set; labels pass through untouched.

    Row i of the output equals ``encode(language, features[i]).combined``
    bit-exactly.
    """
    if feature_set.feature_dim != language.feature_dim:
        raise DimensionMismatchError(
            f"feature_dim {feature_set.feature_dim} != language feature_dim "
            f"{language.feature_dim}"
        )
    n = feature_set.num_samples
    out = np.empty((n, language.encoded_dim), dtype=np.float64)
    a = language.alphabet_size
    features = feature_set.features.astype(np.float64)
    for i in range(n):
        alphabet, word = _encode_row(language, features[i])
        out[i, :a] = alphabet
        out[i, a:] = word
    return out, feature_set.labels


def serialize_language(language: EncodingLanguage) -> bytes:
    """Binary ARLG container for fit-once/encode-many workflows.

    Layout (little-endian): magic, version u16, A u32, V u32,
    feature_dim u32, layer_index u16, then mean (d), components (d*A),
    centroids (V*A), explained_variance (A), all float64.
    """
    header = _LANG_HEADER.pack(
        LANGUAGE_MAGIC,
        LANGUAGE_VERSION,
        language.alphabet_size,
        language.vocab_size,
        language.feature_dim,
        language.layer_index,
    )
    return b"".join(
        [
            header,
            np.ascontiguousarray(language.pca.mean, dtype="<f8").tobytes(),
            np.ascontiguousarray(language.pca.components, dtype="<f8").tobytes(),
            np.ascontiguousarray(language.vocabulary.centroids, dtype="<f8").tobytes(),
            np.ascontiguousarray(language.pca.explained_variance, dtype="<f8").tobytes(),
        ]
    )


def deserialize_language(blob: bytes) -> EncodingLanguage:
    if len(blob) < _LANG_HEADER.size:
        raise TruncatedPayloadError("language blob shorter than header")
    magic, version, a, v, d, layer = _LANG_HEADER.unpack_from(blob, 0)
    if magic != LANGUAGE_MAGIC:
        raise BadMagicError(f"bad language magic {magic!r}, expected {LANGUAGE_MAGIC!r}")
    if version != LANGUAGE_VERSION:
        raise VersionMismatchError(
            f"unsupported language version {version}, expected {LANGUAGE_VERSION}"
        )
    counts = (d, d * a, v * a, a)
    expected = _LANG_HEADER.size + 8 * sum(counts)
    if len(blob) != expected:
        raise TruncatedPayloadError(
            f"language blob needs {expected} bytes, got {len(blob)}"
        )
    offset = _LANG_HEADER.size
    arrays = []
    for count in counts:
        arrays.append(np.frombuffer(blob, dtype="<f8", count=count, offset=offset))
        offset += 8 * count
    mean, components, centroids, variance = arrays
    pca = PcaModel(
        mean=mean.copy(),
        components=components.reshape(d, a).copy(),
        explained_variance=variance.copy(),
    )
    vocabulary = CentroidSet(
        centroids=centroids.reshape(v, a).copy(),
        inertia=0.0,
        iterations_run=0,
    )
    return EncodingLanguage(pca=pca, vocabulary=vocabulary, feature_dim=d, layer_index=layer)


def save_language(language: EncodingLanguage, path: str | Path) -> None:
    Path(path).write_bytes(serialize_language(language))


def load_language(path: str | Path) -> EncodingLanguage:
    return deserialize_language(Path(path).read_bytes())
