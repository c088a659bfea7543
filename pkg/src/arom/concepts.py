"""Stage 2: supervised concept-dictionary synthesis.

Builds within/between-class scatter from encoded training samples, solves
the generalized eigenproblem for the discriminant projection, and stores
every projected training encoding as a retrievable exemplar together with
per-class projected covariance inverses.

Note the within-class scatter here sums per-class *covariances* (each
normalized by its own n_c - 1), not raw scatter matrices; the
``classical_scatter`` flag switches to the unnormalized classical variant
for comparison.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DegenerateInputError,
    DimensionMismatchError,
    NonFiniteDataError,
    NotPositiveDefiniteError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .linalg import cholesky_inverse, covariance, eig_generalized

DICTIONARY_MAGIC = b"ARDC"
DICTIONARY_VERSION = 1
_DICT_HEADER = struct.Struct("<4sHIIII")

DEFAULT_RIDGE = 1e-6
DEFAULT_SHRINKAGE = 1e-4
RANK_EIGENVALUE_RTOL = 1e-10


@dataclass(frozen=True)
class ScatterPair:
    """Within/between-class scatter with the means and counts behind them."""

    s_w: np.ndarray
    s_b: np.ndarray
    class_means: np.ndarray  # (C, D)
    global_mean: np.ndarray
    class_counts: np.ndarray  # (C,)

    @property
    def num_classes(self) -> int:
        return self.class_means.shape[0]


@dataclass(frozen=True)
class ConceptDictionary:
    """Discriminant projection plus projected exemplars and class metrics."""

    lda: np.ndarray  # (D, r)
    exemplars: np.ndarray  # (M, r)
    exemplar_labels: np.ndarray  # (M,)
    class_cov_inv: np.ndarray  # (C, r, r)
    class_counts: np.ndarray  # (C,)
    language_fingerprint: str = ""

    @property
    def input_dim(self) -> int:
        return self.lda.shape[0]

    @property
    def rank(self) -> int:
        return self.lda.shape[1]

    @property
    def num_classes(self) -> int:
        return self.class_cov_inv.shape[0]

    @property
    def num_exemplars(self) -> int:
        return self.exemplars.shape[0]


def _validate_labeled(encodings: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    enc = np.asarray(encodings, dtype=np.float64)
    lab = np.asarray(labels)
    if enc.ndim != 2:
        raise DimensionMismatchError(f"encodings must be 2-D, got shape {enc.shape}")
    if lab.ndim != 1 or lab.shape[0] != enc.shape[0]:
        raise DimensionMismatchError(
            f"labels shape {lab.shape} does not match {enc.shape[0]} encodings"
        )
    if not np.isfinite(enc).all():
        raise NonFiniteDataError("encodings contain NaN or infinite entries")
    if lab.size == 0:
        raise DegenerateInputError("no labeled samples")
    if lab.min() < 0:
        raise DegenerateInputError("labels must be non-negative")
    num_classes = int(lab.max()) + 1
    return enc, lab.astype(np.int64), num_classes


def compute_scatter(
    encodings: np.ndarray, labels: np.ndarray, classical_scatter: bool = False
) -> ScatterPair:
    """Class means, global mean, and the two scatter matrices.

    Every class index in [0, max(labels)] must appear with at least two
    samples; per-class covariance divides by n_c - 1.
    """
    enc, lab, num_classes = _validate_labeled(encodings, labels)
    n, dim = enc.shape
    if n < num_classes + 1:
        raise DegenerateInputError(
            f"need at least C+1={num_classes + 1} samples for {num_classes} classes, got {n}"
        )

    counts = np.bincount(lab, minlength=num_classes)
    for c in np.flatnonzero(counts < 2):
        raise DegenerateInputError(
            f"class {c} has {counts[c]} sample(s); per-class covariance needs n_c >= 2"
        )

    global_mean = enc.mean(axis=0)
    class_means = np.empty((num_classes, dim), dtype=np.float64)
    s_w = np.zeros((dim, dim), dtype=np.float64)
    s_b = np.zeros((dim, dim), dtype=np.float64)
    for c in range(num_classes):
        members = enc[lab == c]
        class_means[c] = members.mean(axis=0)
        centered = members - class_means[c]
        raw = centered.T @ centered
        s_w += raw if classical_scatter else raw / (counts[c] - 1)
        gap = class_means[c] - global_mean
        s_b += counts[c] * np.outer(gap, gap)

    return ScatterPair(
        s_w=(s_w + s_w.T) / 2.0,
        s_b=(s_b + s_b.T) / 2.0,
        class_means=class_means,
        global_mean=global_mean,
        class_counts=counts,
    )


def fit_dictionary(
    encodings: np.ndarray,
    labels: np.ndarray,
    ridge: float = DEFAULT_RIDGE,
    rank: int | None = None,
    shrinkage: float = DEFAULT_SHRINKAGE,
    classical_scatter: bool = False,
    language_fingerprint: str = "",
) -> ConceptDictionary:
    """Fit the discriminant projection and per-class exemplar metrics.

    The projection keeps ``min(C - 1, #significant eigenvalues)`` axes
    unless ``rank`` overrides it. Each class covariance is re-estimated in
    the projected space, shrunk toward ``shrinkage * tr/r * I``, and
    inverted; small-sample classes (down to n_c = 2) stay invertible at
    the default shrinkage unless their projected spread is exactly zero.
    """
    scatter = compute_scatter(encodings, labels, classical_scatter=classical_scatter)
    enc = np.asarray(encodings, dtype=np.float64)
    lab = np.asarray(labels, dtype=np.int64)
    num_classes = scatter.num_classes

    decomposition = eig_generalized(scatter.s_b, scatter.s_w, ridge=ridge)
    eigenvalues = decomposition.eigenvalues
    if rank is None:
        peak = float(eigenvalues[0])
        if peak <= 0.0:
            raise DegenerateInputError(
                "between-class scatter has no positive eigenvalue; classes are "
                "indistinguishable in encoding space"
            )
        significant = int(np.sum(eigenvalues > RANK_EIGENVALUE_RTOL * peak))
        r = min(num_classes - 1, significant)
    else:
        if not 1 <= rank <= enc.shape[1]:
            raise DegenerateInputError(f"rank must be in [1, {enc.shape[1]}], got {rank}")
        r = rank
    if r < 1:
        raise DegenerateInputError("discriminant rank collapsed to zero")

    lda = decomposition.eigenvectors[:, :r]
    exemplars = enc @ lda

    cov_inv = np.empty((num_classes, r, r), dtype=np.float64)
    for c in range(num_classes):
        projected = exemplars[lab == c]
        class_cov = covariance(projected)
        shrunk = class_cov + (shrinkage * np.trace(class_cov) / r) * np.eye(r)
        try:
            cov_inv[c] = cholesky_inverse(shrunk)
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(
                f"projected covariance of class {c} is not positive definite at "
                f"shrinkage {shrinkage}; increase the shrinkage"
            ) from exc

    return ConceptDictionary(
        lda=lda,
        exemplars=exemplars,
        exemplar_labels=lab,
        class_cov_inv=cov_inv,
        class_counts=scatter.class_counts,
        language_fingerprint=language_fingerprint,
    )


def project(dictionary: ConceptDictionary, encoding: np.ndarray) -> np.ndarray:
    """Project one full encoding into the discriminant space."""
    vec = np.asarray(encoding, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != dictionary.input_dim:
        raise DimensionMismatchError(
            f"encoding must have dim {dictionary.input_dim}, got shape {vec.shape}"
        )
    if not np.isfinite(vec).all():
        raise NonFiniteDataError("encoding contains NaN or infinite entries")
    return vec @ dictionary.lda


def serialize_dictionary(dictionary: ConceptDictionary) -> bytes:
    """Binary ARDC container.

    Layout (little-endian): magic, version u16, D u32, r u32, C u32,
    M u32, then W_LDA (D*r), exemplars (M*r), labels (M u16), per-class
    covariance inverses (C*r*r), class counts (C u32), fingerprint
    (64-byte hex, zero-padded).
    """
    d, r = dictionary.lda.shape
    m = dictionary.num_exemplars
    c = dictionary.num_classes
    header = _DICT_HEADER.pack(DICTIONARY_MAGIC, DICTIONARY_VERSION, d, r, c, m)
    fingerprint = dictionary.language_fingerprint.encode("ascii")[:64].ljust(64, b"\x00")
    return b"".join(
        [
            header,
            np.ascontiguousarray(dictionary.lda, dtype="<f8").tobytes(),
            np.ascontiguousarray(dictionary.exemplars, dtype="<f8").tobytes(),
            dictionary.exemplar_labels.astype("<u2").tobytes(),
            np.ascontiguousarray(dictionary.class_cov_inv, dtype="<f8").tobytes(),
            dictionary.class_counts.astype("<u4").tobytes(),
            fingerprint,
        ]
    )


def deserialize_dictionary(blob: bytes) -> ConceptDictionary:
    if len(blob) < _DICT_HEADER.size:
        raise TruncatedPayloadError("dictionary blob shorter than header")
    magic, version, d, r, c, m = _DICT_HEADER.unpack_from(blob, 0)
    if magic != DICTIONARY_MAGIC:
        raise BadMagicError(f"bad dictionary magic {magic!r}, expected {DICTIONARY_MAGIC!r}")
    if version != DICTIONARY_VERSION:
        raise VersionMismatchError(
            f"unsupported dictionary version {version}, expected {DICTIONARY_VERSION}"
        )
    expected = _DICT_HEADER.size + 8 * (d * r + m * r + c * r * r) + 2 * m + 4 * c + 64
    if len(blob) != expected:
        raise TruncatedPayloadError(
            f"dictionary blob needs {expected} bytes, got {len(blob)}"
        )
    offset = _DICT_HEADER.size
    lda = np.frombuffer(blob, dtype="<f8", count=d * r, offset=offset).reshape(d, r).copy()
    offset += 8 * d * r
    exemplars = np.frombuffer(blob, dtype="<f8", count=m * r, offset=offset).reshape(m, r).copy()
    offset += 8 * m * r
    labels = np.frombuffer(blob, dtype="<u2", count=m, offset=offset).astype(np.int64)
    offset += 2 * m
    cov_inv = (
        np.frombuffer(blob, dtype="<f8", count=c * r * r, offset=offset)
        .reshape(c, r, r)
        .copy()
    )
    offset += 8 * c * r * r
    counts = np.frombuffer(blob, dtype="<u4", count=c, offset=offset).astype(np.int64)
    offset += 4 * c
    fingerprint = blob[offset : offset + 64].rstrip(b"\x00").decode("ascii")
    return ConceptDictionary(
        lda=lda,
        exemplars=exemplars,
        exemplar_labels=labels,
        class_cov_inv=cov_inv,
        class_counts=counts,
        language_fingerprint=fingerprint,
    )


def save_dictionary(dictionary: ConceptDictionary, path: str | Path) -> None:
    Path(path).write_bytes(serialize_dictionary(dictionary))


def load_dictionary(path: str | Path) -> ConceptDictionary:
    return deserialize_dictionary(Path(path).read_bytes())
