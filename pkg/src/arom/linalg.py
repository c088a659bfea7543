"""Dense linear-algebra kernels backing the pipeline stages.

Covariance estimation, symmetric and generalized-symmetric
eigendecomposition, Cholesky inversion, and PCA fitting. Everything here
runs in float64 regardless of how features are stored, and every solver
fixes eigenvector signs (largest-magnitude entry positive) so repeated
fits are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)

SYMMETRY_RTOL = 1e-10


def _as_float64_matrix(m: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def _require_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    arr = _as_float64_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {arr.shape}")
    scale = max(float(np.abs(arr).max(initial=0.0)), 1e-300)
    if float(np.abs(arr - arr.T).max(initial=0.0)) > SYMMETRY_RTOL * scale:
        raise NotSymmetricError(f"{name} is not symmetric within {SYMMETRY_RTOL} relative")
    return arr


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            out[:, j] = -col
    return out


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (descending) with unit-norm eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class PcaModel:
    """Column means, orthonormal principal axes, and their variances."""

    mean: np.ndarray
    components: np.ndarray  # (feature_dim, num_components)
    explained_variance: np.ndarray

    @property
    def num_components(self) -> int:
        return self.components.shape[1]

    def transform(self, row: np.ndarray) -> np.ndarray:
        """Project one vector onto the principal axes after centering."""
        return (np.asarray(row, dtype=np.float64) - self.mean) @ self.components


def covariance(samples: np.ndarray) -> np.ndarray:
    """Unbiased (n-1 denominator) covariance of row samples."""
    x = _as_float64_matrix(samples, "samples")
    n = x.shape[0]
    if n < 2:
        raise DegenerateInputError(f"covariance needs n >= 2 samples, got {n}")
    centered = x - x.mean(axis=0)
    cov = (centered.T @ centered) / (n - 1)
    return (cov + cov.T) / 2.0


def eig_symmetric(m: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix, descending order."""
    arr = _require_symmetric(m, "matrix")
    values, vectors = np.linalg.eigh((arr + arr.T) / 2.0)
    order = np.argsort(values)[::-1]
    return EigenDecomposition(
        eigenvalues=values[order],
        eigenvectors=fix_signs(vectors[:, order]),
    )


def eig_generalized(
    s_b: np.ndarray, s_w: np.ndarray, ridge: float = 0.0
) -> EigenDecomposition:
    """Solve ``s_b w = lambda s_w w`` by Cholesky reduction.

    ``s_w`` is regularized to ``s_w + ridge * tr(s_w)/d * I`` before the
    reduction; eigenvectors are back-transformed through the Cholesky
    factor and unit-normalized.
    """
    sb = _require_symmetric(s_b, "s_b")
    sw = _require_symmetric(s_w, "s_w")
    if sb.shape != sw.shape:
        raise DimensionMismatchError(
            f"s_b {sb.shape} and s_w {sw.shape} must share shape"
        )
    if ridge < 0:
        raise DegenerateInputError("ridge must be >= 0")
    d = sw.shape[0]
    regularized = sw + (ridge * np.trace(sw) / d) * np.eye(d)
    try:
        chol = np.linalg.cholesky(regularized)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "within-class matrix is not positive definite after ridge "
            f"{ridge}; increase the ridge"
        ) from exc

    # M = L^-1 s_b L^-T, symmetric by construction up to round-off.
    half = scipy.linalg.solve_triangular(chol, sb, lower=True)
    reduced = scipy.linalg.solve_triangular(chol, half.T, lower=True).T
    values, vectors = np.linalg.eigh((reduced + reduced.T) / 2.0)
    order = np.argsort(values)[::-1]
    values = values[order]
    back = scipy.linalg.solve_triangular(chol.T, vectors[:, order], lower=False)
    back /= np.linalg.norm(back, axis=0, keepdims=True)
    return EigenDecomposition(eigenvalues=values, eigenvectors=fix_signs(back))


def cholesky_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix via Cholesky."""
    arr = _require_symmetric(m, "matrix")
    try:
        chol = np.linalg.cholesky(arr)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    identity = np.eye(arr.shape[0])
    half = scipy.linalg.solve_triangular(chol, identity, lower=True)
    inv = scipy.linalg.solve_triangular(chol.T, half, lower=False)
    return (inv + inv.T) / 2.0


def fit_pca(samples: np.ndarray, num_components: int) -> PcaModel:
    """Top principal axes of the sample covariance, descending by variance.

    Valid component counts are ``1 <= num_components <= min(n - 1, d)``;
    the covariance of n samples has rank at most n - 1.
    """
    x = _as_float64_matrix(samples, "samples")
    n, d = x.shape
    if n < 2:
        raise DegenerateInputError(f"PCA needs n >= 2 samples, got {n}")
    limit = min(n - 1, d)
    if not 1 <= num_components <= limit:
        raise DegenerateInputError(
            f"num_components must be in [1, {limit}] for {n} samples of dim {d}, "
            f"got {num_components}"
        )
    decomposition = eig_symmetric(covariance(x))
    return PcaModel(
        mean=x.mean(axis=0),
        components=decomposition.eigenvectors[:, :num_components],
        explained_variance=np.maximum(decomposition.eigenvalues[:num_components], 0.0),
    )
