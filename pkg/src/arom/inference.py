"""Stage 3: per-class Mahalanobis kNN with exportable neighbor evidence.

Every exemplar is measured under its *own* class covariance inverse, so
the distance field is asymmetric across classes by design. Search is
exhaustive and exact; ties are broken deterministically (distance ties by
exemplar index, vote ties by summed distance then class index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concepts import ConceptDictionary, project
from .encoder import EncodingLanguage, encode_batch
from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    FingerprintMismatchError,
)
from .feature_store import FeatureSet

SCORE_EPSILON = 1e-9
SCORE_MODES = ("inverse_distance", "votes")


@dataclass(frozen=True)
class NeighborEvidence:
    """One retrieved exemplar: identity, label, raw and normalized distance."""

    exemplar_index: int
    exemplar_label: int
    distance: float
    normalized_distance: float


@dataclass(frozen=True)
class Prediction:
    """Voted label, the supporting neighbors, and per-class scores (sum 1)."""

    label: int
    neighbors: tuple[NeighborEvidence, ...]
    class_scores: np.ndarray


def mahalanobis(
    dictionary: ConceptDictionary, s_proj: np.ndarray, exemplar_index: int
) -> float:
    """Distance from a projected query to one exemplar, under that
    exemplar's class covariance inverse."""
    if not 0 <= exemplar_index < dictionary.num_exemplars:
        raise DimensionMismatchError(
            f"exemplar_index {exemplar_index} out of range "
            f"[0, {dictionary.num_exemplars})"
        )
    vec = np.asarray(s_proj, dtype=np.float64)
    if vec.shape != (dictionary.rank,):
        raise DimensionMismatchError(
            f"projected query must have shape ({dictionary.rank},), got {vec.shape}"
        )
    label = int(dictionary.exemplar_labels[exemplar_index])
    delta = vec - dictionary.exemplars[exemplar_index]
    quad = float(delta @ dictionary.class_cov_inv[label] @ delta)
    return float(np.sqrt(max(quad, 0.0)))


def _all_distances(dictionary: ConceptDictionary, s_proj: np.ndarray) -> np.ndarray:
    """Distances to every exemplar, grouped by class for vectorization."""
    distances = np.empty(dictionary.num_exemplars, dtype=np.float64)
    for c in range(dictionary.num_classes):
        members = np.flatnonzero(dictionary.exemplar_labels == c)
        if members.size == 0:
            continue
        delta = s_proj[None, :] - dictionary.exemplars[members]
        quad = np.einsum("ij,jk,ik->i", delta, dictionary.class_cov_inv[c], delta)
        distances[members] = np.sqrt(np.maximum(quad, 0.0))
    return distances


def _vote(
    neighbor_labels: np.ndarray,
    neighbor_distances: np.ndarray,
    num_classes: int,
    score_mode: str,
) -> tuple[int, np.ndarray]:
    counts = np.bincount(neighbor_labels, minlength=num_classes)
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if tied.size == 1:
        label = int(tied[0])
    else:
        # Prefer the tied class whose neighbors sit closer, then the
        # smaller class index.
        sums = [
            (float(neighbor_distances[neighbor_labels == c].sum()), int(c))
            for c in tied
        ]
        label = min(sums)[1]

    if score_mode == "votes":
        scores = counts.astype(np.float64) / counts.sum()
    elif score_mode == "inverse_distance":
        weights = 1.0 / (SCORE_EPSILON + neighbor_distances)
        scores = np.zeros(num_classes, dtype=np.float64)
        np.add.at(scores, neighbor_labels, weights)
        scores /= scores.sum()
    else:
        raise DegenerateInputError(
            f"score_mode must be one of {SCORE_MODES}, got {score_mode!r}"
        )
    return label, scores


def _normalize(distances: np.ndarray) -> np.ndarray:
    peak = float(distances.max()) if distances.size else 0.0
    if peak <= 0.0:
        return np.zeros_like(distances)
    return distances / peak


def classify(
    dictionary: ConceptDictionary,
    encoding: np.ndarray,
    k: int,
    score_mode: str = "inverse_distance",
) -> Prediction:
    """Project a full encoding and vote among its k nearest exemplars."""
    if not 1 <= k <= dictionary.num_exemplars:
        raise DegenerateInputError(
            f"k must be in [1, {dictionary.num_exemplars}], got {k}"
        )
    s_proj = project(dictionary, encoding)
    return classify_projected(dictionary, s_proj, k, score_mode=score_mode)


def classify_projected(
    dictionary: ConceptDictionary,
    s_proj: np.ndarray,
    k: int,
    score_mode: str = "inverse_distance",
) -> Prediction:
    """kNN vote for a query already in the discriminant space."""
    if not 1 <= k <= dictionary.num_exemplars:
        raise DegenerateInputError(
            f"k must be in [1, {dictionary.num_exemplars}], got {k}"
        )
    vec = np.asarray(s_proj, dtype=np.float64)
    if vec.shape != (dictionary.rank,):
        raise DimensionMismatchError(
            f"projected query must have shape ({dictionary.rank},), got {vec.shape}"
        )
    distances = _all_distances(dictionary, vec)
    # Stable ascending sort: equal distances keep exemplar-index order.
    nearest = np.argsort(distances, kind="stable")[:k]
    neighbor_distances = distances[nearest]
    neighbor_labels = dictionary.exemplar_labels[nearest]

    label, scores = _vote(
        neighbor_labels, neighbor_distances, dictionary.num_classes, score_mode
    )
    normalized = _normalize(neighbor_distances)
    neighbors = tuple(
        NeighborEvidence(
            exemplar_index=int(nearest[i]),
            exemplar_label=int(neighbor_labels[i]),
            distance=float(neighbor_distances[i]),
            normalized_distance=float(normalized[i]),
        )
        for i in range(k)
    )
    return Prediction(label=label, neighbors=neighbors, class_scores=scores)


def classify_batch(
    language: EncodingLanguage,
    dictionary: ConceptDictionary,
    feature_set: FeatureSet,
    k: int,
    score_mode: str = "inverse_distance",
) -> list[Prediction]:
    """Full pipeline per row: encode, project, vote.

    Refuses to run when the dictionary carries a fingerprint from a
    different language.
    """
    if dictionary.language_fingerprint:
        actual = language.fingerprint()
        if dictionary.language_fingerprint != actual:
            raise FingerprintMismatchError(
                "dictionary was built from a different encoding language "
                f"(expected {dictionary.language_fingerprint[:12]}..., "
                f"got {actual[:12]}...)"
            )
    encodings, _ = encode_batch(language, feature_set)
    return [
        classify(dictionary, encodings[i], k, score_mode=score_mode)
        for i in range(encodings.shape[0])
    ]


def _coords2d(points: np.ndarray) -> np.ndarray:
    """First two discriminant axes; axis 2 padded with zeros when r = 1."""
    pts = np.atleast_2d(points)
    if pts.shape[1] >= 2:
        return pts[:, :2]
    return np.hstack([pts, np.zeros((pts.shape[0], 1))])


def export_evidence(
    prediction: Prediction,
    dictionary: ConceptDictionary,
    s_proj: np.ndarray,
) -> dict:
    """Self-contained JSON-ready evidence record for one prediction.

    Contains the query's projected coordinates, each neighbor with raw and
    normalized distances, and 2-D coordinates of the query and the whole
    exemplar cloud along the top two discriminant axes.
    """
    vec = np.asarray(s_proj, dtype=np.float64)
    if vec.shape != (dictionary.rank,):
        raise DimensionMismatchError(
            f"projected query must have shape ({dictionary.rank},), got {vec.shape}"
        )
    cloud = _coords2d(dictionary.exemplars)
    query2d = _coords2d(vec[None, :])[0]
    return {
        "query": {
            "coords2d": query2d.tolist(),
            "projected": vec.tolist(),
        },
        "neighbors": [
            {
                "index": n.exemplar_index,
                "label": n.exemplar_label,
                "distance": n.distance,
                "normalized_distance": n.normalized_distance,
                "coords2d": cloud[n.exemplar_index].tolist(),
            }
            for n in prediction.neighbors
        ],
        "exemplar_cloud": [
            {"label": int(dictionary.exemplar_labels[i]), "coords2d": cloud[i].tolist()}
            for i in range(dictionary.num_exemplars)
        ],
        "predicted_label": prediction.label,
        "class_scores": prediction.class_scores.tolist(),
    }
