"""On-disk feature container (AROM1) and the in-memory dataset model.

AROM1 layout, little-endian:

====== ===== =========================================
offset bytes field
====== ===== =========================================
0      4     magic ``b"AROM"``
4      2     version, u16 (currently 1)
6      4     num_samples, u32
10     4     feature_dim, u32
14     2     layer_index, u16
16     2     patch_count, u16
18     32    backbone_id, zero-padded UTF-8
50     32    source_dataset, zero-padded UTF-8
82     4     label_count, u32 (0 = unlabeled)
86     --    num_samples x feature_dim float32, row-major
..     --    label_count u16 labels
====== ===== =========================================

Features are stored as float32; all downstream math promotes to float64.
Labels are u16 (headroom well past the class counts seen in practice).

The seeded subsampler is part of the reproducibility contract: selections
are drawn with NumPy's PCG64 generator seeded per class as documented in
:func:`subsample_indices_per_class`, so identical (data, n, seed) triples
select identical rows on any machine.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    InvalidFeatureSetError,
    NonFiniteDataError,
    TruncatedPayloadError,
    UnlabeledDataError,
    VersionMismatchError,
)

MAGIC = b"AROM"
VERSION = 1
HEADER_SIZE = 86
_HEADER_STRUCT = struct.Struct("<4sHIIHH32s32sI")


def _encode_padded(text: str, width: int, name: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > width:
        raise InvalidFeatureSetError(
            f"{name} exceeds {width} UTF-8 bytes: {text!r}"
        )
    return raw.ljust(width, b"\x00")


@dataclass(frozen=True)
class FeatureSet:
    """Pooled latent vectors for one (dataset, split, layer) triple.

    ``features`` is float32 with shape (num_samples, feature_dim);
    ``labels`` is an int vector of equal length, or None for the
    unlabeled data used to fit the encoding language.
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    layer_index: int = 0
    backbone_id: str = ""
    source_dataset: str = ""
    patch_count: int = 0

    def __post_init__(self) -> None:
        feats = np.ascontiguousarray(self.features, dtype=np.float32)
        if feats.ndim != 2:
            raise InvalidFeatureSetError(
                f"features must be 2-D, got shape {feats.shape}"
            )
        if feats.shape[1] < 1:
            raise InvalidFeatureSetError("feature_dim must be positive")
        if not np.isfinite(feats).all():
            raise NonFiniteDataError("features contain NaN or infinite entries")
        object.__setattr__(self, "features", feats)

        if self.labels is not None:
            labels = np.ascontiguousarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
                raise InvalidFeatureSetError(
                    f"labels length {labels.shape} does not match "
                    f"{feats.shape[0]} samples"
                )
            if labels.size and (labels.min() < 0 or labels.max() > 0xFFFF):
                raise InvalidFeatureSetError("labels must fit in u16")
            object.__setattr__(self, "labels", labels.astype(np.int64))
        if self.layer_index < 0:
            raise InvalidFeatureSetError("layer_index must be >= 0")

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def labeled(self) -> bool:
        return self.labels is not None

    def without_labels(self) -> "FeatureSet":
        """Label-stripped copy (used to fit the unsupervised stage)."""
        return FeatureSet(
            features=self.features,
            labels=None,
            layer_index=self.layer_index,
            backbone_id=self.backbone_id,
            source_dataset=self.source_dataset,
            patch_count=self.patch_count,
        )

    def select(self, indices: np.ndarray) -> "FeatureSet":
        """Row subset preserving metadata (and labels when present)."""
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureSet(
            features=self.features[idx],
            labels=None if self.labels is None else self.labels[idx],
            layer_index=self.layer_index,
            backbone_id=self.backbone_id,
            source_dataset=self.source_dataset,
            patch_count=self.patch_count,
        )

    def equals(self, other: "FeatureSet") -> bool:
        """Bit-exact comparison, labels and metadata included."""
        if self.features.shape != other.features.shape:
            return False
        if not np.array_equal(self.features, other.features):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is not None and not np.array_equal(self.labels, other.labels):
            return False
        return (
            self.layer_index == other.layer_index
            and self.backbone_id == other.backbone_id
            and self.source_dataset == other.source_dataset
            and self.patch_count == other.patch_count
        )


@dataclass(frozen=True)
class DatasetSplit:
    """Train/val/test triple sharing one extraction configuration."""

    train: FeatureSet
    val: FeatureSet
    test: FeatureSet

    def __post_init__(self) -> None:
        parts = {"train": self.train, "val": self.val, "test": self.test}
        dims = {name: fs.feature_dim for name, fs in parts.items()}
        if len(set(dims.values())) != 1:
            raise InvalidFeatureSetError(f"feature_dim differs across splits: {dims}")
        layers = {fs.layer_index for fs in parts.values()}
        if len(layers) != 1:
            raise InvalidFeatureSetError(f"layer_index differs across splits: {layers}")
        backbones = {fs.backbone_id for fs in parts.values()}
        if len(backbones) != 1:
            raise InvalidFeatureSetError(f"backbone_id differs across splits: {backbones}")
        if self.train.labels is not None:
            train_labels = set(np.unique(self.train.labels).tolist())
            for name in ("val", "test"):
                fs = parts[name]
                if fs.labels is None:
                    continue
                extra = set(np.unique(fs.labels).tolist()) - train_labels
                if extra:
                    raise InvalidFeatureSetError(
                        f"{name} contains labels absent from train: {sorted(extra)}"
                    )


def write_features(feature_set: FeatureSet, path: str | Path) -> None:
    """Write ``feature_set`` to ``path`` in the AROM1 container format.

    The set is validated before any bytes are written; a file is only
    created for data that will round-trip bit-exactly.
    """
    fs = feature_set
    label_count = 0 if fs.labels is None else fs.num_samples
    header = _HEADER_STRUCT.pack(
        MAGIC,
        VERSION,
        fs.num_samples,
        fs.feature_dim,
        fs.layer_index,
        fs.patch_count,
        _encode_padded(fs.backbone_id, 32, "backbone_id"),
        _encode_padded(fs.source_dataset, 32, "source_dataset"),
        label_count,
    )
    payload = np.ascontiguousarray(fs.features, dtype="<f4").tobytes()
    blob = header + payload
    if fs.labels is not None:
        blob += fs.labels.astype("<u2").tobytes()
    Path(path).write_bytes(blob)


def read_features(path: str | Path) -> FeatureSet:
    """Read an AROM1 file, validating magic, version, and declared sizes."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_SIZE:
        raise TruncatedPayloadError(
            f"{path}: file shorter than the {HEADER_SIZE}-byte header"
        )
    (
        magic,
        version,
        num_samples,
        feature_dim,
        layer_index,
        patch_count,
        backbone_raw,
        dataset_raw,
        label_count,
    ) = _HEADER_STRUCT.unpack_from(blob, 0)

    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionMismatchError(
            f"{path}: unsupported version {version}, expected {VERSION}"
        )
    if label_count not in (0, num_samples):
        raise TruncatedPayloadError(
            f"{path}: label_count {label_count} does not match "
            f"num_samples {num_samples}"
        )

    payload_bytes = num_samples * feature_dim * 4
    label_bytes = label_count * 2
    expected = HEADER_SIZE + payload_bytes + label_bytes
    if len(blob) != expected:
        raise TruncatedPayloadError(
            f"{path}: declared sizes need {expected} bytes, file has {len(blob)}"
        )

    features = np.frombuffer(
        blob, dtype="<f4", count=num_samples * feature_dim, offset=HEADER_SIZE
    ).reshape(num_samples, feature_dim)
    if not np.isfinite(features).all():
        raise NonFiniteDataError(f"{path}: payload contains NaN or infinite entries")

    labels = None
    if label_count:
        labels = np.frombuffer(
            blob, dtype="<u2", count=label_count, offset=HEADER_SIZE + payload_bytes
        ).astype(np.int64)

    return FeatureSet(
        features=features.copy(),
        labels=labels,
        layer_index=layer_index,
        backbone_id=backbone_raw.rstrip(b"\x00").decode("utf-8"),
        source_dataset=dataset_raw.rstrip(b"\x00").decode("utf-8"),
        patch_count=patch_count,
    )


def write_sidecar(path: str | Path, metadata: dict) -> Path:
    """Write the optional ``.meta.json`` sidecar next to a feature file."""
    sidecar = Path(path).with_suffix(".meta.json")
    sidecar.write_text(json.dumps(metadata, indent=2, sort_keys=True))
    return sidecar


def read_sidecar(path: str | Path) -> dict | None:
    """Return sidecar metadata for a feature file, or None if absent."""
    sidecar = Path(path).with_suffix(".meta.json")
    if not sidecar.exists():
        return None
    return json.loads(sidecar.read_text())


def subsample_indices_per_class(
    labels: np.ndarray, n_per_class: int, seed: int
) -> np.ndarray:
    """Seeded uniform without-replacement selection of row indices.

    Classes are visited in ascending label order using a single PCG64
    stream seeded with ``seed``; within each class the rows (in file
    order) are permuted and the first ``n_per_class`` kept. Classes
    smaller than ``n_per_class`` keep all rows. The result is sorted
    ascending so selected rows stay in original order.
    """
    if n_per_class < 1:
        raise InvalidFeatureSetError("n_per_class must be >= 1")
    labels = np.asarray(labels)
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen: list[np.ndarray] = []
    for value in np.unique(labels):
        rows = np.flatnonzero(labels == value)
        if rows.size <= n_per_class:
            chosen.append(rows)
        else:
            take = rng.permutation(rows.size)[:n_per_class]
            chosen.append(rows[take])
    return np.sort(np.concatenate(chosen))


def subsample_per_class(
    feature_set: FeatureSet, n_per_class: int, seed: int
) -> FeatureSet:
    """At most ``n_per_class`` rows per class, drawn deterministically."""
    if feature_set.labels is None:
        raise UnlabeledDataError("per-class subsampling needs a labeled feature set")
    idx = subsample_indices_per_class(feature_set.labels, n_per_class, seed)
    return feature_set.select(idx)


def sample_rows(num_rows: int, cap: int | None, seed: int) -> np.ndarray:
    """Seeded uniform row sample of size min(cap, num_rows), sorted ascending.

    With ``cap`` None (or >= num_rows) every row is kept in order.
    """
    if cap is None or cap >= num_rows:
        return np.arange(num_rows)
    if cap < 1:
        raise InvalidFeatureSetError("row cap must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return np.sort(rng.permutation(num_rows)[:cap])
