import numpy as np
import pytest

from arom.feature_store import FeatureSet, write_features


def gaussian_blob_set(
    seed,
    n_per_class=100,
    num_classes=3,
    dim=16,
    separation=10.0,
    sigma=1.0,
    layer_index=0,
    source_dataset="blobs",
):
    """Isotropic Gaussian classes with pairwise mean separation >= ``separation``.

    Class 0 sits at the origin, class c at separation * e_{c-1}, so the
    closest pair is exactly ``separation`` apart (in sigma units when
    sigma=1).
    """
    rng = np.random.default_rng(seed)
    means = np.zeros((num_classes, dim))
    for c in range(1, num_classes):
        means[c, c - 1] = separation
    rows, labels = [], []
    for c in range(num_classes):
        rows.append(means[c] + sigma * rng.standard_normal((n_per_class, dim)))
        labels.extend([c] * n_per_class)
    return FeatureSet(
        features=np.vstack(rows).astype(np.float32),
        labels=np.array(labels),
        layer_index=layer_index,
        backbone_id="synthetic",
        source_dataset=source_dataset,
    )


@pytest.fixture
def blob_files(tmp_path):
    """Write train/val/test blob feature files; returns their paths."""
    paths = {}
    for split, seed, n in (("train", 1, 100), ("val", 2, 40), ("test", 3, 40)):
        fs = gaussian_blob_set(seed, n_per_class=n)
        path = tmp_path / f"blobs_{split}_L0.arom"
        write_features(fs, path)
        paths[split] = path
    return paths
