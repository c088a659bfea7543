import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from arom.errors import (
    BadMagicError,
    InvalidFeatureSetError,
    NonFiniteDataError,
    TruncatedPayloadError,
    UnlabeledDataError,
    VersionMismatchError,
)
from arom.feature_store import (
    HEADER_SIZE,
    DatasetSplit,
    FeatureSet,
    read_features,
    sample_rows,
    subsample_indices_per_class,
    subsample_per_class,
    write_features,
    write_sidecar,
    read_sidecar,
)


def make_set(features, labels=None, **kwargs):
    return FeatureSet(
        features=np.asarray(features, dtype=np.float32),
        labels=None if labels is None else np.asarray(labels),
        **kwargs,
    )


class TestRoundTrip:
    def test_labeled_roundtrip_and_layout(self, tmp_path):
        fs = make_set(
            [[1, 2, 3], [4, 5, 6]],
            labels=[0, 1],
            layer_index=5,
            backbone_id="backbone-x",
            source_dataset="toy",
            patch_count=256,
        )
        path = tmp_path / "toy.arom"
        write_features(fs, path)
        blob = path.read_bytes()
        # header + 2*3 float32 payload + 2 u16 labels
        assert len(blob) == HEADER_SIZE + 24 + 4
        assert blob[:4] == b"AROM"
        assert int.from_bytes(blob[4:6], "little") == 1
        assert int.from_bytes(blob[6:10], "little") == 2
        assert int.from_bytes(blob[10:14], "little") == 3
        back = read_features(path)
        assert back.equals(fs)

    def test_unlabeled_has_zero_label_count(self, tmp_path):
        fs = make_set([[0.5, 1.5]])
        path = tmp_path / "u.arom"
        write_features(fs, path)
        blob = path.read_bytes()
        assert int.from_bytes(blob[82:86], "little") == 0
        back = read_features(path)
        assert back.labels is None

    def test_metadata_preserved(self, tmp_path):
        fs = make_set(np.zeros((1, 1024)), layer_index=13, patch_count=256)
        path = tmp_path / "meta.arom"
        write_features(fs, path)
        back = read_features(path)
        assert back.layer_index == 13
        assert back.patch_count == 256
        assert back.feature_dim == 1024

    @settings(max_examples=40, deadline=None)
    @given(
        features=arrays(
            dtype=np.float32,
            shape=st.tuples(st.integers(1, 8), st.integers(1, 6)),
            elements=st.floats(
                min_value=-1e6, max_value=1e6, allow_nan=False, width=32
            ),
        ),
        labeled=st.booleans(),
        layer=st.integers(0, 24),
    )
    def test_roundtrip_property(self, tmp_path_factory, features, labeled, layer):
        labels = (
            np.arange(features.shape[0]) % 7 if labeled else None
        )
        fs = make_set(features, labels=labels, layer_index=layer, backbone_id="bb")
        path = tmp_path_factory.mktemp("rt") / "x.arom"
        write_features(fs, path)
        assert read_features(path).equals(fs)


class TestReadErrors:
    def _write_valid(self, tmp_path):
        fs = make_set([[1, 2], [3, 4]], labels=[0, 1])
        path = tmp_path / "v.arom"
        write_features(fs, path)
        return path

    def test_bad_magic(self, tmp_path):
        path = self._write_valid(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(BadMagicError):
            read_features(path)

    def test_version_mismatch(self, tmp_path):
        path = self._write_valid(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[4:6] = (99).to_bytes(2, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionMismatchError):
            read_features(path)

    def test_truncated_payload(self, tmp_path):
        path = self._write_valid(tmp_path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-3])
        with pytest.raises(TruncatedPayloadError):
            read_features(path)

    def test_declared_samples_exceed_payload(self, tmp_path):
        path = self._write_valid(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[6:10] = (1000).to_bytes(4, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(TruncatedPayloadError):
            read_features(path)

    def test_nan_payload(self, tmp_path):
        path = self._write_valid(tmp_path)
        blob = bytearray(path.read_bytes())
        nan = np.array([np.nan], dtype="<f4").tobytes()
        blob[HEADER_SIZE : HEADER_SIZE + 4] = nan
        path.write_bytes(bytes(blob))
        with pytest.raises(NonFiniteDataError):
            read_features(path)

    def test_header_too_short(self, tmp_path):
        path = tmp_path / "short.arom"
        path.write_bytes(b"AROM\x01\x00")
        with pytest.raises(TruncatedPayloadError):
            read_features(path)


class TestInvariants:
    def test_nan_rejected_on_construction(self):
        with pytest.raises(NonFiniteDataError):
            make_set([[np.nan, 1.0]])

    def test_label_length_mismatch(self):
        with pytest.raises(InvalidFeatureSetError):
            make_set([[1, 2], [3, 4]], labels=[0])

    def test_backbone_id_too_long(self, tmp_path):
        fs = make_set([[1.0]], backbone_id="x" * 40)
        with pytest.raises(InvalidFeatureSetError):
            write_features(fs, tmp_path / "b.arom")

    def test_split_checks_dims(self):
        a = make_set([[1, 2]], labels=[0])
        b = make_set([[1, 2, 3]], labels=[0])
        with pytest.raises(InvalidFeatureSetError):
            DatasetSplit(train=a, val=b, test=a)

    def test_split_checks_label_subset(self):
        train = make_set([[1, 2], [3, 4]], labels=[0, 0])
        val = make_set([[1, 2]], labels=[1])
        with pytest.raises(InvalidFeatureSetError):
            DatasetSplit(train=train, val=val, test=train)


class TestSubsample:
    def _ten_two_class(self):
        return make_set(
            np.arange(20, dtype=np.float32).reshape(10, 2),
            labels=[0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
        )

    def test_deterministic_and_exact(self):
        fs = self._ten_two_class()
        first = subsample_per_class(fs, 5, seed=7)
        second = subsample_per_class(fs, 5, seed=7)
        assert first.equals(second)
        assert first.num_samples == 10  # 5 per class, both classes size 5

    def test_undersized_class_kept_whole(self):
        fs = make_set(
            np.arange(10, dtype=np.float32).reshape(5, 2), labels=[0, 0, 0, 1, 1]
        )
        out = subsample_per_class(fs, 8, seed=1)
        assert out.num_samples == 5

    def test_benchmark_cap_exact(self):
        n = 100_000
        fs = make_set(np.zeros((n, 1), dtype=np.float32), labels=np.zeros(n))
        out = subsample_per_class(fs, 5000, seed=3)
        assert out.num_samples == 5000

    def test_distinct_seeds_differ(self):
        labels = np.repeat([0, 1], 50)
        selections = {
            tuple(subsample_indices_per_class(labels, 10, seed=s)) for s in range(5)
        }
        assert len(selections) >= 2

    def test_unlabeled_rejected(self):
        fs = make_set([[1, 2], [3, 4]])
        with pytest.raises(UnlabeledDataError):
            subsample_per_class(fs, 1, seed=0)

    def test_sample_rows_cap(self):
        idx = sample_rows(100, 10, seed=0)
        assert len(idx) == 10
        assert np.array_equal(idx, np.sort(idx))
        assert np.array_equal(sample_rows(5, None, seed=0), np.arange(5))


class TestSidecar:
    def test_sidecar_roundtrip(self, tmp_path):
        path = tmp_path / "f.arom"
        write_features(make_set([[1.0]]), path)
        meta = {"class_names": ["a", "b"], "provenance": "unit-test"}
        write_sidecar(path, meta)
        assert read_sidecar(path) == meta

    def test_sidecar_absent(self, tmp_path):
        path = tmp_path / "g.arom"
        write_features(make_set([[1.0]]), path)
        assert read_sidecar(path) is None
