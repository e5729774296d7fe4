import numpy as np
import pytest

from exemplar_leak.classifiers import (
    KnnClassifier,
    KnnSpec,
    LdaClassifier,
    LdaSpec,
    Normalizer,
    ShallowConvSpec,
    SvmClassifier,
    SvmSpec,
    fit,
    fit_normalizer,
    hinge_objective,
    predict,
    spec_from_dict,
    spec_to_dict,
)
from exemplar_leak.errors import ConfigError, ShapeMismatch, SingleClassInput


def naive_knn(train_x, train_y, test_x, k):
    """Loop-based reference: exact squared distances, index-order ties,
    smallest label on vote ties."""
    out = []
    for q in test_x:
        d2 = [float(np.sum((q - t) ** 2)) for t in train_x]
        order = sorted(range(len(train_x)), key=lambda i: (d2[i], i))[:k]
        votes = {}
        for i in order:
            votes[train_y[i]] = votes.get(train_y[i], 0) + 1
        best = max(votes.values())
        out.append(min(label for label, v in votes.items() if v == best))
    return np.array(out)


def naive_mahalanobis_nearest_mean(train_x, train_y, test_x):
    classes = np.unique(train_y)
    means = np.stack([train_x[train_y == c].mean(axis=0) for c in classes])
    centered = train_x - means[np.searchsorted(classes, train_y)]
    cov = centered.T @ centered / (len(train_x) - len(classes))
    inv = np.linalg.inv(cov)
    out = []
    for q in test_x:
        d = [float((q - m) @ inv @ (q - m)) for m in means]
        out.append(classes[int(np.argmin(d))])
    return np.array(out)


class TestKnn:
    def test_matches_naive_over_random_instances(self, rng):
        for _ in range(50):
            n = int(rng.integers(10, 200))
            d = int(rng.integers(2, 10))
            k = int(rng.integers(1, 8))
            n_classes = int(rng.integers(2, 5))
            train_x = rng.standard_normal((n, d))
            train_y = rng.integers(0, n_classes, n)
            test_x = rng.standard_normal((20, d))
            ours = KnnClassifier(k).fit(train_x, train_y).predict(test_x)
            assert np.array_equal(ours, naive_knn(train_x, train_y, test_x, k))

    def test_distance_tie_resolves_by_training_index(self):
        # two training points exactly equidistant from the query; with k=1
        # the earlier index (label 1) must win
        train_x = np.array([[1.0], [-1.0]])
        clf = KnnClassifier(1).fit(train_x, np.array([1, 0]))
        assert clf.predict(np.array([[0.0]]))[0] == 1

    def test_vote_tie_resolves_to_smallest_label(self):
        train_x = np.array([[0.9], [1.1], [-0.9], [-1.1]])
        train_y = np.array([2, 2, 1, 1])
        clf = KnnClassifier(4).fit(train_x, train_y)
        assert clf.predict(np.array([[0.0]]))[0] == 1

    def test_k_larger_than_train_set(self):
        train_x = np.array([[0.0], [1.0], [2.0]])
        clf = KnnClassifier(50).fit(train_x, np.array([0, 0, 1]))
        assert clf.predict(np.array([[5.0]]))[0] == 0

    def test_memorizes_training_set(self, rng):
        x = rng.standard_normal((30, 4))
        y = rng.integers(0, 3, 30)
        clf = KnnClassifier(1).fit(x, y)
        assert np.array_equal(clf.predict(x), y)


class TestLda:
    def test_zero_shrinkage_matches_mahalanobis_nearest_mean(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 5))
            n = int(rng.integers(d * 10, d * 20))
            train_x = rng.standard_normal((n, d))
            train_y = rng.integers(0, 3, n)
            test_x = rng.standard_normal((15, d))
            ours = LdaClassifier(0.0).fit(train_x, train_y).predict(test_x)
            ref = naive_mahalanobis_nearest_mean(train_x, train_y, test_x)
            assert np.array_equal(ours, ref)

    def test_invariant_to_invertible_linear_transform(self, rng):
        d = 4
        train_x = rng.standard_normal((80, d))
        train_y = rng.integers(0, 3, 80)
        test_x = rng.standard_normal((25, d))
        a = rng.standard_normal((d, d)) + 2.0 * np.eye(d)
        base = LdaClassifier(0.0).fit(train_x, train_y).predict(test_x)
        mapped = LdaClassifier(0.0).fit(train_x @ a, train_y).predict(test_x @ a)
        assert np.array_equal(base, mapped)

    def test_shrinkage_handles_singular_covariance(self, rng):
        # more features than trials: unshrunk covariance is singular
        train_x = rng.standard_normal((10, 40))
        train_y = np.arange(10) % 2
        clf = LdaClassifier(0.5).fit(train_x, train_y)
        preds = clf.predict(train_x)
        assert np.all(np.isfinite(clf.decision_function(train_x)))
        assert set(preds.tolist()) <= {0, 1}

    def test_separable_means(self, rng):
        x0 = rng.standard_normal((50, 3)) + np.array([5.0, 0, 0])
        x1 = rng.standard_normal((50, 3)) - np.array([5.0, 0, 0])
        x = np.vstack([x0, x1])
        y = np.array([0] * 50 + [1] * 50)
        clf = LdaClassifier(0.1).fit(x, y)
        assert np.array_equal(clf.predict(x), y)


class TestSvm:
    def test_training_beats_zero_weights_on_objective(self, rng):
        for seed in range(5):
            local = np.random.default_rng(seed)
            x = np.vstack([local.standard_normal((40, 6)) + 2.0,
                           local.standard_normal((40, 6)) - 2.0])
            y = np.array([0] * 40 + [1] * 40)
            clf = SvmClassifier(lam=1e-2, epochs=20, batch_size=16,
                                seed=seed).fit(x, y)
            xb = np.hstack([x, np.ones((len(x), 1))])
            targets = np.where(y[:, None] == np.arange(2)[None, :], 1.0, -1.0)
            trained = hinge_objective(clf.weights, xb, targets, 1e-2)
            at_zero = hinge_objective(np.zeros_like(clf.weights), xb,
                                      targets, 1e-2)
            assert trained < at_zero

    def test_separable_accuracy(self, rng):
        x = np.vstack([rng.standard_normal((60, 4)) + 3.0,
                       rng.standard_normal((60, 4)) - 3.0])
        y = np.array([0] * 60 + [1] * 60)
        clf = SvmClassifier(lam=1e-3, epochs=30, batch_size=32, seed=0).fit(x, y)
        assert np.mean(clf.predict(x) == y) >= 0.99

    def test_deterministic_for_fixed_seed(self, rng):
        x = rng.standard_normal((50, 5))
        y = rng.integers(0, 3, 50)
        a = SvmClassifier(1e-3, 5, 16, seed=3).fit(x, y)
        b = SvmClassifier(1e-3, 5, 16, seed=3).fit(x, y)
        assert np.array_equal(a.weights, b.weights)


class TestNormalizer:
    def test_standardizes_training_features(self, rng):
        x = rng.standard_normal((100, 7)) * 5.0 + 3.0
        norm = Normalizer().fit(x)
        z = norm.transform(x)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-9)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-6)

    def test_constant_feature_maps_to_zero(self):
        x = np.array([[1.0, 2.0], [1.0, 4.0], [1.0, 6.0]])
        z = Normalizer().fit(x).transform(x)
        assert np.all(z[:, 0] == 0.0)

    def test_recovers_known_standardization(self, rng):
        base = rng.standard_normal((200, 3))
        scaled = base * np.array([2.0, 0.5, 10.0]) + np.array([1.0, -4.0, 0.0])
        z = Normalizer().fit(scaled).transform(scaled)
        expected = (base - base.mean(axis=0)) / base.std(axis=0)
        np.testing.assert_allclose(z, expected, atol=1e-6)

    def test_transform_before_fit_raises(self):
        with pytest.raises(ShapeMismatch):
            Normalizer().transform(np.zeros((2, 2)))

    def test_dim_mismatch(self, rng):
        norm = Normalizer().fit(rng.standard_normal((5, 4)))
        with pytest.raises(ShapeMismatch):
            norm.transform(rng.standard_normal((5, 3)))

    def test_fit_normalizer_on_trials(self, rng):
        data = rng.standard_normal((10, 3, 4))
        norm = fit_normalizer(data)
        assert norm.mean.shape == (12,)


class TestFitPredict:
    @pytest.mark.parametrize("spec", [
        KnnSpec(k=3), LdaSpec(), SvmSpec(epochs=5),
        ShallowConvSpec(epochs=3, n_temporal_filters=2, n_spatial_filters=2),
    ])
    def test_sparse_labels_round_trip(self, spec, rng):
        # non-dense labels {3, 17} must come back unchanged
        data = np.vstack([rng.standard_normal((20, 2, 8)) + 1.5,
                          rng.standard_normal((20, 2, 8)) - 1.5])
        labels = np.array([3] * 20 + [17] * 20)
        norm = fit_normalizer(data)
        model = fit(spec, data, labels, norm)
        preds = predict(model, data, norm)
        assert set(preds.tolist()) <= {3, 17}
        if spec.kind in ("knn", "lda"):
            assert np.mean(preds == labels) >= 0.9

    def test_single_class_rejected(self, rng):
        data = rng.standard_normal((6, 2, 4))
        norm = fit_normalizer(data)
        with pytest.raises(SingleClassInput):
            fit(KnnSpec(), data, np.zeros(6, dtype=int), norm)

    def test_predict_shape_mismatch(self, rng):
        data = rng.standard_normal((10, 2, 4))
        labels = np.arange(10) % 2
        norm = fit_normalizer(data)
        model = fit(KnnSpec(), data, labels, norm)
        with pytest.raises(ShapeMismatch):
            predict(model, rng.standard_normal((3, 2, 5)), norm)

    def test_label_length_mismatch(self, rng):
        data = rng.standard_normal((10, 2, 4))
        with pytest.raises(ShapeMismatch):
            fit(KnnSpec(), data, np.arange(9) % 2, fit_normalizer(data))


class TestSpecSerialization:
    @pytest.mark.parametrize("spec", [
        KnnSpec(k=7), LdaSpec(shrinkage=0.25),
        SvmSpec(lam=1e-3, epochs=4, batch_size=8, seed=9),
        ShallowConvSpec(n_temporal_filters=4, temporal_kernel_len=3,
                        pool_len=2, epochs=2),
    ])
    def test_round_trip(self, spec):
        assert spec_from_dict(spec_to_dict(spec)) == spec

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            spec_from_dict({"kind": "forest"})

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            spec_from_dict({"kind": "knn", "neighbors": 3})

    @pytest.mark.parametrize("doc", [
        {"kind": "knn", "k": 0},
        {"kind": "lda", "shrinkage": 1.5},
        {"kind": "svm", "lam": 0.0},
        {"kind": "shallowconv", "learning_rate": -1.0},
    ])
    def test_invalid_values(self, doc):
        with pytest.raises(ConfigError):
            spec_from_dict(doc)
