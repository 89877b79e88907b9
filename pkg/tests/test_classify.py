import numpy as np
import pytest

from hetda.classify import accuracy, predict, train
from hetda.data import UNLABELED


class TestOneNn:
    def test_recovers_training_labels(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(4, 12))
        y = rng.integers(1, 4, size=12)
        model = train("one_nn", z, y)
        np.testing.assert_array_equal(predict(model, z), y)

    def test_simple_1d(self):
        z = np.array([[0.0, 10.0]])
        model = train("one_nn", z, np.array([1, 2]))
        np.testing.assert_array_equal(
            predict(model, np.array([[1.0, 9.0, 4.9]])), [1, 2, 1])
        np.testing.assert_array_equal(
            predict(model, np.array([[5.1]])), [2])

    def test_exact_tie_prefers_lower_class(self):
        # query equidistant from a class-2 and a class-1 point
        z = np.array([[-1.0, 1.0]])
        model = train("one_nn", z, np.array([2, 1]))
        np.testing.assert_array_equal(predict(model, np.array([[0.0]])), [1])

    def test_order_invariance(self):
        rng = np.random.default_rng(3)
        z = rng.normal(size=(3, 20))
        y = rng.integers(1, 5, size=20)
        q = rng.normal(size=(3, 30))
        perm = rng.permutation(20)
        a = predict(train("one_nn", z, y), q)
        b = predict(train("one_nn", z[:, perm], y[perm]), q)
        np.testing.assert_array_equal(a, b)


class TestNearestCentroid:
    def test_centroids_from_means(self):
        z = np.array([[0.0, 2.0, 10.0, 14.0]])
        y = np.array([1, 1, 2, 2])
        model = train("nearest_centroid", z, y)
        np.testing.assert_allclose(np.sort(model.points[0]), [1.0, 12.0])
        np.testing.assert_array_equal(
            predict(model, np.array([[6.0, 7.0]])), [1, 2])

    def test_single_class(self):
        z = np.array([[1.0, 2.0]])
        model = train("nearest_centroid", z, np.array([3, 3]))
        np.testing.assert_array_equal(
            predict(model, np.array([[-50.0, 50.0]])), [3, 3])


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            train("svm", np.ones((2, 2)), np.array([1, 2]))

    def test_unlabeled_training_sample(self):
        with pytest.raises(ValueError):
            train("one_nn", np.ones((2, 2)), np.array([1, UNLABELED]))

    def test_empty_training_set(self):
        with pytest.raises(ValueError):
            train("one_nn", np.ones((2, 0)), np.array([], dtype=int))

    def test_query_dim_mismatch(self):
        model = train("one_nn", np.ones((2, 2)), np.array([1, 2]))
        with pytest.raises(ValueError):
            predict(model, np.ones((3, 1)))


class TestAccuracy:
    def test_values(self):
        assert accuracy(np.array([1, 2, 3]), np.array([1, 2, 3])) == 1.0
        assert accuracy(np.array([1, 2, 3]), np.array([1, 2, 4])) \
            == pytest.approx(2.0 / 3.0)
        assert accuracy(np.array([5]), np.array([6])) == 0.0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            accuracy(np.array([1]), np.array([1, 2]))
        with pytest.raises(ValueError):
            accuracy(np.array([1]), np.array([UNLABELED]))
        with pytest.raises(ValueError):
            accuracy(np.array([], dtype=int), np.array([], dtype=int))
