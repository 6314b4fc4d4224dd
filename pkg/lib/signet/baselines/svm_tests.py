"""
Tests for `signet.baselines.svm`.
"""

import math
import warnings

import numpy as np
import pytest
import scipy.sparse

from signet.baselines.svm import (
    ConvergenceWarning,
    rbf_kernel,
    SingleClassError,
    svm_predict,
    svm_train,
    SvmModel,
)


def blob_pair(seed, n=50, d=2, offset=2.0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(scale=0.5, size=(n, d)) + np.where(y[:, np.newaxis] == 1, offset, -offset)
    return X, y


def test_two_far_points():
    X = np.array([[0.0, 0.0], [10.0, 0.0]])
    model = svm_train(X, np.array([0, 1]), gamma=1.0)
    assert model.n_support == 2
    assert svm_predict(model, np.array([1.0, 0.5])) == 0
    assert svm_predict(model, np.array([9.0, -0.5])) == 1


def test_xor():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    model = svm_train(X, y, C=10.0, gamma=2.0)
    assert model.converged
    assert model.predict(X).tolist() == y.tolist()
    assert (np.sign(model.decision_function(X)) == np.where(y == 1, 1, -1)).all()


@pytest.mark.parametrize("seed", range(5))
def test_separable_blobs(seed):
    X, y = blob_pair(seed)
    model = svm_train(X, y)
    assert model.converged
    assert (model.predict(X) == y).all()
    assert ((model.alpha > 0) & (model.alpha < model.C)).sum() >= 1


@pytest.mark.parametrize("seed", range(10))
def test_kkt_conditions(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=60) > 0).astype(int)
    tol = 1e-3
    model = svm_train(X, y, C=1.0, tol=tol)
    assert model.converged
    assert (model.alpha >= 0).all() and (model.alpha <= model.C).all()
    assert abs(np.dot(model.alpha, model.signs)) <= 1e-9
    margins = model.margins()
    slack = tol + 1e-9
    at_zero = model.alpha == 0
    at_c = model.alpha == model.C
    free = ~at_zero & ~at_c
    assert (margins[at_zero] >= 1 - slack).all()
    assert (margins[at_c] <= 1 + slack).all()
    assert (np.abs(margins[free] - 1) <= slack).all()


def test_scaling_inputs_and_gamma_together():
    X, y = blob_pair(7, offset=0.5)
    queries = np.random.default_rng(8).normal(size=(40, 2))
    a = svm_train(X, y, gamma=0.8)
    b = svm_train(2.0 * X, y, gamma=0.8 / 4)
    assert (a.predict(queries) == b.predict(2.0 * queries)).all()


def test_zero_decision_is_class_zero():
    points = np.array([[-1.0], [1.0]])
    model = SvmModel(points, np.array([-1.0, 1.0]), np.array([1.0, 1.0]), 0.0, 1.0, 1.0)
    assert model.decision_function(np.array([[0.0]])).tolist() == [0.0]
    assert svm_predict(model, np.array([0.0])) == 0


def test_batch_matches_kernel_sum_loop():
    X, y = blob_pair(3, offset=0.7)
    model = svm_train(X, y)
    queries = np.random.default_rng(4).normal(size=(30, 2))
    for q, f in zip(queries.tolist(), model.decision_function(queries).tolist()):
        expected = model.bias
        for p, s, a in zip(model.points.tolist(), model.signs.tolist(), model.alpha.tolist()):
            if a > 0:
                expected += a * s * math.exp(-model.gamma * math.dist(p, q) ** 2)
        assert abs(f - expected) <= 1e-12


def test_rbf_kernel():
    K = rbf_kernel(np.array([[0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 1.0]]), 0.5)
    assert K.tolist() == [[1.0, math.exp(-1.0)]]


def test_default_gamma_is_inverse_dimension():
    X, y = blob_pair(0, n=10, d=4)
    assert svm_train(X, y).gamma == 0.25


def test_budget_exhaustion_warns():
    X, y = blob_pair(1, offset=0.2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = svm_train(X, y, max_iter=2)
    assert not model.converged
    assert model.iterations == 2
    assert any(issubclass(w.category, ConvergenceWarning) for w in caught)


def test_single_class():
    with pytest.raises(SingleClassError):
        svm_train(np.zeros((3, 2)), np.array([1, 1, 1]))


@pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"C": -1.0}])
def test_bad_parameters(kwargs):
    X, y = blob_pair(0, n=6)
    with pytest.raises(ValueError):
        svm_train(X, y, **kwargs)


def test_sparse_rows_match_dense():
    rng = np.random.default_rng(12)
    y = np.arange(40) % 2
    X = rng.choice([0.0, 0.0, 1.0], size=(40, 12))
    X[:, :3] += y[:, np.newaxis]
    queries = rng.choice([0.0, 0.0, 1.0], size=(10, 12))
    dense = svm_train(X, y, C=10.0)
    sparse = svm_train(scipy.sparse.csr_matrix(X), y, C=10.0)
    assert np.allclose(rbf_kernel(scipy.sparse.csr_matrix(X), queries, 0.3), rbf_kernel(X, queries, 0.3), atol=1e-12)
    assert sparse.iterations == dense.iterations
    assert np.allclose(sparse.alpha, dense.alpha, atol=1e-9)
    assert np.allclose(
        sparse.decision_function(scipy.sparse.csr_matrix(queries)), dense.decision_function(queries), atol=1e-9
    )
