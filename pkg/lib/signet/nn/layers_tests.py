"""
Tests for `signet.nn.layers` and `signet.nn.optim`.
"""

import math

import numpy as np
import pytest
import scipy.sparse

from signet.nn import ShapeError
from signet.nn.layers import (
    activate,
    activation_grad,
    cross_entropy,
    cross_entropy_grad,
    DenseLayer,
    glorot_uniform,
    PROBABILITY_FLOOR,
    softmax,
    softmax_predict,
    SoftmaxHead,
)
from signet.nn.optim import (
    Adam,
    make_optimizer,
    Sgd,
)


def test_dense_forward():
    layer = DenseLayer(2, 2, "linear", weights=[[1.0, 2.0], [0.0, -1.0]], bias=[0.5, 0.0])
    y, _ = layer.forward(np.array([[1.0, 1.0], [2.0, 0.0]]))
    assert y.tolist() == [[3.5, -1.0], [2.5, 0.0]]


def test_dense_sparse_batch_matches_dense():
    rng = np.random.default_rng(5)
    X = rng.choice([-1.0, 0.0, 0.0, 1.0], size=(7, 9))
    layer = DenseLayer(9, 4, "tanh", rng)
    y, cache = layer.forward(X)
    y_sparse, sparse_cache = layer.forward(scipy.sparse.csr_matrix(X))
    assert type(y_sparse) is np.ndarray
    assert np.allclose(y_sparse, y)
    dy = rng.normal(size=y.shape)
    dx, grads = layer.backward(dy, cache)
    dx_sparse, sparse_grads = layer.backward(dy, sparse_cache)
    assert np.allclose(dx_sparse, dx)
    assert type(sparse_grads["W"]) is np.ndarray
    assert np.allclose(sparse_grads["W"], grads["W"])
    assert np.allclose(sparse_grads["b"], grads["b"])


def test_dense_shapes():
    with pytest.raises(ShapeError):
        DenseLayer(3, 2, weights=np.zeros((3, 2)))
    layer = DenseLayer(3, 2, rng=np.random.default_rng(0))
    with pytest.raises(ShapeError):
        layer.forward(np.zeros((4, 2)))
    with pytest.raises(ValueError):
        DenseLayer(3, 2, activation="sigmoid")


@pytest.mark.parametrize("name", ["tanh", "relu", "linear"])
def test_activation_grad_matches_difference(name):
    a = np.array([-1.3, -0.2, 0.4, 2.0])
    eps = 1e-6
    numeric = (activate(name, a + eps) - activate(name, a - eps)) / (2 * eps)
    assert np.allclose(activation_grad(name, a, activate(name, a)), numeric, atol=1e-8)


def test_glorot_limits_and_seeding():
    W = glorot_uniform(np.random.default_rng(3), (50, 40), 40, 50)
    limit = math.sqrt(6.0 / 90)
    assert np.abs(W).max() <= limit
    assert (W == glorot_uniform(np.random.default_rng(3), (50, 40), 40, 50)).all()


@pytest.mark.parametrize("seed", range(5))
def test_softmax_is_a_probability_vector(seed):
    logits = np.random.default_rng(seed).normal(scale=50, size=(10, 3))
    P = softmax(logits)
    assert (P >= 0).all()
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-12
    assert (softmax(logits + 123.0).argmax(axis=1) == P.argmax(axis=1)).all()


def test_softmax_predict_single_and_batch():
    head = SoftmaxHead(2, 3, rng=np.random.default_rng(1))
    z = np.array([[0.3, -0.2], [1.0, 2.0]])
    batch = softmax_predict(head, z)
    assert batch.shape == (2, 3)
    assert np.allclose(softmax_predict(head, z[1]), batch[1])
    with pytest.raises(ShapeError):
        softmax_predict(head, np.zeros(3))
    with pytest.raises(ValueError):
        SoftmaxHead(2, 1)


def test_cross_entropy_values():
    assert cross_entropy(np.array([[0.0, 1.0]]), np.array([1])) == 0.0
    assert cross_entropy(np.array([[0.5, 0.5]]), np.array([0])) == pytest.approx(math.log(2), abs=1e-12)
    assert cross_entropy(np.array([[1.0, 0.0]]), np.array([1])) == pytest.approx(-math.log(PROBABILITY_FLOOR))


def test_cross_entropy_matches_scalar_loop():
    rng = np.random.default_rng(9)
    P = softmax(rng.normal(size=(25, 4)))
    y = rng.integers(0, 4, size=25)
    expected = 0.0
    for i in range(25):
        expected -= math.log(P[i, y[i]])
    assert abs(cross_entropy(P, y) - expected / 25) <= 1e-12


def test_cross_entropy_shape_errors():
    with pytest.raises(ShapeError):
        cross_entropy(np.array([[0.5, 0.5]]), np.array([0, 1]))
    with pytest.raises(ShapeError):
        cross_entropy(np.zeros((0, 2)), np.array([], dtype=int))


def test_cross_entropy_grad():
    P = np.array([[0.25, 0.75], [0.5, 0.5]])
    assert cross_entropy_grad(P, np.array([1, 0])).tolist() == [[0.125, -0.125], [-0.25, 0.25]]


def test_sgd_step():
    p = {"w": np.array([1.0, -1.0])}
    Sgd(0.5).step(p, {"w": np.array([2.0, -4.0])})
    assert p["w"].tolist() == [0.0, 1.0]


def test_adam_first_step_moves_by_learning_rate():
    p = {"w": np.array([1.0, -1.0, 0.5])}
    Adam(0.01).step(p, {"w": np.array([3.0, -0.2, 0.0])})
    assert np.allclose(p["w"], [0.99, -0.99, 0.5], atol=1e-9)


def test_make_optimizer():
    assert isinstance(make_optimizer("sgd", 0.1), Sgd)
    assert isinstance(make_optimizer("adam", 0.1), Adam)
    with pytest.raises(ValueError):
        make_optimizer("rmsprop", 0.1)
