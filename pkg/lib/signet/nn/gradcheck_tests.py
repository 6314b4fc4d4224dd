"""
Tests for `signet.nn.gradcheck`.
"""

import numpy as np
import pytest

from signet.nn import NonFiniteGradientError
from signet.nn.gradcheck import grad_check
from signet.nn.layers import (
    cross_entropy,
    cross_entropy_grad,
    DenseLayer,
    softmax,
    SoftmaxHead,
)


class LinearRegression:
    def __init__(self, n_in, n_out, seed=0):
        self.layer = DenseLayer(n_in, n_out, "linear", rng=np.random.default_rng(seed))

    def params(self):
        return self.layer.params()

    def loss(self, X, T):
        Y, _ = self.layer.forward(X)
        return float(np.sum((Y - T) ** 2) / len(X))

    def loss_and_grads(self, X, T):
        Y, cache = self.layer.forward(X)
        _, grads = self.layer.backward(2.0 * (Y - T) / len(X), cache)
        return float(np.sum((Y - T) ** 2) / len(X)), grads


class TwoLayerNet:
    def __init__(self, n_in, n_hidden, activation, seed=0):
        rng = np.random.default_rng(seed)
        self.hidden = DenseLayer(n_in, n_hidden, activation, rng)
        self.head = SoftmaxHead(n_hidden, 2, rng)

    def params(self):
        params = {"hidden." + name: p for name, p in self.hidden.params().items()}
        params.update({"head." + name: p for name, p in self.head.params().items()})
        return params

    def loss(self, X, y):
        H, _ = self.hidden.forward(X)
        return cross_entropy(softmax(self.head.logits(H)), y)

    def loss_and_grads(self, X, y):
        H, cache = self.hidden.forward(X)
        P = softmax(self.head.logits(H))
        dH, grads = self.head.backward(cross_entropy_grad(P, y), H)
        _, hidden_grads = self.hidden.backward(dH, cache)
        grads = {"head." + name: g for name, g in grads.items()}
        grads.update({"hidden." + name: g for name, g in hidden_grads.items()})
        return cross_entropy(P, y), grads


class NanGradient(LinearRegression):
    def loss_and_grads(self, X, T):
        loss, grads = LinearRegression.loss_and_grads(self, X, T)
        grads["W"] = grads["W"] * np.nan
        return loss, grads


def test_linear_squared_loss_is_exact():
    rng = np.random.default_rng(0)
    X, T = rng.normal(size=(8, 3)), rng.normal(size=(8, 2))
    assert grad_check(LinearRegression(3, 2), X, T) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_two_layer_tanh(seed):
    rng = np.random.default_rng(seed)
    X, y = rng.normal(size=(6, 4)), rng.integers(0, 2, size=6)
    assert grad_check(TwoLayerNet(4, 5, "tanh", seed), X, y, eps=1e-5) <= 1e-4


def test_relu_away_from_kinks():
    rng = np.random.default_rng(7)
    net = TwoLayerNet(4, 5, "relu", seed=7)
    # resample the input until no pre-activation sits near the kink at zero
    while True:
        X = rng.normal(size=(6, 4))
        _, (_, a, _) = net.hidden.forward(X)
        if np.abs(a).min() > 1e-3:
            break
    assert grad_check(net, X, rng.integers(0, 2, size=6)) <= 1e-4


def test_parameters_are_left_unchanged():
    rng = np.random.default_rng(1)
    model = TwoLayerNet(3, 4, "tanh", seed=1)
    before = {name: p.copy() for name, p in model.params().items()}
    grad_check(model, rng.normal(size=(5, 3)), np.array([0, 1, 1, 0, 1]), sample=4)
    for name, p in model.params().items():
        assert (p == before[name]).all()


def test_wrong_gradient_is_detected():
    class Halved(LinearRegression):
        def loss_and_grads(self, X, T):
            loss, grads = LinearRegression.loss_and_grads(self, X, T)
            return loss, {name: g / 2 for name, g in grads.items()}

    rng = np.random.default_rng(2)
    assert grad_check(Halved(3, 2), rng.normal(size=(4, 3)), rng.normal(size=(4, 2))) >= 0.4


def test_non_finite_gradient():
    rng = np.random.default_rng(3)
    with pytest.raises(NonFiniteGradientError):
        grad_check(NanGradient(2, 2), rng.normal(size=(3, 2)), rng.normal(size=(3, 2)))
