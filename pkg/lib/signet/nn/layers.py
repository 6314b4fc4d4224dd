"""
Dense layers, the softmax classifier and the cross-entropy loss.

>>> head = SoftmaxHead(3, 2, weights=np.zeros((2, 3)))
>>> softmax_predict(head, np.array([0.5, -1.0, 2.0])).tolist()
[0.5, 0.5]
>>> softmax(np.array([1000.0, 0.0])).tolist()
[1.0, 0.0]
>>> round(cross_entropy(np.array([[0.5, 0.5]]), np.array([1])), 4)
0.6931
"""

import numpy as np
import scipy.sparse

from signet.nn import ShapeError

ACTIVATIONS = ("tanh", "relu", "linear")

# Probabilities are clamped here before taking logs
PROBABILITY_FLOOR = 1e-12


def activate(name, a):
    if name == "tanh":
        return np.tanh(a)
    elif name == "relu":
        return np.maximum(a, 0.0)
    elif name == "linear":
        return a
    raise ValueError(f"Unknown activation '{name}'")


def activation_grad(name, a, y):
    """Derivative of the activation at pre-activation `a` with output `y`."""
    if name == "tanh":
        return 1.0 - y * y
    elif name == "relu":
        return (a > 0).astype(np.float64)
    elif name == "linear":
        return np.ones_like(a)
    raise ValueError(f"Unknown activation '{name}'")


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class DenseLayer:
    """
    `y = activation(W x + b)` with `W` of shape `(n_out, n_in)`; applied to
    a batch stored one row per example. The batch may be a scipy sparse matrix.
    """

    def __init__(self, n_in, n_out, activation="tanh", rng=None, weights=None, bias=None):
        if activation not in ACTIVATIONS:
            raise ValueError(f"Unknown activation '{activation}'")
        self.activation = activation
        if weights is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            weights = glorot_uniform(rng, (n_out, n_in), n_in, n_out)
        self.W = np.array(weights, dtype=np.float64)
        self.b = np.zeros(n_out) if bias is None else np.array(bias, dtype=np.float64)
        if self.W.shape != (n_out, n_in) or self.b.shape != (n_out,):
            raise ShapeError(f"Layer parameters do not match {n_in} -> {n_out}")

    @property
    def n_in(self):
        return self.W.shape[1]

    @property
    def n_out(self):
        return self.W.shape[0]

    def params(self):
        return {"W": self.W, "b": self.b}

    def forward(self, X):
        if X.shape[-1] != self.n_in:
            raise ShapeError(f"Layer expects {self.n_in} inputs, got {X.shape[-1]}")
        a = np.asarray(X @ self.W.T) + self.b
        y = activate(self.activation, a)
        return y, (X, a, y)

    def backward(self, dy, cache):
        X, a, y = cache
        da = dy * activation_grad(self.activation, a, y)
        if scipy.sparse.issparse(X):
            dW = np.asarray((X.T @ da).T)
        else:
            dW = da.T @ X
        return da @ self.W, {"W": dW, "b": da.sum(axis=0)}


class SoftmaxHead:
    """Class scores `u_c . z + b_c` turned into probabilities by softmax."""

    def __init__(self, n_in, n_classes=2, rng=None, weights=None, bias=None):
        if n_classes < 2:
            raise ValueError("A softmax head needs at least two classes")
        if weights is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            weights = glorot_uniform(rng, (n_classes, n_in), n_in, n_classes)
        self.U = np.array(weights, dtype=np.float64)
        self.c = np.zeros(n_classes) if bias is None else np.array(bias, dtype=np.float64)
        if self.U.shape != (n_classes, n_in) or self.c.shape != (n_classes,):
            raise ShapeError("Softmax head parameters have inconsistent shapes")

    @property
    def n_classes(self):
        return self.U.shape[0]

    @property
    def n_in(self):
        return self.U.shape[1]

    def params(self):
        return {"U": self.U, "c": self.c}

    def logits(self, Z):
        if Z.shape[-1] != self.n_in:
            raise ShapeError(f"Softmax head expects {self.n_in} inputs, got {Z.shape[-1]}")
        return Z @ self.U.T + self.c

    def backward(self, dlogits, Z):
        return dlogits @ self.U, {"U": dlogits.T @ Z, "c": dlogits.sum(axis=0)}


def softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_predict(head, z):
    """Class probabilities for one feature vector or a batch of them."""
    z = np.asarray(z, dtype=np.float64)
    return softmax(head.logits(z))


def cross_entropy(preds, labels):
    """Mean negative log-probability of the true classes."""
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.ndim != 2 or len(preds) != len(labels) or len(labels) == 0:
        raise ShapeError("Need one probability vector per label")
    picked = preds[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, PROBABILITY_FLOOR))))


def cross_entropy_grad(preds, labels):
    """Gradient of the mean cross-entropy with respect to the logits."""
    grad = preds.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    return grad / len(labels)
