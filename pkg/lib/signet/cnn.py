"""
Convolutional classifier over the stacked spectral-coordinate matrix.

A filter of width `m` is an `m x k` matrix `W` and a bias `b` shared across
window positions. It slides with stride 1 and no padding over the rows of an
`R x k` input `X`, giving `h_j = relu(<W, X[j:j+m]> + b)` for
`j = 0..R-m`, and average pooling reduces `h` to one scalar. A bank holds
the same number of filters for every configured width; the pooled scalars,
ordered by width and then by filter, form `z`, which feeds a softmax head.

>>> X = np.arange(6.0).reshape(3, 2)
>>> f = Filter(np.ones((2, 2)), -1.0)
>>> convolve(f, X).tolist()
[5.0, 13.0]
>>> average_pool(convolve(f, X))
9.0
"""

import logging
from typing import NamedTuple

import numpy as np
import scipy.sparse

from signet.nn import ShapeError
from signet.nn.layers import (
    activate,
    activation_grad,
    cross_entropy,
    cross_entropy_grad,
    glorot_uniform,
    softmax,
    SoftmaxHead,
)
from signet.nn.train import (
    TrainConfig,
    train_epochs,
)

log = logging.getLogger(__name__)


class Filter(NamedTuple):
    W: np.ndarray
    b: float
    activation: str = "relu"

    @property
    def width(self):
        return self.W.shape[0]


def convolve(filt, X):
    """Feature vector of one filter slid over the rows of `X`."""
    X = np.asarray(X, dtype=np.float64)
    m = filt.width
    if m > X.shape[0]:
        raise ShapeError(f"Filter width {m} exceeds the {X.shape[0]} input rows")
    if filt.W.shape[1] != X.shape[1]:
        raise ShapeError(f"Filter has {filt.W.shape[1]} columns, input has {X.shape[1]}")
    pre = np.array([np.sum(filt.W * X[j : j + m]) + filt.b for j in range(X.shape[0] - m + 1)])
    return activate(filt.activation, pre)


def average_pool(h):
    if len(h) == 0:
        raise ValueError("Cannot pool an empty feature vector")
    return float(np.mean(h))


def _windows(X, m):
    """`(N, R-m+1, m, k)` array of the row windows of a batch `(N, R, k)`."""
    return np.stack([X[:, j : j + m, :] for j in range(X.shape[1] - m + 1)], axis=1)


class ConvFilterBank:
    kind = "cnn"

    def __init__(self, n_rows, k, widths=(1, 2, 3), n_filters=300, activation="relu", n_classes=2, seed=0):
        widths = tuple(int(m) for m in widths)
        if not widths or min(widths) < 1:
            raise ValueError("Filter widths must be positive")
        if max(widths) > n_rows:
            raise ShapeError(f"Filter width {max(widths)} exceeds the {n_rows} input rows")
        if n_filters % len(widths):
            raise ValueError(f"{n_filters} filters cannot be split evenly over widths {widths}")
        self.n_rows = n_rows
        self.k = k
        self.widths = widths
        self.n_filters = n_filters
        self.activation = activation
        self.n_classes = n_classes
        self.seed = seed
        per_width = n_filters // len(widths)
        rng = np.random.default_rng(seed)
        self.weights = [glorot_uniform(rng, (per_width, m, k), m * k, m * per_width) for m in widths]
        self.biases = [np.zeros(per_width) for _ in widths]
        self.head = SoftmaxHead(n_filters, n_classes, rng)

    def spec(self):
        return {
            "n_rows": self.n_rows,
            "k": self.k,
            "widths": list(self.widths),
            "n_filters": self.n_filters,
            "activation": self.activation,
            "n_classes": self.n_classes,
            "seed": self.seed,
        }

    @classmethod
    def from_spec(cls, spec):
        return cls(**dict(spec, widths=tuple(spec["widths"])))

    def state(self):
        return {}

    def set_state(self, state):
        pass

    def params(self):
        params = {}
        for m, W, b in zip(self.widths, self.weights, self.biases):
            params[f"W{m}"] = W
            params[f"b{m}"] = b
        params.update({f"head.{name}": p for name, p in self.head.params().items()})
        return params

    all_params = params

    def filters(self):
        """The bank's filters in the order their pooled values appear in `z`."""
        for W, b in zip(self.weights, self.biases):
            for f in range(len(b)):
                yield Filter(W[f], float(b[f]), self.activation)

    def _check_input(self, X):
        if scipy.sparse.issparse(X):
            # a sparse batch holds one adjacency row per example
            if self.n_rows != 1 or X.shape[1] != self.k:
                raise ShapeError(f"Sparse inputs need a bank of 1 x {X.shape[1]} filters")
            return scipy.sparse.csr_matrix(X, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-2:] != (self.n_rows, self.k):
            raise ShapeError(f"Expected {self.n_rows} x {self.k} inputs, got {X.shape[-2:]}")
        return X

    def _pooled(self, X):
        if scipy.sparse.issparse(X):
            return self._pooled_rows(X)
        pooled, caches = [], []
        for m, W, b in zip(self.widths, self.weights, self.biases):
            windows = _windows(X, m)
            pre = np.einsum("nlmk,fmk->nlf", windows, W) + b
            h = activate(self.activation, pre)
            pooled.append(h.mean(axis=1))
            caches.append((windows, pre, h))
        return np.concatenate(pooled, axis=1), caches

    def _pooled_rows(self, X):
        """`_pooled` for a sparse batch of single rows: one window, so pooling is the identity."""
        W, b = self.weights[0], self.biases[0]
        pre = np.asarray(X @ W[:, 0, :].T) + b
        h = activate(self.activation, pre)
        return h, [(X, pre[:, np.newaxis, :], h[:, np.newaxis, :])]

    def pooled_features(self, X):
        """The pooled vector `z` for one input matrix or a batch."""
        X = self._check_input(X)
        single = X.ndim == 2 and not scipy.sparse.issparse(X)
        z, _ = self._pooled(X[np.newaxis] if single else X)
        return z[0] if single else z

    def predict_proba(self, X):
        return softmax(self.head.logits(self.pooled_features(X)))

    def loss(self, X, y):
        return cross_entropy(self.predict_proba(X), y)

    def loss_and_grads(self, X, y):
        z, caches = self._pooled(self._check_input(X))
        P = softmax(self.head.logits(z))
        dz, head_grads = self.head.backward(cross_entropy_grad(P, y), z)
        grads = {f"head.{name}": g for name, g in head_grads.items()}
        start = 0
        for m, cache in zip(self.widths, caches):
            windows, pre, h = cache
            per_width = h.shape[2]
            dh = np.repeat(dz[:, np.newaxis, start : start + per_width] / h.shape[1], h.shape[1], axis=1)
            dpre = dh * activation_grad(self.activation, pre, h)
            if scipy.sparse.issparse(windows):
                grads[f"W{m}"] = np.asarray((windows.T @ dpre[:, 0, :]).T)[:, np.newaxis, :]
            else:
                grads[f"W{m}"] = np.einsum("nlf,nlmk->fmk", dpre, windows)
            grads[f"b{m}"] = dpre.sum(axis=(0, 1))
            start += per_width
        return cross_entropy(P, y), grads

    def __repr__(self):
        return f"ConvFilterBank({self.n_rows} x {self.k}, widths={self.widths}, filters={self.n_filters})"


def forward(bank, X):
    """Class probabilities for one input matrix or a batch of them."""
    return bank.predict_proba(X)


def train(bank, inputs, labels, config=None):
    """Train the filters and head on labeled input matrices; returns `(bank, history)`."""
    inputs = bank._check_input(inputs)
    return train_epochs(bank, inputs, np.asarray(labels, dtype=np.int64), config or TrainConfig())


def adjacency_bank(n, n_filters=300, activation="relu", n_classes=2, seed=0):
    """A bank of `1 x n` filters for adjacency-row inputs."""
    return ConvFilterBank(1, n, widths=(1,), n_filters=n_filters, activation=activation, n_classes=n_classes, seed=seed)


def adjacency_mode_forward(bank, row):
    """
    Class probabilities for an adjacency row treated as a `1 x n` input.
    Each filter covers the whole row, so pooling is the identity.
    """
    if bank.n_rows != 1 or bank.widths != (1,):
        raise ShapeError("Adjacency input needs a bank of single-row filters")
    if scipy.sparse.issparse(row):
        return forward(bank, row)
    row = np.asarray(row, dtype=np.float64)
    if row.shape[-1] != bank.k:
        raise ShapeError(f"Expected rows of length {bank.k}, got {row.shape[-1]}")
    return forward(bank, row.reshape(row.shape[:-1] + (1, bank.k)))
