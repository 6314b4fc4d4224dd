"""
Soft-margin support vector machine with an RBF kernel, trained by
sequential minimal optimization.

Class 0 is encoded as -1 and class 1 as +1. Every step optimizes the pair
of multipliers that violates the optimality conditions the most; training
stops when the largest violation gap is at most `tol`, at which point every
training point satisfies the KKT conditions to within `tol`. A decision
value of exactly 0 is classified as class 0.

>>> X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
>>> model = svm_train(X, np.array([0, 0, 1, 1]), C=10.0, gamma=2.0)
>>> model.predict(X).tolist()
[0, 0, 1, 1]
"""

import logging
import warnings

import numpy as np
import scipy.sparse
from scipy.spatial.distance import cdist

log = logging.getLogger(__name__)


class SingleClassError(ValueError):
    pass


class ConvergenceWarning(UserWarning):
    pass


def _row_sq_norms(A):
    return np.asarray(A.multiply(A).sum(axis=1)).ravel()


def sq_distances(A, B):
    """Squared Euclidean distances between the rows of `A` and `B`, either of which may be sparse."""
    if not (scipy.sparse.issparse(A) or scipy.sparse.issparse(B)):
        return cdist(A, B, "sqeuclidean")
    A, B = scipy.sparse.csr_matrix(A), scipy.sparse.csr_matrix(B)
    cross = (A @ B.T).toarray()
    return np.maximum(_row_sq_norms(A)[:, np.newaxis] + _row_sq_norms(B)[np.newaxis, :] - 2.0 * cross, 0.0)


def rbf_kernel(A, B, gamma):
    return np.exp(-gamma * sq_distances(A, B))


def _as_points(X):
    if scipy.sparse.issparse(X):
        return scipy.sparse.csr_matrix(X, dtype=np.float64)
    return np.atleast_2d(np.asarray(X, dtype=np.float64))


class SvmModel:
    def __init__(self, points, signs, alpha, bias, gamma, C, iterations=0, converged=True):
        self.points = points
        self.signs = signs
        self.alpha = alpha
        self.bias = bias
        self.gamma = gamma
        self.C = C
        self.iterations = iterations
        self.converged = converged
        self.support = np.flatnonzero(alpha > 0)

    @property
    def n_support(self):
        return len(self.support)

    def decision_function(self, X):
        X = _as_points(X)
        sv = self.support
        K = rbf_kernel(X, self.points[sv], self.gamma)
        return K @ (self.alpha[sv] * self.signs[sv]) + self.bias

    def margins(self):
        """`y_i f(x_i)` for every training point."""
        return self.signs * self.decision_function(self.points)

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)


def _violating_pair(alpha, signs, G, C):
    v = -signs * G
    up = ((signs > 0) & (alpha < C)) | ((signs < 0) & (alpha > 0))
    low = ((signs < 0) & (alpha < C)) | ((signs > 0) & (alpha > 0))
    up_idx, low_idx = np.flatnonzero(up), np.flatnonzero(low)
    i = up_idx[np.argmax(v[up_idx])]
    j = low_idx[np.argmin(v[low_idx])]
    return i, j, v[i], v[j]


def svm_train(points, labels, C=1.0, gamma=None, tol=1e-3, max_iter=None):
    """Fit an RBF support vector machine; `gamma` defaults to 1 / dimension."""
    X = _as_points(points)
    labels = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != len(labels) or (not scipy.sparse.issparse(points) and np.ndim(points) != 2):
        raise ValueError("Need one label per training point")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if C <= 0:
        raise ValueError("C must be positive")
    if len(np.unique(labels)) < 2:
        raise SingleClassError("Training labels contain a single class")
    n, d = X.shape
    gamma = 1.0 / d if gamma is None else gamma
    max_iter = max(100000, 100 * n) if max_iter is None else max_iter

    signs = np.where(labels > 0, 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    alpha = np.zeros(n)
    # gradient of the dual objective 1/2 a'Qa - sum(a), Q = yy' * K
    G = -np.ones(n)
    iterations = 0
    converged = False
    while iterations < max_iter:
        i, j, m, M = _violating_pair(alpha, signs, G, C)
        if m - M <= tol:
            converged = True
            break
        iterations += 1
        # move alpha_i by y_i t and alpha_j by -y_j t
        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        t = (m - M) / eta
        limit_i = C - alpha[i] if signs[i] > 0 else alpha[i]
        limit_j = alpha[j] if signs[j] > 0 else C - alpha[j]
        t = min(t, limit_i, limit_j)
        alpha[i] = np.clip(alpha[i] + signs[i] * t, 0.0, C)
        alpha[j] = np.clip(alpha[j] - signs[j] * t, 0.0, C)
        if t == limit_i:
            alpha[i] = C if signs[i] > 0 else 0.0
        if t == limit_j:
            alpha[j] = 0.0 if signs[j] > 0 else C
        G += signs * t * (K[:, i] - K[:, j])

    i, j, m, M = _violating_pair(alpha, signs, G, C)
    v = -signs * G
    free = (alpha > 0) & (alpha < C)
    bias = float(v[free].mean()) if free.any() else (m + M) / 2.0
    if not converged:
        message = f"SMO stopped after {iterations} iterations with violation gap {m - M:.3g} > {tol:g}"
        log.warning(message)
        warnings.warn(message, ConvergenceWarning, stacklevel=2)
    else:
        log.debug("SMO converged in %d iterations, %d support vectors", iterations, int((alpha > 0).sum()))
    return SvmModel(X, signs, alpha, bias, gamma, C, iterations, converged)


def svm_predict(model, x):
    return int(model.predict(x)[0])
