"""
Exhaustive k-nearest-neighbor classification under Euclidean distance.

Among equally distant training points the one with the lower index is
nearer. When the vote is tied (only possible for even k) the label whose
neighbors have the smaller mean distance wins, then the lower label.
Training points and queries may be scipy sparse matrices; distances are
then taken from row norms and inner products.

>>> model = KnnModel(np.array([[0.0], [1.0], [5.0]]), np.array([0, 0, 1]), k=1)
>>> knn_predict(model, np.array([4.0]))
1
>>> KnnModel(model.points, model.labels, k=3).predict(np.array([[5.0], [-2.0]])).tolist()
[0, 0]
"""

import numpy as np
import scipy.sparse


def _dense_row(x):
    if scipy.sparse.issparse(x):
        return x.toarray().ravel()
    return np.asarray(x, dtype=np.float64)


class KnnModel:
    def __init__(self, points, labels, k=3):
        if scipy.sparse.issparse(points):
            self.points = scipy.sparse.csr_matrix(points, dtype=np.float64)
            self._sq_norms = np.asarray(self.points.multiply(self.points).sum(axis=1)).ravel()
        else:
            self.points = np.asarray(points, dtype=np.float64)
            self._sq_norms = None
        self.labels = np.asarray(labels, dtype=np.int64)
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise ValueError("Need a non-empty 2-d array of training points")
        n = self.points.shape[0]
        if len(self.labels) != n:
            raise ValueError(f"{n} points but {len(self.labels)} labels")
        if not 1 <= k <= n:
            raise ValueError(f"k = {k} must lie in [1, {n}]")
        self.k = k

    def squared_distances(self, x):
        if self._sq_norms is None:
            return ((self.points - x) ** 2).sum(axis=1)
        d = self._sq_norms + x @ x - 2.0 * (self.points @ x)
        return np.maximum(d, 0.0)

    def neighbors(self, x):
        """Indices and squared distances of the `k` nearest training points."""
        d = self.squared_distances(x)
        nearest = np.argsort(d, kind="stable")[: self.k]
        return nearest, d[nearest]

    def predict_one(self, x):
        nearest, d = self.neighbors(_dense_row(x))
        votes = self.labels[nearest]
        candidates = np.unique(votes)
        counts = np.array([np.sum(votes == c) for c in candidates])
        tied = candidates[counts == counts.max()]
        if len(tied) == 1:
            return int(tied[0])
        mean_distance = [np.sqrt(d[votes == c]).mean() for c in tied]
        return int(tied[int(np.argmin(mean_distance))])

    def predict(self, X):
        if scipy.sparse.issparse(X):
            X = scipy.sparse.csr_matrix(X)
            rows = (X[i] for i in range(X.shape[0]))
        else:
            rows = np.asarray(X, dtype=np.float64)
        return np.array([self.predict_one(x) for x in rows], dtype=np.int64)


def knn_predict(model, x):
    return model.predict_one(x)
