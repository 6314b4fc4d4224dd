"""
Signed undirected graphs.

A `SignedGraph` is immutable once built. Edges are kept as per-node sorted
neighbor arrays partitioned by sign, so iterating the positive or negative
neighbors of a node costs O(degree), and the symmetric adjacency matrix is
available as a sparse matrix for the eigensolver.

>>> g = SignedGraph.from_edges(3, [(0, 1, 1), (2, 1, -1)], labels=[0, 0, 1])
>>> g.n, g.n_edges, g.n_positive, g.n_negative
(3, 2, 1, 1)
>>> g.positive_neighbors(1).tolist(), g.negative_neighbors(1).tolist()
([0], [2])
>>> g.edge_sign(1, 2)
-1
>>> list(g.edges())
[(0, 1, 1), (1, 2, -1)]
"""

from functools import cached_property

import numpy as np
import scipy.sparse

__all__ = [
    "GraphError",
    "SelfLoopError",
    "ConflictingSignError",
    "EmptyGraphError",
    "DegenerateConfigError",
    "SignedGraph",
    "BENIGN",
    "FRAUD",
    "UNLABELED",
]

BENIGN = 0
FRAUD = 1
UNLABELED = -1


class GraphError(ValueError):
    pass


class SelfLoopError(GraphError):
    pass


class ConflictingSignError(GraphError):
    pass


class EmptyGraphError(GraphError):
    pass


class DegenerateConfigError(GraphError):
    pass


def _frozen(a):
    a.flags.writeable = False
    return a


class SignedGraph:
    """
    A symmetric signed adjacency structure over dense node ids `0..n-1`,
    with an optional class label per node (`BENIGN`, `FRAUD`, or
    `UNLABELED`) and optional node names (user ids for graphs built from
    edit logs).
    """

    def __init__(self, n, positive, negative, labels=None, names=None):
        self.n = n
        self._positive = tuple(positive)
        self._negative = tuple(negative)
        if labels is not None:
            labels = _frozen(np.asarray(labels, dtype=np.int64).copy())
            if labels.shape != (n,):
                raise GraphError(f"Expected {n} labels, got {labels.shape[0]}")
            if not np.isin(labels, (BENIGN, FRAUD, UNLABELED)).all():
                raise GraphError("Labels must be 0 (benign), 1 (fraud) or -1 (unlabeled)")
        self.labels = labels
        if names is not None:
            names = tuple(names)
            if len(names) != n:
                raise GraphError(f"Expected {n} node names, got {len(names)}")
        self.names = names

    @classmethod
    def from_edges(cls, n, edges, labels=None, names=None):
        """
        Build a graph from `(u, v, sign)` triples. Each unordered pair may
        appear more than once (in either orientation) as long as the sign
        agrees; the symmetric closure is implied.
        """
        if n < 0:
            raise GraphError("Node count must be non-negative")
        signs = {}
        for u, v, sign in edges:
            u, v, sign = int(u), int(v), int(sign)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"Edge ({u}, {v}) has a node id outside [0, {n})")
            if u == v:
                raise SelfLoopError(f"Self-loop on node {u}")
            if sign not in (1, -1):
                raise GraphError(f"Edge ({u}, {v}) has sign {sign}, expected +1 or -1")
            key = (u, v) if u < v else (v, u)
            previous = signs.setdefault(key, sign)
            if previous != sign:
                raise ConflictingSignError(f"Edge ({key[0]}, {key[1]}) given with both signs")
        return cls.from_sign_map(n, signs, labels=labels, names=names)

    @classmethod
    def from_sign_map(cls, n, signs, labels=None, names=None):
        """
        Build a graph from a mapping `{(u, v): sign}` over unordered pairs
        with `u < v`, already validated.
        """
        positive = [[] for _ in range(n)]
        negative = [[] for _ in range(n)]
        for (u, v), sign in signs.items():
            side = positive if sign > 0 else negative
            side[u].append(v)
            side[v].append(u)
        positive = [_frozen(np.array(sorted(a), dtype=np.int64)) for a in positive]
        negative = [_frozen(np.array(sorted(a), dtype=np.int64)) for a in negative]
        return cls(n, positive, negative, labels=labels, names=names)

    def with_labels(self, labels):
        return SignedGraph(self.n, self._positive, self._negative, labels=labels, names=self.names)

    def with_names(self, names):
        return SignedGraph(self.n, self._positive, self._negative, labels=self.labels, names=names)

    def positive_neighbors(self, u):
        return self._positive[u]

    def negative_neighbors(self, u):
        return self._negative[u]

    def neighbors(self, u):
        return np.union1d(self._positive[u], self._negative[u])

    def degree(self, u):
        return len(self._positive[u]) + len(self._negative[u])

    def signed_degree(self, u):
        return len(self._positive[u]) - len(self._negative[u])

    def edge_sign(self, u, v):
        """Sign of the edge between `u` and `v`, or 0 if there is none."""
        for side, sign in ((self._positive[u], 1), (self._negative[u], -1)):
            i = np.searchsorted(side, v)
            if i < len(side) and side[i] == v:
                return sign
        return 0

    def edges(self):
        """Iterate `(u, v, sign)` with `u < v`, ordered by `u` then `v`."""
        for u in range(self.n):
            merged = [(v, 1) for v in self._positive[u] if v > u] + [(v, -1) for v in self._negative[u] if v > u]
            for v, sign in sorted(merged):
                yield u, int(v), sign

    @cached_property
    def n_positive(self):
        return sum(len(a) for a in self._positive) // 2

    @cached_property
    def n_negative(self):
        return sum(len(a) for a in self._negative) // 2

    @property
    def n_edges(self):
        return self.n_positive + self.n_negative

    @cached_property
    def adjacency(self):
        """The adjacency matrix `A` as a float64 CSR matrix."""
        rows, cols, data = [], [], []
        for u in range(self.n):
            for side, sign in ((self._positive[u], 1.0), (self._negative[u], -1.0)):
                rows.append(np.full(len(side), u, dtype=np.int64))
                cols.append(side)
                data.append(np.full(len(side), sign))
        if self.n == 0 or not rows:
            return scipy.sparse.csr_matrix((self.n, self.n), dtype=np.float64)
        A = scipy.sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(self.n, self.n)
        )
        A.sort_indices()
        return A

    def check_symmetry(self):
        """
        Verify that every edge is stored in both directions with the same
        sign, that there are no self-loops and no pair is stored twice.
        """
        for u in range(self.n):
            pos, neg = self._positive[u], self._negative[u]
            if u in pos or u in neg:
                raise SelfLoopError(f"Self-loop on node {u}")
            if len(np.intersect1d(pos, neg)) or len(np.unique(pos)) != len(pos) or len(np.unique(neg)) != len(neg):
                raise GraphError(f"Node {u} has a neighbor stored more than once")
            for v in pos:
                if u not in self._positive[v]:
                    raise GraphError(f"Positive edge ({u}, {v}) is not symmetric")
            for v in neg:
                if u not in self._negative[v]:
                    raise GraphError(f"Negative edge ({u}, {v}) is not symmetric")
        return True

    def relabel(self, perm):
        """
        Return a copy where node `u` becomes node `perm[u]`. Labels and names
        travel with their nodes.
        """
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise GraphError("Relabeling must be a permutation of the node ids")
        signs = {}
        for u, v, sign in self.edges():
            a, b = int(perm[u]), int(perm[v])
            signs[(a, b) if a < b else (b, a)] = sign
        labels = names = None
        if self.labels is not None:
            labels = np.empty(self.n, dtype=np.int64)
            labels[perm] = self.labels
        if self.names is not None:
            names = [None] * self.n
            for u, name in enumerate(self.names):
                names[perm[u]] = name
        return SignedGraph.from_sign_map(self.n, signs, labels=labels, names=names)

    def labeled_nodes(self):
        if self.labels is None:
            return np.arange(0, dtype=np.int64)
        return np.flatnonzero(self.labels != UNLABELED)

    def __repr__(self):
        return f"SignedGraph(n={self.n}, positive={self.n_positive}, negative={self.n_negative})"
