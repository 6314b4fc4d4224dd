"""
Classifier inputs built from spectral coordinates.

For node `u` with spectral coordinate `alpha_u`, `beta_u^{s+}` (`beta_u^{s-}`)
is the mean spectral coordinate of the nodes exactly `s` hops from `u` that
are reached positively (negatively). The autoencoder input is the
concatenation `[alpha_u, beta_u^{1+}, beta_u^{1-}, ..., beta_u^{s+},
beta_u^{s-}]`; the convolutional input stacks the same blocks as the rows of
a `(2s+1) x k` matrix.

For `s > 1` the sign of a neighbor is the product of the edge signs along a
shortest path to it, and a node is positive if any shortest path to it is.

>>> from signet.graph import SignedGraph
>>> from signet.spectral import SpectralEmbedding
>>> g = SignedGraph.from_edges(3, [(0, 1, 1), (1, 2, -1)])
>>> emb = SpectralEmbedding(np.zeros(2), np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]), normalized=True)
>>> build_matrix_input(g, emb, 1, 1).data.tolist()
[[0.0, 1.0], [1.0, 0.0], [0.6, 0.8]]
>>> build_vector_input(g, emb, 0, 2).data.tolist()
[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.8]
>>> build_adjacency_input(g, 1).data.tolist()
[1.0, 0.0, -1.0]
"""

import numpy as np
import scipy.sparse

SPECTRAL_VECTOR = "spectral-vector"
SPECTRAL_MATRIX = "spectral-matrix"
ADJACENCY_ROW = "adjacency-row"
ALPHA_ONLY = "alpha-only"
INPUT_MODES = (SPECTRAL_VECTOR, SPECTRAL_MATRIX, ADJACENCY_ROW, ALPHA_ONLY)

_SIGNS = {"+": 1, "-": -1, 1: 1, -1: -1}


class FeatureInput:
    """The input of one node: its mode, the array itself, and the `s` and `k` it was built with."""

    def __init__(self, mode, data, s, k):
        self.mode = mode
        self.data = data
        self.s = s
        self.k = k

    def __repr__(self):
        return f"FeatureInput({self.mode}, shape={self.data.shape}, s={self.s}, k={self.k})"


def signed_neighbors(graph, u, max_step):
    """
    Nodes at exactly 1..`max_step` hops from `u` on the unsigned skeleton,
    split by sign. Returns a list whose entry `step - 1` is the pair
    `(positive, negative)` of sorted node arrays.

    >>> from signet.graph import SignedGraph
    >>> g = SignedGraph.from_edges(4, [(0, 1, -1), (1, 2, -1), (0, 3, 1), (3, 2, -1)])
    >>> [(p.tolist(), q.tolist()) for p, q in signed_neighbors(g, 0, 2)]
    [([3], [1]), ([2], [])]
    """
    # node -> [reachable with positive product, reachable with negative product]
    reach = {u: [True, False]}
    frontier = [u]
    layers = []
    for _ in range(max_step):
        layer = {}
        for x in frontier:
            x_pos, x_neg = reach[x]
            for side, sign in ((graph.positive_neighbors(x), 1), (graph.negative_neighbors(x), -1)):
                for w in side.tolist():
                    if w in reach:
                        continue
                    flags = layer.setdefault(w, [False, False])
                    if sign > 0:
                        flags[0] = flags[0] or x_pos
                        flags[1] = flags[1] or x_neg
                    else:
                        flags[0] = flags[0] or x_neg
                        flags[1] = flags[1] or x_pos
        reach.update(layer)
        positive = sorted(w for w, (p, _) in layer.items() if p)
        negative = sorted(w for w, (p, q) in layer.items() if q and not p)
        layers.append((np.array(positive, dtype=np.int64), np.array(negative, dtype=np.int64)))
        frontier = sorted(layer)
    return layers


def _mean_rows(coordinates, nodes):
    if len(nodes) == 0:
        return np.zeros(coordinates.shape[1])
    return coordinates[nodes].mean(axis=0)


def neighbor_mean(graph, emb, u, step, sign):
    """Mean spectral coordinate of the `step`-hop neighbors of `u` of the given sign."""
    if step < 1:
        raise ValueError("step must be at least 1")
    if not 0 <= u < graph.n:
        raise ValueError(f"Node {u} outside [0, {graph.n})")
    positive, negative = signed_neighbors(graph, u, step)[step - 1]
    return _mean_rows(emb.coordinates, positive if _SIGNS[sign] > 0 else negative)


def _stacked_rows(graph, emb, u, s):
    if not emb.normalized:
        raise ValueError("Features are built from normalized spectral coordinates")
    rows = [emb.coordinates[u]]
    for positive, negative in signed_neighbors(graph, u, s) if s > 0 else []:
        rows.append(_mean_rows(emb.coordinates, positive))
        rows.append(_mean_rows(emb.coordinates, negative))
    return np.vstack(rows)


def build_matrix_input(graph, emb, u, s):
    return FeatureInput(SPECTRAL_MATRIX, _stacked_rows(graph, emb, u, s), s, emb.k)


def build_vector_input(graph, emb, u, s):
    return FeatureInput(SPECTRAL_VECTOR, _stacked_rows(graph, emb, u, s).ravel(), s, emb.k)


def build_adjacency_input(graph, u):
    row = np.zeros(graph.n)
    row[graph.positive_neighbors(u)] = 1.0
    row[graph.negative_neighbors(u)] = -1.0
    return FeatureInput(ADJACENCY_ROW, row, 0, graph.n)


def build_inputs(graph, emb, mode, s=1, nodes=None):
    """
    Stack the inputs of `nodes` (all nodes by default) for one input mode.
    Spectral modes give an `(N, 2s+1, k)` array (`(N, 1, k)` for
    `alpha-only`); `adjacency-row` gives an `(N, n)` CSR matrix, which stays
    sparse through training. Flattening the spectral arrays per node yields
    the vector inputs.
    """
    nodes = np.arange(graph.n) if nodes is None else np.asarray(nodes)
    if mode == ADJACENCY_ROW:
        return scipy.sparse.csr_matrix(graph.adjacency[nodes], dtype=np.float64)
    if mode in (SPECTRAL_VECTOR, SPECTRAL_MATRIX):
        radius = s
    elif mode == ALPHA_ONLY:
        radius = 0
    else:
        raise ValueError(f"Unknown input mode '{mode}'")
    out = np.empty((len(nodes), 2 * radius + 1, emb.k))
    for i, u in enumerate(nodes.tolist()):
        out[i] = _stacked_rows(graph, emb, u, radius)
    return out


def as_vectors(inputs):
    """Flatten per-node inputs to one row per node; sparse rows pass through."""
    if scipy.sparse.issparse(inputs):
        return inputs
    return inputs.reshape(len(inputs), -1)
