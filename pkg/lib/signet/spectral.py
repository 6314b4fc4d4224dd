"""
Spectral coordinates of the nodes of a signed graph.

The top-k eigenpairs of the symmetric adjacency matrix `A` are found with
Lanczos iteration with full reorthogonalization. Row `u` of the eigenvector
matrix is node `u`'s spectral coordinate; normalizing the rows to unit length
gives the classifier inputs.

>>> from signet.graph import SignedGraph
>>> g = SignedGraph.from_edges(2, [(0, 1, 1)])
>>> emb = eigen_top_k(g, 2)
>>> emb.eigenvalues.round(12).tolist()
[1.0, -1.0]
>>> (emb.coordinates[:, 0] * 2 ** 0.5).round(12).tolist()
[1.0, 1.0]
>>> emb_1 = eigen_top_k(g, 1)
>>> round(reconstruction_residual(g, emb_1) ** 2, 12)
0.5
"""

import logging

import numpy as np

from signet.graph import EmptyGraphError
from signet.graph.io import (
    FieldFormatError,
    ParseError,
)

log = logging.getLogger(__name__)

EIGEN_ORDERS = ("algebraic", "magnitude")

# Above this node count the residual is computed without forming A densely
DENSE_RESIDUAL_LIMIT = 4096


class ConvergenceError(Exception):
    def __init__(self, message, residuals=None):
        Exception.__init__(self, message)
        self.residuals = residuals


class SpectralEmbedding:
    """
    The `k` leading eigenvalues and the `n x k` matrix whose row `u` is the
    spectral coordinate of node `u`, with the Lanczos residuals and step
    count when the solver produced it.
    """

    def __init__(self, eigenvalues, coordinates, normalized=False, residuals=None, iterations=0):
        self.eigenvalues = eigenvalues
        self.coordinates = coordinates
        self.normalized = normalized
        self.residuals = residuals
        self.iterations = iterations

    @property
    def k(self):
        return len(self.eigenvalues)

    @property
    def n(self):
        return self.coordinates.shape[0]

    def __repr__(self):
        return f"SpectralEmbedding(n={self.n}, k={self.k}, normalized={self.normalized})"


def start_generator(n, n_edges):
    """Generator for the Lanczos start (and restart) vectors of a graph."""
    return np.random.default_rng([n, n_edges])


def canonical_signs(vectors, rtol=1e-12):
    """
    Flip each column so that its largest-magnitude entry is positive. Entries
    within `rtol` of the largest magnitude count as tied and the lowest index
    among them decides.

    >>> canonical_signs(np.array([[0.6, -0.8], [-0.8, 0.6]])).tolist()
    [[-0.6, 0.8], [0.8, -0.6]]
    """
    vectors = np.array(vectors, dtype=np.float64)
    for j in range(vectors.shape[1]):
        column = vectors[:, j]
        magnitude = np.abs(column)
        top = magnitude.max()
        if top == 0:
            continue
        i = int(np.flatnonzero(magnitude >= top * (1 - rtol))[0])
        if column[i] < 0:
            vectors[:, j] = -column
    return vectors


def _select(theta, k, order):
    if order == "algebraic":
        idx = np.argsort(-theta, kind="stable")
    else:
        idx = np.lexsort((-theta, -np.abs(theta)))
    return idx[:k]


def _orthogonalize(Q, v):
    # two passes of classical Gram-Schmidt
    v = v - Q @ (Q.T @ v)
    return v - Q @ (Q.T @ v)


class _Basis:
    """Growable pair of column blocks Q and AQ."""

    def __init__(self, n, capacity):
        self.n = n
        self.m = 0
        self.Q = np.empty((n, capacity))
        self.AQ = np.empty((n, capacity))

    def append(self, q, aq):
        if self.m == self.Q.shape[1]:
            capacity = min(self.n, 2 * self.Q.shape[1])
            for name in ("Q", "AQ"):
                grown = np.empty((self.n, capacity))
                grown[:, : self.m] = getattr(self, name)[:, : self.m]
                setattr(self, name, grown)
        self.Q[:, self.m] = q
        self.AQ[:, self.m] = aq
        self.m += 1

    def ritz(self, k, order):
        Q, AQ = self.Q[:, : self.m], self.AQ[:, : self.m]
        H = Q.T @ AQ
        theta, S = np.linalg.eigh((H + H.T) / 2)
        idx = _select(theta, k, order)
        theta, S = theta[idx], S[:, idx]
        Y = Q @ S
        residuals = np.linalg.norm(AQ @ S - Y * theta, axis=0)
        return theta, Y, residuals


def lanczos(matvec, n, k, tol=1e-8, max_iter=None, rng=None, order="algebraic"):
    """
    Top-k eigenpairs of the symmetric operator `matvec` on R^n.

    The Krylov basis is kept fully orthogonal, so whenever the recurrence
    breaks down (an invariant subspace has been found) or the leading Ritz
    pairs converge, a fresh random direction orthogonal to the basis can be
    injected. Convergence is only accepted after such an injection has been
    followed for a few steps without disturbing the leading pairs, which is
    what uncovers further copies of repeated eigenvalues. Returns
    `(eigenvalues, vectors, residuals, steps)`.
    """
    if order not in EIGEN_ORDERS:
        raise ValueError(f"Unknown eigenvalue order '{order}'")
    if max_iter is None:
        max_iter = 10 * n
    rng = rng if rng is not None else np.random.default_rng(n)
    basis = _Basis(n, min(n, max(2 * k + 20, 64)))
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    steps = 0
    verify_until = None
    residuals = None
    while True:
        w = matvec(q)
        basis.append(q, w)
        steps += 1
        m = basis.m
        r = _orthogonalize(basis.Q[:, :m], w)
        beta = np.linalg.norm(r)
        breakdown = beta <= 1e-10 * max(1.0, np.linalg.norm(w))
        due = m == n or steps >= max_iter or breakdown or m % max(5, m // 10) == 0 or m == verify_until
        if m >= k and due:
            theta, Y, residuals = basis.ritz(k, order)
            converged = bool((residuals <= tol).all())
            if converged and (m == n or (verify_until is not None and m >= verify_until)):
                log.debug("lanczos converged after %d steps (basis %d)", steps, m)
                return theta, Y, residuals, steps
            if converged and verify_until is None:
                verify_until = min(n, m + max(k, 10))
                breakdown = True
            elif not converged:
                verify_until = None
        if m == n:
            raise ConvergenceError(
                f"Full Krylov basis reached but residuals up to {residuals.max():.3g} exceed {tol:g}", residuals
            )
        if steps >= max_iter:
            achieved = residuals.max() if residuals is not None else float("nan")
            raise ConvergenceError(f"No convergence after {steps} iterations (max residual {achieved:.3g})", residuals)
        if breakdown:
            log.debug("lanczos restart at basis size %d", m)
            r = _orthogonalize(basis.Q[:, :m], rng.standard_normal(n))
            beta = np.linalg.norm(r)
        q = r / beta


def eigen_top_k(graph, k, tol=1e-8, max_iter=None, eigen_order="algebraic"):
    """
    The `k` leading eigenpairs of the graph's adjacency matrix, as an
    unnormalized `SpectralEmbedding`. Eigenvalues are ordered by algebraic
    value (or by magnitude when `eigen_order="magnitude"`), descending, and
    every eigenvector has its largest-magnitude entry positive.
    """
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} must lie in [1, {n}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = graph.adjacency
    theta, Y, residuals, steps = lanczos(
        A.dot, n, k, tol=tol, max_iter=max_iter, rng=start_generator(n, graph.n_edges), order=eigen_order
    )
    # Ritz vectors are orthonormal up to rounding; renormalize before fixing signs
    Y = canonical_signs(Y / np.linalg.norm(Y, axis=0))
    log.info("top-%d eigenpairs in %d iterations, largest residual %.2e", k, steps, residuals.max())
    return SpectralEmbedding(eigenvalues=theta, coordinates=Y, residuals=residuals, iterations=steps)


def normalize_coordinates(emb):
    """
    Scale every nonzero row of the coordinate matrix to unit length.

    >>> emb = SpectralEmbedding(np.array([2.0, 1.0]), np.array([[3.0, 4.0], [0.0, 0.0]]))
    >>> normalize_coordinates(emb).coordinates.tolist()
    [[0.6, 0.8], [0.0, 0.0]]
    """
    if emb.normalized:
        raise ValueError("Spectral coordinates are already normalized")
    norms = np.linalg.norm(emb.coordinates, axis=1)
    coordinates = emb.coordinates.copy()
    nonzero = norms > 0
    coordinates[nonzero] /= norms[nonzero, np.newaxis]
    return SpectralEmbedding(emb.eigenvalues, coordinates, True, emb.residuals, emb.iterations)


def spectral_embedding(graph, k, normalize=True, **kwargs):
    emb = eigen_top_k(graph, k, **kwargs)
    return normalize_coordinates(emb) if normalize else emb


def reconstruction_residual(graph, emb):
    """
    Relative Frobenius error of the rank-k reconstruction
    `sum_i lambda_i v_i v_i^T` of the adjacency matrix.
    """
    if emb.normalized:
        raise ValueError("Residual is defined on unnormalized eigenvectors")
    if graph.n_edges == 0:
        raise EmptyGraphError("Adjacency matrix is zero")
    A = graph.adjacency
    V, lam = emb.coordinates, emb.eigenvalues
    norm_a2 = 2.0 * graph.n_edges
    if graph.n <= DENSE_RESIDUAL_LIMIT:
        diff = A.toarray() - (V * lam) @ V.T
        return float(np.linalg.norm(diff) / np.sqrt(norm_a2))
    # ||A - V L V^T||^2 = ||A||^2 - 2 sum_i l_i v_i^T A v_i + sum_i l_i^2
    cross = np.einsum("ij,ij->j", V, A @ V)
    squared = norm_a2 - 2.0 * np.dot(lam, cross) + np.dot(lam, lam)
    return float(np.sqrt(max(squared, 0.0) / norm_a2))


def write_embedding(emb, out):
    """Write one `node<TAB>c1<TAB>...<TAB>ck` line per node, full precision."""
    print(f"#k={emb.k}\tnormalized={int(emb.normalized)}", file=out)
    print("#eigenvalues\t" + "\t".join(repr(float(x)) for x in emb.eigenvalues), file=out)
    for u, row in enumerate(emb.coordinates):
        print(str(u) + "\t" + "\t".join(repr(float(x)) for x in row), file=out)


def read_embedding(input):
    """
    Read an embedding written by `write_embedding`.

    >>> from io import StringIO
    >>> emb = SpectralEmbedding(np.array([1.5, -0.25]), np.array([[0.1, 0.2], [0.3, 1 / 3]]))
    >>> out = StringIO()
    >>> write_embedding(emb, out)
    >>> back = read_embedding(StringIO(out.getvalue()))
    >>> bool((back.coordinates == emb.coordinates).all()), back.eigenvalues.tolist()
    (True, [1.5, -0.25])
    """
    eigenvalues = None
    normalized = False
    rows = {}
    for linenum, line in enumerate(input, start=1):
        line = line.rstrip("\r\n")
        if not line:
            continue
        fields = line.split("\t")
        try:
            if fields[0] == "#eigenvalues":
                eigenvalues = np.array([float(x) for x in fields[1:]])
            elif fields[0].startswith("#"):
                normalized = "normalized=1" in fields
            else:
                rows[int(fields[0])] = [float(x) for x in fields[1:]]
        except ValueError as e:
            raise FieldFormatError(str(e), linenum=linenum, expected="number")
    if eigenvalues is None:
        raise ParseError("Missing #eigenvalues header")
    if sorted(rows) != list(range(len(rows))):
        raise ParseError("Embedding rows must cover node ids 0..n-1")
    coordinates = np.array([rows[u] for u in range(len(rows))], dtype=np.float64).reshape(len(rows), -1)
    if coordinates.shape[1] != len(eigenvalues):
        raise ParseError(f"Rows have {coordinates.shape[1]} coordinates but there are {len(eigenvalues)} eigenvalues")
    return SpectralEmbedding(eigenvalues=eigenvalues, coordinates=coordinates, normalized=normalized)
