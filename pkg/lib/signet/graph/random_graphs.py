"""
Random labeled signed graphs with planted fraudsters.

Benign nodes form a two-block signed stochastic block model: positive edges
are dense within a block and negative edges are sparse across blocks. Each
fraud node then links to a fixed number of benign targets chosen uniformly
at random, most of those links negative, in the manner of a random link
attack. Node ids are shuffled so labels do not follow id order.
"""

import logging
from dataclasses import dataclass

import numpy as np

from signet.graph import (
    BENIGN,
    DegenerateConfigError,
    FRAUD,
    SignedGraph,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorConfig:
    p_within: float = 0.02
    p_across: float = 0.002
    fraud_degree: int = 20
    fraud_negative_fraction: float = 0.8

    def validate(self):
        for name in ("p_within", "p_across", "fraud_negative_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DegenerateConfigError(f"{name} = {value} is not a probability")
        if self.fraud_degree < 1:
            raise DegenerateConfigError("fraud_degree must be at least 1")


def block_sizes(n_benign):
    first = (n_benign + 1) // 2
    return first, n_benign - first


def expected_edge_counts(n_benign, n_fraud, config=None):
    """
    Expected numbers of positive and negative edges.

    >>> expected_edge_counts(1000, 1000)
    (8990.0, 16500.0)
    """
    config = config or GeneratorConfig()
    a, b = block_sizes(n_benign)
    within_pairs = a * (a - 1) / 2 + b * (b - 1) / 2
    fraud_links = n_fraud * config.fraud_degree
    positive = config.p_within * within_pairs + fraud_links * (1 - config.fraud_negative_fraction)
    negative = config.p_across * a * b + fraud_links * config.fraud_negative_fraction
    return round(positive, 6), round(negative, 6)


def _sample_pairs(rng, rows, cols, p, same_block):
    """Bernoulli(p) sample of node pairs from `rows` x `cols`."""
    if same_block:
        i, j = np.triu_indices(len(rows), k=1)
    else:
        i, j = np.indices((len(rows), len(cols))).reshape(2, -1)
    keep = rng.random(len(i)) < p
    return rows[i[keep]], cols[j[keep]]


def generate_planted_graph(n_benign, n_fraud, params=None, seed=0):
    config = params or GeneratorConfig()
    if n_benign < 1 or n_fraud < 1:
        raise DegenerateConfigError("Need at least one benign and one fraud node")
    config.validate()
    a, b = block_sizes(n_benign)
    expected_degree = config.p_within * (a - 1) + config.p_across * b
    if expected_degree < 1:
        raise DegenerateConfigError(f"Expected benign degree {expected_degree:.3g} is below 1")
    if config.fraud_degree > n_benign:
        raise DegenerateConfigError("fraud_degree exceeds the number of benign nodes")

    rng = np.random.default_rng(seed)
    n = n_benign + n_fraud
    ids = rng.permutation(n)
    block0, block1, fraud = ids[:a], ids[a:n_benign], ids[n_benign:]
    benign = ids[:n_benign]

    signs = {}

    def add(us, vs, sign):
        for u, v in zip(us.tolist(), vs.tolist()):
            signs[(u, v) if u < v else (v, u)] = sign

    add(*_sample_pairs(rng, block0, block0, config.p_within, True), 1)
    add(*_sample_pairs(rng, block1, block1, config.p_within, True), 1)
    add(*_sample_pairs(rng, block0, block1, config.p_across, False), -1)
    for u in fraud.tolist():
        targets = rng.choice(benign, size=config.fraud_degree, replace=False)
        negative = rng.random(config.fraud_degree) < config.fraud_negative_fraction
        add(np.full(len(targets), u), targets, 1)
        add(np.full(int(negative.sum()), u), targets[negative], -1)

    labels = np.empty(n, dtype=np.int64)
    labels[benign] = BENIGN
    labels[fraud] = FRAUD
    graph = SignedGraph.from_sign_map(n, dict(sorted(signs.items())), labels=labels)
    log.info(
        "planted graph: %d benign, %d fraud, %d positive, %d negative edges",
        n_benign,
        n_fraud,
        graph.n_positive,
        graph.n_negative,
    )
    return graph
