"""
Train/test splits, accuracy and per-run seed derivation.

>>> labels = np.array([0] * 5 + [1] * 5)
>>> train, test = stratified_split(labels, 50, seed=3)
>>> len(train), len(test), sorted(np.bincount(labels[train]).tolist())
(5, 5, [2, 3])
>>> accuracy([1, 0, 1, 1], [1, 1, 1, 0])
0.5
"""

import hashlib

import numpy as np

from signet.graph import UNLABELED


class SplitError(ValueError):
    pass


def child_seed(master, run, name):
    """
    Seed for one consumer of randomness in one run, independent of what
    every other consumer draws.

    >>> child_seed(0, 1, "dae") == child_seed(0, 1, "dae") != child_seed(0, 1, "cnn")
    True
    """
    digest = hashlib.sha256(f"{master}:{run}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def class_quotas(counts, total):
    """
    Split `total` over classes in proportion to `counts`, largest remainder
    first, ties to the lower class.

    >>> class_quotas([5, 5], 5)
    [3, 2]
    >>> class_quotas([900, 100], 200)
    [180, 20]
    """
    counts = np.asarray(counts, dtype=np.float64)
    exact = total * counts / counts.sum()
    quotas = np.floor(exact).astype(np.int64)
    order = np.argsort(-(exact - quotas), kind="stable")
    quotas[order[: total - quotas.sum()]] += 1
    return quotas.tolist()


def stratified_split(labels, ratio, seed, stratify=True):
    """
    Sample `ratio` percent of the labeled nodes for training; the remaining
    labeled nodes are the test set. Returns sorted `(train, test)` id arrays.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if not 0 < ratio < 100:
        raise ValueError(f"ratio {ratio} must lie in (0, 100)")
    nodes = np.flatnonzero(labels != UNLABELED)
    classes = np.unique(labels[nodes])
    if len(classes) < 2:
        raise SplitError("Both classes must be present among the labeled nodes")
    total = _round_half_up(ratio * len(nodes) / 100.0)
    rng = np.random.default_rng(seed)
    if stratify:
        members = [nodes[labels[nodes] == c] for c in classes]
        quotas = class_quotas([len(m) for m in members], total)
        for c, q in zip(classes.tolist(), quotas):
            if q < 1:
                raise SplitError(f"A {ratio}% split leaves class {c} without training nodes")
        train = np.concatenate([rng.permutation(m)[:q] for m, q in zip(members, quotas)])
    else:
        train = rng.permutation(nodes)[:total]
        missing = np.setdiff1d(classes, labels[train])
        if len(missing):
            raise SplitError(f"A {ratio}% split leaves class {missing[0]} without training nodes")
    train = np.sort(train)
    test = np.setdiff1d(nodes, train)
    if len(test) == 0:
        raise SplitError(f"A {ratio}% split leaves no test nodes")
    return train, test


def accuracy(predictions, truth):
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if len(predictions) != len(truth):
        raise ValueError(f"{len(predictions)} predictions for {len(truth)} labels")
    if len(truth) == 0:
        raise ValueError("No predictions to score")
    return float(np.mean(predictions == truth))
