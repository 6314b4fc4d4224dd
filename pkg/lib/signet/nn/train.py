"""
Minibatch training with early stopping on a held-out validation slice.

Inputs may be a numpy array or a scipy sparse matrix with one example per
row; sparse inputs are sliced by row and never densified as a whole.
"""

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from signet.nn import DivergenceError
from signet.nn.optim import (
    make_optimizer,
    OPTIMIZERS,
)

log = logging.getLogger(__name__)

# Rows per model call when a loss is taken over a whole dataset
LOSS_CHUNK = 1024


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    early_stop_patience: int = 5
    validation_fraction: float = 0.1
    seed: int = 0
    min_updates: int = 0

    def validate(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"Unknown optimizer '{self.optimizer}'")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be at least 1")
        if not 0.0 <= self.validation_fraction < 0.5:
            raise ValueError("validation_fraction must lie in [0, 0.5)")
        if self.min_updates < 0:
            raise ValueError("min_updates must be non-negative")

    def epoch_budget(self, n_train):
        """
        Epochs allowed for `n_train` training examples: `epochs`, raised so
        that at least `min_updates` optimizer steps fit in the budget.

        >>> TrainConfig(epochs=30, batch_size=32, min_updates=300).epoch_budget(90)
        100
        >>> TrainConfig(epochs=30, batch_size=32, min_updates=300).epoch_budget(360)
        30
        """
        batches = math.ceil(n_train / self.batch_size)
        return max(self.epochs, math.ceil(self.min_updates / batches))


class TrainHistory:
    """
    Losses recorded by `train_epochs`: the monitored loss before training,
    then per epoch the training loss, the monitored loss and the seconds
    the epoch took.
    """

    def __init__(self, initial_loss=float("nan")):
        self.initial_loss = initial_loss
        self.train_loss = []
        self.val_loss = []
        self.epoch_seconds = []
        self.best_epoch = 0
        self.stopped_early = False

    @property
    def best_loss(self):
        """Monitored loss of the parameters the model ended with."""
        return self.initial_loss if self.best_epoch == 0 else self.val_loss[self.best_epoch - 1]

    @property
    def mean_epoch_seconds(self):
        return float(np.mean(self.epoch_seconds)) if self.epoch_seconds else float("nan")

    def __repr__(self):
        return (
            f"TrainHistory(epochs={len(self.train_loss)}, best_epoch={self.best_epoch}, "
            f"best_loss={self.best_loss:.6g})"
        )


def _snapshot(params):
    return {name: p.copy() for name, p in params.items()}


def _restore(params, saved):
    for name, p in params.items():
        p[...] = saved[name]


def _checked(loss, where):
    if not np.isfinite(loss):
        raise DivergenceError(f"Loss became {loss} {where}")
    return loss


def dataset_loss(model, inputs, targets):
    """Mean loss over all examples, evaluated `LOSS_CHUNK` rows at a time."""
    n = inputs.shape[0]
    if n <= LOSS_CHUNK:
        return model.loss(inputs, targets)
    total = 0.0
    for lo in range(0, n, LOSS_CHUNK):
        hi = min(lo + LOSS_CHUNK, n)
        total += model.loss(inputs[lo:hi], targets[lo:hi]) * (hi - lo)
    return total / n


def train_epochs(model, inputs, targets, config=None):
    """
    Train `model` on `(inputs, targets)` and return `(model, history)`.

    A `validation_fraction` share of the examples is held out (chosen with
    the config's seed) and its loss is monitored after every epoch; with no
    validation examples the training loss is monitored instead. Training
    stops after `early_stop_patience` epochs without improvement and the
    parameters with the lowest monitored loss are restored, the untrained
    parameters included.
    """
    config = config or TrainConfig()
    config.validate()
    if scipy.sparse.issparse(inputs):
        inputs = scipy.sparse.csr_matrix(inputs)
    else:
        inputs = np.asarray(inputs)
    if scipy.sparse.issparse(targets):
        targets = scipy.sparse.csr_matrix(targets)
    else:
        targets = np.asarray(targets)
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("No training examples")
    if targets.shape[0] != n:
        raise ValueError(f"{n} inputs but {targets.shape[0]} targets")

    rng = np.random.default_rng(config.seed)
    n_val = min(int(round(config.validation_fraction * n)), n - 1)
    order = rng.permutation(n)
    val_idx, train_idx = order[:n_val], order[n_val:]
    X, T = inputs[train_idx], targets[train_idx]
    monitor = (inputs[val_idx], targets[val_idx]) if n_val else (X, T)
    n_train = X.shape[0]
    epochs = config.epoch_budget(n_train)

    params = model.params()
    optimizer = make_optimizer(config.optimizer, config.learning_rate)
    history = TrainHistory(initial_loss=_checked(dataset_loss(model, *monitor), "before training"))
    best = history.initial_loss
    saved = _snapshot(params)
    waited = 0
    for epoch in range(1, epochs + 1):
        start = time.perf_counter()
        shuffled = rng.permutation(n_train)
        for lo in range(0, n_train, config.batch_size):
            batch = shuffled[lo : lo + config.batch_size]
            loss, grads = model.loss_and_grads(X[batch], T[batch])
            _checked(loss, f"in epoch {epoch}")
            optimizer.step(params, grads)
        history.epoch_seconds.append(time.perf_counter() - start)
        history.train_loss.append(_checked(dataset_loss(model, X, T), f"after epoch {epoch}"))
        monitored = _checked(dataset_loss(model, *monitor), f"after epoch {epoch}")
        history.val_loss.append(monitored)
        log.debug("epoch %d: train %.6g, monitored %.6g", epoch, history.train_loss[-1], monitored)
        if monitored < best:
            best = monitored
            saved = _snapshot(params)
            history.best_epoch = epoch
            waited = 0
        else:
            waited += 1
            if waited >= config.early_stop_patience:
                history.stopped_early = True
                log.debug("early stop after epoch %d, best epoch %d", epoch, history.best_epoch)
                break
    if history.best_epoch == 0:
        log.warning("no epoch improved on the initial loss %.6g, keeping the untrained parameters", best)
    _restore(params, saved)
    return model, history
