"""
The experiment grid: every combination of algorithm, input mode, split
ratio and spectral dimension `k`, each evaluated over a number of runs.

The embedding is computed once per `k` and the node inputs once per
`(k, input mode)`; every cell reuses them. Within a run all algorithms see
the same train/test split, while each algorithm draws its own seed so none
depends on how much randomness another consumes.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import scipy.sparse

from signet import (
    cnn,
    dae,
)
from signet.baselines.knn import KnnModel
from signet.baselines.svm import svm_train
from signet.features import (
    ADJACENCY_ROW,
    as_vectors,
    build_inputs,
)
from signet.graph.io import (
    load_edge_list,
    load_labels,
    load_names,
)
from signet.graph.random_graphs import generate_planted_graph
from signet.harness.report import (
    CellResult,
    ExperimentReport,
)
from signet.harness.split import (
    accuracy,
    child_seed,
    stratified_split,
)
from signet.spectral import spectral_embedding

log = logging.getLogger(__name__)


def load_graph(config):
    """The configured graph: read from files, or generated when no file is named."""
    if config.graph:
        graph = load_edge_list(config.graph)
        if config.names:
            graph = load_names(config.names, graph)
        if config.labels:
            graph = load_labels(config.labels, graph)
        return graph
    return generate_planted_graph(config.n_benign, config.n_fraud, config.generator, seed=config.graph_seed)


def _train_config(config, params, seed):
    return replace(config.train_for(params), seed=seed % 2**32)


def _epoch_seconds(histories):
    seconds = [s for history in histories for s in history.epoch_seconds]
    return float(np.mean(seconds)) if seconds else None


def run_knn(config, inputs, labels, train, test, seed):
    X = as_vectors(inputs)
    start = time.perf_counter()
    model = KnnModel(X[train], labels[train], k=config.knn.k)
    predictions = model.predict(X[test])
    return predictions, time.perf_counter() - start


def run_svm(config, inputs, labels, train, test, seed):
    X = as_vectors(inputs)
    params = config.svm
    start = time.perf_counter()
    model = svm_train(X[train], labels[train], C=params.C, gamma=params.gamma, tol=params.tol)
    elapsed = time.perf_counter() - start
    return model.predict(X[test]), elapsed


def fit_dae(config, X, labels, train, seed):
    """Pretrain (unless configured from scratch) and fine-tune an autoencoder stack."""
    params = config.dae
    train_config = _train_config(config, params, seed)
    stack = dae.AutoencoderStack(
        X.shape[1],
        hidden_dims=params.hidden_dims,
        activation=params.activation,
        output_activation=params.output_activation,
        seed=seed % 2**32,
    )
    histories = []
    if not params.from_scratch:
        unlabeled = X if params.pretrain_on == "all" else X[train]
        stack, pretrain_histories = dae.pretrain(stack, unlabeled, train_config, mode=params.pretrain_mode)
        histories.extend(pretrain_histories)
    stack, history = dae.fine_tune(stack, X[train], labels[train], train_config, from_scratch=params.from_scratch)
    histories.append(history)
    return stack, histories


def cnn_matrices(inputs):
    """
    Input matrices for the CNN. Dense adjacency rows become `1 x n`
    matrices; a sparse batch is already read as one `1 x n` row per node.
    """
    if scipy.sparse.issparse(inputs):
        return inputs
    return inputs[:, np.newaxis, :] if inputs.ndim == 2 else inputs


def matrix_shape(matrices):
    """`(rows, columns)` of each input matrix in a CNN batch."""
    if scipy.sparse.issparse(matrices):
        return 1, matrices.shape[1]
    return matrices.shape[1], matrices.shape[2]


def fit_cnn(config, matrices, labels, train, seed):
    params = config.cnn
    n_rows, k = matrix_shape(matrices)
    widths = tuple(m for m in params.widths if m <= n_rows)
    bank = cnn.ConvFilterBank(
        n_rows,
        k,
        widths=widths,
        n_filters=params.n_filters,
        activation=params.activation,
        seed=seed % 2**32,
    )
    return cnn.train(bank, matrices[train], labels[train], _train_config(config, params, seed))


def run_dae(config, inputs, labels, train, test, seed):
    X = as_vectors(inputs)
    stack, histories = fit_dae(config, X, labels, train, seed)
    return dae.predict(stack, X[test]).argmax(axis=1), _epoch_seconds(histories)


def run_cnn(config, inputs, labels, train, test, seed):
    matrices = cnn_matrices(inputs)
    bank, history = fit_cnn(config, matrices, labels, train, seed)
    return cnn.forward(bank, matrices[test]).argmax(axis=1), _epoch_seconds([history])


RUNNERS = {
    "knn": run_knn,
    "svm": run_svm,
    "dae": run_dae,
    "cnn": run_cnn,
}


class _Inputs:
    """Embeddings per k and node inputs per (k, mode), computed once."""

    def __init__(self, graph, config):
        self.graph = graph
        self.config = config
        self.embeddings = {}
        self.inputs = {}

    def prepare(self):
        spectral = any(mode != ADJACENCY_ROW for mode in self.config.input_modes)
        for k in self.config.ks if spectral else ():
            try:
                self.embeddings[k] = spectral_embedding(
                    self.graph, k, tol=self.config.eigen_tol, eigen_order=self.config.eigen_order
                )
            except Exception as e:
                log.exception("embedding with k=%d failed", k)
                self.embeddings[k] = e
        for k in self.config.ks:
            for mode in self.config.input_modes:
                if not isinstance(self.embeddings.get(k), Exception):
                    self.get(k, mode)

    def get(self, k, mode):
        key = (None, mode) if mode == ADJACENCY_ROW else (k, mode)
        if key not in self.inputs:
            emb = self.embeddings.get(k)
            if mode != ADJACENCY_ROW and isinstance(emb, Exception):
                raise emb
            self.inputs[key] = build_inputs(self.graph, emb, mode, s=self.config.s)
        return self.inputs[key]


def grid(config):
    """The cells of the experiment, in report order."""
    return [
        (algorithm, mode, float(ratio), k)
        for k in config.ks
        for mode in config.input_modes
        for ratio in config.ratios
        for algorithm in config.algorithms
    ]


def run_cell(config, data, labels, cell):
    algorithm, mode, ratio, k = cell
    try:
        inputs = data.get(k, mode)
        accuracies, seconds = [], []
        for run in range(config.runs):
            split_seed = child_seed(config.seed, run, f"split:{ratio:g}")
            train, test = stratified_split(labels, ratio, split_seed, stratify=config.stratify)
            seed = child_seed(config.seed, run, algorithm)
            predictions, elapsed = RUNNERS[algorithm](config, inputs, labels, train, test, seed)
            accuracies.append(accuracy(predictions, labels[test]))
            if elapsed is not None:
                seconds.append(elapsed)
    except Exception as e:
        log.exception("cell %s / %s / %g%% / k=%d failed", algorithm, mode, ratio, k)
        return CellResult(algorithm, mode, ratio, k, error=f"{type(e).__name__}: {e}")
    epoch_seconds = float(np.mean(seconds)) if seconds and config.record_timings else None
    result = CellResult(algorithm, mode, ratio, k, tuple(accuracies), epoch_seconds)
    log.info("%s / %s / %g%% / k=%d: mean accuracy %.4f", algorithm, mode, ratio, k, result.mean_acc)
    return result


def run_experiment(config, graph=None):
    """
    Run every cell of the configured grid and return an `ExperimentReport`
    whose rows follow `grid(config)`. A failing cell is logged and recorded
    with its error; the remaining cells still run.
    """
    config.validate()
    graph = graph if graph is not None else load_graph(config)
    labels = graph.labels
    if labels is None:
        raise ValueError("The experiment graph has no node labels")
    data = _Inputs(graph, config)
    data.prepare()
    cells = grid(config)
    log.info("running %d cells x %d runs on %r", len(cells), config.runs, graph)
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(lambda cell: run_cell(config, data, labels, cell), cells))
    else:
        rows = [run_cell(config, data, labels, cell) for cell in cells]
    return ExperimentReport(rows)
