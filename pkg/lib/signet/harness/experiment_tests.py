"""
Tests for `signet.harness.experiment` on a small planted graph.
"""

from dataclasses import replace
from io import StringIO

import numpy as np
import pytest
import scipy.sparse

from signet.features import build_inputs
from signet.graph import SignedGraph
from signet.graph.io import (
    write_edge_list,
    write_labels,
)
from signet.graph.random_graphs import (
    generate_planted_graph,
    GeneratorConfig,
)
from signet.harness.config import (
    CnnParams,
    DaeParams,
    ExperimentConfig,
    KnnParams,
)
from signet.harness.experiment import (
    cnn_matrices,
    fit_cnn,
    fit_dae,
    grid,
    load_graph,
    matrix_shape,
    run_experiment,
)
from signet.harness.report import write_csv
from signet.nn.train import TrainConfig

GENERATOR = GeneratorConfig(p_within=0.2, p_across=0.02, fraud_degree=5)


@pytest.fixture(scope="module")
def graph():
    return generate_planted_graph(60, 20, GENERATOR, seed=1)


def small_config(**kwargs):
    config = ExperimentConfig(
        ks=(4,),
        ratios=(20.0, 50.0),
        runs=2,
        record_timings=False,
        train=TrainConfig(epochs=3),
        dae=DaeParams(hidden_dims=(8, 4), min_updates=0),
        cnn=CnnParams(n_filters=6, min_updates=0),
    )
    return replace(config, **kwargs)


def csv_text(report):
    out = StringIO()
    write_csv(report, out)
    return out.getvalue()


def test_single_cell(graph):
    report = run_experiment(small_config(runs=1, ratios=(20.0,), algorithms=("knn",)), graph)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert (row.algorithm, row.input_mode, row.ratio, row.k) == ("knn", "spectral-vector", 20.0, 4)
    assert len(row.accuracies) == 1
    assert 0.0 <= row.mean_acc <= 1.0


def test_full_grid_is_reproducible(graph):
    config = small_config(input_modes=("spectral-vector", "adjacency-row"))
    first = run_experiment(config, graph)
    assert [(r.algorithm, r.input_mode, r.ratio, r.k) for r in first.rows] == grid(config)
    assert len(first.rows) == 2 * 2 * 4
    assert not first.failures
    assert all(len(row.accuracies) == 2 for row in first.rows)
    assert all(row.epoch_seconds is None for row in first.rows)
    assert csv_text(run_experiment(config, graph)) == csv_text(first)


def test_parallel_cells_match_serial(graph):
    config = small_config(algorithms=("knn", "svm", "cnn"), input_modes=("spectral-matrix", "alpha-only"))
    assert csv_text(run_experiment(replace(config, jobs=3), graph)) == csv_text(run_experiment(config, graph))


def test_failing_cell_does_not_stop_the_grid(graph):
    config = small_config(algorithms=("knn", "svm"), knn=KnnParams(k=20))
    report = run_experiment(config, graph)
    assert len(report.rows) == 4
    failed = report.failures
    assert [(row.algorithm, row.ratio) for row in failed] == [("knn", 20.0)]
    assert failed[0].error.startswith("ValueError")
    assert "NA,NA,NA" in csv_text(report)


def test_failed_embedding_only_fails_spectral_cells(graph):
    config = small_config(ks=(500,), algorithms=("knn",), input_modes=("spectral-vector", "adjacency-row"))
    report = run_experiment(config, graph)
    assert [row.failed for row in report.rows] == [True, True, False, False]


def test_timings_recorded(graph):
    report = run_experiment(small_config(record_timings=True, runs=1, algorithms=("knn", "dae")), graph)
    assert all(row.epoch_seconds is not None and row.epoch_seconds >= 0 for row in report.rows)


def test_unlabeled_graph_rejected():
    with pytest.raises(ValueError):
        run_experiment(small_config(), SignedGraph.from_edges(3, [(0, 1, 1), (1, 2, -1)]))


def test_graph_from_files(tmp_path, graph):
    edges, labels = tmp_path / "g.tsv", tmp_path / "labels.tsv"
    with open(edges, "w") as out:
        write_edge_list(graph, out)
    with open(labels, "w") as out:
        write_labels(graph, out)
    loaded = load_graph(small_config(graph=str(edges), labels=str(labels)))
    assert list(loaded.edges()) == list(graph.edges())
    assert (loaded.labels == graph.labels).all()


def test_generated_graph_follows_config():
    config = small_config(n_benign=60, n_fraud=20, graph_seed=1, generator=GENERATOR)
    assert list(load_graph(config).edges()) == list(generate_planted_graph(60, 20, GENERATOR, seed=1).edges())


def test_adjacency_rows_stay_sparse(graph):
    inputs = build_inputs(graph, None, "adjacency-row")
    matrices = cnn_matrices(inputs)
    assert scipy.sparse.issparse(matrices)
    assert matrix_shape(matrices) == (1, graph.n)
    train = np.arange(0, graph.n, 4)
    bank, _ = fit_cnn(small_config(), matrices, graph.labels, train, seed=1)
    assert (bank.n_rows, bank.k, bank.widths) == (1, graph.n, (1,))
    stack, _ = fit_dae(small_config(), inputs, graph.labels, train, seed=1)
    assert stack.input_dim == graph.n


def test_model_sections_set_the_epoch_budget(graph):
    inputs = build_inputs(graph, None, "adjacency-row")
    train = np.arange(0, graph.n, 4)
    config = small_config(cnn=CnnParams(n_filters=6, epochs=2, min_updates=0))
    _, history = fit_cnn(config, inputs, graph.labels, train, seed=1)
    assert len(history.train_loss) <= 2
    config = small_config(cnn=CnnParams(n_filters=6, learning_rate=0.0, min_updates=40))
    _, history = fit_cnn(config, inputs, graph.labels, train, seed=1)
    # 18 training rows fit one batch; a zero learning rate stops after the patience
    assert history.stopped_early
    assert len(history.train_loss) == config.train.early_stop_patience
