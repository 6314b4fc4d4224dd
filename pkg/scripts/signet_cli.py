#!/usr/bin/env python3

"""Detect fraudulent nodes of a signed graph from their spectral coordinates.

Exit status is 0 on success, 1 on bad input and 2 when some cells of an
experiment grid failed.
"""

import argparse
import logging
import sys
from contextlib import nullcontext
from dataclasses import replace

from signet.features import (
    as_vectors,
    build_inputs,
    INPUT_MODES,
    SPECTRAL_VECTOR,
)
from signet.graph import GraphError
from signet.graph.coedit import build_coedit_graph
from signet.graph.io import (
    graph_stats,
    load_edge_list,
    load_edit_log,
    load_labels,
    load_names,
    ParseError,
    write_edge_list,
    write_labels,
    write_names,
)
from signet.graph.random_graphs import (
    GeneratorConfig,
    generate_planted_graph,
)
from signet.harness.config import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    load_config,
)
from signet.harness.experiment import (
    cnn_matrices,
    fit_cnn,
    fit_dae,
    run_experiment,
)
from signet.harness.report import (
    format_table,
    pivot,
    write_csv,
)
from signet.harness.split import (
    accuracy,
    child_seed,
    SplitError,
    stratified_split,
)
from signet.nn.checkpoint import (
    CheckpointError,
    load_model,
    save_model,
)
from signet.spectral import (
    EIGEN_ORDERS,
    spectral_embedding,
    write_embedding,
)

LOG_LEVELS = {"info": logging.INFO, "debug": logging.DEBUG, "silent": logging.ERROR}

logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
log = logging.getLogger("signet")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _output(path):
    return nullcontext(sys.stdout) if path in (None, "-") else open(path, "w", encoding="utf-8")


def _print_stats(graph, out):
    print("\t".join(f"{key}={value}" for key, value in graph_stats(graph).items()), file=out)


def _read_graph(args):
    graph = load_edge_list(args.edges)
    if getattr(args, "names", None):
        graph = load_names(args.names, graph)
    if getattr(args, "labels", None):
        graph = load_labels(args.labels, graph)
    return graph


def cmd_generate(args):
    params = GeneratorConfig(
        p_within=args.p_within,
        p_across=args.p_across,
        fraud_degree=args.fraud_degree,
        fraud_negative_fraction=args.fraud_negative_fraction,
    )
    graph = generate_planted_graph(args.benign, args.fraud, params, seed=args.seed)
    with _output(args.edges) as out:
        write_edge_list(graph, out)
    with open(args.labels, "w", encoding="utf-8") as out:
        write_labels(graph, out)
    _print_stats(graph, sys.stderr)
    return EXIT_OK


def cmd_coedit(args):
    graph = build_coedit_graph(load_edit_log(args.edit_log))
    with _output(args.edges) as out:
        write_edge_list(graph, out)
    with open(args.names, "w", encoding="utf-8") as out:
        write_names(graph, out)
    _print_stats(graph, sys.stderr)
    return EXIT_OK


def cmd_embed(args):
    graph = _read_graph(args)
    emb = spectral_embedding(graph, args.k, normalize=not args.raw, tol=args.tol, eigen_order=args.eigen_order)
    with _output(args.output) as out:
        write_embedding(emb, out)
    return EXIT_OK


def _node_inputs(graph, settings):
    emb = None
    if settings["input_mode"] != "adjacency-row":
        emb = spectral_embedding(graph, settings["k"], eigen_order=settings["eigen_order"])
    return build_inputs(graph, emb, settings["input_mode"], s=settings["s"])


def _split(graph, settings):
    return stratified_split(graph.labels, settings["ratio"], child_seed(settings["seed"], 0, "split"))


def cmd_train(args):
    graph = _read_graph(args)
    if graph.labels is None:
        raise GraphError("Training needs node labels (--labels)")
    settings = {
        "input_mode": args.input_mode,
        "k": args.k,
        "s": args.s,
        "eigen_order": args.eigen_order,
        "ratio": args.ratio,
        "seed": args.seed,
    }
    config = ExperimentConfig(seed=args.seed)
    if args.config:
        config = load_config(args.config, config)
    if args.epochs is not None:
        # an explicit epoch count also drops the per-model epoch and update floors
        config = replace(
            config,
            train=replace(config.train, epochs=args.epochs, min_updates=0),
            dae=replace(config.dae, epochs=None, min_updates=None),
            cnn=replace(config.cnn, epochs=None, min_updates=None),
        )
    inputs = _node_inputs(graph, settings)
    train, test = _split(graph, settings)
    labels = graph.labels
    seed = child_seed(args.seed, 0, args.algo)
    if args.algo == "dae":
        X = as_vectors(inputs)
        model, histories = fit_dae(config, X, labels, train, seed)
        test_inputs = X[test]
    else:
        matrices = cnn_matrices(inputs)
        model, history = fit_cnn(config, matrices, labels, train, seed)
        histories = [history]
        test_inputs = matrices[test]
    acc = accuracy(model.predict_proba(test_inputs).argmax(axis=1), labels[test])
    save_model(model, args.checkpoint, config.train_for(getattr(config, args.algo)), extra=settings)
    epochs = sum(len(h.train_loss) for h in histories)
    print(f"{args.algo}\ttrain={len(train)}\ttest={len(test)}\tepochs={epochs}\taccuracy={acc:.4f}")
    return EXIT_OK


def cmd_eval(args):
    model, header = load_model(args.checkpoint)
    settings = header["extra"]
    graph = _read_graph(args)
    if graph.labels is None:
        raise GraphError("Evaluation needs node labels (--labels)")
    inputs = _node_inputs(graph, settings)
    inputs = as_vectors(inputs) if model.kind == "dae" else cnn_matrices(inputs)
    if args.all:
        nodes = graph.labeled_nodes()
    else:
        _, nodes = _split(graph, settings)
    probabilities = model.predict_proba(inputs[nodes])
    predictions = probabilities.argmax(axis=1)
    if args.predictions:
        with open(args.predictions, "w", encoding="utf-8") as out:
            for u, p, c in zip(nodes.tolist(), probabilities[:, 1].tolist(), predictions.tolist()):
                print(f"{u}\t{p!r}\t{c}", file=out)
    print(f"{model.kind}\tnodes={len(nodes)}\taccuracy={accuracy(predictions, graph.labels[nodes]):.4f}")
    return EXIT_OK


def cmd_experiment(args):
    config = ExperimentConfig()
    if args.config:
        config = load_config(args.config, config)
    overrides = {
        "graph": args.edges,
        "names": args.names,
        "labels": args.labels,
        "ks": args.k,
        "ratios": args.ratio,
        "runs": args.runs,
        "seed": args.seed,
        "input_modes": args.input_mode,
        "algorithms": args.algo,
        "jobs": args.jobs,
        "eigen_order": args.eigen_order,
    }
    config = replace(config, **{key: value for key, value in overrides.items() if value is not None})
    if args.no_stratify:
        config = replace(config, stratify=False)
    if args.no_timings:
        config = replace(config, record_timings=False)
    report = run_experiment(config.validate())
    with _output(args.output) as out:
        if args.format == "csv":
            write_csv(report, out)
        else:
            lines = format_table(report) if args.format == "table" else pivot(report, across=args.across)
            print("\n".join(lines), file=out)
    if report.failures:
        log.error("%d of %d cells failed", len(report.failures), len(report.rows))
        return EXIT_PARTIAL
    return EXIT_OK


def _graph_options(parser, labels=True):
    parser.add_argument("--edges", metavar="FILE", required=True, help="Signed edge list (u v sign)")
    parser.add_argument("--names", metavar="FILE", help="Node names written by 'coedit'")
    if labels:
        parser.add_argument("--labels", metavar="FILE", help="Node labels (node label)")


def _model_input_options(parser):
    parser.add_argument("--input-mode", choices=INPUT_MODES, default=SPECTRAL_VECTOR, help="Classifier input")
    parser.add_argument("--k", type=int, default=30, help="Spectral dimension")
    parser.add_argument("--s", type=int, default=1, help="Neighborhood radius")
    parser.add_argument("--eigen-order", choices=EIGEN_ORDERS, default="algebraic", help="Eigenvalue ordering")
    parser.add_argument("--ratio", type=float, default=20.0, help="Training split, percent of labeled nodes")
    parser.add_argument("--seed", type=int, default=0, help="Seed for the split")


def _comma_list(convert):
    return lambda text: tuple(convert(x) for x in text.split(","))


def build_parser():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("-l", "--log-level", choices=list(LOG_LEVELS.keys()), default="info", help="Verbosity level")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("generate", help="Write a random graph with planted fraud nodes")
    p.add_argument("--benign", type=int, default=1000, help="Number of benign nodes")
    p.add_argument("--fraud", type=int, default=1000, help="Number of fraud nodes")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--p-within", type=float, default=GeneratorConfig.p_within)
    p.add_argument("--p-across", type=float, default=GeneratorConfig.p_across)
    p.add_argument("--fraud-degree", type=int, default=GeneratorConfig.fraud_degree)
    p.add_argument("--fraud-negative-fraction", type=float, default=GeneratorConfig.fraud_negative_fraction)
    p.add_argument("--edges", metavar="FILE", default="-", help="Edge list output")
    p.add_argument("--labels", metavar="FILE", required=True, help="Label output")
    p.set_defaults(func=cmd_generate)

    p = commands.add_parser("coedit", help="Build a co-edit graph from an edit log")
    p.add_argument("edit_log", help="user<TAB>page title<TAB>reverted lines")
    p.add_argument("--edges", metavar="FILE", default="-", help="Edge list output")
    p.add_argument("--names", metavar="FILE", required=True, help="Node name output")
    p.set_defaults(func=cmd_coedit)

    p = commands.add_parser("embed", help="Write the spectral coordinates of every node")
    _graph_options(p, labels=False)
    p.add_argument("--k", type=int, default=30, help="Spectral dimension")
    p.add_argument("--tol", type=float, default=1e-8, help="Eigenpair residual tolerance")
    p.add_argument("--eigen-order", choices=EIGEN_ORDERS, default="algebraic", help="Eigenvalue ordering")
    p.add_argument("--raw", action="store_true", help="Keep eigenvector rows unnormalized")
    p.add_argument("-o", "--output", metavar="FILE", default="-")
    p.set_defaults(func=cmd_embed)

    p = commands.add_parser("train", help="Train a DAE or CNN classifier and save a checkpoint")
    _graph_options(p)
    _model_input_options(p)
    p.add_argument("--algo", choices=("dae", "cnn"), default="cnn")
    p.add_argument("--config", metavar="FILE", help="key = value hyperparameter file")
    p.add_argument("--epochs", type=int, help="Training epoch budget")
    p.add_argument("--checkpoint", metavar="FILE", required=True, help="Checkpoint output (.npz)")
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("eval", help="Score a saved classifier")
    p.add_argument("checkpoint", help="Checkpoint written by 'train'")
    _graph_options(p)
    p.add_argument("--all", action="store_true", help="Score every labeled node, not just the test split")
    p.add_argument("--predictions", metavar="FILE", help="Write node, fraud probability and class")
    p.set_defaults(func=cmd_eval)

    p = commands.add_parser("experiment", help="Run the experiment grid")
    p.add_argument("--config", metavar="FILE", help="key = value experiment file")
    p.add_argument("--edges", metavar="FILE", help="Signed edge list; a planted graph is generated without one")
    p.add_argument("--names", metavar="FILE")
    p.add_argument("--labels", metavar="FILE")
    p.add_argument("--k", type=_comma_list(int), help="Spectral dimensions, comma separated")
    p.add_argument("--ratio", type=_comma_list(float), help="Training splits in percent, comma separated")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="Master seed")
    p.add_argument("--input-mode", type=_comma_list(str), help=f"Any of {', '.join(INPUT_MODES)}")
    p.add_argument("--algo", type=_comma_list(str), help=f"Any of {', '.join(ALGORITHMS)}")
    p.add_argument("--jobs", type=int, help="Grid cells run in parallel")
    p.add_argument("--eigen-order", choices=EIGEN_ORDERS)
    p.add_argument("--no-stratify", action="store_true", help="Sample splits without stratifying by class")
    p.add_argument("--no-timings", action="store_true", help="Report NA instead of epoch times")
    p.add_argument("--format", choices=("csv", "table", "pivot"), default="csv")
    p.add_argument("--across", choices=("ratio", "k"), default="ratio", help="Pivot columns")
    p.add_argument("-o", "--output", metavar="FILE", default="-")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    log.setLevel(LOG_LEVELS[args.log_level])
    try:
        return args.func(args)
    except (
        CheckpointError,
        ConfigError,
        GraphError,
        OSError,
        ParseError,
        SplitError,
        ValueError,
    ) as e:
        print(f"signet {args.command}: {e}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
