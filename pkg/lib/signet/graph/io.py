"""
Reading and writing the delimited text files signet works with: signed edge
lists, node label files and edit logs.

All files are UTF-8 text with one record per line. Lines starting with `#`
and blank lines are skipped. Edge-list and label fields may be separated by
tabs or runs of spaces; edit-log fields must be tab separated since page
titles contain spaces.

>>> g = read_edge_list(["# a triangle", "0\\t1\\t+1", "1\\t2\\t-1", "", "2 0 1"])
>>> g
SignedGraph(n=3, positive=2, negative=1)
>>> read_edge_list(["0\\t1\\t+1", "1\\t0\\t-1"])
Traceback (most recent call last):
    ...
signet.graph.ConflictingSignError: Edge (0, 1) given with both signs on line 2
"""

import logging

import numpy as np

from signet.graph import (
    BENIGN,
    ConflictingSignError,
    FRAUD,
    GraphError,
    SelfLoopError,
    SignedGraph,
    UNLABELED,
)
from signet.graph.coedit import EditRecord

log = logging.getLogger(__name__)

SIGNS = {"+1": 1, "1": 1, "+": 1, "-1": -1, "-": -1}


class ParseError(Exception):
    def __init__(self, *args, **kwargs):
        Exception.__init__(self, *args)
        self.linenum = kwargs.get("linenum", None)

    def __str__(self):
        if self.linenum:
            return Exception.__str__(self) + " on line " + str(self.linenum)
        else:
            return Exception.__str__(self)


class FieldFormatError(ParseError):
    def __init__(self, *args, **kwargs):
        ParseError.__init__(self, *args, **kwargs)
        self.expected = kwargs.get("expected", None)

    def __str__(self):
        if self.expected:
            return ParseError.__str__(self) + ", " + self.expected + " expected"
        else:
            return ParseError.__str__(self)


class RecordReader:
    """
    Iterate the data lines of a file as `(linenum, fields)` pairs, skipping
    comments and blank lines. `sep=None` splits on any whitespace.
    """

    def __init__(self, input, sep=None, comment_lines_startswith=("#",)):
        self.input_iter = iter(input)
        self.sep = sep
        self.linenum = 0
        self.comment_lines_startswith = comment_lines_startswith

    def __iter__(self):
        return self

    def __next__(self):
        while True:
            line = next(self.input_iter)
            self.linenum += 1
            line = line.rstrip("\r\n")
            if line.strip() == "" or line.startswith(self.comment_lines_startswith):
                continue
            return self.linenum, line.split(self.sep)


def _open(path_or_lines):
    if isinstance(path_or_lines, str):
        return open(path_or_lines, encoding="utf-8")
    return path_or_lines


def _parse_int(field, linenum, what):
    try:
        return int(field)
    except ValueError:
        raise FieldFormatError(f"Could not parse {what} '{field}'", linenum=linenum, expected="integer")


def read_edge_list(input, n=None):
    """
    Build a `SignedGraph` from `u v sign` lines. The node count is `n` when
    given, else the `nodes=N` entry of a `#` header line written by
    `write_edge_list`, else one more than the largest id seen.
    """
    signs = {}
    n_seen = 0
    declared = 0
    for linenum, fields in RecordReader(input, comment_lines_startswith=()):
        if fields[0].startswith("#"):
            for field in fields:
                if field.startswith("nodes="):
                    declared = _parse_int(field[len("nodes=") :], linenum, "node count")
            continue
        if len(fields) != 3:
            raise ParseError(f"Expected 3 fields (u, v, sign), found {len(fields)}", linenum=linenum)
        u = _parse_int(fields[0], linenum, "node id")
        v = _parse_int(fields[1], linenum, "node id")
        if u < 0 or v < 0:
            raise ParseError("Node ids must be non-negative", linenum=linenum)
        if fields[2] not in SIGNS:
            raise FieldFormatError(f"Could not parse sign '{fields[2]}'", linenum=linenum, expected="+1 or -1")
        sign = SIGNS[fields[2]]
        if u == v:
            raise SelfLoopError(f"Self-loop on node {u} on line {linenum}")
        key = (u, v) if u < v else (v, u)
        previous = signs.setdefault(key, sign)
        if previous != sign:
            raise ConflictingSignError(f"Edge ({key[0]}, {key[1]}) given with both signs on line {linenum}")
        n_seen = max(n_seen, u + 1, v + 1)
    if n is None:
        n = max(n_seen, declared)
    elif n < n_seen:
        raise GraphError(f"Edge list mentions node {n_seen - 1} but the graph has only {n} nodes")
    graph = SignedGraph.from_sign_map(n, signs)
    log.info("read %d nodes, %d positive and %d negative edges", graph.n, graph.n_positive, graph.n_negative)
    return graph


def load_edge_list(path, n=None):
    with _open(path) as f:
        return read_edge_list(f, n=n)


def load_labels(path, graph, by_name=None):
    """
    Attach labels read from `node label` lines to `graph` and return the
    labeled copy. Nodes are matched by user name when the graph has names
    (or `by_name` is true), otherwise by integer id. Nodes missing from the
    file stay `UNLABELED`.
    """
    if by_name is None:
        by_name = graph.names is not None
    index = {name: u for u, name in enumerate(graph.names)} if by_name else None
    labels = np.full(graph.n, UNLABELED, dtype=np.int64)
    with _open(path) as f:
        for linenum, fields in RecordReader(f, sep="\t" if by_name else None):
            if len(fields) != 2:
                raise ParseError(f"Expected 2 fields (node, label), found {len(fields)}", linenum=linenum)
            if by_name:
                if fields[0] not in index:
                    log.debug("label for unknown user %s ignored", fields[0])
                    continue
                u = index[fields[0]]
            else:
                u = _parse_int(fields[0], linenum, "node id")
                if not 0 <= u < graph.n:
                    raise ParseError(f"Node id {u} outside [0, {graph.n})", linenum=linenum)
            label = _parse_int(fields[1].strip(), linenum, "label")
            if label not in (BENIGN, FRAUD):
                raise FieldFormatError(f"Bad label {label}", linenum=linenum, expected="0 or 1")
            labels[u] = label
    missing = int((labels == UNLABELED).sum())
    if missing:
        log.warning("%d of %d nodes have no label", missing, graph.n)
    return graph.with_labels(labels)


def read_edit_log(input):
    """
    Parse `user<TAB>page_title<TAB>reverted` lines into `EditRecord`s.

    >>> read_edit_log(["alice\\tMain Page\\t0", "bob\\tTalk:Main Page\\t1"])
    [EditRecord(user='alice', page_title='Main Page', reverted=False), EditRecord(user='bob', page_title='Talk:Main Page', reverted=True)]
    """
    records = []
    for linenum, fields in RecordReader(input, sep="\t"):
        if len(fields) != 3:
            raise ParseError(f"Expected 3 tab separated fields, found {len(fields)}", linenum=linenum)
        user, title, reverted = fields
        if reverted.strip() not in ("0", "1"):
            raise FieldFormatError(f"Could not parse revert flag '{reverted}'", linenum=linenum, expected="0 or 1")
        try:
            records.append(EditRecord.make(user, title, reverted.strip() == "1"))
        except ValueError as e:
            raise ParseError(str(e), linenum=linenum)
    return records


def load_edit_log(path):
    with _open(path) as f:
        return read_edit_log(f)


def write_edge_list(graph, out):
    print(f"# nodes={graph.n} positive={graph.n_positive} negative={graph.n_negative}", file=out)
    for u, v, sign in graph.edges():
        print(f"{u}\t{v}\t{sign:+d}", file=out)


def write_labels(graph, out):
    if graph.labels is None:
        raise GraphError("Graph has no labels to write")
    for u in range(graph.n):
        if graph.labels[u] != UNLABELED:
            node = graph.names[u] if graph.names is not None else u
            print(f"{node}\t{graph.labels[u]}", file=out)


def write_names(graph, out):
    for u, name in enumerate(graph.names):
        print(f"{u}\t{name}", file=out)


def load_names(path, graph):
    """Attach the `node<TAB>name` lines written by `write_names` to `graph`."""
    names = [None] * graph.n
    with _open(path) as f:
        for linenum, fields in RecordReader(f, sep="\t"):
            if len(fields) != 2:
                raise ParseError(f"Expected 2 fields (node, name), found {len(fields)}", linenum=linenum)
            u = _parse_int(fields[0], linenum, "node id")
            if not 0 <= u < graph.n:
                raise ParseError(f"Node id {u} outside [0, {graph.n})", linenum=linenum)
            names[u] = fields[1]
    if None in names:
        raise ParseError(f"No name for node {names.index(None)}")
    return graph.with_names(names)


def graph_stats(graph):
    """
    Counts in the layout of a dataset summary table: users (benign, fraud)
    and links (positive, negative).

    >>> g = SignedGraph.from_edges(3, [(0, 1, 1), (1, 2, -1)], labels=[0, 0, 1])
    >>> graph_stats(g)
    {'users': 3, 'benign': 2, 'fraud': 1, 'links': 2, 'positive': 1, 'negative': 1}
    """
    stats = {"users": graph.n}
    if graph.labels is not None:
        stats["benign"] = int((graph.labels == BENIGN).sum())
        stats["fraud"] = int((graph.labels == FRAUD).sum())
    stats.update(links=graph.n_edges, positive=graph.n_positive, negative=graph.n_negative)
    return stats
