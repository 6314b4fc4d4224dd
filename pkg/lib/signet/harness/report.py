"""
Experiment reports: one row per grid cell, written as CSV, as an aligned
text table, or pivoted with algorithms down and ratios (or k values) across.

>>> report = ExperimentReport([
...     CellResult("cnn", "spectral-vector", 5.0, 30, (0.8, 0.9), 0.25),
...     CellResult("knn", "spectral-vector", 5.0, 30, (0.7, 0.7), None, error="boom"),
... ])
>>> for line in format_table(report):
...     print(line)
algorithm       input_mode  ratio   k  mean_acc  std_acc  epoch_seconds
      cnn  spectral-vector      5  30    0.8500   0.0500       0.250000
      knn  spectral-vector      5  30        NA       NA             NA
"""

import csv

import numpy as np

COLUMNS = ("algorithm", "input_mode", "ratio", "k", "mean_acc", "std_acc", "epoch_seconds")

NA = "NA"


class CellResult:
    """Accuracies of one grid cell over its runs, or the error that stopped it."""

    def __init__(self, algorithm, input_mode, ratio, k, accuracies=(), epoch_seconds=None, error=None):
        self.algorithm = algorithm
        self.input_mode = input_mode
        self.ratio = ratio
        self.k = k
        self.accuracies = tuple(accuracies)
        self.epoch_seconds = epoch_seconds
        self.error = error

    @property
    def failed(self):
        return self.error is not None

    @property
    def mean_acc(self):
        return float(np.mean(self.accuracies)) if self.accuracies and not self.failed else float("nan")

    @property
    def std_acc(self):
        return float(np.std(self.accuracies)) if self.accuracies and not self.failed else float("nan")

    def __repr__(self):
        status = self.error if self.failed else f"mean_acc={self.mean_acc:.4f}"
        return f"CellResult({self.algorithm}, {self.input_mode}, {self.ratio:g}%, k={self.k}, {status})"


class ExperimentReport:
    def __init__(self, rows=None):
        self.rows = list(rows) if rows is not None else []

    @property
    def failures(self):
        return [row for row in self.rows if row.failed]

    def cell(self, algorithm, input_mode, ratio, k):
        for row in self.rows:
            if (row.algorithm, row.input_mode, row.ratio, row.k) == (algorithm, input_mode, ratio, k):
                return row
        raise KeyError((algorithm, input_mode, ratio, k))


def _number(x, fmt):
    return NA if x is None or np.isnan(x) else format(x, fmt)


def report_rows(report):
    """String fields of every report row, header first."""
    rows = [list(COLUMNS)]
    for row in report.rows:
        rows.append(
            [
                row.algorithm,
                row.input_mode,
                format(row.ratio, "g"),
                str(row.k),
                _number(row.mean_acc, ".4f"),
                _number(row.std_acc, ".4f"),
                _number(None if row.failed else row.epoch_seconds, ".6f"),
            ]
        )
    return rows


def write_csv(report, out):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(report_rows(report))


def tabulate(rows, pad=" ", align=None):
    """
    Lines of `rows` with every column padded to its widest entry; columns
    marked "l" in `align` are left aligned, the rest right aligned.
    """
    if len(rows) == 0:
        return []
    lengths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = []
        for i, value in enumerate(row):
            if align and align[i] == "l":
                cells.append(value.ljust(lengths[i]))
            else:
                cells.append(value.rjust(lengths[i]))
        lines.append(pad.join(cells).rstrip())
    return lines


def format_table(report):
    return tabulate(report_rows(report), pad="  ")


def pivot(report, across="ratio"):
    """
    Mean accuracies (percent) with one line per input mode, algorithm and
    value of the other grid axis, and one column per value of `across`
    ("ratio" or "k").
    """
    if across not in ("ratio", "k"):
        raise ValueError("Can only pivot across 'ratio' or 'k'")
    other = "k" if across == "ratio" else "ratio"
    keys = sorted({getattr(row, across) for row in report.rows})
    lines = {}
    for row in report.rows:
        cells = lines.setdefault((row.input_mode, row.algorithm, getattr(row, other)), {})
        cells[getattr(row, across)] = _number(100.0 * row.mean_acc, ".2f")
    rows = [["input_mode", "algorithm", other] + [format(key, "g") for key in keys]]
    for (input_mode, algorithm, value), cells in lines.items():
        rows.append([input_mode, algorithm, format(value, "g")] + [cells.get(key, NA) for key in keys])
    return tabulate(rows, pad="  ", align="llr" + "r" * len(keys))
