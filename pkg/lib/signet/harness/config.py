"""
Experiment configuration and its `key = value` file format.

One assignment per line; `#` starts a comment and blank lines are ignored.
Keys name `ExperimentConfig` fields (dashes may stand for underscores);
dotted keys reach the per-algorithm sections, e.g. `dae.learning_rate`,
`cnn.n_filters`, `svm.gamma`, `knn.k`, `train.epochs` (shared by the
autoencoder and the CNN) and `generator.fraud_degree`. List values are
comma separated.

`learning_rate`, `epochs` and `min_updates` in the `dae` and `cnn` sections
override the shared `train` values for that model; `none` defers to them.

>>> config = parse_config(["ratios = 5, 20  # percent", "", "cnn.widths = 1,2", "svm.gamma = none"])
>>> config.ratios, config.cnn.widths, config.svm.gamma
((5.0, 20.0), (1, 2), None)
>>> parse_config(["runs = 3", "colour = red"])
Traceback (most recent call last):
  ...
signet.harness.config.ConfigError: Unknown key 'colour' on line 2
"""

import types
import typing
from dataclasses import (
    dataclass,
    field,
    fields,
    replace,
)
from typing import Optional

from pyparsing import (
    alphanums,
    alphas,
    DelimitedList,
    Group,
    ParseException,
    printables,
    python_style_comment,
    StringEnd,
    Suppress,
    Word,
)

from signet.features import (
    INPUT_MODES,
    SPECTRAL_VECTOR,
)
from signet.graph.random_graphs import GeneratorConfig
from signet.nn.train import TrainConfig
from signet.spectral import EIGEN_ORDERS

ALGORITHMS = ("knn", "svm", "dae", "cnn")

ALIASES = {
    "k": "ks",
    "ratio": "ratios",
    "input_mode": "input_modes",
    "algo": "algorithms",
    "algos": "algorithms",
}


class ConfigError(Exception):
    def __init__(self, msg, linenum=None):
        self.msg = msg
        self.linenum = linenum

    def __str__(self):
        if self.linenum:
            return f"{self.msg} on line {self.linenum}"
        return self.msg


@dataclass(frozen=True)
class KnnParams:
    k: int = 3


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    gamma: Optional[float] = None
    tol: float = 1e-3


@dataclass(frozen=True)
class DaeParams:
    hidden_dims: tuple[int, ...] = (128, 64)
    activation: str = "tanh"
    output_activation: str = "linear"
    pretrain_mode: str = "greedy"
    pretrain_on: str = "all"
    from_scratch: bool = False
    learning_rate: Optional[float] = 0.01
    epochs: Optional[int] = None
    min_updates: Optional[int] = 300


@dataclass(frozen=True)
class CnnParams:
    widths: tuple[int, ...] = (1, 2, 3)
    n_filters: int = 300
    activation: str = "relu"
    learning_rate: Optional[float] = 0.01
    epochs: Optional[int] = None
    min_updates: Optional[int] = 300


SECTIONS = ("train", "generator", "knn", "svm", "dae", "cnn")


@dataclass(frozen=True)
class ExperimentConfig:
    graph: Optional[str] = None
    names: Optional[str] = None
    labels: Optional[str] = None
    n_benign: int = 1000
    n_fraud: int = 1000
    graph_seed: int = 1
    input_modes: tuple[str, ...] = (SPECTRAL_VECTOR,)
    ks: tuple[int, ...] = (30,)
    s: int = 1
    ratios: tuple[float, ...] = (5.0, 10.0, 15.0, 20.0)
    runs: int = 10
    algorithms: tuple[str, ...] = ALGORITHMS
    seed: int = 0
    stratify: bool = True
    record_timings: bool = True
    jobs: int = 1
    eigen_order: str = "algebraic"
    eigen_tol: float = 1e-8
    train: TrainConfig = field(default_factory=TrainConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    knn: KnnParams = field(default_factory=KnnParams)
    svm: SvmParams = field(default_factory=SvmParams)
    dae: DaeParams = field(default_factory=DaeParams)
    cnn: CnnParams = field(default_factory=CnnParams)

    def validate(self):
        if not self.ratios or not all(0 < r < 100 for r in self.ratios):
            raise ConfigError("ratios must lie in (0, 100)")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if not self.ks or min(self.ks) < 1:
            raise ConfigError("ks must be positive")
        if self.s < 1:
            raise ConfigError("s must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        for mode in self.input_modes:
            if mode not in INPUT_MODES:
                raise ConfigError(f"Unknown input mode '{mode}'")
        for algorithm in self.algorithms:
            if algorithm not in ALGORITHMS:
                raise ConfigError(f"Unknown algorithm '{algorithm}'")
        if self.eigen_order not in EIGEN_ORDERS:
            raise ConfigError(f"Unknown eigen order '{self.eigen_order}'")
        if self.dae.pretrain_mode not in ("greedy", "joint"):
            raise ConfigError(f"Unknown pretrain mode '{self.dae.pretrain_mode}'")
        if self.dae.pretrain_on not in ("all", "train"):
            raise ConfigError("dae.pretrain_on must be 'all' or 'train'")
        try:
            self.train.validate()
            self.train_for(self.dae).validate()
            self.train_for(self.cnn).validate()
            self.generator.validate()
        except ValueError as e:
            raise ConfigError(str(e))
        return self

    def train_for(self, params):
        """The shared training settings with the overrides of one model's section applied."""
        train = self.train
        for name in ("learning_rate", "epochs", "min_updates"):
            value = getattr(params, name)
            if value is not None:
                train = replace(train, **{name: value})
        return train


def create_parser():
    key = Word(alphas + "_", alphanums + "_-.")
    item = Word(printables, exclude_chars=",#=")
    assignment = key("key") + Suppress("=") + Group(DelimitedList(item))("value") + StringEnd()
    assignment.ignore(python_style_comment)
    return assignment


_parser = create_parser()

_TRUE = ("true", "yes", "on", "1")
_FALSE = ("false", "no", "off", "0")


def _scalar(tp, text):
    if tp is bool:
        if text.lower() in _TRUE:
            return True
        if text.lower() in _FALSE:
            return False
        raise ValueError(f"'{text}' is not a boolean")
    return tp(text)


def convert(tp, items):
    """
    Convert the comma-separated items of a value to the field type `tp`.

    >>> convert(tuple[int, ...], ["10", "20"])
    (10, 20)
    >>> convert(Optional[float], ["none"]), convert(bool, ["yes"])
    (None, True)
    """
    origin = typing.get_origin(tp)
    if origin is tuple:
        element = typing.get_args(tp)[0]
        return tuple(_scalar(element, x) for x in items)
    if len(items) != 1:
        raise ValueError("Expected a single value")
    if origin in (typing.Union, types.UnionType):
        if items[0].lower() == "none":
            return None
        tp = next(arg for arg in typing.get_args(tp) if arg is not type(None))
    return _scalar(tp, items[0])


def _field_type(cls, name):
    for f in fields(cls):
        if f.name == name:
            return f.type
    return None


def set_value(config, key, items):
    """A copy of `config` with `key` (possibly dotted) set from string items."""
    key = key.replace("-", "_")
    section, _, name = key.rpartition(".")
    if section:
        if section not in SECTIONS:
            raise ValueError(f"Unknown section '{section}'")
        target = getattr(config, section)
        tp = _field_type(type(target), name)
        if tp is None:
            raise ValueError(f"Unknown key '{key}'")
        return replace(config, **{section: replace(target, **{name: convert(tp, items)})})
    name = ALIASES.get(name, name)
    tp = _field_type(ExperimentConfig, name)
    if tp is None or name in SECTIONS:
        raise ValueError(f"Unknown key '{key}'")
    return replace(config, **{name: convert(tp, items)})


def parse_config(lines, base=None):
    config = base or ExperimentConfig()
    for linenum, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        try:
            tokens = _parser.parse_string(line.strip())
        except ParseException as e:
            raise ConfigError(e.msg, linenum)
        try:
            config = set_value(config, tokens["key"], list(tokens["value"]))
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), linenum)
    return config


def load_config(path, base=None):
    with open(path, encoding="utf-8") as f:
        return parse_config(f, base).validate()
