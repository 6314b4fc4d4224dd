"""
Versioned model checkpoints stored as numpy `.npz` archives.

A checkpoint holds every parameter array of the model plus a JSON header
with the format version, the model kind, its constructor arguments and a
hash of the training configuration it was produced with.
"""

import hashlib
import importlib
import json
import logging
from dataclasses import asdict

import numpy as np

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

MODEL_KINDS = {
    "dae": "signet.dae:AutoencoderStack",
    "cnn": "signet.cnn:ConvFilterBank",
}

_HEADER = "__header__"


class CheckpointError(Exception):
    pass


def config_hash(config):
    """
    >>> from signet.nn.train import TrainConfig
    >>> config_hash(TrainConfig()) == config_hash(TrainConfig())
    True
    >>> config_hash(None)
    ''
    """
    if config is None:
        return ""
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _model_class(kind):
    try:
        module_name, class_name = MODEL_KINDS[kind].split(":")
    except KeyError:
        raise CheckpointError(f"Unknown model kind '{kind}'")
    return getattr(importlib.import_module(module_name), class_name)


def save_model(model, path, config=None, extra=None):
    """
    Write `model` to `path`. `extra` is a JSON-serializable dictionary kept
    in the header, e.g. the input settings the model was trained on.
    """
    header = {
        "extra": extra or {},
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "spec": model.spec(),
        "config_hash": config_hash(config),
        "state": model.state(),
    }
    arrays = {name: p for name, p in model.all_params().items()}
    with open(path, "wb") as out:
        np.savez(out, **{_HEADER: np.array(json.dumps(header, sort_keys=True))}, **arrays)
    log.info("saved %s checkpoint with %d arrays to %s", model.kind, len(arrays), path)


def load_model(path):
    """Rebuild the model saved at `path`; returns `(model, header)`."""
    with np.load(path, allow_pickle=False) as archive:
        if _HEADER not in archive.files:
            raise CheckpointError(f"{path} is not a signet checkpoint")
        header = json.loads(str(archive[_HEADER]))
        if header.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint format {header.get('format_version')}")
        model = _model_class(header["kind"]).from_spec(header["spec"])
        params = model.all_params()
        missing = sorted(set(params) - set(archive.files))
        if missing:
            raise CheckpointError(f"Checkpoint lacks parameters {', '.join(missing)}")
        for name, p in params.items():
            saved = archive[name]
            if saved.shape != p.shape:
                raise CheckpointError(f"Parameter {name} has shape {saved.shape}, expected {p.shape}")
            p[...] = saved
    model.set_state(header.get("state", {}))
    return model, header
