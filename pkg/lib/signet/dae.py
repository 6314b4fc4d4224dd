"""
Deep autoencoder classifier.

A stack of dense encoders maps the input `x` to `z^(1), ..., z^(L)`; mirrored
decoders map `z^(L)` back to a reconstruction of `x`. The stack is first
pretrained without labels to minimize the squared reconstruction error
`|x_hat - x|^2` and then fine-tuned end to end, encoders plus softmax head,
on the cross-entropy of the labeled examples. Decoders play no part after
pretraining.

`decoders[l]` mirrors `encoders[l]`: it maps the output space of encoder `l`
back to its input space, and decoding applies them from `l = L - 1` down to
`0`.

>>> stack = AutoencoderStack(6, hidden_dims=(4, 2), seed=1)
>>> [(e.n_in, e.n_out) for e in stack.encoders], [(d.n_in, d.n_out) for d in stack.decoders]
([(6, 4), (4, 2)], [(4, 6), (2, 4)])
>>> stack.head.U[...] = 0
>>> predict(stack, np.ones(6)).tolist()
[0.5, 0.5]
"""

import logging
from dataclasses import replace

import numpy as np
import scipy.sparse

from signet.nn import ShapeError
from signet.nn.layers import (
    cross_entropy,
    cross_entropy_grad,
    DenseLayer,
    softmax,
    SoftmaxHead,
)
from signet.nn.train import (
    TrainConfig,
    train_epochs,
)

log = logging.getLogger(__name__)

PRETRAIN_MODES = ("greedy", "joint")


def _dense(X):
    return X.toarray() if scipy.sparse.issparse(X) else X


class ReconstructionModel:
    """
    Squared reconstruction error of an encoder chain and its mirrored
    decoders, averaged over the examples of a batch. Sparse targets are
    densified one batch at a time.
    """

    def __init__(self, encoders, decoders, offset=0):
        self.encoders = encoders
        self.decoders = decoders
        self.offset = offset

    def params(self):
        params = {}
        for i, (enc, dec) in enumerate(zip(self.encoders, self.decoders), start=self.offset):
            params.update({f"enc{i}.{name}": p for name, p in enc.params().items()})
            params.update({f"dec{i}.{name}": p for name, p in dec.params().items()})
        return params

    def reconstruct(self, X):
        caches = []
        H = X
        for layer in self.encoders:
            H, cache = layer.forward(H)
            caches.append(cache)
        for layer in reversed(self.decoders):
            H, cache = layer.forward(H)
            caches.append(cache)
        return H, caches

    def loss(self, X, T):
        R, _ = self.reconstruct(X)
        return float(np.sum((R - _dense(T)) ** 2) / X.shape[0])

    def loss_and_grads(self, X, T):
        R, caches = self.reconstruct(X)
        diff = R - _dense(T)
        layers = [(i, "enc", enc) for i, enc in enumerate(self.encoders, start=self.offset)]
        layers += [(i, "dec", dec) for i, dec in reversed(list(enumerate(self.decoders, start=self.offset)))]
        grads = {}
        delta = 2.0 * diff / X.shape[0]
        for (i, kind, layer), cache in reversed(list(zip(layers, caches))):
            delta, layer_grads = layer.backward(delta, cache)
            grads.update({f"{kind}{i}.{name}": g for name, g in layer_grads.items()})
        return float(np.sum(diff * diff) / X.shape[0]), grads


class AutoencoderStack:
    kind = "dae"

    def __init__(
        self,
        input_dim,
        hidden_dims=(128, 64),
        activation="tanh",
        output_activation="linear",
        n_classes=2,
        seed=0,
    ):
        if input_dim < 1 or not hidden_dims or min(hidden_dims) < 1:
            raise ShapeError("Layer dimensions must be positive")
        self.input_dim = input_dim
        self.hidden_dims = tuple(hidden_dims)
        self.activation = activation
        self.output_activation = output_activation
        self.n_classes = n_classes
        self.seed = seed
        rng = np.random.default_rng(seed)
        dims = (input_dim,) + self.hidden_dims
        self.encoders = [DenseLayer(dims[i], dims[i + 1], activation, rng) for i in range(len(self.hidden_dims))]
        self.decoders = [
            DenseLayer(dims[i + 1], dims[i], output_activation if i == 0 else activation, rng)
            for i in range(len(self.hidden_dims))
        ]
        self.head = SoftmaxHead(dims[-1], n_classes, rng)
        self.pretrained = False

    @property
    def depth(self):
        return len(self.encoders)

    def spec(self):
        return {
            "input_dim": self.input_dim,
            "hidden_dims": list(self.hidden_dims),
            "activation": self.activation,
            "output_activation": self.output_activation,
            "n_classes": self.n_classes,
            "seed": self.seed,
        }

    @classmethod
    def from_spec(cls, spec):
        return cls(**dict(spec, hidden_dims=tuple(spec["hidden_dims"])))

    def state(self):
        return {"pretrained": self.pretrained}

    def set_state(self, state):
        self.pretrained = bool(state.get("pretrained", False))

    def check_mirror(self):
        for i, (enc, dec) in enumerate(zip(self.encoders, self.decoders)):
            if (enc.n_in, enc.n_out) != (dec.n_out, dec.n_in):
                raise ShapeError(f"Decoder {i} does not mirror encoder {i}")

    def params(self):
        """Parameters trained during fine-tuning: encoders and head."""
        params = {}
        for i, enc in enumerate(self.encoders):
            params.update({f"enc{i}.{name}": p for name, p in enc.params().items()})
        params.update({f"head.{name}": p for name, p in self.head.params().items()})
        return params

    def all_params(self):
        params = self.params()
        for i, dec in enumerate(self.decoders):
            params.update({f"dec{i}.{name}": p for name, p in dec.params().items()})
        return params

    def _check_input(self, X):
        if scipy.sparse.issparse(X):
            X = scipy.sparse.csr_matrix(X, dtype=np.float64)
        else:
            X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.input_dim:
            raise ShapeError(f"Expected inputs of dimension {self.input_dim}, got {X.shape[-1]}")
        return X

    def encode(self, X, depth=None):
        H = self._check_input(X)
        for layer in self.encoders[: self.depth if depth is None else depth]:
            H, _ = layer.forward(H)
        return H

    def predict_proba(self, X):
        return softmax(self.head.logits(self.encode(X)))

    def loss(self, X, y):
        return cross_entropy(self.predict_proba(X), y)

    def loss_and_grads(self, X, y):
        H = self._check_input(X)
        caches = []
        for layer in self.encoders:
            H, cache = layer.forward(H)
            caches.append(cache)
        P = softmax(self.head.logits(H))
        delta, head_grads = self.head.backward(cross_entropy_grad(P, y), H)
        grads = {f"head.{name}": g for name, g in head_grads.items()}
        for i in reversed(range(self.depth)):
            delta, layer_grads = self.encoders[i].backward(delta, caches[i])
            grads.update({f"enc{i}.{name}": g for name, g in layer_grads.items()})
        return cross_entropy(P, y), grads

    def __repr__(self):
        dims = " -> ".join(str(d) for d in (self.input_dim,) + self.hidden_dims)
        return f"AutoencoderStack({dims}, pretrained={self.pretrained})"


def pretrain(stack, inputs, config=None, mode="greedy"):
    """
    Unsupervised pretraining; takes no labels. In `greedy` mode each
    encoder/decoder pair is trained in turn on the frozen output of the
    encoders below it; in `joint` mode the whole encoder-decoder chain is
    trained at once. Returns `(stack, histories)` with one history per
    trained model.
    """
    config = config or TrainConfig()
    if mode not in PRETRAIN_MODES:
        raise ValueError(f"Unknown pretrain mode '{mode}'")
    H = stack._check_input(inputs)
    if H.ndim != 2:
        raise ShapeError("Pretraining expects one input vector per row")
    histories = []
    if mode == "joint":
        _, history = train_epochs(ReconstructionModel(stack.encoders, stack.decoders), H, H, config)
        histories.append(history)
    else:
        for i, (enc, dec) in enumerate(zip(stack.encoders, stack.decoders)):
            layer_config = config if i == 0 else replace(config, seed=config.seed + i)
            _, history = train_epochs(ReconstructionModel([enc], [dec], offset=i), H, H, layer_config)
            log.debug(
                "pretrained layer %d: loss %.6g -> %.6g in %d epochs",
                i,
                history.initial_loss,
                history.best_loss,
                len(history.train_loss),
            )
            histories.append(history)
            H, _ = enc.forward(H)
    stack.check_mirror()
    stack.pretrained = True
    return stack, histories


def fine_tune(stack, inputs, labels, config=None, from_scratch=False):
    """
    Supervised training of the encoders and the softmax head on labeled
    inputs. Unless `from_scratch` is set the stack must have been pretrained.
    Returns `(stack, history)`.
    """
    if not stack.pretrained and not from_scratch:
        raise ValueError("Stack has not been pretrained; pass from_scratch=True to train it anyway")
    inputs = stack._check_input(inputs)
    return train_epochs(stack, inputs, np.asarray(labels, dtype=np.int64), config or TrainConfig())


def predict(stack, inputs):
    """Class probabilities for one input vector or a batch of them."""
    return stack.predict_proba(inputs)
