"""
Tests for `signet.cnn`.
"""

import numpy as np
import pytest
import scipy.sparse

from signet import cnn
from signet.cnn import (
    adjacency_bank,
    adjacency_mode_forward,
    average_pool,
    ConvFilterBank,
    convolve,
    Filter,
    forward,
)
from signet.nn import ShapeError
from signet.nn.gradcheck import grad_check
from signet.nn.layers import (
    DenseLayer,
    softmax_predict,
)
from signet.nn.train import TrainConfig


def pre_activations(bank, X):
    return np.concatenate(
        [np.einsum("nlmk,fmk->nlf", cnn._windows(X, m), W).ravel() for m, W in zip(bank.widths, bank.weights)]
    )


def inputs_away_from_kinks(bank, rng, n):
    while True:
        X = rng.normal(size=(n, bank.n_rows, bank.k))
        if np.abs(pre_activations(bank, X)).min() > 1e-3:
            return X


@pytest.mark.parametrize("seed", range(20))
def test_loss_gradients(seed):
    rng = np.random.default_rng(seed)
    bank = ConvFilterBank(3, 4, widths=(1, 2, 3), n_filters=6, seed=seed)
    X = inputs_away_from_kinks(bank, rng, 4)
    y = rng.integers(0, 2, size=4)
    assert grad_check(bank, X, y) <= 1e-4


@pytest.mark.parametrize("width", [1, 2, 3])
def test_single_width_gradients(width):
    rng = np.random.default_rng(width)
    bank = ConvFilterBank(5, 3, widths=(width,), n_filters=2, activation="tanh", seed=width)
    X = rng.normal(size=(3, 5, 3))
    assert grad_check(bank, X, np.array([0, 1, 1])) <= 1e-4


def test_filter_feature_vector_length():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(5, 4))
    for m in (1, 2, 3, 5):
        h = convolve(Filter(rng.normal(size=(m, 4)), 0.1), X)
        assert h.shape == (5 - m + 1,)
        assert (h >= 0).all()
    with pytest.raises(ShapeError):
        convolve(Filter(np.ones((6, 4)), 0.0), X)
    with pytest.raises(ShapeError):
        convolve(Filter(np.ones((2, 3)), 0.0), X)


def test_average_pool():
    assert average_pool(np.array([1.0, 2.0, 6.0])) == 3.0
    with pytest.raises(ValueError):
        average_pool(np.array([]))


def test_pooled_features_match_filter_loop():
    rng = np.random.default_rng(1)
    bank = ConvFilterBank(3, 5, widths=(1, 2, 3), n_filters=9, seed=1)
    for b in bank.biases:
        b[...] = rng.normal(scale=0.1, size=b.shape)
    X = rng.normal(size=(3, 5))
    expected = [average_pool(convolve(f, X)) for f in bank.filters()]
    assert np.allclose(bank.pooled_features(X), expected, atol=1e-12)
    batch = bank.pooled_features(np.stack([X, X]))
    assert batch.shape == (2, 9)
    assert np.allclose(batch[1], expected, atol=1e-12)


def test_adjacency_mode_is_a_dense_layer():
    rng = np.random.default_rng(2)
    n = 12
    bank = adjacency_bank(n, n_filters=7, seed=2)
    bank.biases[0][...] = rng.normal(scale=0.1, size=7)
    layer = DenseLayer(n, 7, "relu", weights=bank.weights[0].reshape(7, n), bias=bank.biases[0])
    rows = rng.choice([-1.0, 0.0, 1.0], size=(5, n))
    z, _ = layer.forward(rows)
    assert np.abs(adjacency_mode_forward(bank, rows) - softmax_predict(bank.head, z)).max() <= 1e-12
    assert adjacency_mode_forward(bank, rows[0]).shape == (2,)
    with pytest.raises(ShapeError):
        adjacency_mode_forward(bank, np.zeros(n + 1))
    with pytest.raises(ShapeError):
        adjacency_mode_forward(ConvFilterBank(3, n, n_filters=3), rows[0])


def test_bank_layout():
    bank = ConvFilterBank(3, 30, n_filters=300)
    assert [W.shape for W in bank.weights] == [(100, 1, 30), (100, 2, 30), (100, 3, 30)]
    assert bank.head.U.shape == (2, 300)
    assert list(bank.params()) == ["W1", "b1", "W2", "b2", "W3", "b3", "head.U", "head.c"]
    assert len(list(bank.filters())) == 300


@pytest.mark.parametrize(
    "kwargs,error",
    [
        ({"widths": (1, 4)}, ShapeError),
        ({"widths": ()}, ValueError),
        ({"widths": (1, 2), "n_filters": 5}, ValueError),
    ],
)
def test_bad_banks(kwargs, error):
    with pytest.raises(error):
        ConvFilterBank(3, 4, **kwargs)


def test_input_shape_checked():
    bank = ConvFilterBank(3, 4, n_filters=3)
    with pytest.raises(ShapeError):
        forward(bank, np.zeros((3, 5)))
    assert forward(bank, np.zeros((3, 4))).shape == (2,)


def test_training_separates_shifted_matrices():
    rng = np.random.default_rng(3)
    y = np.arange(80) % 2
    X = rng.normal(scale=0.3, size=(80, 3, 4)) + np.where(y == 1, 0.7, -0.7)[:, np.newaxis, np.newaxis]
    bank = ConvFilterBank(3, 4, n_filters=12, seed=3)
    bank, history = cnn.train(bank, X, y, TrainConfig(epochs=30, learning_rate=0.01, seed=3))
    assert history.best_loss < history.initial_loss
    assert (forward(bank, X).argmax(axis=1) == y).mean() >= 0.9


def test_spec_round_trip():
    bank = ConvFilterBank(3, 4, widths=(2, 3), n_filters=4, activation="tanh", seed=5)
    copy = ConvFilterBank.from_spec(bank.spec())
    for name, p in bank.params().items():
        assert (copy.params()[name] == p).all()
    assert repr(copy) == "ConvFilterBank(3 x 4, widths=(2, 3), filters=4)"


@pytest.mark.parametrize("s", [1, 2])
@pytest.mark.parametrize("k", [10, 30])
def test_feature_vector_length_per_width(s, k):
    rng = np.random.default_rng(s * k)
    X = rng.normal(size=(2 * s + 1, k))
    for m in range(1, 2 * s + 2):
        assert convolve(Filter(rng.normal(size=(m, k)), 0.0), X).shape == (2 * s - m + 2,)


def test_single_class_labels_give_a_constant_prediction():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 3, 4))
    y = np.ones(40, dtype=np.int64)
    bank = ConvFilterBank(3, 4, n_filters=6, seed=8)
    config = TrainConfig(epochs=300, learning_rate=0.01, early_stop_patience=300, validation_fraction=0.0)
    bank, history = cnn.train(bank, X, y, config)
    assert bank.loss(X, y) < 1e-2
    assert history.best_loss < 1e-2
    assert (forward(bank, X).argmax(axis=1) == 1).all()
    assert (forward(bank, rng.normal(size=(100, 3, 4))).argmax(axis=1) == 1).all()


def test_sparse_adjacency_rows_match_dense():
    rng = np.random.default_rng(9)
    n = 15
    rows = rng.choice([-1.0, 0.0, 0.0, 1.0], size=(8, n))
    y = np.arange(8) % 2
    bank = adjacency_bank(n, n_filters=5, seed=9)
    bank.biases[0][...] = rng.normal(scale=0.1, size=5)
    sparse = scipy.sparse.csr_matrix(rows)
    dense = rows[:, np.newaxis, :]
    assert np.allclose(forward(bank, sparse), forward(bank, dense), atol=1e-12)
    assert np.allclose(adjacency_mode_forward(bank, sparse), adjacency_mode_forward(bank, rows), atol=1e-12)
    loss, grads = bank.loss_and_grads(sparse, y)
    dense_loss, dense_grads = bank.loss_and_grads(dense, y)
    assert loss == pytest.approx(dense_loss, rel=1e-12)
    for name, g in dense_grads.items():
        assert grads[name].shape == g.shape
        assert np.allclose(grads[name], g, atol=1e-12)
    with pytest.raises(ShapeError):
        forward(ConvFilterBank(3, n, n_filters=3), sparse)


def test_sparse_adjacency_rows_train():
    rng = np.random.default_rng(10)
    y = np.arange(60) % 2
    rows = np.zeros((60, 40))
    # class 1 rows link into the first half, class 0 rows into the second
    for i, label in enumerate(y.tolist()):
        cols = rng.choice(20, size=4, replace=False) + (0 if label else 20)
        rows[i, cols] = 1.0
    bank = adjacency_bank(40, n_filters=6, seed=10)
    bank, history = cnn.train(bank, scipy.sparse.csr_matrix(rows), y, TrainConfig(learning_rate=0.01, seed=10))
    assert history.best_loss < history.initial_loss
    assert (forward(bank, scipy.sparse.csr_matrix(rows)).argmax(axis=1) == y).mean() >= 0.9
