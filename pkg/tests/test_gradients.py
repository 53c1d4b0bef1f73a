"""Finite-difference gradient checks: every layer kind and every loss,
20 random configurations each, max relative error < 1e-4."""

import numpy as np
import pytest

from gradcheck import check_array, check_layer, relative_error, fd_scalar
from stutterkit.nnet import TDNN, FC, BatchNorm, ReLU, StatPool
from stutterkit.nnet.losses import cross_entropy_grad, joint_loss_grad

TOL = 1e-4
N_TRIALS = 20

SEEDS = range(N_TRIALS)


def _seq_batch(rng, channels, t_max=10, batch=3):
    x = rng.normal(size=(batch, channels, t_max))
    lengths = rng.integers(max(2, t_max - 4), t_max + 1, size=batch)
    lengths[0] = t_max
    return x, lengths


@pytest.mark.parametrize("seed", SEEDS)
def test_tdnn_gradients(seed):
    rng = np.random.default_rng(seed)
    choices = [(-2, -1, 0, 1, 2), (-2, 0, 2), (-3, 0, 3), (-1, 0, 1), (0,)]
    offsets = choices[int(rng.integers(len(choices)))]
    layer = TDNN(int(rng.integers(1, 4)), int(rng.integers(1, 4)), offsets, rng=rng)
    x, lengths = _seq_batch(rng, layer.in_channels, t_max=int(rng.integers(8, 12)))
    lengths = np.maximum(lengths, layer.span + 1)
    assert check_layer(layer, x, lengths, seed=seed) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_fc_gradients(seed):
    rng = np.random.default_rng(seed)
    layer = FC(int(rng.integers(1, 6)), int(rng.integers(1, 6)), rng=rng)
    x = rng.normal(size=(int(rng.integers(1, 5)), layer.params["W"].shape[1]))
    assert check_layer(layer, x, seed=seed) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_batchnorm_train_mode_gradients(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, 4))
    layer = BatchNorm(c)
    layer.params["gamma"][...] = rng.uniform(0.5, 1.5, size=c)
    layer.params["beta"][...] = rng.normal(size=c)
    if seed % 2:
        x, lengths = _seq_batch(rng, c, t_max=7)
        assert check_layer(layer, x, lengths, seed=seed, train=True) < TOL
    else:
        x = rng.normal(size=(int(rng.integers(3, 7)), c))
        assert check_layer(layer, x, seed=seed, train=True) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_statpool_gradients(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, 4))
    layer = StatPool()
    x, lengths = _seq_batch(rng, c, t_max=int(rng.integers(5, 9)))
    assert check_layer(layer, x, lengths, seed=seed) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_relu_gradients_away_from_kink(seed):
    rng = np.random.default_rng(seed)
    layer = ReLU()
    x = rng.normal(size=(3, 5))
    x += np.sign(x) * 0.2  # keep every entry clear of the FD step at 0
    assert check_layer(layer, x, seed=seed) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_cross_entropy_gradients(seed):
    rng = np.random.default_rng(seed)
    n, c = int(rng.integers(1, 8)), int(rng.integers(2, 9))
    logits = rng.normal(size=(n, c))
    labels = rng.integers(0, c, size=n)

    def scalar():
        return cross_entropy_grad(logits, labels)[0]

    _, grad = cross_entropy_grad(logits, labels)
    assert check_array(scalar, logits, grad) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_weighted_cross_entropy_gradients(seed):
    rng = np.random.default_rng(seed)
    n, c = int(rng.integers(2, 8)), int(rng.integers(2, 9))
    logits = rng.normal(size=(n, c))
    labels = rng.integers(0, c, size=n)
    weights = rng.uniform(0.2, 3.0, size=c)

    def scalar():
        return cross_entropy_grad(logits, labels, weights)[0]

    _, grad = cross_entropy_grad(logits, labels, weights)
    assert check_array(scalar, logits, grad) < TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_joint_loss_gradients(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    fl = rng.normal(size=(n, 2))
    dl = rng.normal(size=(n, 7))
    labels = rng.integers(0, 8, size=n)
    labels[0] = 7  # keep at least one fluent sample
    if n > 1:
        labels[1] = int(rng.integers(0, 7))

    def scalar():
        return joint_loss_grad(fl, dl, labels)[0]

    _, dfl, ddl = joint_loss_grad(fl, dl, labels)
    worst = max(check_array(scalar, fl, dfl), check_array(scalar, dl, ddl))
    assert worst < TOL


def test_joint_loss_weighted_gradients():
    rng = np.random.default_rng(123)
    for _ in range(5):
        n = 6
        fl = rng.normal(size=(n, 2))
        dl = rng.normal(size=(n, 7))
        labels = np.array([7, 0, 1, 7, 4, 6])
        fw = rng.uniform(0.3, 2.0, size=2)
        dw = rng.uniform(0.3, 2.0, size=7)

        def scalar():
            return joint_loss_grad(fl, dl, labels, fw, dw)[0]

        _, dfl, ddl = joint_loss_grad(fl, dl, labels, fw, dw)
        assert max(check_array(scalar, fl, dfl), check_array(scalar, dl, ddl)) < TOL
