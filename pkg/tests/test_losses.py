import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stutterkit.errors import ZeroNorm
from stutterkit.nnet.losses import (
    branch_targets,
    contrastive_loss,
    cosine_similarity,
    cross_entropy,
    cross_entropy_grad,
    joint_loss,
    joint_loss_grad,
    log_softmax,
    softmax,
    weighted_cross_entropy,
)


def _logits_with_nll(nll):
    """2-class logits (z, 0) with label 0 whose CE equals the given value."""
    p = np.exp(-nll)
    return [np.log(p / (1 - p)), 0.0]


def test_ce_uniform_eight_classes():
    logits = np.zeros((4, 8))
    assert cross_entropy(logits, [0, 3, 5, 7]) == pytest.approx(np.log(8), abs=1e-12)


def test_ce_hand_two_class():
    logits = np.array([[1.0, 0.0], [0.0, 1.0]])
    labels = [0, 0]
    expected = (0.313262 + 1.313262) / 2
    assert cross_entropy(logits, labels) == pytest.approx(expected, abs=1e-6)


def test_ce_perfect_limit():
    logits = np.array([[50.0, 0.0], [0.0, 50.0]])
    assert cross_entropy(logits, [0, 1]) < 1e-20


def test_ce_label_out_of_range():
    with pytest.raises(ValueError):
        cross_entropy(np.zeros((1, 3)), [3])


def test_wce_equals_ce_under_equal_weights():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(16, 8))
    labels = rng.integers(0, 8, size=16)
    for w in (1.0, 0.37, 5.0):
        assert weighted_cross_entropy(logits, labels, np.full(8, w)) == pytest.approx(
            cross_entropy(logits, labels), abs=1e-12
        )


def test_wce_hand_normalization():
    # per-sample CE terms {1.0, 0.5} on classes {0, 1}, weights {2.0, 2/3}
    logits = np.array([_logits_with_nll(1.0), list(reversed(_logits_with_nll(0.5)))])
    labels = [0, 1]
    loss = weighted_cross_entropy(logits, labels, np.array([2.0, 2.0 / 3.0]))
    expected = (2.0 * 1.0 + (2.0 / 3.0) * 0.5) / (2.0 + 2.0 / 3.0)
    assert loss == pytest.approx(expected, abs=1e-9)


def test_wce_perfect_zero_for_any_weights():
    logits = np.array([[60.0, 0.0], [0.0, 60.0]])
    assert weighted_cross_entropy(logits, [0, 1], np.array([3.0, 0.1])) < 1e-12


def test_wce_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        weighted_cross_entropy(np.zeros((1, 2)), [0], np.array([1.0, 0.0]))


def test_branch_targets():
    fluent, mask, dis = branch_targets([7, 0, 3, 7])
    np.testing.assert_array_equal(fluent, [1, 0, 0, 1])
    np.testing.assert_array_equal(mask, [False, True, True, False])
    np.testing.assert_array_equal(dis, [0, 3])


def test_joint_all_fluent_batch():
    rng = np.random.default_rng(1)
    fl = rng.normal(size=(5, 2))
    dl = rng.normal(size=(5, 7))
    labels = [7] * 5
    loss, dfl, ddl = joint_loss_grad(fl, dl, labels)
    assert loss == pytest.approx(cross_entropy(fl, [1] * 5), abs=1e-12)
    assert np.all(ddl == 0.0)
    assert np.any(dfl != 0.0)


def test_joint_additivity_of_components():
    rng = np.random.default_rng(2)
    fl = rng.normal(size=(6, 2))
    dl = rng.normal(size=(6, 7))
    labels = np.array([7, 0, 2, 7, 5, 6])
    total = joint_loss(fl, dl, labels)
    # two-pass oracle: compute each term independently
    fluent_targets = (labels == 7).astype(int)
    loss_f = cross_entropy(fl, fluent_targets)
    mask = labels != 7
    loss_d = cross_entropy(dl[mask], labels[mask])
    assert total == pytest.approx(loss_f + loss_d, abs=1e-12)


def test_joint_unit_injection():
    # craft heads whose components are known, then check the sum
    fl = np.array([_logits_with_nll(0.4)])  # fluent target index 0 = disfluent
    dl = np.array([[0.0] * 7])
    loss = joint_loss(fl, dl, [0])
    assert loss == pytest.approx(0.4 + np.log(7), abs=1e-9)


def test_contrastive_symmetric():
    rng = np.random.default_rng(3)
    c = rng.normal(size=8)
    for k in (1, 4, 9):
        loss = contrastive_loss(c, c, [c.copy() for _ in range(k)], tau=0.31)
        assert loss == pytest.approx(np.log(k + 1), abs=1e-12)


def test_contrastive_orthogonal_hand_value():
    c = np.array([1.0, 0.0])
    q = np.array([2.0, 0.0])  # cosine 1
    distractor = np.array([0.0, 5.0])  # cosine 0
    loss = contrastive_loss(c, q, [distractor], tau=0.1)
    assert loss == pytest.approx(np.log(1 + np.exp(-10.0)), abs=1e-9)


def test_contrastive_zero_norm():
    with pytest.raises(ZeroNorm):
        contrastive_loss(np.zeros(3), np.ones(3), [], tau=0.1)


def test_cosine_oracle():
    rng = np.random.default_rng(4)
    for _ in range(50):
        a, b = rng.normal(size=6), rng.normal(size=6)
        expected = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
        assert cosine_similarity(a, b) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=50)
@given(st.integers(0, 10**6), st.integers(1, 12), st.integers(2, 9))
def test_softmax_sums_to_one_and_losses_nonnegative(seed, n, c):
    rng = np.random.default_rng(seed)
    logits = rng.normal(scale=5.0, size=(n, c))
    labels = rng.integers(0, c, size=n)
    probs = softmax(logits)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert cross_entropy(logits, labels) >= 0.0
    weights = rng.uniform(0.1, 4.0, size=c)
    assert weighted_cross_entropy(logits, labels, weights) >= 0.0


def test_log_softmax_matches_log_of_softmax():
    rng = np.random.default_rng(5)
    logits = rng.normal(size=(4, 8))
    np.testing.assert_allclose(log_softmax(logits), np.log(softmax(logits)), atol=1e-12)
