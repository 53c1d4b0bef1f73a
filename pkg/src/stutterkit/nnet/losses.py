"""Classification losses: cross entropy, class-weighted cross entropy,
the two-branch joint loss, and the contrastive pretraining objective.

All losses are minimized non-negative scalars.  The weighted variant
normalizes by the sum of the weights present in the batch, so it reduces
to plain cross entropy when all class weights are equal.
"""

from __future__ import annotations

import numpy as np

from ..errors import ZeroNorm
from ..labels import N_CLASSES


def softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def cross_entropy(logits, labels, weights=None):
    loss, _ = cross_entropy_grad(logits, labels, weights)
    return loss


def weighted_cross_entropy(logits, labels, weights):
    """Imbalance-penalizing cross entropy with per-batch weight normalization."""
    if np.any(np.asarray(weights) <= 0):
        raise ValueError("class weights must be positive")
    loss, _ = cross_entropy_grad(logits, labels, weights)
    return loss


def cross_entropy_grad(logits, labels, weights=None):
    """Loss and d(loss)/d(logits) in one pass.

    Plain CE is the equal-weight case of the weighted form: the batch loss
    is sum_i w_{y_i} * nll_i / sum_i w_{y_i}, which is the arithmetic mean
    when all weights coincide.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    n, c = logits.shape
    if labels.min() < 0 or labels.max() >= c:
        raise ValueError("label out of range")
    if weights is None:
        w = np.ones(n)
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if np.any(weights <= 0):
            raise ValueError("class weights must be positive")
        w = weights[labels]
    logp = log_softmax(logits)
    nll = -logp[np.arange(n), labels]
    w_sum = w.sum()
    loss = float((w * nll).sum() / w_sum)
    probs = np.exp(logp)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), labels] = 1.0
    dlogits = (probs - onehot) * (w / w_sum)[:, None]
    return loss, dlogits


# Fluent-head targets: index 1 = fluent, index 0 = disfluent.
FLUENT_TARGET = 1
DISFLUENT_TARGET = 0


def branch_targets(labels):
    """(fluent 2-way targets, disfluent mask, disfluent 7-way targets)."""
    labels = np.asarray(labels, dtype=int)
    fluent = np.where(labels == N_CLASSES - 1, FLUENT_TARGET, DISFLUENT_TARGET)
    dis_mask = labels != N_CLASSES - 1
    return fluent, dis_mask, labels[dis_mask]


def joint_loss(fluent_logits, disfluent_logits, labels,
               fluent_weights=None, disfluent_weights=None):
    loss, _, _ = joint_loss_grad(
        fluent_logits, disfluent_logits, labels, fluent_weights, disfluent_weights
    )
    return loss


def joint_loss_grad(fluent_logits, disfluent_logits, labels,
                    fluent_weights=None, disfluent_weights=None):
    """Sum of the 2-way fluent loss over all samples and the 7-way
    disfluent loss over the disfluent subset; an all-fluent batch
    contributes nothing (and no gradient) to the disfluent head."""
    fluent_logits = np.asarray(fluent_logits, dtype=np.float64)
    disfluent_logits = np.asarray(disfluent_logits, dtype=np.float64)
    f_targets, dis_mask, d_targets = branch_targets(labels)
    loss_f, d_fluent = cross_entropy_grad(fluent_logits, f_targets, fluent_weights)
    d_disfluent = np.zeros_like(disfluent_logits)
    loss_d = 0.0
    if dis_mask.any():
        loss_d, grad_sub = cross_entropy_grad(
            disfluent_logits[dis_mask], d_targets, disfluent_weights
        )
        d_disfluent[dis_mask] = grad_sub
    return loss_f + loss_d, d_fluent, d_disfluent


def cosine_similarity(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine similarity undefined for zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


def contrastive_loss(context, positive, distractors, tau):
    """InfoNCE-style objective over cosine similarities.

    The candidate set is the positive plus the distractors; the loss is the
    negative log-probability assigned to the positive at temperature tau.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    context = np.asarray(context, dtype=np.float64)
    sims = np.array(
        [cosine_similarity(context, positive)]
        + [cosine_similarity(context, q) for q in distractors]
    )
    scaled = sims / tau
    return float(-log_softmax(scaled[None, :])[0, 0])
