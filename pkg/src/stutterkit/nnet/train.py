"""Mini-batch training loop with seeded shuffling and early stopping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptySplit
from ..labels import N_CLASSES
from .optim import Adam, AdamConfig


@dataclass
class TrainConfig:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 128
    max_epochs: int = 50
    patience: int = 7
    seed: int = 0
    loss: str = "ce"  # ce | wce | joint | joint-wce

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")

    def adam(self) -> AdamConfig:
        return AdamConfig(lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps)


@dataclass
class History:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_uar: list = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    stopped_epoch: int = 0


def pad_batch(features):
    """Stack variable-length (dim, T) features into (B, dim, T_max) + lengths.

    1-D feature vectors are stacked into (B, D) with lengths=None.
    """
    if features[0].ndim == 1:
        return np.stack(features), None
    dim = features[0].shape[0]
    lengths = np.array([f.shape[1] for f in features], dtype=int)
    out = np.zeros((len(features), dim, int(lengths.max())))
    for i, f in enumerate(features):
        out[i, :, : f.shape[1]] = f
    return out, lengths


def iter_batches(items, batch_size, rng=None):
    """Yield (x, lengths, labels) batches; shuffled when rng is given.

    Each batch is padded to its own longest sequence; padded frames are
    masked downstream, so batches double as length buckets.
    """
    order = np.arange(len(items))
    if rng is not None:
        rng.shuffle(order)
    for start in range(0, len(items), batch_size):
        chunk = [items[i] for i in order[start : start + batch_size]]
        x, lengths = pad_batch([f for f, _ in chunk])
        labels = np.array([lab for _, lab in chunk], dtype=int)
        yield x, lengths, labels


def _uar(ref, pred):
    ref = np.asarray(ref)
    pred = np.asarray(pred)
    recalls = []
    for c in range(N_CLASSES):
        support = ref == c
        if support.any():
            recalls.append(float((pred[support] == c).mean()))
    return float(np.mean(recalls))


def evaluate_loss(model, items, batch_size):
    total, n = 0.0, 0
    for x, lengths, labels in iter_batches(items, batch_size):
        total += model.loss_value(x, lengths, labels) * len(labels)
        n += len(labels)
    return total / n


def predict_items(model, items, batch_size=128):
    preds = []
    for x, lengths, _ in iter_batches(items, batch_size):
        preds.extend(model.predict_ids(x, lengths).tolist())
    return np.array(preds, dtype=int)


def train(model, train_items, val_items, config: TrainConfig) -> History:
    """Train with Adam; early-stop on validation loss; restore the best
    checkpoint before returning."""
    if not train_items:
        raise EmptySplit("train")
    if not val_items:
        raise EmptySplit("validation")
    rng = np.random.default_rng(config.seed)
    model.set_rng(np.random.default_rng(config.seed + 1))
    optimizer = Adam(model.named_params(), config.adam())
    history = History()
    best_loss = np.inf
    best_state = None
    bad_epochs = 0
    for epoch in range(1, config.max_epochs + 1):
        losses = []
        for x, lengths, labels in iter_batches(train_items, config.batch_size, rng=rng):
            optimizer.zero_grads()
            losses.append(model.loss_and_backward(x, lengths, labels))
            optimizer.step()
        val_loss = evaluate_loss(model, val_items, config.batch_size)
        val_pred = predict_items(model, val_items, config.batch_size)
        val_ref = [lab for _, lab in val_items]
        history.train_loss.append(float(np.mean(losses)))
        history.val_loss.append(float(val_loss))
        history.val_uar.append(_uar(val_ref, val_pred))
        if val_loss < best_loss:
            best_loss = val_loss
            best_state = {k: v.copy() for k, v in model.state_dict().items()}
            history.best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
        history.stopped_epoch = epoch
        if bad_epochs >= config.patience:
            break
    if best_state is not None:
        model.load_state_dict(best_state)
    return history
