"""Concrete architectures: single-branch StutterNet, multi-branch
StutterNet, the shallow two-branch net on pooled vectors, and the
branch-combination prediction rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .labels import N_CLASSES, N_DISFLUENT, weights_from_counts
from .nnet import (
    TDNN,
    FC,
    BatchNorm,
    Dropout,
    ReLU,
    Sequential,
    StatPool,
    TrainConfig,
    cross_entropy_grad,
    joint_loss_grad,
    load_checkpoint,
    save_checkpoint,
    softmax,
    train,
)
from .nnet.losses import FLUENT_TARGET

# Five time-delay layers; early layers narrow, deeper ones wider.
STUTTERNET_CONTEXTS = ((-2, -1, 0, 1, 2), (-2, 0, 2), (-3, 0, 3), (0,), (0,))
RECEPTIVE_FIELD = 1 + 2 * (2 + 2 + 3)  # 15 frames


@dataclass(frozen=True)
class StutterNetSpec:
    channels: int = 64  # full-scale runs typically use 512
    fc_hidden: tuple = (64, 64)


@dataclass(frozen=True)
class ShallowMBSpec:
    fc_hidden: tuple = (64, 64)
    dropout: float = 0.3


def _tdnn_trunk(input_dim, channels, rng):
    layers = []
    in_c = input_dim
    for ctx in STUTTERNET_CONTEXTS:
        layers += [TDNN(in_c, channels, ctx, rng=rng), ReLU(), BatchNorm(channels)]
        in_c = channels
    layers.append(StatPool())
    return Sequential(layers), 2 * channels


def _fc_stack(in_dim, hidden, out_dim, rng, dropout=0.0):
    layers = []
    for h in hidden:
        layers += [FC(in_dim, h, rng=rng), ReLU(), BatchNorm(h)]
        if dropout > 0.0:
            layers.append(Dropout(dropout))
        in_dim = h
    layers.append(FC(in_dim, out_dim, rng=rng))
    return Sequential(layers)


class SingleBranchModel:
    """Sequence -> 8-way logits; CE or class-weighted CE loss."""

    def __init__(self, net: Sequential, class_weights=None, meta=None):
        self.net = net
        self.class_weights = None if class_weights is None else np.asarray(class_weights)
        self.meta = meta or {}

    def named_params(self):
        return self.net.named_params()

    def zero_grads(self):
        self.net.zero_grads()

    def state_dict(self):
        return self.net.state_dict()

    def load_state_dict(self, state):
        self.net.load_state_dict(state)

    def set_rng(self, rng):
        self.net.set_rng(rng)

    def forward(self, x, lengths=None, train=False):
        logits, _ = self.net.forward(x, lengths, train=train)
        return logits

    def loss_and_backward(self, x, lengths, labels):
        logits = self.forward(x, lengths, train=True)
        loss, dlogits = cross_entropy_grad(logits, labels, self.class_weights)
        self.net.backward(dlogits)
        return loss

    def loss_value(self, x, lengths, labels):
        logits = self.forward(x, lengths, train=False)
        loss, _ = cross_entropy_grad(logits, labels, self.class_weights)
        return loss

    def predict_ids(self, x, lengths=None):
        return np.argmax(self.forward(x, lengths, train=False), axis=1)

    def predict_proba(self, x, lengths=None):
        return softmax(self.forward(x, lengths, train=False))


class MultiBranchModel:
    """Shared encoder feeding a 2-way fluent head and a 7-way disfluent head.

    The disfluent loss term is computed on disfluent samples only, so an
    all-fluent batch sends zero gradient into the disfluent branch.
    """

    def __init__(self, encoder: Sequential, fluent: Sequential, disfluent: Sequential,
                 fluent_weights=None, disfluent_weights=None, meta=None):
        self.encoder = encoder
        self.fluent = fluent
        self.disfluent = disfluent
        self.fluent_weights = None if fluent_weights is None else np.asarray(fluent_weights)
        self.disfluent_weights = (
            None if disfluent_weights is None else np.asarray(disfluent_weights)
        )
        self.meta = meta or {}

    def named_params(self):
        yield from self.encoder.named_params(prefix="encoder.")
        yield from self.fluent.named_params(prefix="fluent.")
        yield from self.disfluent.named_params(prefix="disfluent.")

    def zero_grads(self):
        for net in (self.encoder, self.fluent, self.disfluent):
            net.zero_grads()

    def state_dict(self):
        state = self.encoder.state_dict(prefix="encoder.")
        state.update(self.fluent.state_dict(prefix="fluent."))
        state.update(self.disfluent.state_dict(prefix="disfluent."))
        return state

    def load_state_dict(self, state):
        self.encoder.load_state_dict(state, prefix="encoder.")
        self.fluent.load_state_dict(state, prefix="fluent.")
        self.disfluent.load_state_dict(state, prefix="disfluent.")

    def set_rng(self, rng):
        for net in (self.encoder, self.fluent, self.disfluent):
            net.set_rng(rng)

    def forward(self, x, lengths=None, train=False):
        hidden, _ = self.encoder.forward(x, lengths, train=train)
        fluent_logits, _ = self.fluent.forward(hidden, train=train)
        disfluent_logits, _ = self.disfluent.forward(hidden, train=train)
        return fluent_logits, disfluent_logits

    def loss_and_backward(self, x, lengths, labels):
        fl, dl = self.forward(x, lengths, train=True)
        loss, dfl, ddl = joint_loss_grad(
            fl, dl, labels, self.fluent_weights, self.disfluent_weights
        )
        d_hidden = self.fluent.backward(dfl) + self.disfluent.backward(ddl)
        self.encoder.backward(d_hidden)
        return loss

    def loss_value(self, x, lengths, labels):
        fl, dl = self.forward(x, lengths, train=False)
        loss, _, _ = joint_loss_grad(fl, dl, labels, self.fluent_weights, self.disfluent_weights)
        return loss

    def predict_ids(self, x, lengths=None):
        fl, dl = self.forward(x, lengths, train=False)
        return mb_predict(fl, dl)


def mb_predict(fluent_logits, disfluent_logits):
    """Branch-combination rule: trust the fluent head's verdict; consult
    the disfluent head only when the verdict is "not fluent"."""
    fluent_logits = np.atleast_2d(fluent_logits)
    disfluent_logits = np.atleast_2d(disfluent_logits)
    says_fluent = np.argmax(fluent_logits, axis=1) == FLUENT_TARGET
    disfluent_pick = np.argmax(disfluent_logits, axis=1)
    return np.where(says_fluent, N_CLASSES - 1, disfluent_pick)


def build_stutternet(input_dim, n_classes=N_CLASSES, spec=StutterNetSpec(),
                     class_weights=None, seed=0):
    rng = np.random.default_rng(seed)
    trunk, pooled_dim = _tdnn_trunk(input_dim, spec.channels, rng)
    head = _fc_stack(pooled_dim, spec.fc_hidden, n_classes, rng)
    net = Sequential(trunk.layers + head.layers)
    meta = {
        "kind": "sb-stutternet",
        "input_dim": input_dim,
        "n_classes": n_classes,
        "channels": spec.channels,
        "fc_hidden": list(spec.fc_hidden),
        "seed": seed,
        "class_weights": None if class_weights is None else list(map(float, class_weights)),
    }
    return SingleBranchModel(net, class_weights=class_weights, meta=meta)


def build_mb_stutternet(input_dim, spec=StutterNetSpec(),
                        fluent_weights=None, disfluent_weights=None, seed=0):
    rng = np.random.default_rng(seed)
    encoder, pooled_dim = _tdnn_trunk(input_dim, spec.channels, rng)
    fluent = _fc_stack(pooled_dim, spec.fc_hidden, 2, rng)
    disfluent = _fc_stack(pooled_dim, spec.fc_hidden, N_DISFLUENT, rng)
    meta = {
        "kind": "mb-stutternet",
        "input_dim": input_dim,
        "channels": spec.channels,
        "fc_hidden": list(spec.fc_hidden),
        "seed": seed,
        "fluent_weights": None if fluent_weights is None else list(map(float, fluent_weights)),
        "disfluent_weights": (
            None if disfluent_weights is None else list(map(float, disfluent_weights))
        ),
    }
    return MultiBranchModel(encoder, fluent, disfluent, fluent_weights, disfluent_weights, meta)


def build_shallow_mb(input_dim, spec=ShallowMBSpec(),
                     fluent_weights=None, disfluent_weights=None, seed=0):
    """Two-branch shallow net on pooled vectors: three FC layers per branch,
    dropout on the first two."""
    rng = np.random.default_rng(seed)
    encoder = Sequential([])  # pooled input goes straight to the branches
    fluent = _fc_stack(input_dim, spec.fc_hidden, 2, rng, dropout=spec.dropout)
    disfluent = _fc_stack(input_dim, spec.fc_hidden, N_DISFLUENT, rng, dropout=spec.dropout)
    meta = {
        "kind": "shallow-mb",
        "input_dim": input_dim,
        "fc_hidden": list(spec.fc_hidden),
        "dropout": spec.dropout,
        "seed": seed,
        "fluent_weights": None if fluent_weights is None else list(map(float, fluent_weights)),
        "disfluent_weights": (
            None if disfluent_weights is None else list(map(float, disfluent_weights))
        ),
    }
    return MultiBranchModel(encoder, fluent, disfluent, fluent_weights, disfluent_weights, meta)


def branch_weights_from_counts(counts8):
    """Map 8-way class counts to (2-way fluent, 7-way disfluent) weights."""
    counts8 = np.asarray(counts8, dtype=np.float64)
    fluent_counts = [counts8[:-1].sum(), counts8[-1]]  # index order: disfluent, fluent
    return weights_from_counts(fluent_counts), weights_from_counts(counts8[:-1])


def build_from_meta(meta):
    kind = meta.get("kind")
    if kind == "sb-stutternet":
        return build_stutternet(
            meta["input_dim"],
            n_classes=meta["n_classes"],
            spec=StutterNetSpec(meta["channels"], tuple(meta["fc_hidden"])),
            class_weights=meta.get("class_weights"),
            seed=meta.get("seed", 0),
        )
    if kind == "mb-stutternet":
        return build_mb_stutternet(
            meta["input_dim"],
            spec=StutterNetSpec(meta["channels"], tuple(meta["fc_hidden"])),
            fluent_weights=meta.get("fluent_weights"),
            disfluent_weights=meta.get("disfluent_weights"),
            seed=meta.get("seed", 0),
        )
    if kind == "shallow-mb":
        return build_shallow_mb(
            meta["input_dim"],
            spec=ShallowMBSpec(tuple(meta["fc_hidden"]), meta["dropout"]),
            fluent_weights=meta.get("fluent_weights"),
            disfluent_weights=meta.get("disfluent_weights"),
            seed=meta.get("seed", 0),
        )
    raise ConfigError(f"unknown model kind {kind!r}")


def save_model(model, path):
    save_checkpoint(path, model.meta, model.state_dict())


def load_model(path):
    meta, state = load_checkpoint(path)
    model = build_from_meta(meta)
    model.load_state_dict(state)
    return model


def train_single_branch(model: SingleBranchModel, train_items, val_items, config: TrainConfig):
    return train(model, train_items, val_items, config)


def train_multi_branch(model: MultiBranchModel, train_items, val_items, config: TrainConfig):
    return train(model, train_items, val_items, config)
