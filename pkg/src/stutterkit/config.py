"""Run configuration: flat key=value files with documented keys.

Example::

    manifest = data/manifest.csv
    feature  = layer:5
    model    = mb-stutternet
    loss     = joint
    seed     = 7

Lines starting with '#' are comments.  Keys not listed in DEFAULTS are
rejected so typos fail loudly.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, fields

from .errors import ConfigError
from .nnet import TrainConfig

MODELS = ("sb-stutternet", "mb-stutternet", "shallow-mb", "svm", "knn", "gnb")
LOSSES = ("ce", "wce", "joint", "joint-wce")

SEQUENCE_MODELS = ("sb-stutternet", "mb-stutternet")
POOLED_MODELS = ("shallow-mb", "svm", "knn", "gnb")


@dataclass
class RunConfig:
    manifest: str = ""
    feature: str = "mfcc"
    model: str = "sb-stutternet"
    loss: str = "ce"
    lr: float = 1e-2
    batch_size: int = 128
    max_epochs: int = 50
    patience: int = 7
    seed: int = 0
    out: str = "runs/out"
    channels: int = 64
    fc_hidden: str = "64,64"
    dropout: float = 0.3
    svm_c: float = 1.0
    svm_epochs: int = 100
    knn_k: int = 5
    standardize: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.model == "sb-stutternet" and self.loss not in ("ce", "wce"):
            raise ConfigError("single-branch models take loss ce or wce")
        if self.model in ("mb-stutternet", "shallow-mb") and not self.loss.startswith("joint"):
            raise ConfigError("multi-branch models take loss joint or joint-wce")

    def hidden_sizes(self):
        return tuple(int(h) for h in self.fc_hidden.split(",") if h.strip())

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
            loss=self.loss,
        )

    def canonical(self) -> str:
        return json.dumps(
            {f.name: getattr(self, f.name) for f in fields(self)}, sort_keys=True
        )

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_config_text(text: str, base_dir: str = ".") -> RunConfig:
    values = {}
    types = {f.name: f.type for f in fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value, types[key], lineno)
    cfg = RunConfig(**values)
    if cfg.manifest and not os.path.isabs(cfg.manifest):
        cfg.manifest = os.path.join(base_dir, cfg.manifest)
    return cfg


def _coerce(key, value, type_name, lineno):
    try:
        if type_name == "int":
            return int(value)
        if type_name == "float":
            return float(value)
        if type_name == "bool":
            return _BOOL[value.lower()]
        return value
    except (ValueError, KeyError):
        raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from None


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))
