"""Downstream classifiers on pooled vectors: KNN, Gaussian naive Bayes,
and a one-vs-rest linear SVM trained by seeded subgradient descent.

All three standardize features by default (train-set mean/std stored in
the model) and are deterministic given seed and input order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotFitted, StutterKitError


@dataclass
class Standardizer:
    mean: np.ndarray = None
    std: np.ndarray = None

    def fit(self, x):
        self.mean = x.mean(axis=0)
        std = x.std(axis=0)
        self.std = np.where(std > 0, std, 1.0)
        return self

    def transform(self, x):
        return (x - self.mean) / self.std


def _prepare(x):
    x = np.asarray(x, dtype=np.float64)
    return np.atleast_2d(x)


class KnnModel:
    """Exact k-nearest-neighbor voting with Euclidean distance.

    Ties are broken by smaller summed distance, then smaller class id.
    """

    def __init__(self, k=5, standardize=True):
        self.k = k
        self.standardize = standardize
        self.scaler = None
        self.x = None
        self.y = None

    def fit(self, x, y):
        x = _prepare(x)
        if self.k > len(x):
            raise StutterKitError(f"k={self.k} exceeds {len(x)} training points")
        self.scaler = Standardizer().fit(x) if self.standardize else None
        self.x = self.scaler.transform(x) if self.scaler else x
        self.y = np.asarray(y, dtype=int)
        return self

    def predict(self, x):
        if self.x is None:
            raise NotFitted("KNN model is not fitted")
        x = _prepare(x)
        if self.scaler:
            x = self.scaler.transform(x)
        out = np.empty(len(x), dtype=int)
        for i, q in enumerate(x):
            dist = np.sqrt(((self.x - q) ** 2).sum(axis=1))
            nearest = np.argsort(dist, kind="stable")[: self.k]
            votes = {}
            for j in nearest:
                c = int(self.y[j])
                n, s = votes.get(c, (0, 0.0))
                votes[c] = (n + 1, s + dist[j])
            # most votes, then smallest summed distance, then smallest id
            out[i] = min(votes, key=lambda c: (-votes[c][0], votes[c][1], c))
        return out


class GnbModel:
    """Gaussian naive Bayes with variance smoothing."""

    def __init__(self, standardize=True, var_smoothing=1e-9):
        self.standardize = standardize
        self.var_smoothing = var_smoothing
        self.scaler = None
        self.classes = None
        self.priors = None
        self.means = None
        self.variances = None

    def fit(self, x, y):
        x = _prepare(x)
        y = np.asarray(y, dtype=int)
        self.scaler = Standardizer().fit(x) if self.standardize else None
        if self.scaler:
            x = self.scaler.transform(x)
        self.classes = np.unique(y)
        eps = self.var_smoothing * float(x.var(axis=0).max() or 1.0)
        self.priors = np.array([(y == c).mean() for c in self.classes])
        self.means = np.stack([x[y == c].mean(axis=0) for c in self.classes])
        self.variances = np.stack([x[y == c].var(axis=0) for c in self.classes]) + eps
        return self

    def log_posterior(self, x):
        if self.classes is None:
            raise NotFitted("GNB model is not fitted")
        x = _prepare(x)
        if self.scaler:
            x = self.scaler.transform(x)
        # (n, n_classes) joint log-likelihoods
        diff = x[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (
            np.log(2 * np.pi * self.variances)[None] + diff**2 / self.variances[None]
        ).sum(axis=2)
        return np.log(self.priors)[None] + ll

    def predict_proba(self, x):
        logp = self.log_posterior(x)
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, x):
        return self.classes[np.argmax(self.log_posterior(x), axis=1)]


class LinearSvmModel:
    """One-vs-rest linear SVM, primal subgradient descent on the
    L2-regularized hinge loss with step schedule 1/(lambda * t)."""

    def __init__(self, c=1.0, epochs=100, seed=0, standardize=True):
        self.c = c
        self.epochs = epochs
        self.seed = seed
        self.standardize = standardize
        self.scaler = None
        self.classes = None
        self.weights = None
        self.biases = None

    def fit(self, x, y):
        x = _prepare(x)
        y = np.asarray(y, dtype=int)
        self.classes = np.unique(y)
        if len(self.classes) < 2:
            raise StutterKitError("SVM needs at least two classes")
        self.scaler = Standardizer().fit(x) if self.standardize else None
        if self.scaler:
            x = self.scaler.transform(x)
        n, d = x.shape
        lam = 1.0 / (self.c * n)
        self.weights = np.zeros((len(self.classes), d))
        self.biases = np.zeros(len(self.classes))
        for ci, cls in enumerate(self.classes):
            targets = np.where(y == cls, 1.0, -1.0)
            w = np.zeros(d)
            b = 0.0
            rng = np.random.default_rng(self.seed + ci)
            t = 0
            for _ in range(self.epochs):
                for i in rng.permutation(n):
                    t += 1
                    eta = 1.0 / (lam * t)
                    margin = targets[i] * (w @ x[i] + b)
                    w *= 1.0 - eta * lam
                    if margin < 1.0:
                        w += eta * targets[i] * x[i]
                        b += eta * targets[i]  # bias unregularized
            self.weights[ci] = w
            self.biases[ci] = b
        return self

    def decision_values(self, x):
        if self.weights is None:
            raise NotFitted("SVM model is not fitted")
        x = _prepare(x)
        if self.scaler:
            x = self.scaler.transform(x)
        return x @ self.weights.T + self.biases

    def predict(self, x):
        return self.classes[np.argmax(self.decision_values(x), axis=1)]


def classic_state(model):
    """(meta, arrays) pair for the checkpoint container."""
    arrays = {}
    if model.scaler is not None:
        arrays["scaler.mean"] = model.scaler.mean
        arrays["scaler.std"] = model.scaler.std
    if isinstance(model, KnnModel):
        meta = {"kind": "knn", "k": model.k, "standardize": model.standardize}
        arrays["train.x"] = model.x
        arrays["train.y"] = model.y.astype(np.float64)
    elif isinstance(model, GnbModel):
        meta = {
            "kind": "gnb",
            "standardize": model.standardize,
            "var_smoothing": model.var_smoothing,
        }
        arrays["classes"] = model.classes.astype(np.float64)
        arrays["priors"] = model.priors
        arrays["means"] = model.means
        arrays["variances"] = model.variances
    elif isinstance(model, LinearSvmModel):
        meta = {
            "kind": "svm",
            "c": model.c,
            "epochs": model.epochs,
            "seed": model.seed,
            "standardize": model.standardize,
        }
        arrays["classes"] = model.classes.astype(np.float64)
        arrays["weights"] = model.weights
        arrays["biases"] = model.biases
    else:
        raise StutterKitError(f"not a classic model: {type(model).__name__}")
    return meta, arrays


def classic_from_state(meta, arrays):
    kind = meta["kind"]
    scaler = None
    if "scaler.mean" in arrays:
        scaler = Standardizer(mean=arrays["scaler.mean"], std=arrays["scaler.std"])
    if kind == "knn":
        model = KnnModel(k=meta["k"], standardize=meta["standardize"])
        model.scaler = scaler
        model.x = arrays["train.x"]
        model.y = arrays["train.y"].astype(int)
    elif kind == "gnb":
        model = GnbModel(standardize=meta["standardize"], var_smoothing=meta["var_smoothing"])
        model.scaler = scaler
        model.classes = arrays["classes"].astype(int)
        model.priors = arrays["priors"]
        model.means = arrays["means"]
        model.variances = arrays["variances"]
    elif kind == "svm":
        model = LinearSvmModel(
            c=meta["c"], epochs=meta["epochs"], seed=meta["seed"],
            standardize=meta["standardize"],
        )
        model.scaler = scaler
        model.classes = arrays["classes"].astype(int)
        model.weights = arrays["weights"]
        model.biases = arrays["biases"]
    else:
        raise StutterKitError(f"unknown classic model kind {kind!r}")
    return model
