"""Trainable layers with explicit forward/backward passes (float64).

Sequence batches are (B, C, T) arrays plus an integer lengths vector;
padded frames are masked in TDNN, BatchNorm, and StatPool.  Vector batches
are (B, D) with lengths=None.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContextTooShort


def length_mask(lengths, t_max):
    """(B, T) boolean mask of valid frames."""
    return np.arange(t_max)[None, :] < np.asarray(lengths)[:, None]


class Layer:
    """Base class; subclasses fill params/grads with matching-shape arrays."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x, lengths=None, train=False):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def zero_grads(self):
        for k in self.grads:
            self.grads[k][...] = 0.0

    def state_arrays(self):
        """Name -> array map persisted in checkpoints (params + buffers)."""
        return dict(self.params)


class TDNN(Layer):
    """1-D convolution over time with explicit context offsets."""

    def __init__(self, in_channels, out_channels, offsets, dilation=1, rng=None):
        super().__init__()
        offsets = tuple(int(o) for o in offsets)
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("context offsets must be strictly increasing")
        self.offsets = tuple(o * dilation for o in offsets)
        self.span = self.offsets[-1] - self.offsets[0]
        self.in_channels = in_channels
        self.out_channels = out_channels
        rng = rng or np.random.default_rng()
        k = len(self.offsets)
        bound = 1.0 / np.sqrt(in_channels * k)
        self.params["W"] = rng.uniform(-bound, bound, size=(out_channels, in_channels, k))
        self.params["b"] = rng.uniform(-bound, bound, size=out_channels)
        self.grads = {k_: np.zeros_like(v) for k_, v in self.params.items()}

    def forward(self, x, lengths=None, train=False):
        b, c, t = x.shape
        t_out = t - self.span
        if lengths is None:
            lengths = np.full(b, t, dtype=int)
        if t_out < 1 or np.any(lengths - self.span < 1):
            raise ContextTooShort(int(min(t, lengths.min())), self.span + 1)
        base = [o - self.offsets[0] for o in self.offsets]
        xw = np.stack([x[:, :, s : s + t_out] for s in base], axis=2)  # (B, C, K, T_out)
        out_lengths = lengths - self.span
        mask = length_mask(out_lengths, t_out)  # (B, T_out)
        y = np.einsum("ock,bckt->bot", self.params["W"], xw)
        y += self.params["b"][None, :, None]
        y *= mask[:, None, :]
        self._cache = (xw, mask, x.shape, base)
        return y, out_lengths

    def backward(self, dy):
        xw, mask, x_shape, base = self._cache
        dy = dy * mask[:, None, :]
        self.grads["W"] += np.einsum("bot,bckt->ock", dy, xw)
        self.grads["b"] += dy.sum(axis=(0, 2))
        dxw = np.einsum("ock,bot->bckt", self.params["W"], dy)
        dx = np.zeros(x_shape)
        t_out = dy.shape[2]
        for k, s in enumerate(base):
            dx[:, :, s : s + t_out] += dxw[:, :, k, :]
        return dx


class FC(Layer):
    """Affine map on (B, D) vectors."""

    def __init__(self, in_dim, out_dim, rng=None):
        super().__init__()
        rng = rng or np.random.default_rng()
        bound = 1.0 / np.sqrt(in_dim)
        self.params["W"] = rng.uniform(-bound, bound, size=(out_dim, in_dim))
        self.params["b"] = rng.uniform(-bound, bound, size=out_dim)
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def forward(self, x, lengths=None, train=False):
        self._x = x
        return x @ self.params["W"].T + self.params["b"], None

    def backward(self, dy):
        self.grads["W"] += dy.T @ self._x
        self.grads["b"] += dy.sum(axis=0)
        return dy @ self.params["W"]


class ReLU(Layer):
    def forward(self, x, lengths=None, train=False):
        self._keep = x > 0
        return x * self._keep, lengths

    def backward(self, dy):
        return dy * self._keep


class BatchNorm(Layer):
    """Batch normalization over the feature/channel axis.

    Train mode uses (masked) batch statistics and updates running stats
    with momentum; eval mode uses the running statistics.
    """

    def __init__(self, num_features, eps=1e-5, momentum=0.1):
        super().__init__()
        self.eps = eps
        self.momentum = momentum
        self.params["gamma"] = np.ones(num_features)
        self.params["beta"] = np.zeros(num_features)
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.running_mean = np.zeros(num_features)
        self.running_var = np.ones(num_features)

    def state_arrays(self):
        state = dict(self.params)
        state["running_mean"] = self.running_mean
        state["running_var"] = self.running_var
        return state

    def forward(self, x, lengths=None, train=False):
        seq = x.ndim == 3
        if seq:
            b, c, t = x.shape
            mask = (
                length_mask(lengths, t)
                if lengths is not None
                else np.ones((b, t), dtype=bool)
            )
            n = int(mask.sum())
            m3 = mask[:, None, :]
            if train:
                mean = (x * m3).sum(axis=(0, 2)) / n
                var = (((x - mean[None, :, None]) * m3) ** 2).sum(axis=(0, 2)) / n
                self._update_running(mean, var, n)
            else:
                mean, var = self.running_mean, self.running_var
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean[None, :, None]) * inv_std[None, :, None] * m3
            y = self.params["gamma"][None, :, None] * xhat + self.params["beta"][None, :, None]
            y *= m3
            self._cache = (xhat, inv_std, m3, n, train, seq)
            return y, lengths
        n = x.shape[0]
        if train:
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            self._update_running(mean, var, n)
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        y = self.params["gamma"] * xhat + self.params["beta"]
        self._cache = (xhat, inv_std, None, n, train, seq)
        return y, lengths

    def _update_running(self, mean, var, n):
        unbiased = var * n / (n - 1) if n > 1 else var
        self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mean
        self.running_var = (1 - self.momentum) * self.running_var + self.momentum * unbiased

    def backward(self, dy):
        xhat, inv_std, m3, n, train, seq = self._cache
        gamma = self.params["gamma"]
        if seq:
            dy = dy * m3
            self.grads["gamma"] += (dy * xhat).sum(axis=(0, 2))
            self.grads["beta"] += dy.sum(axis=(0, 2))
            if not train:
                return dy * gamma[None, :, None] * inv_std[None, :, None]
            dxhat = dy * gamma[None, :, None]
            mean_dxhat = dxhat.sum(axis=(0, 2)) / n
            mean_dxhat_xhat = (dxhat * xhat).sum(axis=(0, 2)) / n
            dx = (
                dxhat
                - mean_dxhat[None, :, None]
                - xhat * mean_dxhat_xhat[None, :, None]
            ) * inv_std[None, :, None]
            return dx * m3
        self.grads["gamma"] += (dy * xhat).sum(axis=0)
        self.grads["beta"] += dy.sum(axis=0)
        if not train:
            return dy * gamma * inv_std
        dxhat = dy * gamma
        dx = (dxhat - dxhat.mean(axis=0) - xhat * (dxhat * xhat).mean(axis=0)) * inv_std
        return dx


class Dropout(Layer):
    """Inverted dropout; identity in eval mode."""

    def __init__(self, rate, rng=None):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.rate = rate
        self.rng = rng or np.random.default_rng()

    def forward(self, x, lengths=None, train=False):
        if not train or self.rate == 0.0:
            self._keep = None
            return x, lengths
        self._keep = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._keep, lengths

    def backward(self, dy):
        return dy if self._keep is None else dy * self._keep


class StatPool(Layer):
    """Masked mean || std pooling, (B, C, T) -> (B, 2C).

    The std uses a small epsilon inside the square root so the gradient is
    defined at zero variance.
    """

    def __init__(self, eps=1e-10):
        super().__init__()
        self.eps = eps

    def forward(self, x, lengths=None, train=False):
        b, c, t = x.shape
        lengths = np.asarray(lengths) if lengths is not None else np.full(b, t, dtype=int)
        m3 = length_mask(lengths, t)[:, None, :]
        counts = lengths.astype(np.float64)[:, None]
        mean = (x * m3).sum(axis=2) / counts
        centered = (x - mean[:, :, None]) * m3
        var = (centered**2).sum(axis=2) / counts
        std = np.sqrt(var + self.eps)
        self._cache = (centered, std, counts, m3)
        return np.concatenate([mean, std], axis=1), None

    def backward(self, dy):
        centered, std, counts, m3 = self._cache
        c = std.shape[1]
        dmean, dstd = dy[:, :c], dy[:, c:]
        dvar = dstd / (2.0 * std)
        dx = (dmean / counts)[:, :, None] + (2.0 / counts)[:, :, None] * dvar[:, :, None] * centered
        return dx * m3


class Sequential(Layer):
    """Layer chain; propagates (x, lengths) and reverses for backward."""

    def __init__(self, layers):
        super().__init__()
        self.layers = list(layers)

    def forward(self, x, lengths=None, train=False):
        for layer in self.layers:
            x, lengths = layer.forward(x, lengths, train=train)
        return x, lengths

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def named_params(self, prefix=""):
        """Yield (name, layer, key) for every trainable array."""
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Sequential):
                yield from layer.named_params(prefix=f"{prefix}{i}.")
            else:
                for key in layer.params:
                    yield f"{prefix}{i}.{type(layer).__name__}.{key}", layer, key

    def state_dict(self, prefix=""):
        state = {}
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Sequential):
                state.update(layer.state_dict(prefix=f"{prefix}{i}."))
            else:
                for key, arr in layer.state_arrays().items():
                    state[f"{prefix}{i}.{type(layer).__name__}.{key}"] = arr
        return state

    def load_state_dict(self, state, prefix=""):
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Sequential):
                layer.load_state_dict(state, prefix=f"{prefix}{i}.")
                continue
            for key in layer.state_arrays():
                name = f"{prefix}{i}.{type(layer).__name__}.{key}"
                arr = np.array(state[name], dtype=np.float64)
                if key in layer.params:
                    if arr.shape != layer.params[key].shape:
                        raise ValueError(f"shape mismatch for {name}")
                    layer.params[key][...] = arr
                else:
                    setattr(layer, key, arr)

    @property
    def receptive_field(self):
        span = sum(l.span for l in self.layers if isinstance(l, TDNN))
        span += sum(l.receptive_field - 1 for l in self.layers if isinstance(l, Sequential))
        return span + 1

    def set_rng(self, rng):
        for layer in self.layers:
            if isinstance(layer, (Dropout,)):
                layer.rng = rng
            elif isinstance(layer, Sequential):
                layer.set_rng(rng)

    def n_params(self):
        return sum(layer.params[key].size for _, layer, key in self.named_params())
