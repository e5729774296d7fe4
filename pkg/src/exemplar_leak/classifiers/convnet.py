"""Minimal shallow convolutional network with hand-rolled backpropagation.

Stage order: temporal convolution along samples (filters shared across
channels), spatial convolution collapsing channels, square nonlinearity,
non-overlapping mean pooling, log compression, affine readout, softmax.
Everything runs in float64 so the analytic gradients can be validated
against central finite differences.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NonFiniteLoss, ShapeMismatch
from ..rngutil import substream

LOG_EPS = 1e-6


def resolve_arch(spec, n_channels: int, n_samples: int) -> dict:
    """Concrete layer sizes for a given input shape."""
    kernel = spec.temporal_kernel_len or math.ceil(n_samples / 4)
    pool = spec.pool_len or math.ceil(n_samples / 8)
    conv_out = n_samples - kernel + 1
    if conv_out < 1:
        raise ShapeMismatch(
            f"temporal kernel {kernel} longer than trial ({n_samples} samples)")
    n_pool = conv_out // pool
    if n_pool < 1:
        raise ShapeMismatch(
            f"pool length {pool} longer than conv output ({conv_out})")
    return {
        "n_temporal_filters": spec.n_temporal_filters,
        "kernel": kernel,
        "n_spatial_filters": spec.n_spatial_filters,
        "pool": pool,
        "conv_out": conv_out,
        "n_pool": n_pool,
    }


class ShallowConvNet:
    def __init__(self, spec, n_channels: int, n_samples: int, n_classes: int):
        self.spec = spec
        self.n_channels = n_channels
        self.n_samples = n_samples
        self.n_classes = n_classes
        self.arch = resolve_arch(spec, n_channels, n_samples)
        self._corrupt_backward = False  # test-only mutation hook
        self._init_params()

    def _init_params(self):
        a = self.arch
        rng = substream(self.spec.seed, "conv-init")
        f, l = a["n_temporal_filters"], a["kernel"]
        s = a["n_spatial_filters"]
        readout_dim = s * a["n_pool"]
        self.params = {
            "w_temporal": rng.standard_normal((f, l)) / math.sqrt(l),
            "b_temporal": np.zeros(f),
            "w_spatial": rng.standard_normal((s, f, self.n_channels))
                         / math.sqrt(f * self.n_channels),
            "b_spatial": np.zeros(s),
            "w_out": rng.standard_normal((self.n_classes, readout_dim))
                     / math.sqrt(readout_dim),
            "b_out": np.zeros(self.n_classes),
        }

    # -- forward ---------------------------------------------------------
    #
    # Tensors are kept in (batch, time, feature) layout so every stage is
    # a plain matrix product that BLAS can execute.

    def _forward(self, x: np.ndarray) -> dict:
        a = self.arch
        p = self.params
        batch = x.shape[0]
        c = self.n_channels
        f = a["n_temporal_filters"]
        u = a["conv_out"]
        windows = np.ascontiguousarray(
            np.lib.stride_tricks.sliding_window_view(
                x, a["kernel"], axis=2))                  # (B, C, U, L)
        h_temp = windows @ p["w_temporal"].T + p["b_temporal"]  # (B, C, U, F)
        h_cf = h_temp.transpose(0, 2, 1, 3).reshape(batch, u, c * f)
        w_spat = p["w_spatial"].transpose(2, 1, 0).reshape(c * f, -1)
        h_spat = h_cf @ w_spat + p["b_spatial"]           # (B, U, S)
        squared = h_spat ** 2
        used = a["n_pool"] * a["pool"]
        pooled = squared[:, :used, :].reshape(
            batch, a["n_pool"], a["pool"], -1).mean(axis=2)   # (B, P, S)
        logged = np.log(pooled + LOG_EPS)
        flat = logged.reshape(batch, -1)
        logits = flat @ p["w_out"].T + p["b_out"]
        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=1, keepdims=True)
        return {"windows": windows, "h_cf": h_cf, "h_spat": h_spat,
                "w_spat": w_spat, "pooled": pooled, "flat": flat,
                "probs": probs}

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self._forward(np.asarray(x, dtype=np.float64))["probs"]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)

    # -- loss and gradients ----------------------------------------------

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray):
        a = self.arch
        p = self.params
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        batch = x.shape[0]
        cache = self._forward(x)
        probs = cache["probs"]
        loss = float(-np.mean(np.log(probs[np.arange(batch), y] + 1e-300)))

        d_logits = probs.copy()
        d_logits[np.arange(batch), y] -= 1.0
        d_logits /= batch

        c = self.n_channels
        f = a["n_temporal_filters"]
        u = a["conv_out"]

        grads = {}
        grads["w_out"] = d_logits.T @ cache["flat"]
        grads["b_out"] = d_logits.sum(axis=0)

        d_flat = d_logits @ p["w_out"]
        d_logged = d_flat.reshape(batch, a["n_pool"], -1)
        d_pooled = d_logged / (cache["pooled"] + LOG_EPS)

        used = a["n_pool"] * a["pool"]
        d_squared = np.zeros_like(cache["h_spat"])
        d_squared[:, :used, :] = np.repeat(
            d_pooled / a["pool"], a["pool"], axis=1)
        d_spat = 2.0 * cache["h_spat"] * d_squared        # (B, U, S)

        grads["b_spatial"] = d_spat.sum(axis=(0, 1))
        s = a["n_spatial_filters"]
        d_w_spat = (cache["h_cf"].reshape(-1, c * f).T
                    @ d_spat.reshape(-1, s))              # (C*F, S)
        grads["w_spatial"] = d_w_spat.reshape(c, f, s).transpose(2, 1, 0)
        d_cf = d_spat @ cache["w_spat"].T                 # (B, U, C*F)
        d_temp = d_cf.reshape(batch, u, c, f).transpose(0, 2, 1, 3)
        grads["b_temporal"] = d_temp.sum(axis=(0, 1, 2))
        grads["w_temporal"] = (d_temp.reshape(-1, f).T
                               @ cache["windows"].reshape(-1, a["kernel"]))
        if self._corrupt_backward:
            grads["w_temporal"] = -grads["w_temporal"]
        return loss, grads

    # -- training --------------------------------------------------------

    def fit(self, x: np.ndarray, y: np.ndarray):
        spec = self.spec
        n = len(y)
        for epoch in range(spec.epochs):
            order = substream(spec.seed, "conv-epoch", epoch).permutation(n)
            for start in range(0, n, spec.batch_size):
                batch = order[start:start + spec.batch_size]
                loss, grads = self.loss_and_grads(x[batch], y[batch])
                if not math.isfinite(loss):
                    raise NonFiniteLoss(
                        f"training loss became non-finite at epoch {epoch}")
                for name, grad in grads.items():
                    self.params[name] -= spec.learning_rate * grad
        return self

    # -- parameter access for gradient checking --------------------------

    def get_flat_params(self) -> np.ndarray:
        return np.concatenate([self.params[k].ravel()
                               for k in sorted(self.params)])

    def set_flat_params(self, flat: np.ndarray):
        offset = 0
        for k in sorted(self.params):
            size = self.params[k].size
            self.params[k] = flat[offset:offset + size].reshape(
                self.params[k].shape).copy()
            offset += size

    def flat_grads(self, grads: dict) -> np.ndarray:
        return np.concatenate([grads[k].ravel() for k in sorted(grads)])


def gradient_check(spec, x: np.ndarray, y: np.ndarray,
                   step: float = 1e-3, corrupt_backward: bool = False) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Intended for small batches (<= 8 trials) and small architectures; the
    finite-difference pass evaluates the loss twice per parameter.
    ``corrupt_backward`` flips the sign of one gradient block and exists
    only so tests can prove this check catches a broken backward pass.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] > 8:
        raise ShapeMismatch("gradient_check batches are limited to 8 trials")
    net = ShallowConvNet(spec, x.shape[1], x.shape[2],
                         int(y.max()) + 1)
    net._corrupt_backward = corrupt_backward
    _, grads = net.loss_and_grads(x, y)
    analytic = net.flat_grads(grads)

    theta = net.get_flat_params()
    numeric = np.empty_like(theta)
    bumped = theta.copy()

    def loss_at(i, offset):
        bumped[i] = theta[i] + offset
        net.set_flat_params(bumped)
        loss, _ = net.loss_and_grads(x, y)
        return loss

    # Fourth-order central stencil: the log-compressed loss surface is
    # curved enough that a 2-point difference at this step size leaves
    # truncation error above the tolerance being certified.
    for i in range(len(theta)):
        numeric[i] = (8.0 * (loss_at(i, step) - loss_at(i, -step))
                      - (loss_at(i, 2 * step) - loss_at(i, -2 * step))
                      ) / (12.0 * step)
        bumped[i] = theta[i]
    net.set_flat_params(theta)

    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / denom))
