"""Minimal float64 multilayer perceptron with manual backprop, plus Adam."""
from __future__ import annotations

import numpy as np

HIDDEN = (128, 128, 64)


class Mlp:
    """Affine layers with ReLU between them and an identity output.

    Weights are stored as ``(fan_in, fan_out)`` so a batch ``x`` of shape
    ``(B, in)`` maps through ``x @ W + b``.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, out_scale: float = 1.0):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError(f"invalid layer sizes {sizes}")
        self.W = []
        self.b = []
        for k, (fi, fo) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if rng is None:
                w = np.zeros((fi, fo))
            else:
                bound = np.sqrt(6.0 / fi)
                w = rng.uniform(-bound, bound, size=(fi, fo))
                if k == len(self.sizes) - 2:
                    w *= out_scale
            self.W.append(w)
            self.b.append(np.zeros(fo))

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.W, self.b):
            out += [w, b]
        return out

    def num_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "Mlp":
        m = Mlp.__new__(Mlp)
        m.sizes = self.sizes
        m.W = [w.copy() for w in self.W]
        m.b = [b.copy() for b in self.b]
        return m

    def load(self, other: "Mlp") -> None:
        for dst, src in zip(self.params, other.params):
            dst[...] = src

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[-1]} does not match {self.sizes[0]}")
        return x, squeeze

    def forward(self, x):
        x, squeeze = self._check(x)
        n = len(self.W)
        for k in range(n):
            x = x @ self.W[k] + self.b[k]
            if k < n - 1:
                x = np.maximum(x, 0.0)
        return x[0] if squeeze else x

    __call__ = forward

    def forward_cache(self, x):
        """Forward pass keeping the layer inputs needed by :meth:`backward`."""
        x, _ = self._check(x)
        inputs = []
        n = len(self.W)
        for k in range(n):
            inputs.append(x)
            x = x @ self.W[k] + self.b[k]
            if k < n - 1:
                x = np.maximum(x, 0.0)
        return x, inputs

    def backward(self, inputs, dy):
        """Gradients ``[dW0, db0, dW1, ...]`` and the input gradient for upstream ``dy``."""
        n = len(self.W)
        grads = [None] * (2 * n)
        g = dy
        for k in range(n - 1, -1, -1):
            xin = inputs[k]
            grads[2 * k] = xin.T @ g
            grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.W[k].T
            if k > 0:
                g = g * (inputs[k] > 0.0)
        return grads, g


def adam_step(params, grads, moments, lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8, t: int = 1):
    """Bias-corrected Adam; updates ``params`` and ``moments`` in place.

    ``moments`` is a list of ``(m, v)`` pairs aligned with ``params``.
    Returns ``params`` for convenience.
    """
    if t < 1:
        raise ValueError("Adam step counter starts at 1")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient passed to Adam")
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p, g, (m, v) in zip(params, grads, moments):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params


class Adam:
    def __init__(self, params, lr: float = 3e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.moments = [(np.zeros_like(p), np.zeros_like(p)) for p in params]

    def step(self, grads) -> None:
        self.t += 1
        adam_step(self.params, grads, self.moments, self.lr, self.beta1, self.beta2,
                  self.eps, self.t)


def soft_update(online, target, tau: float) -> None:
    """target <- tau online + (1 - tau) target, elementwise and in place."""
    po = online.params if hasattr(online, "params") else online
    pt = target.params if hasattr(target, "params") else target
    if len(po) != len(pt):
        raise ValueError("online and target parameter lists differ in length")
    for a, b in zip(po, pt):
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch {a.shape} vs {b.shape} in soft update")
    for a, b in zip(po, pt):
        if tau == 1.0:
            b[...] = a
        elif tau != 0.0:
            b *= 1.0 - tau
            b += tau * a
