"""Tanh-squashed diagonal Gaussian policy."""
from __future__ import annotations

import math

import numpy as np

from .nn import HIDDEN, Mlp

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
SQUASH_EPS = 1e-6
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class GaussianPolicy:
    """``a = tanh(mu + sigma xi)`` with the change-of-variables log-density.

    The trunk outputs ``2 d`` values: means first, then log standard
    deviations (clamped to ``[-20, 2]``).
    """

    def __init__(self, obs_dim: int, act_dim: int, rng: np.random.Generator | None = None,
                 hidden=HIDDEN, out_scale: float = 1e-2):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.net = Mlp((obs_dim, *hidden, 2 * act_dim), rng, out_scale=out_scale)

    @property
    def params(self):
        return self.net.params

    def heads(self, obs):
        out = self.net(obs)
        d = self.act_dim
        return out[..., :d], np.clip(out[..., d:], LOG_STD_MIN, LOG_STD_MAX)

    def act(self, obs, rng: np.random.Generator | None = None, deterministic: bool = False):
        """Action and log-probability for a single observation or a batch."""
        obs = np.asarray(obs, dtype=np.float64)
        squeeze = obs.ndim == 1
        o = obs[None, :] if squeeze else obs
        if deterministic:
            mu, _ = self.heads(o)
            a = np.tanh(mu)
            logp = np.full(a.shape[0], np.nan)
        else:
            xi = rng.standard_normal((o.shape[0], self.act_dim))
            a, logp, _ = self.forward_sample(o, xi)
        return (a[0], logp[0]) if squeeze else (a, logp)

    def forward_sample(self, obs, xi):
        """Reparameterised sample for fixed noise ``xi``; returns ``(a, logp, cache)``."""
        out, inputs = self.net.forward_cache(obs)
        d = self.act_dim
        mu = out[:, :d]
        raw = out[:, d:]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        std = np.exp(log_std)
        u = mu + std * xi
        a = np.tanh(u)
        one_m = 1.0 - a * a
        logp = (np.sum(-0.5 * xi * xi - log_std - _HALF_LOG_2PI, axis=1)
                - np.sum(np.log(one_m + SQUASH_EPS), axis=1))
        cache = (inputs, raw, std, xi, a, one_m)
        return a, logp, cache

    def backward(self, cache, g_a, g_logp):
        """Parameter gradients for upstream ``dL/da`` (B, d) and ``dL/dlogp`` (B,)."""
        inputs, raw, std, xi, a, one_m = cache
        gl = g_logp[:, None]
        g_u = g_a * one_m + gl * (2.0 * a * one_m / (one_m + SQUASH_EPS))
        g_mu = g_u
        g_ls = g_u * std * xi - gl
        g_ls = g_ls * ((raw > LOG_STD_MIN) & (raw < LOG_STD_MAX))
        grads, _ = self.net.backward(inputs, np.concatenate([g_mu, g_ls], axis=1))
        return grads
