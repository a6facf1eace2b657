"""Multi-agent soft actor-critic with centralised critics.

Each agent i owns a policy over its own observation, two critics over the
joint (state, action) with target copies, and a log-temperature. Updates per
training step, in order: critics, policies, temperatures, soft targets.

Critic target::

    y^i = r^i + gamma (1 - d) [ min_j Qbar_j^i(s', a') - sum_k alpha_k log pi_k(a'^k | s'^k) ]

(the per-agent variant keeps only k = i in the entropy sum). Policy loss::

    L_pi^i = mean[ alpha_i log pi_i(a^i | s^i) - min_j Q_j^i(s, a) ]

with a fresh joint sample in which only agent i's action carries gradient.
Temperature loss ``mean[-alpha_i (log pi_i + H_target)]`` is minimised over
``log alpha_i``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .nn import HIDDEN, Adam, Mlp, soft_update
from .policy import GaussianPolicy
from .replay import Batch, ReplayBuffer, RewardScaler, RunningNormalizer


@dataclass(frozen=True)
class MasacConfig:
    n_agents: int = 1
    obs_dim: int = 11
    act_dim: int = 1
    gamma: float = 0.99
    tau: float = 0.005
    lr_actor: float = 3e-3
    lr_critic: float = 3e-3
    lr_alpha: float = 3e-3
    batch_size: int = 128
    buffer_size: int = 100_000
    target_entropy: float = -1.0
    init_alpha: float = 0.1
    n_min: int = 1000
    hidden: tuple = HIDDEN
    entropy_sum: bool = True  # False: per-agent entropy term in the critic target
    normalize_obs: bool = True
    scale_rewards: bool = True

    def __post_init__(self):
        if self.n_agents < 1 or self.obs_dim < 1 or self.act_dim < 1:
            raise ValueError("agent count and widths must be positive")
        if not (0 <= self.gamma <= 1 and 0 <= self.tau <= 1):
            raise ValueError("gamma and tau must lie in [0, 1]")
        if self.init_alpha <= 0:
            raise ValueError("initial temperature must be positive")
        if self.n_min < self.batch_size:
            raise ValueError("n_min must be at least one batch")


class Agent:
    def __init__(self, cfg: MasacConfig, rng: np.random.Generator):
        joint = cfg.n_agents * (cfg.obs_dim + cfg.act_dim)
        self.policy = GaussianPolicy(cfg.obs_dim, cfg.act_dim, rng, cfg.hidden)
        self.q = [Mlp((joint, *cfg.hidden, 1), rng) for _ in range(2)]
        self.q_targ = [q.copy() for q in self.q]
        self.log_alpha = np.array([np.log(cfg.init_alpha)])
        self.pi_opt = Adam(self.policy.params, cfg.lr_actor)
        self.q_opt = [Adam(q.params, cfg.lr_critic) for q in self.q]
        self.alpha_opt = Adam([self.log_alpha], cfg.lr_alpha)
        self.obs_norm = RunningNormalizer(cfg.obs_dim)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))


def joint_input(s, a):
    """Flatten joint observation (B, N, obs) and action (B, N, act) into critic input."""
    B = s.shape[0]
    return np.concatenate([s.reshape(B, -1), a.reshape(B, -1)], axis=1)


class Masac:
    def __init__(self, cfg: MasacConfig, seed: int = 0):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.agents = [Agent(cfg, self.rng) for _ in range(cfg.n_agents)]
        self.buffer = ReplayBuffer(cfg.n_agents, cfg.obs_dim, cfg.act_dim, cfg.buffer_size)
        self.reward_scale = RewardScaler()
        self.updates = 0

    # -- acting ------------------------------------------------------------

    def normalize(self, s, update: bool = False):
        """Per-agent normalised observations, shape (..., N, obs)."""
        s = np.asarray(s, dtype=np.float64)
        if not self.cfg.normalize_obs:
            return s
        out = np.empty_like(s)
        for i, ag in enumerate(self.agents):
            if update:
                ag.obs_norm.update(s[..., i, :].reshape(-1, self.cfg.obs_dim))
            out[..., i, :] = ag.obs_norm(s[..., i, :])
        return out

    def freeze(self, frozen: bool = True) -> None:
        for ag in self.agents:
            ag.obs_norm.frozen = frozen

    def act(self, s, deterministic: bool = False, random: bool = False):
        """Joint action (N, act) for a joint observation (N, obs).

        Agent i's action depends on ``s[i]`` only.
        """
        cfg = self.cfg
        if random:
            return self.rng.uniform(-1.0, 1.0, size=(cfg.n_agents, cfg.act_dim))
        sn = self.normalize(s)
        out = np.empty((cfg.n_agents, cfg.act_dim))
        for i, ag in enumerate(self.agents):
            out[i] = ag.policy.act(sn[i], self.rng, deterministic)[0]
        return out

    # -- learning ----------------------------------------------------------

    def _sample_joint(self, s):
        """Fresh reparameterised joint sample; returns actions, log-probs, caches."""
        B = s.shape[0]
        acts = np.empty((B, self.cfg.n_agents, self.cfg.act_dim))
        logps = np.empty((B, self.cfg.n_agents))
        caches = []
        for k, ag in enumerate(self.agents):
            xi = self.rng.standard_normal((B, self.cfg.act_dim))
            a, lp, cache = ag.policy.forward_sample(s[:, k, :], xi)
            acts[:, k, :] = a
            logps[:, k] = lp
            caches.append(cache)
        return acts, logps, caches

    def critic_targets(self, batch: Batch):
        """Soft Bellman targets y, shape (B, N)."""
        cfg = self.cfg
        a2, logp2, _ = self._sample_joint(batch.s2)
        x2 = joint_input(batch.s2, a2)
        alphas = np.array([ag.alpha for ag in self.agents])
        ent_all = logp2 @ alphas if cfg.entropy_sum else None
        y = np.empty_like(batch.r)
        for i, ag in enumerate(self.agents):
            qmin = np.minimum(ag.q_targ[0](x2)[:, 0], ag.q_targ[1](x2)[:, 0])
            ent = ent_all if cfg.entropy_sum else alphas[i] * logp2[:, i]
            y[:, i] = batch.r[:, i] + cfg.gamma * (1.0 - batch.d) * (qmin - ent)
        return y

    def critic_grads(self, agent: Agent, x, y):
        """Per-critic (loss, grads) for mean squared Bellman residual."""
        B = x.shape[0]
        out = []
        for q in agent.q:
            pred, cache = q.forward_cache(x)
            err = pred[:, 0] - y
            loss = float(np.mean(err * err))
            if not np.isfinite(loss):
                raise FloatingPointError(f"non-finite critic loss (|y| max {np.abs(y).max()})")
            grads, _ = q.backward(cache, (2.0 / B) * err[:, None])
            out.append((loss, grads))
        return out

    def critic_update(self, batch: Batch, y=None):
        if y is None:
            y = self.critic_targets(batch)
        x = joint_input(batch.s, batch.a)
        losses = []
        for i, ag in enumerate(self.agents):
            for opt, (loss, grads) in zip(ag.q_opt, self.critic_grads(ag, x, y[:, i])):
                opt.step(grads)
                losses.append(loss)
        return np.array(losses).reshape(self.cfg.n_agents, 2)

    def policy_grads(self, i: int, s, acts, logps, caches):
        """Loss and parameter gradients of agent i's policy objective."""
        ag = self.agents[i]
        B = s.shape[0]
        x = joint_input(s, acts)
        preds = []
        for q in ag.q:
            pred, cache = q.forward_cache(x)
            preds.append((pred[:, 0], cache))
        q1, q2 = preds[0][0], preds[1][0]
        use1 = q1 <= q2
        qmin = np.where(use1, q1, q2)
        alpha = ag.alpha
        loss = float(np.mean(alpha * logps[:, i] - qmin))
        if not np.isfinite(loss):
            raise FloatingPointError("non-finite policy loss")
        dx = np.zeros_like(x)
        for q, (_, cache), mask in zip(ag.q, preds, (use1, ~use1)):
            _, g = q.backward(cache, (-1.0 / B) * mask[:, None].astype(np.float64))
            dx += g
        n, od, ad = self.cfg.n_agents, self.cfg.obs_dim, self.cfg.act_dim
        a0 = n * od + i * ad
        g_a = dx[:, a0:a0 + ad]
        g_logp = np.full(B, alpha / B)
        return loss, ag.policy.backward(caches[i], g_a, g_logp)

    def policy_update(self, batch: Batch):
        acts, logps, caches = self._sample_joint(batch.s)
        losses = np.empty(self.cfg.n_agents)
        for i, ag in enumerate(self.agents):
            losses[i], grads = self.policy_grads(i, batch.s, acts, logps, caches)
            ag.pi_opt.step(grads)
        return losses, logps

    def temperature_update(self, logps):
        """One Adam step on each log alpha; returns the losses."""
        H = self.cfg.target_entropy
        losses = np.empty(self.cfg.n_agents)
        for i, ag in enumerate(self.agents):
            alpha = ag.alpha
            m = float(np.mean(logps[:, i] + H))
            losses[i] = -alpha * m
            ag.alpha_opt.step([np.array([-alpha * m])])
        return losses

    def soft_update_targets(self):
        for ag in self.agents:
            for q, qt in zip(ag.q, ag.q_targ):
                soft_update(q, qt, self.cfg.tau)

    def update(self, batch: Batch) -> dict:
        y = self.critic_targets(batch)
        q_loss = self.critic_update(batch, y)
        pi_loss, logps = self.policy_update(batch)
        a_loss = self.temperature_update(logps)
        self.soft_update_targets()
        self.updates += 1
        return {"critic_loss": q_loss.mean(axis=1), "policy_loss": pi_loss,
                "alpha_loss": a_loss, "alpha": np.array([ag.alpha for ag in self.agents]),
                "mean_q": float(np.mean(y))}

    def sample_batch(self) -> Batch:
        b = self.buffer.sample(self.cfg.batch_size, self.rng)
        if self.cfg.normalize_obs:
            b = Batch(self.normalize(b.s), b.a, b.r, self.normalize(b.s2), b.d)
        return b

    def train_step(self, s, a, r, s2, done) -> dict | None:
        """Store one joint transition and, once warm, run one update."""
        s = np.asarray(s, dtype=np.float64)
        if self.cfg.normalize_obs:
            self.normalize(s[None], update=True)
        r = np.asarray(r, dtype=np.float64)
        if self.cfg.scale_rewards:
            r = self.reward_scale(r)
        self.buffer.add(s, a, r, s2, done)
        if len(self.buffer) < self.cfg.n_min:
            return None
        return self.update(self.sample_batch())

    def config_dict(self) -> dict:
        d = asdict(self.cfg)
        d["hidden"] = list(d["hidden"])
        return d
