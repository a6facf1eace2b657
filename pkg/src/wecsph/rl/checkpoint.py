"""Bitwise save/load of a :class:`Masac` learner."""
from __future__ import annotations

import numpy as np

from .. import binio
from .masac import Masac, MasacConfig

CHECKPOINT_MAGIC = b"WECMASAC"
CHECKPOINT_VERSION = 1
# observation layout: 4 elevations, 4 elevation rates, v_prev, dz, a_z
OBS_SCHEMA = "eta4-deta4-vprev-dz-az/v1"


def _opt_arrays(prefix, opt, out):
    for k, (m, v) in enumerate(opt.moments):
        out[f"{prefix}.m{k}"] = m
        out[f"{prefix}.v{k}"] = v
    out[f"{prefix}.t"] = np.array([opt.t], dtype=np.int64)


def _opt_load(prefix, opt, arrays):
    for k, (m, v) in enumerate(opt.moments):
        m[...] = arrays[f"{prefix}.m{k}"]
        v[...] = arrays[f"{prefix}.v{k}"]
    opt.t = int(arrays[f"{prefix}.t"][0])


def _norm_arrays(prefix, norm, out):
    out[f"{prefix}.mean"] = norm.mean
    out[f"{prefix}.var"] = norm.var
    out[f"{prefix}.count"] = np.array([norm.count])


def _norm_load(prefix, norm, arrays):
    norm.mean = arrays[f"{prefix}.mean"].copy()
    norm.var = arrays[f"{prefix}.var"].copy()
    norm.count = float(arrays[f"{prefix}.count"][0])


def checkpoint_bytes(m: Masac, schema: str = OBS_SCHEMA, include_buffer: bool = True,
                     extra: dict | None = None) -> bytes:
    arrays = {}
    for i, ag in enumerate(m.agents):
        p = f"agent{i}"
        for k, w in enumerate(ag.policy.params):
            arrays[f"{p}.pi.{k}"] = w
        for j in range(2):
            for k, w in enumerate(ag.q[j].params):
                arrays[f"{p}.q{j}.{k}"] = w
            for k, w in enumerate(ag.q_targ[j].params):
                arrays[f"{p}.qt{j}.{k}"] = w
            _opt_arrays(f"{p}.q{j}opt", ag.q_opt[j], arrays)
        arrays[f"{p}.log_alpha"] = ag.log_alpha
        _opt_arrays(f"{p}.piopt", ag.pi_opt, arrays)
        _opt_arrays(f"{p}.aopt", ag.alpha_opt, arrays)
        _norm_arrays(f"{p}.obs", ag.obs_norm, arrays)
    _norm_arrays("reward", m.reward_scale.stats, arrays)
    if include_buffer:
        arrays.update(m.buffer.state_arrays("buffer"))
    meta = {"config": m.config_dict(), "schema": schema, "updates": m.updates,
            "rng": binio.rng_state(m.rng), "buffer": include_buffer, "extra": extra or {}}
    return binio.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, arrays, meta)


def save_checkpoint(path, m: Masac, **kw) -> None:
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(m, **kw))


def checkpoint_from_bytes(blob: bytes, schema: str = OBS_SCHEMA) -> tuple[Masac, dict]:
    arrays, meta = binio.unpack(blob, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)
    if meta["schema"] != schema:
        raise ValueError(f"checkpoint observation schema {meta['schema']!r} != {schema!r}")
    cfgd = dict(meta["config"])
    cfgd["hidden"] = tuple(cfgd["hidden"])
    m = Masac(MasacConfig(**cfgd), seed=0)
    for i, ag in enumerate(m.agents):
        p = f"agent{i}"
        for k, w in enumerate(ag.policy.params):
            w[...] = arrays[f"{p}.pi.{k}"]
        for j in range(2):
            for k, w in enumerate(ag.q[j].params):
                w[...] = arrays[f"{p}.q{j}.{k}"]
            for k, w in enumerate(ag.q_targ[j].params):
                w[...] = arrays[f"{p}.qt{j}.{k}"]
            _opt_load(f"{p}.q{j}opt", ag.q_opt[j], arrays)
        ag.log_alpha[...] = arrays[f"{p}.log_alpha"]
        _opt_load(f"{p}.piopt", ag.pi_opt, arrays)
        _opt_load(f"{p}.aopt", ag.alpha_opt, arrays)
        _norm_load(f"{p}.obs", ag.obs_norm, arrays)
    _norm_load("reward", m.reward_scale.stats, arrays)
    if meta["buffer"]:
        m.buffer.load_arrays(arrays, "buffer")
    m.rng = binio.rng_from_state(meta["rng"])
    m.updates = meta["updates"]
    return m, meta["extra"]


def load_checkpoint(path, schema: str = OBS_SCHEMA) -> tuple[Masac, dict]:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"checkpoint not found: {path}") from None
    return checkpoint_from_bytes(blob, schema)
