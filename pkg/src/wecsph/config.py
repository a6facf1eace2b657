"""Strict YAML run configuration.

Every key has a default; an empty document resolves to the 2-D reference
case (12 m tank, 1.1 m depth, one 0.5 m x 0.22 m absorber 3.5 m from the
paddle, H = 0.16 m, T = 1.5 s). Unknown keys and invalid values are
rejected with the dotted key name.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields

import yaml


class ConfigError(ValueError):
    pass


def _positive(*names):
    def check(obj, section):
        for n in names:
            v = getattr(obj, n)
            if v is not None and not v > 0:
                raise ConfigError(f"{section}.{n} must be positive, got {v!r}")
    return check


@dataclass
class TankConfig:
    length: float = 12.0
    depth: float = 1.1
    width: float = 1.0
    dp: float = 0.02
    dim: int = 2
    freeboard: float = 0.2
    n_layers: int = 4
    cf: float | None = None
    rho0: float = 1000.0
    g: float = 9.81
    damping_length: float | None = None
    delta_dd: float = 0.1
    cfl: float = 0.2
    neighbor_skin: float = 0.0

    def validate(self):
        _positive("length", "depth", "width", "dp", "freeboard", "n_layers", "cf", "rho0", "g",
                  "damping_length", "cfl")(self, "tank")
        if self.dim not in (2, 3):
            raise ConfigError(f"tank.dim must be 2 or 3, got {self.dim!r}")
        if self.n_layers < 4:
            raise ConfigError("tank.n_layers must be >= 4 (support radius / dp)")
        if self.neighbor_skin < 0 or self.delta_dd < 0:
            raise ConfigError("tank.neighbor_skin and tank.delta_dd must be non-negative")


@dataclass
class WavesConfig:
    kind: str = "regular"
    H: float = 0.16
    T: float = 1.5
    theta: float = 0.0
    Hs: float = 0.16
    Tp: float = 1.5
    gamma: float = 3.3
    n_components: int = 50
    f_start: float | None = None
    f_stop: float | None = None
    seed: int = 0
    ramp: bool = True

    def validate(self):
        if self.kind not in ("regular", "irregular", "none"):
            raise ConfigError(f"waves.kind must be regular|irregular|none, got {self.kind!r}")
        _positive("H", "T", "Hs", "Tp", "gamma", "n_components", "f_start", "f_stop")(self, "waves")


@dataclass
class BodiesConfig:
    count: int = 1
    x_first: float = 3.5
    spacing: float = 1.0
    diameter: float = 0.5
    height: float = 0.22
    draft: float = 0.112
    mass: float | None = None
    k_base: float = 700.0
    dof: str = "heave"
    gauge_offsets: list = field(default_factory=lambda: [-0.15, -0.05, 0.05, 0.15])

    def validate(self):
        if self.count < 0:
            raise ConfigError("bodies.count must be non-negative")
        _positive("spacing", "diameter", "height", "draft", "mass", "k_base")(self, "bodies")
        if self.draft >= self.height:
            raise ConfigError("bodies.draft must be smaller than bodies.height")
        if self.dof not in ("heave", "free"):
            raise ConfigError(f"bodies.dof must be heave|free, got {self.dof!r}")
        if len(self.gauge_offsets) != 4:
            raise ConfigError("bodies.gauge_offsets needs four entries")


@dataclass
class RlConfig:
    gamma: float = 0.99
    tau: float = 0.005
    lr_actor: float = 0.003
    lr_critic: float = 0.003
    lr_alpha: float = 0.003
    batch_size: int = 128
    buffer_size: int = 100000
    target_entropy: float = -1.0
    init_alpha: float = 0.1
    hidden: list = field(default_factory=lambda: [128, 128, 64])
    dt_ctrl: float = 0.1
    gamma_p: float = 0.7
    dk_frac: float = 0.9
    warmup_episodes: int = 10
    entropy_sum: bool = True
    normalize_obs: bool = True
    scale_rewards: bool = True

    def validate(self):
        _positive("lr_actor", "lr_critic", "lr_alpha", "batch_size", "buffer_size", "init_alpha",
                  "dt_ctrl")(self, "rl")
        for n in ("gamma", "tau", "gamma_p"):
            v = getattr(self, n)
            if not 0 <= v <= 1:
                raise ConfigError(f"rl.{n} must lie in [0, 1], got {v!r}")
        if not 0 <= self.dk_frac < 1:
            raise ConfigError("rl.dk_frac must lie in [0, 1)")
        if self.warmup_episodes < 0:
            raise ConfigError("rl.warmup_episodes must be non-negative")


@dataclass
class EpisodesConfig:
    T_e: float = 10.0
    t_e: float = 10.0
    N_e: int = 100
    eval_episodes: int = 10
    checkpoint_every: int = 10

    def validate(self):
        _positive("T_e", "t_e", "eval_episodes", "checkpoint_every")(self, "episodes")
        if self.N_e < 0:
            raise ConfigError("episodes.N_e must be non-negative")


@dataclass
class SimulateConfig:
    t_end: float = 20.0
    kp: float | None = None  # None: bodies.k_base
    gauges_x: list = field(default_factory=lambda: [6.0])

    def validate(self):
        if self.t_end < 0:
            raise ConfigError("simulate.t_end must be non-negative")
        if self.kp is not None and self.kp < 0:
            raise ConfigError("simulate.kp must be non-negative")


@dataclass
class SweepConfig:
    kp: list = field(default_factory=lambda: [200, 450, 700, 950, 1200, 1500, 1800])
    t_end: float = 20.0
    window: float = 7.5

    def validate(self):
        _positive("t_end", "window")(self, "sweep")
        if self.window > self.t_end:
            raise ConfigError("sweep.window must not exceed sweep.t_end")
        if any(k < 0 for k in self.kp):
            raise ConfigError("sweep.kp values must be non-negative")


@dataclass
class OutputsConfig:
    dir: str = "out"
    sample_dt: float = 0.02
    frame_dt: float | None = None

    def validate(self):
        _positive("sample_dt", "frame_dt")(self, "outputs")


SECTIONS = {
    "tank": TankConfig, "waves": WavesConfig, "bodies": BodiesConfig, "rl": RlConfig,
    "episodes": EpisodesConfig, "simulate": SimulateConfig, "sweep": SweepConfig,
    "outputs": OutputsConfig,
}


@dataclass
class RunConfig:
    tank: TankConfig = field(default_factory=TankConfig)
    waves: WavesConfig = field(default_factory=WavesConfig)
    bodies: BodiesConfig = field(default_factory=BodiesConfig)
    rl: RlConfig = field(default_factory=RlConfig)
    episodes: EpisodesConfig = field(default_factory=EpisodesConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    outputs: OutputsConfig = field(default_factory=OutputsConfig)

    def validate(self) -> "RunConfig":
        for name in SECTIONS:
            getattr(self, name).validate()
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _coerce(value, default, key: str, annotation: str):
    if value is None:
        if "None" in annotation:
            return None
        raise ConfigError(f"{key} must not be null")
    if "bool" in annotation:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean, got {value!r}")
        return value
    if "int" in annotation and "float" not in annotation:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if "float" in annotation:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if "str" in annotation:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    if "list" in annotation:
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{key} must be a list of numbers, got {value!r}")
        return list(value)
    return value


def config_from_dict(data: dict | None) -> RunConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    cfg = RunConfig()
    for name, cls in SECTIONS.items():
        sec = data.get(name) or {}
        if not isinstance(sec, dict):
            raise ConfigError(f"section {name} must be a mapping")
        obj = getattr(cfg, name)
        known = {f.name: f for f in fields(cls)}
        for key, value in sec.items():
            if key not in known:
                raise ConfigError(f"unknown key {name}.{key}")
            f = known[key]
            setattr(obj, key, _coerce(value, getattr(obj, key), f"{name}.{key}", str(f.type)))
    return cfg.validate()


def parse_config(path=None, text: str | None = None) -> RunConfig:
    """Load and validate a YAML document (``path`` or literal ``text``)."""
    if path is not None:
        with open(path) as fh:
            text = fh.read()
    try:
        data = yaml.safe_load(text or "")
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}") from None
    return config_from_dict(data)


def paper_default(dim: int = 2) -> RunConfig:
    """Reference 2-D case, or the 3-D irregular three-PA case."""
    cfg = RunConfig()
    if dim == 3:
        cfg.tank.dim = 3
        cfg.waves.kind = "irregular"
        cfg.bodies.count = 3
        cfg.episodes = EpisodesConfig(T_e=20.0, t_e=10.0, N_e=50)
    return cfg.validate()
