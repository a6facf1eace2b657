"""Linear wavemaker theory for a piston paddle: dispersion, stroke, JONSWAP input."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

G = 9.81


def solve_dispersion(T: float, d: float, g: float = G) -> float:
    """Wavenumber k solving omega^2 = g k tanh(k d), by bracketed bisection."""
    if not (T > 0 and d > 0):
        raise ValueError(f"need T > 0 and d > 0, got T={T}, d={d}")
    omega = 2.0 * math.pi / T

    def f(k):
        return g * k * math.tanh(k * d) - omega * omega

    lo, hi = 1e-6, 1e3
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError(f"dispersion relation has no root in [{lo}, {hi}] for T={T}, d={d}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def stroke_from_height(H: float, k: float, d: float) -> float:
    """Piston stroke S0 = H [sinh(kd) cosh(kd) + kd] / (2 sinh^2(kd))."""
    kd = k * d
    s = math.sinh(kd)
    return H * (s * math.cosh(kd) + kd) / (2.0 * s * s)


def regular_stroke(H: float, T: float, d: float, g: float = G) -> float:
    if not H > 0:
        raise ValueError(f"wave height must be positive, got {H}")
    return stroke_from_height(H, solve_dispersion(T, d, g), d)


@dataclass(frozen=True)
class WaveComponent:
    stroke: float
    omega: float
    phase: float


@dataclass
class WaveMakerSpec:
    """Piston motion: a sum of sinusoidal stroke components.

    A regular wave is the single-component case. ``ramp_time`` scales the
    displacement by ``min(t / ramp_time, 1)`` to avoid an impulsive start.
    """

    components: list[WaveComponent]
    depth: float
    kind: str = "regular"
    H: float | None = None
    T: float | None = None
    ramp_time: float = 0.0

    def __post_init__(self):
        if not self.components:
            raise ValueError("wavemaker needs at least one component")
        for c in self.components:
            if c.stroke < 0:
                raise ValueError("component strokes must be non-negative")
            if not 0.0 <= c.phase < 2.0 * math.pi:
                raise ValueError("component phases must lie in [0, 2pi)")
        if self.kind == "regular" and not self.components[0].stroke > 0:
            raise ValueError("regular wave stroke must be positive")

    @classmethod
    def regular(cls, H: float, T: float, depth: float, theta: float = 0.0,
                ramp: bool = True, g: float = G) -> "WaveMakerSpec":
        s0 = regular_stroke(H, T, depth, g)
        comp = WaveComponent(s0, 2.0 * math.pi / T, theta % (2.0 * math.pi))
        return cls([comp], depth, "regular", H, T, ramp_time=T if ramp else 0.0)

    @classmethod
    def irregular(cls, components, depth: float, Tp: float | None = None,
                  ramp: bool = True) -> "WaveMakerSpec":
        return cls(list(components), depth, "irregular", None, Tp,
                   ramp_time=(Tp if (ramp and Tp) else 0.0))

    @property
    def S0(self) -> float:
        return self.components[0].stroke

    @property
    def omega(self) -> float:
        return self.components[0].omega

    def _arrays(self):
        s = np.array([c.stroke for c in self.components])
        w = np.array([c.omega for c in self.components])
        th = np.array([c.phase for c in self.components])
        return s, w, th

    def kinematics(self, t: float):
        """Displacement, velocity and acceleration of the piston at time ``t``."""
        s, w, th = self._arrays()
        arg = w * t + th
        x = float(np.sum(0.5 * s * np.sin(arg)))
        v = float(np.sum(0.5 * s * w * np.cos(arg)))
        a = float(np.sum(-0.5 * s * w * w * np.sin(arg)))
        tr = self.ramp_time
        if tr > 0 and t < tr:
            # product rule with the linear ramp m(t) = t / tr
            m = max(t, 0.0) / tr
            return m * x, m * v + x / tr, m * a + 2.0 * v / tr
        return x, v, a


def piston_displacement(t: float, spec: WaveMakerSpec) -> float:
    return spec.kinematics(t)[0]


def piston_velocity(t: float, spec: WaveMakerSpec) -> float:
    return spec.kinematics(t)[1]


def jonswap_density(f, Hs: float, Tp: float, gamma: float = 3.3):
    """JONSWAP shape, rescaled later; unnormalised peak-enhanced PM form."""
    f = np.asarray(f, dtype=np.float64)
    fp = 1.0 / Tp
    sigma = np.where(f <= fp, 0.07, 0.09)
    r = np.exp(-((f - fp) ** 2) / (2.0 * sigma ** 2 * fp ** 2))
    with np.errstate(divide="ignore", over="ignore"):
        base = np.where(f > 0, f ** -5.0 * np.exp(-1.25 * (fp / np.where(f > 0, f, 1.0)) ** 4), 0.0)
    return base * gamma ** r


@dataclass
class JonswapSpectrum:
    """Discretised JONSWAP spectrum, scaled so that 4 sqrt(sum S df) = Hs."""

    freqs: np.ndarray
    density: np.ndarray
    df: float
    heights: np.ndarray
    components: list[WaveComponent] = field(default_factory=list)

    @property
    def hs(self) -> float:
        return 4.0 * math.sqrt(float(np.sum(self.density) * self.df))


def jonswap_components(Hs: float, Tp: float, gamma_s: float = 3.3, N: int = 50,
                       f_start: float | None = None, f_stop: float | None = None,
                       seed: int = 0, depth: float = 1.1, g: float = G) -> JonswapSpectrum:
    """N equally spaced JONSWAP components with seeded uniform phases.

    Frequencies are ``f_start + i df`` for i = 0..N-1 with
    ``df = (f_stop - f_start) / N``; component heights follow
    ``H_i = 2 sqrt(2 S(f_i) df)`` and strokes use the same piston transfer
    function as regular waves.
    """
    if f_start is None:
        f_start = 0.5 / Tp
    if f_stop is None:
        f_stop = 3.0 / Tp
    if not (0 < f_start < f_stop):
        raise ValueError(f"invalid frequency band [{f_start}, {f_stop}]")
    if N < 1:
        raise ValueError("need at least one component")
    df = (f_stop - f_start) / N
    freqs = f_start + np.arange(N) * df
    shape = jonswap_density(freqs, Hs, Tp, gamma_s)
    m0 = float(np.sum(shape) * df)
    if m0 <= 0:
        raise ValueError("frequency band carries no JONSWAP energy")
    density = shape * (Hs / 4.0) ** 2 / m0
    heights = 2.0 * np.sqrt(2.0 * density * df)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=N)
    comps = []
    for f, h, th in zip(freqs, heights, phases):
        k = solve_dispersion(1.0 / f, depth, g)
        comps.append(WaveComponent(stroke_from_height(float(h), k, depth),
                                   2.0 * math.pi * float(f), float(th)))
    return JonswapSpectrum(freqs, density, df, heights, comps)


def linear_elevation(x: float, t: float, H: float, T: float, d: float, x0: float = 0.0,
                     theta: float = 0.0, g: float = G) -> float:
    """First-order progressive wave elevation produced by the piston at ``x0``.

    Piston motion ``(S0/2) sin(wt + theta)`` radiates ``(H/2) cos(wt + theta - k(x - x0))``
    (surface elevation in phase with paddle velocity) once evanescent modes decay.
    """
    k = solve_dispersion(T, d, g)
    w = 2.0 * math.pi / T
    return 0.5 * H * math.cos(w * t + theta - k * (x - x0))
