"""Post-processing: wave spectra, energy tables, runtime accounting, CSV I/O."""
from __future__ import annotations

import csv
import io
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import welch

from . import __version__


@dataclass
class Spectrum:
    f: np.ndarray
    S: np.ndarray
    Hs: float
    Tp: float
    m0: float


def spectral_analysis(eta, dt: float, nperseg: int = 512) -> Spectrum:
    """Welch estimate (Hann window, 50% overlap) with Hs = 4 sqrt(m0), Tp = 1/f_peak."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.ndim != 1 or eta.size < nperseg:
        raise ValueError(f"series of {eta.size} samples is shorter than one {nperseg}-sample segment")
    if not (dt > 0 and np.all(np.isfinite(eta))):
        raise ValueError("need dt > 0 and a finite series")
    f, S = welch(eta, fs=1.0 / dt, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
                 detrend="constant", scaling="density")
    df = f[1] - f[0]
    m0 = float(np.sum(S) * df)
    k = int(np.argmax(S[1:])) + 1
    return Spectrum(f, S, 4.0 * np.sqrt(m0), 1.0 / f[k], m0)


@dataclass
class EnergyReport:
    """Per-agent accumulated energies under the learned and the constant policy."""

    e_drl: np.ndarray
    e_base: np.ndarray

    def __post_init__(self):
        self.e_drl = np.asarray(self.e_drl, dtype=np.float64)
        self.e_base = np.asarray(self.e_base, dtype=np.float64)
        if self.e_drl.shape != self.e_base.shape:
            raise ValueError("energy arrays must align per agent")

    @property
    def delta(self) -> np.ndarray:
        return self.e_drl - self.e_base

    @property
    def improvement(self) -> np.ndarray:
        return 100.0 * self.delta / self.e_base

    def rows(self) -> list[dict]:
        out = [{"agent": str(i), "E_drl": float(a), "E_0": float(b), "dE": float(a - b),
                "improvement_pct": float(100.0 * (a - b) / b)}
               for i, (a, b) in enumerate(zip(self.e_drl, self.e_base))]
        ta, tb = float(np.sum(self.e_drl)), float(np.sum(self.e_base))
        out.append({"agent": "total", "E_drl": ta, "E_0": tb, "dE": ta - tb,
                    "improvement_pct": 100.0 * (ta - tb) / tb})
        return out


@dataclass
class RunTimer:
    """Wall-clock accounting split into SPH, RL and I/O buckets."""

    buckets: dict = field(default_factory=lambda: {"sph": 0.0, "rl": 0.0, "io": 0.0})
    start: float = field(default_factory=time.perf_counter)

    @contextmanager
    def track(self, name: str):
        tic = time.perf_counter()
        try:
            yield
        finally:
            self.buckets[name] += time.perf_counter() - tic

    def add(self, name: str, seconds: float) -> None:
        self.buckets[name] += seconds


def runtime_report(timer: RunTimer, n_particles: int, total: float | None = None) -> dict:
    """Time split {sph, rl, io, other, total} with shares of the total."""
    total = time.perf_counter() - timer.start if total is None else total
    rep = {k: float(v) for k, v in timer.buckets.items()}
    rep["other"] = max(total - sum(rep.values()), 0.0)
    rep["total"] = float(total)
    for k in ("sph", "rl", "io", "other"):
        rep[f"{k}_share"] = rep[k] / total if total > 0 else 0.0
    rep["n_particles"] = int(n_particles)
    return rep


def header_line(config_hash: str, seed: int) -> str:
    return f"# wecsph {__version__} config={config_hash} seed={seed}\n"


def write_csv(path, columns, rows, config_hash: str = "-", seed: int = 0) -> None:
    """CSV with a provenance comment line, a header row and ``repr``-exact floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header_line(config_hash, seed))
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Numeric CSV written by :func:`write_csv`; comment lines are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except FileNotFoundError:
        raise FileNotFoundError(f"series file not found: {path}") from None
    if not lines:
        raise ValueError(f"{path}: no header row")
    reader = csv.reader(io.StringIO("".join(lines)))
    cols = next(reader)
    try:
        data = np.array([[float(x) for x in row] for row in reader if row], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed numeric series ({exc})") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(cols):
        raise ValueError(f"{path}: malformed series (expected {len(cols)} columns)")
    return cols, data
