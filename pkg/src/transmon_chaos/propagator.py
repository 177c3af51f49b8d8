"""Time-evolution operator U(t) on a checkpoint grid.

The integrator is a midpoint piecewise-constant exponential rule:

    U(t + dt) = exp(-i * 2*pi * H(t + dt/2) * dt) @ U(t)

with each step exponential formed from the Hermitian eigendecomposition of
the midpoint Hamiltonian, so every step is unitary up to eigensolver
roundoff. Consecutive steps whose drive amplitude is bitwise identical
reuse the previous step operator (a large win for flat-plateau and zero
pulses).
"""

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from ._linalg import unitarity_defect
from .errors import ConfigError, EigenFailure, UnitarityLost, UnknownCheckpoint
from .hilbert import drift_hamiltonian, drive_quadratures

__all__ = [
    "TimeGrid",
    "UnitarySeries",
    "step",
    "evolve",
    "apply",
    "save_series",
    "load_series",
    "series_key",
]

DEFAULT_UNITARITY_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Integration grid: step ``dt`` from ``t0`` to ``t1``, storing U every
    ``checkpoint_every`` steps (endpoints always included)."""

    t0: float = 0.0
    t1: float = 50.0
    dt: float = 0.001
    checkpoint_every: int = 25

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t1 <= self.t0:
            raise ConfigError("t1 must exceed t0")
        if self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be >= 1")
        steps = (self.t1 - self.t0) / self.dt
        if abs(steps - round(steps)) > 4 * np.finfo(float).eps * max(1.0, steps):
            raise ConfigError(
                f"(t1 - t0)/dt = {steps!r} is not an integer number of steps")
        if round(steps) % self.checkpoint_every != 0:
            raise ConfigError(
                "checkpoint_every must divide the step count so checkpoints "
                "include both endpoints")

    @property
    def n_steps(self):
        return int(round((self.t1 - self.t0) / self.dt))

    @property
    def n_checkpoints(self):
        return self.n_steps // self.checkpoint_every + 1

    def checkpoint_times(self):
        k = np.arange(self.n_checkpoints)
        return self.t0 + k * self.checkpoint_every * self.dt

    def to_dict(self):
        return {"t0": self.t0, "t1": self.t1, "dt": self.dt,
                "checkpoint_every": self.checkpoint_every}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(t0=float(d.get("t0", 0.0)), t1=float(d["t1"]),
                       dt=float(d.get("dt", 0.001)),
                       checkpoint_every=int(d.get("checkpoint_every", 25)))
        except KeyError as exc:
            raise ConfigError(f"grid config missing key {exc}") from exc


@dataclass
class UnitarySeries:
    """Checkpointed propagators: ``unitaries[k]`` is U(times[k]), with
    U(t0) = identity. ``defects[k]`` records max|U^dag U - I| at storage."""

    times: np.ndarray
    unitaries: np.ndarray
    defects: np.ndarray
    grid: TimeGrid

    @property
    def dim(self):
        return self.unitaries.shape[1]

    def __len__(self):
        return len(self.times)

    def index_of(self, t, tol=1e-9):
        hits = np.nonzero(np.abs(self.times - t) <= tol)[0]
        if hits.size == 0:
            raise UnknownCheckpoint(f"t = {t} is not a stored checkpoint")
        return int(hits[0])

    def unitary_at(self, t):
        return self.unitaries[self.index_of(t)]


def step(h_mid, dt):
    """One midpoint step: exp(-i*2*pi*h_mid*dt) via Hermitian
    eigendecomposition (V diag(e^{-i 2 pi E dt}) V^dag)."""
    energies, vectors, info = lapack.zheevd(h_mid, lower=1)
    if info != 0:
        raise EigenFailure(f"zheevd failed with info={info}")
    phases = np.exp(-2j * np.pi * energies * dt)
    return (vectors * phases) @ vectors.conj().T


def evolve(cfg, pulse, grid, unitarity_tol=DEFAULT_UNITARITY_TOL):
    """Propagate U from t0 to t1 under ``cfg`` and drive ``pulse``.

    Returns a UnitarySeries holding U at every checkpoint. Raises
    UnitarityLost if any checkpoint defect exceeds ``unitarity_tol``.
    """
    h_drift = drift_hamiltonian(cfg)
    qx, qy = drive_quadratures(cfg)
    n = cfg.dims.total
    n_steps = grid.n_steps
    mid_times = grid.t0 + (np.arange(n_steps) + 0.5) * grid.dt
    amps = np.asarray(pulse.evaluate(mid_times), dtype=complex)

    times = grid.checkpoint_times()
    unitaries = np.empty((grid.n_checkpoints, n, n), dtype=complex)
    defects = np.empty(grid.n_checkpoints)
    u = np.eye(n, dtype=complex)
    unitaries[0] = u
    defects[0] = 0.0

    u_step = None
    last_amp = None
    ckpt = 1
    for k in range(n_steps):
        amp = amps[k]
        if u_step is None or amp != last_amp:
            h = h_drift
            if amp != 0:
                h = h + amp.real * qx + amp.imag * qy
            u_step = step(h, grid.dt)
            last_amp = amp
        u = u_step @ u
        if (k + 1) % grid.checkpoint_every == 0:
            defect = unitarity_defect(u)
            if defect > unitarity_tol:
                raise UnitarityLost(
                    f"unitarity defect {defect:.3e} exceeds {unitarity_tol:g} "
                    f"at t = {times[ckpt]:.6f} ns")
            unitaries[ckpt] = u
            defects[ckpt] = defect
            ckpt += 1
    return UnitarySeries(times=times, unitaries=unitaries, defects=defects, grid=grid)


def apply(series, state, t_checkpoint):
    """Apply the stored U(t_checkpoint) to a state vector. The result is not
    renormalized: any norm drift is a diagnostic, not something to hide."""
    u = series.unitary_at(t_checkpoint)
    return u @ np.asarray(state, dtype=complex)


# --- binary checkpoint cache -------------------------------------------------

def series_key(cfg, pulse, grid):
    """Stable hash identifying (system, pulse, grid)."""
    payload = json.dumps(
        {"system": cfg.to_dict(), "pulse": pulse.describe(), "grid": grid.to_dict()},
        sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def save_series(series, directory, key, extra=None):
    """Write ``<key>.bin`` (little-endian f64 re/im pairs, row-major, all
    checkpoints concatenated) plus a JSON sidecar ``<key>.json``."""
    os.makedirs(directory, exist_ok=True)
    bin_path = os.path.join(directory, f"{key}.bin")
    flat = np.empty(series.unitaries.size * 2)
    flat[0::2] = series.unitaries.real.ravel()
    flat[1::2] = series.unitaries.imag.ravel()
    flat.astype("<f8").tofile(bin_path)
    sidecar = {
        "hash": key,
        "dim": int(series.dim),
        "n_checkpoints": len(series),
        "grid": series.grid.to_dict(),
        "times": series.times.tolist(),
        "defects": series.defects.tolist(),
    }
    if extra:
        sidecar.update(extra)
    with open(os.path.join(directory, f"{key}.json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1)
    return bin_path


def load_series(directory, key):
    """Inverse of :func:`save_series`; returns None when the cache misses."""
    bin_path = os.path.join(directory, f"{key}.bin")
    json_path = os.path.join(directory, f"{key}.json")
    if not (os.path.exists(bin_path) and os.path.exists(json_path)):
        return None
    with open(json_path, "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    n = sidecar["dim"]
    n_ck = sidecar["n_checkpoints"]
    flat = np.fromfile(bin_path, dtype="<f8")
    if flat.size != n_ck * n * n * 2:
        raise ConfigError(f"cache file {bin_path} has wrong size")
    unitaries = (flat[0::2] + 1j * flat[1::2]).reshape(n_ck, n, n)
    return UnitarySeries(
        times=np.array(sidecar["times"]),
        unitaries=unitaries,
        defects=np.array(sidecar["defects"]),
        grid=TimeGrid.from_dict(sidecar["grid"]),
    )
