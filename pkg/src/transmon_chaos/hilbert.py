"""Truncated tensor-product Hilbert space for two transmons and a cavity.

Conventions used everywhere downstream:

* frequencies are linear frequencies in GHz (a value of 0.07 means
  0.07 GHz = 70 MHz); time is in ns; every exponential downstream applies
  the 2*pi, so a level at energy E accumulates phase 2*pi*E*t.
* the flat index of the Fock state ``|i1, i2, ic>`` is
  ``(i1*n2 + i2)*nc + ic`` (transmon 1 slowest, cavity fastest).
"""

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ._linalg import eigh_or_raise, hermiticity_defect
from .errors import AssignmentConflict, ConfigError, DegenerateOverlap

__all__ = [
    "ModeDims",
    "FockLabel",
    "SystemConfig",
    "DressedBasis",
    "destroy",
    "ladder",
    "number_op",
    "drift_hamiltonian",
    "drive_operator",
    "drive_quadratures",
    "dressed_basis",
]

MODES = ("q1", "q2", "c")


class FockLabel(NamedTuple):
    """Bare excitation numbers of transmon 1, transmon 2, and the cavity."""

    i1: int
    i2: int
    ic: int


@dataclass(frozen=True)
class ModeDims:
    """Local truncation levels per mode. Default (5, 5, 6) gives N = 150.

    Physical runs keep every mode at >= 2 levels; a 1-level mode is allowed
    so that reduced toy systems (e.g. one transmon + cavity) can reuse the
    same machinery.
    """

    n1: int = 5
    n2: int = 5
    nc: int = 6

    def __post_init__(self):
        for name in ("n1", "n2", "nc"):
            n = getattr(self, name)
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise ConfigError(f"{name} must be a positive integer, got {n!r}")

    @property
    def total(self):
        """Total Hilbert-space dimension N."""
        return self.n1 * self.n2 * self.nc

    def flat_index(self, i1, i2, ic):
        if not (0 <= i1 < self.n1 and 0 <= i2 < self.n2 and 0 <= ic < self.nc):
            raise ConfigError(f"Fock label ({i1},{i2},{ic}) outside dims {self}")
        return (i1 * self.n2 + i2) * self.nc + ic

    def label(self, idx):
        """Inverse of :meth:`flat_index`."""
        i1, rest = divmod(idx, self.n2 * self.nc)
        i2, ic = divmod(rest, self.nc)
        return FockLabel(i1, i2, ic)

    def labels(self):
        """All Fock labels in flat-index order."""
        return [self.label(i) for i in range(self.total)]

    def fock_state(self, i1, i2, ic):
        """Unit vector of the bare Fock state ``|i1, i2, ic>``."""
        v = np.zeros(self.total, dtype=complex)
        v[self.flat_index(i1, i2, ic)] = 1.0
        return v


@dataclass(frozen=True)
class SystemConfig:
    """Mode frequencies, anharmonicities, and coupling (all GHz).

    ``omega*`` are lab-frame mode frequencies and ``omegad`` the drive
    frequency; the rotating-frame detunings ``delta* = omega* - omegad``
    are what enter the Hamiltonian.
    """

    omega1: float = 6.0
    omega2: float = 5.9
    omegac: float = 6.2
    omegad: float = 5.93
    alpha1: float = -0.290
    alpha2: float = -0.310
    g: float = 0.070
    dims: ModeDims = field(default_factory=ModeDims)

    def __post_init__(self):
        for name in ("omega1", "omega2", "omegac", "omegad", "alpha1", "alpha2", "g"):
            x = getattr(self, name)
            if not np.isfinite(x):
                raise ConfigError(f"{name} must be finite, got {x!r}")
        if self.alpha1 > 0 or self.alpha2 > 0:
            raise ConfigError("transmon anharmonicities must be <= 0")

    @property
    def delta1(self):
        return self.omega1 - self.omegad

    @property
    def delta2(self):
        return self.omega2 - self.omegad

    @property
    def deltac(self):
        return self.omegac - self.omegad

    def with_detuning(self, mode, value):
        """Copy with the detuning of ``mode`` set to ``value`` (GHz),
        keeping the drive frequency fixed."""
        key = {"q1": "omega1", "q2": "omega2", "c": "omegac"}[mode]
        return replace(self, **{key: self.omegad + value})

    def to_dict(self):
        return {
            "omega1_ghz": self.omega1,
            "omega2_ghz": self.omega2,
            "omegac_ghz": self.omegac,
            "omegad_ghz": self.omegad,
            "alpha1_ghz": self.alpha1,
            "alpha2_ghz": self.alpha2,
            "g_ghz": self.g,
            "dims": [self.dims.n1, self.dims.n2, self.dims.nc],
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kwargs = {}
        mapping = {
            "omega1_ghz": "omega1",
            "omega2_ghz": "omega2",
            "omegac_ghz": "omegac",
            "omegad_ghz": "omegad",
            "alpha1_ghz": "alpha1",
            "alpha2_ghz": "alpha2",
            "g_ghz": "g",
        }
        for key, attr in mapping.items():
            if key in d:
                val = d.pop(key)
                try:
                    kwargs[attr] = float(val)
                except (TypeError, ValueError):
                    raise ConfigError(f"config key {key} must be a number, got {val!r}")
        if "dims" in d:
            dims = d.pop("dims")
            if not (isinstance(dims, (list, tuple)) and len(dims) == 3):
                raise ConfigError(f"dims must be a [n1, n2, nc] triple, got {dims!r}")
            kwargs["dims"] = ModeDims(*(int(n) for n in dims))
        if d:
            raise ConfigError(f"unknown config keys: {sorted(d)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        """Load from a JSON config file; omitted keys keep their defaults."""
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)


def destroy(n):
    """Single-mode annihilation operator on ``n`` levels: <k-1|b|k> = sqrt(k)."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def ladder(dims, mode):
    """Annihilation operator of ``mode`` in {'q1','q2','c'}, embedded in the
    full space by tensoring with identities on the other modes."""
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    ops = {
        "q1": (destroy(dims.n1), np.eye(dims.n2), np.eye(dims.nc)),
        "q2": (np.eye(dims.n1), destroy(dims.n2), np.eye(dims.nc)),
        "c": (np.eye(dims.n1), np.eye(dims.n2), destroy(dims.nc)),
    }[mode]
    return np.kron(np.kron(ops[0], ops[1]), ops[2])


def number_op(dims, mode):
    b = ladder(dims, mode)
    return b.conj().T @ b


def drift_hamiltonian(cfg):
    """Undriven rotating-frame Hamiltonian (GHz):

    H = sum_q [delta_q n_q + (alpha_q/2) b_q^dag b_q^dag b_q b_q
               + g (b_q^dag a + b_q a^dag)] + delta_c a^dag a
    """
    dims = cfg.dims
    b1 = ladder(dims, "q1")
    b2 = ladder(dims, "q2")
    a = ladder(dims, "c")
    adag = a.conj().T
    h = cfg.deltac * (adag @ a)
    for b, delta, alpha in ((b1, cfg.delta1, cfg.alpha1), (b2, cfg.delta2, cfg.alpha2)):
        bdag = b.conj().T
        h = h + delta * (bdag @ b)
        h = h + 0.5 * alpha * (bdag @ bdag @ b @ b)
        h = h + cfg.g * (bdag @ a + b @ adag)
    return h


def drive_operator(cfg):
    """The embedded cavity pair ``(a, a^dag)``; the driven Hamiltonian is
    ``H(t) = H_drift + 0.5*E(t)*a + 0.5*conj(E(t))*a^dag``."""
    a = ladder(cfg.dims, "c")
    return a, a.conj().T.copy()


def drive_quadratures(cfg):
    """Hermitian quadrature pair (X, Y) with
    ``0.5*E*a + 0.5*conj(E)*a^dag = Re(E)*X + Im(E)*Y``."""
    a, adag = drive_operator(cfg)
    return (a + adag) / 2.0, 1j * (a - adag) / 2.0


@dataclass
class DressedBasis:
    """Eigenbasis of the undriven Hamiltonian, labelled by bare Fock states.

    ``vectors[:, index_of[label]]`` is the eigenvector with the largest
    overlap with the bare state ``label``; its global phase is fixed so this
    overlap is real and positive.
    """

    dims: ModeDims
    energies: np.ndarray
    vectors: np.ndarray
    index_of: dict
    overlaps: dict

    def column(self, i1, i2, ic):
        return self.index_of[FockLabel(i1, i2, ic)]

    def state(self, i1, i2, ic):
        """Dressed state labelled by the bare Fock state ``|i1, i2, ic>``."""
        return self.vectors[:, self.column(i1, i2, ic)]

    def energy(self, i1, i2, ic):
        return self.energies[self.column(i1, i2, ic)]

    def computational_states(self):
        """Columns: dressed |00>, |01>, |10>, |11> (cavity in its ground
        state), the ordered two-qubit logical basis."""
        cols = [self.column(i1, i2, 0) for i1, i2 in ((0, 0), (0, 1), (1, 0), (1, 1))]
        return self.vectors[:, cols]


def dressed_basis(h_drift, dims, gap_tol=1e-6, hermiticity_tol=1e-10):
    """Diagonalize ``h_drift`` and assign every eigenvector to the bare Fock
    state it overlaps most.

    Raises AssignmentConflict if two labels claim the same eigenvector and
    DegenerateOverlap if an assignment is ambiguous within ``gap_tol``.
    """
    scale = max(1.0, float(np.abs(h_drift).max()))
    if hermiticity_defect(h_drift) > hermiticity_tol * scale:
        raise ConfigError("drift Hamiltonian is not Hermitian")
    energies, vectors = eigh_or_raise(h_drift)
    n = dims.total
    if h_drift.shape != (n, n):
        raise ConfigError(f"Hamiltonian shape {h_drift.shape} does not match dims {dims}")

    amp = np.abs(vectors)  # amp[f, k] = |<f|Phi_k>|
    best = np.argmax(amp, axis=1)
    index_of = {}
    overlaps = {}
    claimed = {}
    for f in range(n):
        label = dims.label(f)
        k = int(best[f])
        row = amp[f]
        top = row[k]
        runner = np.partition(row, -2)[-2]
        if top - runner < gap_tol:
            raise DegenerateOverlap(
                f"label {tuple(label)}: top overlaps {top:.3e} and {runner:.3e} "
                f"differ by less than {gap_tol:g}"
            )
        if k in claimed:
            raise AssignmentConflict(
                f"labels {tuple(claimed[k])} and {tuple(label)} both claim "
                f"eigenvector {k}; increase the truncation"
            )
        claimed[k] = label
        index_of[label] = k
        overlaps[label] = float(top)

    # Fix gauge: make the defining overlap real positive per assigned column.
    vectors = vectors.copy()
    for label, k in index_of.items():
        f = dims.flat_index(*label)
        z = vectors[f, k]
        if z != 0:
            vectors[:, k] *= np.conj(z) / abs(z)
    return DressedBasis(dims=dims, energies=energies, vectors=vectors,
                        index_of=index_of, overlaps=overlaps)
