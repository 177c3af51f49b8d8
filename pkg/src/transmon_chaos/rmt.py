"""Random-matrix ensembles and reference constants used as test oracles.

Nothing here feeds the simulation pipeline; these samplers and constants
exist so that statistics code can be validated against independent ground
truth. Sampling is deterministic per (seed, sample index), so drawing in
parallel or in any order gives identical members.
"""

import json
import math
import os
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError

__all__ = [
    "EnsembleSpec",
    "sample",
    "sample_member",
    "parametric_hamiltonian",
    "mean_ratio_poisson",
    "sample_curvature",
    "build_reference_cache",
    "oracle_expectations",
    "DEFAULT_CACHE_PATH",
]

KINDS = ("gue", "cue", "poisson_phases", "diagonal_independent", "parametric_gue")

DEFAULT_CACHE_PATH = os.path.join(os.path.dirname(__file__), "data", "oracle_cache.json")


@dataclass(frozen=True)
class EnsembleSpec:
    """What to draw: ensemble kind, matrix dimension, sample count, seed."""

    kind: str
    dim: int
    count: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.dim < 3:
            raise ConfigError("dim must be >= 3")
        if self.count < 1:
            raise ConfigError("count must be >= 1")


def _rng(seed, index):
    return np.random.default_rng([int(seed), int(index)])


def gue_matrix(dim, rng):
    """Hermitian GUE draw with off-diagonal variance E|H_ij|^2 = 1 and
    diagonal variance 1, so <tr H^2> = dim^2."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2.0


def cue_matrix(dim, rng):
    """Haar-distributed unitary via QR with the R-diagonal phases divided
    out (plain QR is not Haar)."""
    a = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_member(spec, index):
    """Draw member ``index`` of the ensemble (independent of draw order)."""
    rng = _rng(spec.seed, index)
    if spec.kind == "gue":
        return gue_matrix(spec.dim, rng)
    if spec.kind == "cue":
        return cue_matrix(spec.dim, rng)
    if spec.kind == "poisson_phases":
        return np.sort(rng.uniform(-np.pi, np.pi, spec.dim))
    if spec.kind == "diagonal_independent":
        return np.diag(np.sort(rng.standard_normal(spec.dim)))
    if spec.kind == "parametric_gue":
        # Pair (H1, H2) defining the stationary family
        # H(lam) = H1 cos(lam) + H2 sin(lam), scaled to semicircle radius 2.
        scale = 1.0 / math.sqrt(spec.dim)
        return (gue_matrix(spec.dim, rng) * scale, gue_matrix(spec.dim, rng) * scale)
    raise ConfigError(spec.kind)


def sample(spec):
    """All ``count`` members as a list (matrices, phase vectors, or
    (H1, H2) pairs depending on the kind)."""
    return [sample_member(spec, i) for i in range(spec.count)]


def parametric_hamiltonian(pair, lam):
    """Evaluate the stationary parametric family at parameter ``lam``."""
    h1, h2 = pair
    return h1 * math.cos(lam) + h2 * math.sin(lam)


def mean_ratio_poisson():
    """Closed form for the mean folded spacing ratio of Poisson levels."""
    return 2.0 * math.log(2.0) - 1.0


def _curvature_cdf_gue(k):
    # integral of (2/pi)/(1+x^2)^2 from -inf to k
    return 0.5 + (np.arctan(k) + k / (1.0 + k * k)) / math.pi


def sample_curvature(kind, count, seed=0):
    """Inverse-CDF samples from the limiting rescaled-curvature densities.

    Poisson curvatures are standard Cauchy (closed-form quantile); the GUE
    quantile has no closed form and is found by vectorized bisection on the
    monotone CDF.
    """
    rng = _rng(seed, 0)
    u = rng.uniform(0.0, 1.0, count)
    if kind == "poi":
        return np.tan(math.pi * (u - 0.5))
    if kind != "gue":
        raise ConfigError(f"kind must be 'poi' or 'gue', got {kind!r}")
    lo = np.full(count, -1e9)
    hi = np.full(count, 1e9)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = _curvature_cdf_gue(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _ratio_values(phases):
    s = np.diff(phases)
    r = s[:-1] / s[1:]
    return np.minimum(r, 1.0 / r)


def build_reference_cache(path=DEFAULT_CACHE_PATH, dim=100, count=10_000, seed=20240901):
    """Monte-Carlo the CUE mean folded spacing ratio and store it with its
    standard error. Slow (minutes); meant to run once and be versioned."""
    spec = EnsembleSpec(kind="cue", dim=dim, count=count, seed=seed)
    means = np.empty(count)
    for i in range(count):
        u = sample_member(spec, i)
        phases = np.sort(np.angle(np.linalg.eigvals(u)))
        means[i] = _ratio_values(phases).mean()
    value = float(means.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(count))
    cache = {
        "mean_R_cue": {
            "value": value,
            "stderr": stderr,
            "method": f"monte-carlo, {count} CUE matrices of dim {dim}, "
                      "per-matrix mean of folded spacing ratios",
            "seed": seed,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
    }
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cache, fh, indent=1)
    return cache


def oracle_expectations(cache_path=DEFAULT_CACHE_PATH):
    """Reference constants for the statistics tests.

    Analytic entries are computed on the fly; the CUE mean ratio comes from
    the versioned Monte-Carlo cache (built by :func:`build_reference_cache`).
    """
    from .spectral import reference_density

    gue_norm = 1.0 / quad(lambda k: 1.0 / (1.0 + k * k) ** 2, -np.inf, np.inf)[0]
    out = {
        "mean_R_poisson": mean_ratio_poisson(),
        "P_poi_ratio_at_0": float(reference_density("poi", 0.0)),
        "P_gue_curvature_norm": gue_norm,  # 2/pi by quadrature
        "tail_exponent_poi": 2.0,
        "tail_exponent_gue": 4.0,
    }
    if os.path.exists(cache_path):
        with open(cache_path, "r", encoding="utf-8") as fh:
            cache = json.load(fh)
        out["mean_R_cue"] = cache["mean_R_cue"]
    return out
