"""Eigenphase statistics of the propagator: spacing ratios and windowed
Kullback-Leibler divergences against Poisson and GUE references.

For each checkpoint U(t) the eigenvalues lambda_n = e^{i phi_n} are
extracted (phi in [-pi, pi), sorted ascending) and turned into folded
spacing ratios

    r_n = (phi_{n+1} - phi_n) / (phi_{n+2} - phi_{n+1}),
    R_n = min(r_n, 1/r_n)  in [0, 1].

Ratios pooled per time window are binned and compared to the two reference
densities; each divergence is normalized by the corresponding
reference-vs-reference divergence so both outputs live in [0, 1] and the
value 1 means "as far from this reference as the other reference is".
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._linalg import unitarity_defect
from .errors import (EigenFailure, EmptyWindow, NotUnitary, SupportMismatch,
                     TooFewPhases)

__all__ = [
    "EigenphaseFrame",
    "RatioSample",
    "BinnedDistribution",
    "KLSeries",
    "eigenphases",
    "frame_stream",
    "compute_frames",
    "ratio_samples",
    "reference_density",
    "binned_reference",
    "kl_divergence",
    "normalized_kl_pair",
    "windowed_kl",
    "default_bin_edges",
]

DEFAULT_N_BINS = 20
_GUE_PREFACTOR = 162.0 * math.sqrt(3.0) / (4.0 * math.pi)


@dataclass
class EigenphaseFrame:
    """Eigenphases of U(t) at one checkpoint, sorted ascending in [-pi, pi),
    with eigenvector columns permuted in lockstep."""

    t: float
    phases: np.ndarray
    vectors: np.ndarray


@dataclass
class RatioSample:
    """Folded spacing ratios from one or more frames. ``n_dropped`` counts
    ratios discarded because both neighbouring spacings were zero."""

    values: np.ndarray
    n_dropped: int = 0


def eigenphases(u, t=0.0, unitarity_tol=1e-6):
    """Eigen-decompose a unitary matrix into sorted phases and orthonormal
    eigenvectors.

    Uses the complex Schur form: for a (numerically) normal matrix it is an
    eigendecomposition with exactly unitary eigenvectors, which ``eig`` does
    not guarantee near degeneracies. Eigenvalues are projected onto the unit
    circle before taking phases.
    """
    defect = unitarity_defect(u)
    if defect > unitarity_tol:
        raise NotUnitary(f"unitarity defect {defect:.3e} exceeds {unitarity_tol:g}")
    try:
        tri, vectors = scipy.linalg.schur(u, output="complex")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from exc
    lam = np.diagonal(tri).copy()
    lam /= np.abs(lam)
    phases = np.angle(lam)
    phases[phases >= np.pi] -= 2.0 * np.pi  # angle() returns (-pi, pi]
    order = np.argsort(phases, kind="stable")
    return EigenphaseFrame(t=float(t), phases=phases[order], vectors=vectors[:, order])


def frame_stream(series, unitarity_tol=1e-6):
    """Yield one EigenphaseFrame per checkpoint, computed lazily so large
    series never hold all eigenvector matrices at once."""
    for t, u in zip(series.times, series.unitaries):
        yield eigenphases(u, t=t, unitarity_tol=unitarity_tol)


def compute_frames(series, unitarity_tol=1e-6, threads=1):
    """Materialize all frames, optionally decomposing checkpoints in a
    thread pool (LAPACK releases the GIL)."""
    if threads <= 1:
        return list(frame_stream(series, unitarity_tol))
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(
            lambda item: eigenphases(item[1], t=item[0], unitarity_tol=unitarity_tol),
            zip(series.times, series.unitaries)))


def ratio_samples(phases):
    """Folded spacing ratios R_n of a sorted phase array (or a frame).

    Zero spacings: one zero spacing gives R = 0 (the min(r, 1/r) limit);
    a ratio whose both spacings are zero is dropped and counted.
    """
    if isinstance(phases, EigenphaseFrame):
        phases = phases.phases
    phases = np.asarray(phases, dtype=float)
    if phases.size < 3:
        raise TooFewPhases(f"need >= 3 phases, got {phases.size}")
    s = np.diff(phases)
    a, b = s[:-1], s[1:]
    both_zero = (a == 0) & (b == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a / b
        values = np.minimum(r, 1.0 / r)
    values[(a == 0) ^ (b == 0)] = 0.0
    values = values[~both_zero]
    return RatioSample(values=values, n_dropped=int(both_zero.sum()))


def reference_density(kind, r):
    """Reference densities of the folded ratio on [0, 1]:
    Poisson 2/(1+R)^2 and the GUE surmise (162*sqrt(3)/4pi) (R+R^2)^2/(1+R+R^2)^4."""
    r = np.asarray(r, dtype=float)
    if kind == "poi":
        out = 2.0 / (1.0 + r) ** 2
    elif kind == "gue":
        out = _GUE_PREFACTOR * (r + r * r) ** 2 / (1.0 + r + r * r) ** 4
    else:
        raise ValueError(f"kind must be 'poi' or 'gue', got {kind!r}")
    return out if out.ndim else float(out)


@dataclass
class BinnedDistribution:
    """Probability masses on shared bin edges over [0, 1]."""

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.size != self.edges.size - 1:
            raise SupportMismatch("masses must have one entry per bin")
        if np.any(self.masses < 0):
            raise SupportMismatch("negative bin mass")
        total = self.masses.sum()
        if abs(total - 1.0) > 1e-12:
            raise SupportMismatch(f"masses sum to {total!r}, expected 1")

    @classmethod
    def from_samples(cls, values, edges):
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise EmptyWindow("no samples to bin")
        counts, _ = np.histogram(values, bins=edges)
        return cls(edges=edges, masses=counts / counts.sum())


def default_bin_edges(n_bins=DEFAULT_N_BINS):
    return np.linspace(0.0, 1.0, n_bins + 1)


def binned_reference(kind, edges, quad_points=64):
    """Reference masses per bin by fixed-order Gauss-Legendre quadrature."""
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(quad_points)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    masses = (reference_density(kind, nodes) * w[None, :]).sum(axis=1) * half
    return BinnedDistribution(edges=edges, masses=masses / masses.sum())


def kl_divergence(p1, p2):
    """Discrete KL divergence sum(P1 log(P1/P2)) in nats, with the usual
    0*log(0/q) = 0 convention."""
    if p1.edges.shape != p2.edges.shape or not np.array_equal(p1.edges, p2.edges):
        raise SupportMismatch("bin edges differ")
    m = p1.masses > 0
    if np.any(p2.masses[m] == 0):
        raise SupportMismatch("P2 vanishes on a bin where P1 has mass")
    return float(np.sum(p1.masses[m] * np.log(p1.masses[m] / p2.masses[m])))


class _ReferencePair:
    """Binned Poisson/GUE references plus their cross divergences."""

    def __init__(self, edges):
        self.edges = np.asarray(edges, dtype=float)
        self.poi = binned_reference("poi", self.edges)
        self.gue = binned_reference("gue", self.edges)
        self.d_gue_poi = kl_divergence(self.gue, self.poi)
        self.d_poi_gue = kl_divergence(self.poi, self.gue)


_REF_CACHE = {}


def _references(edges):
    key = (edges.size, float(edges[0]), float(edges[-1]))
    ref = _REF_CACHE.get(key)
    if ref is None or not np.array_equal(ref.edges, edges):
        ref = _ReferencePair(edges)
        _REF_CACHE[key] = ref
    return ref


def normalized_kl_pair(dist, edges=None):
    """(d_poi, d_gue): KL of ``dist`` against each binned reference, each
    normalized by the opposite reference's divergence so that the references
    themselves map to (0, 1) and (1, 0)."""
    if edges is None:
        edges = dist.edges
    ref = _references(np.asarray(edges, dtype=float))
    d_poi = kl_divergence(dist, ref.poi) / ref.d_gue_poi
    d_gue = kl_divergence(dist, ref.gue) / ref.d_poi_gue
    return d_poi, d_gue


@dataclass
class KLSeries:
    """Windowed, normalized KL divergences reported at window midpoints."""

    midpoints: np.ndarray
    d_poi: np.ndarray
    d_gue: np.ndarray
    n_samples: np.ndarray
    n_clamped: int = 0
    window_edges: np.ndarray = field(default=None)


def windowed_kl(series, n_windows=250, frames=None, n_bins=DEFAULT_N_BINS,
                unitarity_tol=1e-6):
    """Split [t0, t1] into ``n_windows`` equal intervals, pool the ratio
    samples of every checkpoint inside each interval into one joint
    distribution, and report the normalized KL pair at interval midpoints.

    ``frames`` may carry precomputed EigenphaseFrame objects (or any object
    with ``t`` and ``phases``); otherwise frames stream from the series.
    """
    if frames is None:
        frames = frame_stream(series, unitarity_tol=unitarity_tol)
        t_lo, t_hi = series.grid.t0, series.grid.t1
    else:
        frames = list(frames)
        t_lo = min(f.t for f in frames)
        t_hi = max(f.t for f in frames)
    width = (t_hi - t_lo) / n_windows
    if width <= 0:
        raise EmptyWindow("window span is empty")

    pooled = [[] for _ in range(n_windows)]
    counted = np.zeros(n_windows, dtype=int)
    for frame in frames:
        idx = min(int((frame.t - t_lo) / width), n_windows - 1)
        pooled[idx].append(ratio_samples(frame.phases).values)
        counted[idx] += 1
    if np.any(counted == 0):
        missing = int(np.argmax(counted == 0))
        raise EmptyWindow(f"window {missing} contains no checkpoints; "
                          "use fewer windows or more checkpoints")

    edges = default_bin_edges(n_bins)
    mid = t_lo + (np.arange(n_windows) + 0.5) * width
    d_poi = np.empty(n_windows)
    d_gue = np.empty(n_windows)
    n_samples = np.empty(n_windows, dtype=int)
    n_clamped = 0
    for i, chunks in enumerate(pooled):
        values = np.concatenate(chunks)
        if values.size == 0:
            raise EmptyWindow(f"window {i} has checkpoints but no ratio samples")
        dist = BinnedDistribution.from_samples(values, edges)
        dp, dg = normalized_kl_pair(dist)
        if dp > 1.0 or dg > 1.0:
            n_clamped += 1
        d_poi[i] = min(dp, 1.0)
        d_gue[i] = min(dg, 1.0)
        n_samples[i] = values.size
    window_edges = t_lo + np.arange(n_windows + 1) * width
    return KLSeries(midpoints=mid, d_poi=d_poi, d_gue=d_gue, n_samples=n_samples,
                    n_clamped=n_clamped, window_edges=window_edges)
