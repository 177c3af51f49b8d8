"""Continuous eigenphase trajectories and level-curvature statistics.

Sorting eigenphases frame by frame breaks continuity whenever trajectories
cross, so tracks are stitched by eigenvector overlap instead: consecutive
frames are matched greedily on |<phi_n(t_k)|phi_m(t_{k+1})>| with conflicts
resolved by a global assignment, and phases are unwrapped by adding 2*pi
multiples that minimize per-step jumps.

Curvatures kappa = d^2 phi / dt^2 come from central differences at the
checkpoint spacing and are made dimensionless per time segment:

    k = kappa * Delta / (2*pi * Var(dphi/dt))

with Delta the mean nearest-neighbour spacing of the folded phases in the
segment and the velocity variance pooled over the segment. Localized and
chaotic dynamics produce distinct k distributions whose tails fall off as
|k|^-2 and |k|^-4 respectively.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (AmbiguousMatch, DegenerateSegment, InsufficientTail,
                     TooShort)
from .spectral import ratio_samples, BinnedDistribution, default_bin_edges, \
    normalized_kl_pair

__all__ = [
    "PhaseTrajectory",
    "TailFit",
    "SegmentStats",
    "track_phases",
    "derivatives",
    "rescale",
    "reference_curvature_density",
    "tail_fit",
    "log_histogram",
    "segment_analysis",
]

DEFAULT_MATCHING_THRESHOLD = 0.5
TWO_PI = 2.0 * math.pi


@dataclass
class PhaseTrajectory:
    """One continuously tracked eigenphase.

    ``raw`` holds the folded phases exactly as they appear in the frames
    (so refolding is bitwise exact), ``wraps`` the integer number of 2*pi
    turns accumulated by unwrapping, and ``columns`` the eigenvector column
    followed in each frame.
    """

    track_id: int
    times: np.ndarray
    raw: np.ndarray
    wraps: np.ndarray
    columns: np.ndarray

    @property
    def phases(self):
        """Unwrapped, continuous phases."""
        return self.raw + TWO_PI * self.wraps


def track_phases(frames, matching_threshold=DEFAULT_MATCHING_THRESHOLD):
    """Stitch an iterable of EigenphaseFrame into continuous trajectories.

    Frames must be uniformly spaced in time. Raises AmbiguousMatch when the
    best available overlap for some track drops below ``matching_threshold``
    (checkpoints too sparse to follow the spectrum).
    """
    frames = iter(frames)
    try:
        first = next(frames)
    except StopIteration:
        raise TooShort("need at least 3 frames to track")
    n = first.phases.size
    times = [first.t]
    raw_rows = [first.phases.copy()]
    wrap_rows = [np.zeros(n, dtype=np.int64)]
    col_rows = [np.arange(n)]
    prev_vectors = first.vectors
    prev_unwrapped = first.phases.copy()
    prev_cols = col_rows[0]

    for frame in frames:
        overlap = np.abs(prev_vectors.conj().T @ frame.vectors)
        cand = np.argmax(overlap, axis=1)
        if np.unique(cand).size != n:
            _, cand = linear_sum_assignment(-overlap)
        quality = overlap[np.arange(n), cand]
        worst = float(quality.min())
        if worst < matching_threshold:
            raise AmbiguousMatch(
                f"best eigenvector overlap {worst:.3f} below threshold "
                f"{matching_threshold} at t = {frame.t:.6f}; "
                "checkpoints are too sparse")
        # prev column prev_cols[i] belongs to track i; map through cand
        new_cols = cand[prev_cols]
        raw = frame.phases[new_cols]
        wraps = np.rint((prev_unwrapped - raw) / TWO_PI).astype(np.int64)
        times.append(frame.t)
        raw_rows.append(raw)
        wrap_rows.append(wraps)
        col_rows.append(new_cols)
        prev_unwrapped = raw + TWO_PI * wraps
        prev_vectors = frame.vectors
        prev_cols = new_cols

    if len(times) < 3:
        raise TooShort(f"need at least 3 frames to track, got {len(times)}")
    times = np.asarray(times)
    dt = np.diff(times)
    if dt.size and not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
        raise TooShort("frames must be uniformly spaced in time")
    raw_m = np.vstack(raw_rows)      # columns indexed by track, ordering fixed
    wraps_m = np.vstack(wrap_rows)
    cols_m = np.vstack(col_rows)
    return [
        PhaseTrajectory(track_id=i, times=times, raw=raw_m[:, i],
                        wraps=wraps_m[:, i], columns=cols_m[:, i])
        for i in range(n)
    ]


def derivatives(traj, dt=None):
    """Central-difference velocities and curvatures on the interior points.

    Returns (times, velocities, kappas); velocities in rad/ns, kappas in
    rad/ns^2. Exact for polynomials up to degree 2.
    """
    phases = traj.phases if isinstance(traj, PhaseTrajectory) else np.asarray(traj)
    if isinstance(traj, PhaseTrajectory):
        times = traj.times
        if dt is None:
            dt = float(times[1] - times[0])
    else:
        if dt is None:
            raise TooShort("dt required when passing a bare phase array")
        times = np.arange(phases.size) * dt
    if phases.size < 3:
        raise TooShort(f"need >= 3 samples for central differences, got {phases.size}")
    v = (phases[2:] - phases[:-2]) / (2.0 * dt)
    kappa = (phases[2:] - 2.0 * phases[1:-1] + phases[:-2]) / dt**2
    return times[1:-1], v, kappa


def rescale(folded_phases, velocities, kappas, per_track=False):
    """Dimensionless curvatures for one time segment.

    folded_phases : (n_frames, n_tracks) folded phases of every frame in the
        segment (spacing scale Delta).
    velocities, kappas : (n_tracks, n_times) central-difference samples in
        the segment.
    per_track : use each track's own velocity variance instead of pooling
        (the pooled form is the default reading of the rescaling formula).
    """
    folded = np.atleast_2d(np.asarray(folded_phases, dtype=float))
    kappas = np.atleast_2d(np.asarray(kappas, dtype=float))
    velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
    if folded.shape[1] < 2:
        raise DegenerateSegment("need >= 2 tracks to define a spacing")
    if folded.shape[0] < 3:
        raise DegenerateSegment("need >= 3 time points in the segment")
    spacings = np.diff(np.sort(folded, axis=1), axis=1)
    delta = float(spacings.mean())
    if per_track:
        var = velocities.var(axis=1, keepdims=True)
        if np.any(var == 0):
            raise DegenerateSegment("a track has zero velocity variance")
    else:
        var = velocities.var()
        if var == 0:
            raise DegenerateSegment("velocity variance vanishes in segment")
    return kappas * delta / (TWO_PI * var)


def reference_curvature_density(kind, k):
    """Limiting rescaled-curvature densities: (1/pi)/(1+k^2) for Poisson,
    (2/pi)/(1+k^2)^2 for GUE (both normalized over the real line)."""
    k = np.asarray(k, dtype=float)
    if kind == "poi":
        out = (1.0 / math.pi) / (1.0 + k * k)
    elif kind == "gue":
        out = (2.0 / math.pi) / (1.0 + k * k) ** 2
    else:
        raise ValueError(f"kind must be 'poi' or 'gue', got {kind!r}")
    return out if out.ndim else float(out)


@dataclass
class TailFit:
    """Power-law fit of the large-|k| histogram tail: density ~ |k|^-beta."""

    beta_tilde: float
    k_min: float
    stderr: float
    n_bins: int


def log_histogram(abs_k, k_min, n_bins=20, k_max=None):
    """Log-spaced histogram of |k| values above ``k_min``."""
    abs_k = np.asarray(abs_k, dtype=float)
    tail = abs_k[abs_k >= k_min]
    if tail.size == 0:
        raise InsufficientTail(f"no samples above k_min = {k_min}")
    top = float(tail.max()) if k_max is None else float(k_max)
    if top <= k_min:
        raise InsufficientTail("histogram range is empty")
    edges = np.geomspace(k_min, top * (1.0 + 1e-12), n_bins + 1)
    counts, _ = np.histogram(tail, bins=edges)
    return edges, counts


def tail_fit(edges, counts, k_min=3.0, min_count=5, min_bins=10):
    """Least-squares slope of log(density) against log(|k|) over populated
    bins above ``k_min``; returns beta_tilde = -slope.

    ``counts`` may be sample counts (filtered by ``min_count``) or exact bin
    masses (pass min_count=0).
    """
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    use = (lo >= k_min) & (counts >= max(min_count, 1e-300)) & (counts > 0)
    if use.sum() < min_bins:
        raise InsufficientTail(
            f"only {int(use.sum())} populated bins above k_min = {k_min}; "
            f"need {min_bins}")
    density = counts[use] / (hi[use] - lo[use])
    x = np.log(np.sqrt(lo[use] * hi[use]))
    y = np.log(density)
    (slope, _), cov = np.polyfit(x, y, 1, cov=True)
    return TailFit(beta_tilde=float(-slope), k_min=float(k_min),
                   stderr=float(np.sqrt(cov[0, 0])), n_bins=int(use.sum()))


@dataclass
class SegmentStats:
    """Curvature histogram of one time segment, tagged with the segment's
    spacing-ratio KL divergences."""

    index: int
    t_lo: float
    t_hi: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    tail: TailFit
    d_poi: float
    d_gue: float
    n_samples: int


def segment_analysis(frames, segment_len=0.5, matching_threshold=DEFAULT_MATCHING_THRESHOLD,
                     k_min=3.0, hist_bins=40, per_track=False):
    """Full curvature pipeline over equally long time segments.

    Tracks the frames once, differentiates, rescales per segment, histograms
    |k| on log bins, fits the tail where it is populated (tail = None
    otherwise), and attaches the segment's normalized KL pair computed from
    the same frames' spacing ratios.
    """
    frames = list(frames)
    tracks = track_phases(frames, matching_threshold=matching_threshold)
    times = tracks[0].times
    t_lo, t_hi = float(times[0]), float(times[-1])
    span = t_hi - t_lo
    n_segments = span / segment_len
    if abs(n_segments - round(n_segments)) > 1e-9 * max(1.0, abs(n_segments)):
        raise ValueError(f"span {span} is not a multiple of segment_len {segment_len}")
    n_segments = int(round(n_segments))

    dt = float(times[1] - times[0])
    unwrapped = np.column_stack([tr.phases for tr in tracks])    # (n_frames, n_tracks)
    folded = np.column_stack([tr.raw for tr in tracks])
    vel = (unwrapped[2:] - unwrapped[:-2]) / (2.0 * dt)
    kap = (unwrapped[2:] - 2.0 * unwrapped[1:-1] + unwrapped[:-2]) / dt**2
    t_interior = times[1:-1]

    ratio_edges = default_bin_edges()
    out = []
    for i in range(n_segments):
        lo = t_lo + i * segment_len
        hi = lo + segment_len
        last = i == n_segments - 1
        in_seg = (times >= lo - 1e-12) & ((times <= hi + 1e-12) if last else (times < hi - 1e-12))
        in_int = (t_interior >= lo - 1e-12) & ((t_interior <= hi + 1e-12) if last
                                               else (t_interior < hi - 1e-12))
        k = rescale(folded[in_seg], vel[in_int].T, kap[in_int].T, per_track=per_track)
        abs_k = np.abs(k).ravel()
        floor = max(abs_k[abs_k > 0].min() if np.any(abs_k > 0) else 1e-12, 1e-12)
        top = max(abs_k.max(), floor * 10)
        hist_edges = np.geomspace(floor, top * (1 + 1e-12), hist_bins + 1)
        hist_counts, _ = np.histogram(abs_k, bins=hist_edges)
        try:
            fit = tail_fit(hist_edges, hist_counts, k_min=k_min)
        except InsufficientTail:
            fit = None
        pooled = np.concatenate([ratio_samples(f.phases).values
                                 for f, m in zip(frames, in_seg) if m])
        dist = BinnedDistribution.from_samples(pooled, ratio_edges)
        d_poi, d_gue = normalized_kl_pair(dist)
        out.append(SegmentStats(index=i, t_lo=lo, t_hi=hi, hist_edges=hist_edges,
                                hist_counts=hist_counts, tail=fit,
                                d_poi=min(d_poi, 1.0), d_gue=min(d_gue, 1.0),
                                n_samples=int(abs_k.size)))
    return out
