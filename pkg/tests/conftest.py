import numpy as np

from transmon_chaos.rmt import (EnsembleSpec, parametric_hamiltonian,
                                sample_member)
from transmon_chaos.spectral import EigenphaseFrame


def parametric_gue_frames(dim, n_lambda, lam_span, member, seed):
    """Eigenvalue/eigenvector frames of one parametric-GUE family member on
    a lambda window, shifted by a random offset so windows sample the
    stationary family uniformly. Eigenvalues (semicircle radius 2) fit in
    [-pi, pi), so they can be treated directly as eigenphase frames."""
    spec = EnsembleSpec(kind="parametric_gue", dim=dim, count=member + 1, seed=seed)
    pair = sample_member(spec, member)
    offset = np.random.default_rng([seed + 1, member]).uniform(0, 2 * np.pi)
    lams = np.linspace(0.0, lam_span, n_lambda)
    frames = []
    for lam in lams:
        w, v = np.linalg.eigh(parametric_hamiltonian(pair, lam + offset))
        frames.append(EigenphaseFrame(t=float(lam), phases=w, vectors=v))
    return frames, float(lams[1] - lams[0])


def pooled_parametric_curvatures(dim, n_lambda, lam_span, count, seed,
                                 bulk=(0.25, 0.75), thin=False):
    """Track -> differentiate every member and pool (folded phases of bulk
    tracks, all velocities, bulk curvatures) across members.

    The velocity variance and the spacing scale are properties of the
    ensemble, shared by all members, so pooling them globally avoids the
    per-member estimator jitter that would smear the rescaled distribution.
    ``thin=True`` keeps one curvature sample per track (the central lambda),
    giving approximately independent draws for distribution-shape tests.
    """
    from transmon_chaos.curvature import track_phases

    sel = slice(int(dim * bulk[0]), int(dim * bulk[1]))
    folded, vels, kaps = [], [], []
    for m in range(count):
        frames, dlam = parametric_gue_frames(dim, n_lambda, lam_span, m, seed)
        tracks = track_phases(frames)
        unwrapped = np.column_stack([tr.phases for tr in tracks])
        fold = np.column_stack([tr.raw for tr in tracks])
        vel = (unwrapped[2:] - unwrapped[:-2]) / (2 * dlam)
        kap = (unwrapped[2:] - 2 * unwrapped[1:-1] + unwrapped[:-2]) / dlam**2
        folded.append(fold[:, sel])
        vels.append(vel.ravel())
        if thin:
            kaps.append(kap[kap.shape[0] // 2, sel])
        else:
            kaps.append(kap[:, sel].ravel())
    return np.vstack(folded), np.concatenate(vels), np.concatenate(kaps)
