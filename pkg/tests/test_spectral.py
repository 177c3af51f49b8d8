import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from transmon_chaos.errors import (EmptyWindow, NotUnitary, SupportMismatch,
                                   TooFewPhases)
from transmon_chaos.hilbert import ModeDims, SystemConfig
from transmon_chaos.propagator import TimeGrid, evolve
from transmon_chaos.pulse import ZeroPulse
from transmon_chaos.rmt import EnsembleSpec, mean_ratio_poisson, sample_member
from transmon_chaos.spectral import (BinnedDistribution, binned_reference,
                                     compute_frames, default_bin_edges,
                                     eigenphases, kl_divergence,
                                     normalized_kl_pair, ratio_samples,
                                     reference_density, windowed_kl)


# --- eigenphases -------------------------------------------------------------

def test_eigenphases_identity():
    frame = eigenphases(np.eye(5, dtype=complex))
    assert np.allclose(frame.phases, 0.0)


def test_eigenphases_principal_values_and_sorting():
    u = np.diag([1.0 + 0j, 1j, -1.0 + 0j])
    frame = eigenphases(u)
    assert np.allclose(frame.phases, [-np.pi, 0.0, np.pi / 2])


def test_eigenphases_hermitian_oracle():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
    h = (a + a.conj().T) / 2
    h *= 2.5 / np.abs(np.linalg.eigvalsh(h)).max()  # spectrum inside (-pi, pi)
    u = expm(-1j * h)
    frame = eigenphases(u)
    expected = np.sort(-np.linalg.eigvalsh(h))
    assert np.abs(frame.phases - expected).max() < 1e-10


def test_eigenphases_reconstruction_and_orthonormality():
    u = sample_member(EnsembleSpec(kind="cue", dim=60, seed=4), 0)
    frame = eigenphases(u)
    v = frame.vectors
    assert np.abs(v.conj().T @ v - np.eye(60)).max() < 1e-12
    rebuilt = (v * np.exp(1j * frame.phases)) @ v.conj().T
    assert np.abs(rebuilt - u).max() < 1e-8


def test_eigenphases_rejects_nonunitary():
    with pytest.raises(NotUnitary):
        eigenphases(np.diag([1.0, 2.0]).astype(complex))


def test_eigenphase_global_phase_invariance_of_ratios():
    # e^{i theta} U rotates all phases rigidly; the circular (wrap-around)
    # spacing multiset is invariant, hence so are circular ratio statistics
    u = sample_member(EnsembleSpec(kind="cue", dim=50, seed=9), 0)
    def circular_spacings(frame):
        p = frame.phases
        return np.sort(np.concatenate([np.diff(p), [p[0] + 2 * np.pi - p[-1]]]))
    s0 = circular_spacings(eigenphases(u))
    for theta in (0.3, 1.7, np.pi - 0.1):
        s1 = circular_spacings(eigenphases(np.exp(1j * theta) * u))
        assert np.abs(np.sort(s0) - np.sort(s1)).max() < 1e-10


# --- ratios ------------------------------------------------------------------

def test_ratio_equal_spacing():
    r = ratio_samples(np.linspace(-1.0, 1.0, 11))
    assert np.allclose(r.values, 1.0)


def test_ratio_direct_formula():
    phases = np.array([0.0, 0.4, 1.2, 2.8])  # spacings 0.4, 0.8, 1.6
    r = ratio_samples(phases)
    assert np.allclose(r.values, [0.5, 0.5])


def test_ratio_needs_three_phases():
    with pytest.raises(TooFewPhases):
        ratio_samples(np.array([0.0, 1.0]))


def test_ratio_zero_spacing_conventions():
    r = ratio_samples(np.array([0.0, 0.0, 1.0, 2.0]))
    assert r.values[0] == 0.0  # single zero spacing -> R = 0
    r2 = ratio_samples(np.array([0.0, 0.0, 0.0, 1.0]))
    assert r2.n_dropped == 1   # both spacings zero -> dropped, counted


def test_ratio_values_in_unit_interval_and_reversal_invariance():
    rng = np.random.default_rng(5)
    phases = np.sort(rng.uniform(-np.pi, np.pi, 200))
    r = ratio_samples(phases)
    assert np.all((r.values >= 0) & (r.values <= 1))
    # reversing the phase list maps r -> 1/r elementwise; R is invariant
    rev = ratio_samples(np.sort(-phases))
    assert np.allclose(np.sort(r.values), np.sort(rev.values))


def test_poisson_mean_ratio_montecarlo():
    spec = EnsembleSpec(kind="poisson_phases", dim=2002, count=50, seed=21)
    values = np.concatenate(
        [ratio_samples(sample_member(spec, i)).values for i in range(spec.count)])
    assert values.mean() == pytest.approx(mean_ratio_poisson(), abs=0.005)


# --- reference densities -----------------------------------------------------

def test_reference_density_endpoint_values():
    assert reference_density("poi", 0.0) == pytest.approx(2.0)
    assert reference_density("poi", 1.0) == pytest.approx(0.5)
    assert reference_density("gue", 0.0) == 0.0


def test_reference_densities_normalized_by_quadrature():
    for kind in ("poi", "gue"):
        total, err = quad(lambda r: reference_density(kind, r), 0.0, 1.0)
        assert abs(total - 1.0) < 1e-8


def test_binned_reference_matches_quad():
    edges = default_bin_edges()
    binned = binned_reference("gue", edges)
    for i in (0, 7, 19):
        mass, _ = quad(lambda r: reference_density("gue", r), edges[i], edges[i + 1])
        assert binned.masses[i] == pytest.approx(mass, abs=1e-12)
    assert np.all(binned.masses > 0)


# --- KL ----------------------------------------------------------------------

def test_kl_self_is_zero():
    p = binned_reference("poi", default_bin_edges())
    assert kl_divergence(p, p) == 0.0


def test_kl_closed_form():
    edges = np.array([0.0, 0.5, 1.0])
    p1 = BinnedDistribution(edges=edges, masses=np.array([1.0, 0.0]))
    p2 = BinnedDistribution(edges=edges, masses=np.array([0.5, 0.5]))
    assert kl_divergence(p1, p2) == pytest.approx(np.log(2.0))


def test_kl_nonnegative_gibbs():
    rng = np.random.default_rng(17)
    edges = default_bin_edges(8)
    for _ in range(1000):
        p1 = BinnedDistribution(edges=edges, masses=rng.dirichlet(np.ones(8)))
        p2 = BinnedDistribution(edges=edges, masses=rng.dirichlet(np.full(8, 0.7)))
        assert kl_divergence(p1, p2) >= 0.0


def test_kl_support_mismatch():
    p1 = BinnedDistribution(edges=np.array([0.0, 0.5, 1.0]), masses=np.array([1.0, 0.0]))
    p2 = BinnedDistribution(edges=np.array([0.0, 0.25, 1.0]), masses=np.array([0.5, 0.5]))
    with pytest.raises(SupportMismatch):
        kl_divergence(p1, p2)
    p3 = BinnedDistribution(edges=np.array([0.0, 0.5, 1.0]), masses=np.array([0.0, 1.0]))
    with pytest.raises(SupportMismatch):
        kl_divergence(p1, p3)


def test_normalized_pair_reference_fixed_points():
    edges = default_bin_edges()
    d_poi, d_gue = normalized_kl_pair(binned_reference("gue", edges))
    assert d_poi == pytest.approx(1.0)
    assert d_gue == pytest.approx(0.0, abs=1e-12)
    d_poi, d_gue = normalized_kl_pair(binned_reference("poi", edges))
    assert d_poi == pytest.approx(0.0, abs=1e-12)
    assert d_gue == pytest.approx(1.0)


def test_cue_and_poisson_calibration_small():
    # desk-sized version of the acceptance calibration
    cue = EnsembleSpec(kind="cue", dim=100, count=60, seed=3)
    values = np.concatenate([
        ratio_samples(eigenphases(sample_member(cue, i)).phases).values
        for i in range(cue.count)])
    dist = BinnedDistribution.from_samples(values, default_bin_edges())
    d_poi, d_gue = normalized_kl_pair(dist)
    assert d_gue < 0.1
    assert d_poi > 0.5

    poi = EnsembleSpec(kind="poisson_phases", dim=100, count=60, seed=3)
    values = np.concatenate(
        [ratio_samples(sample_member(poi, i)).values for i in range(poi.count)])
    dist = BinnedDistribution.from_samples(values, default_bin_edges())
    d_poi, d_gue = normalized_kl_pair(dist)
    assert d_poi < 0.1
    assert d_gue > 0.5


# --- windowed KL -------------------------------------------------------------

SMALL = SystemConfig(dims=ModeDims(3, 3, 4))


def test_windowed_kl_static_drift_stays_poissonian():
    # needs the full 150-level spectrum: small truncations are too
    # structured to show clean Poisson statistics
    grid = TimeGrid(0.0, 5.0, 0.005, 10)  # 101 checkpoints
    series = evolve(SystemConfig(), ZeroPulse(), grid)
    kl = windowed_kl(series, n_windows=10)
    assert kl.d_poi.max() < 0.15
    assert np.all(kl.d_gue > 0.5)
    assert np.all(kl.n_samples >= 1000)
    assert kl.midpoints[0] == pytest.approx(0.25)


def test_windowed_kl_frozen_series_identical_windows():
    grid = TimeGrid(0.0, 1.0, 0.01, 10)
    series = evolve(SMALL, ZeroPulse(), grid)
    frozen = series.unitaries.copy()
    frozen[:] = series.unitaries[5]
    series.unitaries = frozen
    kl = windowed_kl(series, n_windows=5)
    assert np.ptp(kl.d_poi) == pytest.approx(0.0, abs=1e-15)
    assert np.ptp(kl.d_gue) == pytest.approx(0.0, abs=1e-15)


def test_windowed_kl_single_window_equals_pooled():
    grid = TimeGrid(0.0, 1.0, 0.01, 20)
    series = evolve(SMALL, ZeroPulse(), grid)
    kl = windowed_kl(series, n_windows=1)
    frames = compute_frames(series)
    pooled = np.concatenate([ratio_samples(f.phases).values for f in frames])
    dist = BinnedDistribution.from_samples(pooled, default_bin_edges())
    d_poi, d_gue = normalized_kl_pair(dist)
    assert kl.d_poi[0] == pytest.approx(d_poi)
    assert kl.d_gue[0] == pytest.approx(d_gue)


def test_windowed_kl_empty_window_raises():
    grid = TimeGrid(0.0, 1.0, 0.01, 50)  # 3 checkpoints
    series = evolve(SMALL, ZeroPulse(), grid)
    with pytest.raises(EmptyWindow):
        windowed_kl(series, n_windows=10)


def test_windowed_kl_clamps_pathological_windows():
    # all ratio mass in one bin sits far outside both references; the
    # normalized divergences exceed 1 and must be clamped and counted
    edges = default_bin_edges()
    spike = np.full(200, 0.975)
    dist = BinnedDistribution.from_samples(spike, edges)
    d_poi, d_gue = normalized_kl_pair(dist)
    assert d_poi > 1.0 or d_gue > 1.0

    grid = TimeGrid(0.0, 1.0, 0.01, 10)
    series = evolve(SMALL, ZeroPulse(), grid)

    class FakeFrame:
        def __init__(self, t):
            self.t = t
            self.phases = np.sort(np.concatenate([
                np.arange(40) * 1e-3, 0.5 + np.arange(40) * 0.975e-3]))

    kl = windowed_kl(series, n_windows=2,
                     frames=[FakeFrame(t) for t in series.times])
    assert np.all(kl.d_poi <= 1.0)
    assert np.all(kl.d_gue <= 1.0)


def test_occupation_rephasing_invariance():
    # spectral frames with re-phased eigenvectors give identical p_n
    from transmon_chaos.diagnostics import occupation_spectrum
    rng = np.random.default_rng(23)
    u = sample_member(EnsembleSpec(kind="cue", dim=30, seed=14), 0)
    frame = eigenphases(u)
    psi = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    psi /= np.linalg.norm(psi)
    p1 = occupation_spectrum(frame, psi).p
    frame.vectors = frame.vectors * np.exp(1j * rng.uniform(0, 2 * np.pi, 30))
    p2 = occupation_spectrum(frame, psi).p
    assert np.allclose(p1, p2, atol=1e-14)


def test_compute_frames_threaded_matches_serial():
    grid = TimeGrid(0.0, 0.5, 0.01, 10)
    series = evolve(SMALL, ZeroPulse(), grid)
    serial = compute_frames(series)
    threaded = compute_frames(series, threads=2)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.phases, b.phases)
