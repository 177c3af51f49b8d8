import numpy as np
import pytest
from scipy.linalg import expm

from transmon_chaos.errors import ConfigError, SingularProjection
from transmon_chaos.gates import (DeviationSpec, LogicalGate, avg_gate_fidelity,
                                  extract_logical_gate, li_gate_error,
                                  local_invariants, make_target,
                                  robustness_sweep, weyl_gate)
from transmon_chaos.hilbert import (ModeDims, SystemConfig, dressed_basis,
                                    drift_hamiltonian)
from transmon_chaos.propagator import TimeGrid, evolve
from transmon_chaos.pulse import FlatPulse, ZeroPulse
from transmon_chaos.rmt import EnsembleSpec, sample_member


def weyl_invariants_closed_form(c1, c2, c3):
    """Independent oracle: local invariants from Weyl coordinates."""
    cs = np.cos([c1, c2, c3])
    ss = np.sin([c1, c2, c3])
    g1 = (np.prod(cs) ** 2 - np.prod(ss) ** 2
          + 0.25j * np.prod(np.sin([2 * c1, 2 * c2, 2 * c3])))
    g2 = (4 * np.prod(cs) ** 2 - 4 * np.prod(ss) ** 2
          - np.prod(np.cos([2 * c1, 2 * c2, 2 * c3])))
    return complex(g1), float(g2.real)


def random_local(rng):
    """Haar-random single-qubit pair L1 (x) L2."""
    def u2():
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, r = np.linalg.qr(a)
        return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return np.kron(u2(), u2())


def test_local_invariants_identity_and_cnot():
    inv = local_invariants(np.eye(4, dtype=complex))
    assert inv.g1 == pytest.approx(1.0, abs=1e-12)
    assert inv.g2 == pytest.approx(3.0, abs=1e-12)
    cnot = np.eye(4, dtype=complex)[:, [0, 1, 3, 2]]
    inv = local_invariants(cnot)
    assert inv.g1 == pytest.approx(0.0, abs=1e-12)
    assert inv.g2 == pytest.approx(1.0, abs=1e-12)


def test_local_invariants_match_weyl_closed_form():
    rng = np.random.default_rng(12)
    for _ in range(20):
        c = rng.uniform(0, np.pi / 2, 3)
        inv = local_invariants(weyl_gate(*c))
        g1, g2 = weyl_invariants_closed_form(*c)
        assert inv.g1 == pytest.approx(g1, abs=1e-10)
        assert inv.g2 == pytest.approx(g2, abs=1e-10)


def test_local_invariants_single_qubit_invariance():
    rng = np.random.default_rng(3)
    base = make_target("bgate").matrix
    ref = local_invariants(base)
    for _ in range(1000):
        dressed_gate = random_local(rng) @ base @ random_local(rng)
        inv = local_invariants(dressed_gate)
        assert abs(inv.g1 - ref.g1) < 1e-10
        assert abs(inv.g2 - ref.g2) < 1e-10


def test_make_target_named_gates():
    assert np.allclose(make_target("identity").matrix, np.eye(4))
    # BGATE invariants match the brute-force exponential of the generator
    bg = make_target("bgate").matrix
    brute = expm(0.5j * (np.pi / 2 * np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])
                         + np.pi / 4 * np.kron([[0, -1j], [1j, 0]],
                                               [[0, -1j], [1j, 0]])))
    assert np.abs(bg - brute).max() < 1e-12
    inv = local_invariants(bg)
    assert inv.g1 == pytest.approx(0.0, abs=1e-12)
    assert inv.g2 == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ConfigError):
        make_target("hadamard")


def test_sqrt_iswap_squares_to_iswap_class():
    half = make_target("sqrtiswap").matrix
    sq_inv = local_invariants(half @ half)
    ref = local_invariants(make_target("iswap").matrix)
    assert sq_inv.g1 == pytest.approx(ref.g1, abs=1e-12)
    assert sq_inv.g2 == pytest.approx(ref.g2, abs=1e-12)
    assert ref.g1 == pytest.approx(0.0, abs=1e-12)
    assert ref.g2 == pytest.approx(-1.0, abs=1e-12)


def test_extract_identity_gate():
    cfg = SystemConfig(dims=ModeDims(2, 2, 2))
    dressed = dressed_basis(drift_hamiltonian(cfg), cfg.dims)
    gate = extract_logical_gate(np.eye(8, dtype=complex), dressed)
    assert np.abs(gate.matrix - np.eye(4)).max() < 1e-12
    assert gate.leakage_defect < 1e-12


def test_extract_static_evolution_diagonal_phases():
    cfg = SystemConfig(dims=ModeDims(3, 3, 3))
    dressed = dressed_basis(drift_hamiltonian(cfg), cfg.dims)
    grid = TimeGrid(0.0, 2.0, 0.001, 2000)
    series = evolve(cfg, ZeroPulse(), grid)
    gate = extract_logical_gate(series.unitaries[-1], dressed)
    assert gate.leakage_defect < 1e-9
    expected = np.diag([np.exp(-2j * np.pi * dressed.energy(i1, i2, 0) * 2.0)
                        for i1, i2 in ((0, 0), (0, 1), (1, 0), (1, 1))])
    assert np.abs(gate.matrix - expected).max() < 1e-8


def test_extract_singular_projection():
    cfg = SystemConfig(dims=ModeDims(2, 2, 2))
    dressed = dressed_basis(drift_hamiltonian(cfg), cfg.dims)
    # swap dressed |00> with a state orthogonal to the whole logical basis
    basis = dressed.computational_states()
    outside = np.zeros(8, dtype=complex)
    outside[7] = 1.0
    outside -= basis @ (basis.conj().T @ outside)
    outside /= np.linalg.norm(outside)
    v0 = basis[:, 0]
    u = np.eye(8, dtype=complex)
    u = u - np.outer(v0, v0.conj()) - np.outer(outside, outside.conj()) \
        + np.outer(outside, v0.conj()) + np.outer(v0, outside.conj())
    with pytest.raises(SingularProjection):
        extract_logical_gate(u, dressed)


def test_li_gate_error_properties():
    bg = make_target("bgate")
    assert li_gate_error(bg, bg) == 0.0
    rng = np.random.default_rng(5)
    dressed_gate = LogicalGate(matrix=random_local(rng) @ bg.matrix @ random_local(rng))
    assert li_gate_error(dressed_gate, bg) < 1e-10
    ident = make_target("identity")
    cnot = make_target("cnot")
    assert li_gate_error(ident, cnot) == pytest.approx(5.0, abs=1e-10)
    # symmetry
    assert li_gate_error(cnot, ident) == pytest.approx(li_gate_error(ident, cnot))


def test_avg_gate_fidelity_values():
    bg = make_target("bgate")
    assert avg_gate_fidelity(bg, bg) == pytest.approx(1.0)
    phased = LogicalGate(matrix=np.exp(0.7j) * bg.matrix)
    assert avg_gate_fidelity(phased, bg) == pytest.approx(1.0)
    # Hilbert-Schmidt-orthogonal pair: fidelity floor 0.2
    a = np.kron(np.eye(2), np.diag([1.0, -1.0])).astype(complex)
    assert np.trace(a).real == pytest.approx(0.0)
    assert avg_gate_fidelity(LogicalGate(matrix=a), make_target("identity")) == \
        pytest.approx(0.2)


def test_deviation_spec_validation():
    with pytest.raises(ConfigError):
        DeviationSpec(parameter="omega1", factors=(0.0, 0.01))
    with pytest.raises(ConfigError):
        DeviationSpec(parameter="g", factors=(0.01, 0.02))  # missing baseline
    spec = DeviationSpec(parameter="g", factors=(-0.01, 0.0, 0.01))
    assert spec.factors == (-0.01, 0.0, 0.01)


def test_sweep_baseline_deterministic_and_ordered():
    cfg = SystemConfig(dims=ModeDims(2, 2, 2))
    pulse = FlatPulse(1.0, 0.4)
    grid = TimeGrid(0.0, 1.0, 0.01, 100)
    target = make_target("identity")
    spec = DeviationSpec(parameter="g", factors=(-0.02, 0.0, 0.02))
    rows1 = robustness_sweep(cfg, pulse, grid, target, spec)
    rows2 = robustness_sweep(cfg, pulse, grid, target, spec)
    assert [r.deviation for r in rows1] == [-0.02, 0.0, 0.02]
    for a, b in zip(rows1, rows2):
        assert a.li_error == b.li_error
        assert a.leakage == b.leakage
        assert a.status == "ok"


def test_sweep_amplitude_with_zero_pulse_identical_rows():
    cfg = SystemConfig(dims=ModeDims(2, 2, 2))
    grid = TimeGrid(0.0, 1.0, 0.01, 100)
    target = make_target("identity")
    spec = DeviationSpec(parameter="amplitude", factors=(-0.5, 0.0, 0.5))
    rows = robustness_sweep(cfg, ZeroPulse(), grid, target, spec)
    errors = {r.li_error for r in rows}
    assert len(errors) == 1


def test_sweep_parallel_matches_serial():
    cfg = SystemConfig(dims=ModeDims(2, 2, 2))
    pulse = FlatPulse(1.0, 0.4)
    grid = TimeGrid(0.0, 1.0, 0.02, 50)
    target = make_target("identity")
    spec = DeviationSpec(parameter="deltac", factors=(-0.05, 0.0, 0.05))
    serial = robustness_sweep(cfg, pulse, grid, target, spec, workers=1)
    parallel = robustness_sweep(cfg, pulse, grid, target, spec, workers=2)
    for a, b in zip(serial, parallel):
        assert a.deviation == b.deviation
        assert a.li_error == b.li_error


def test_sweep_marks_failed_rows(monkeypatch):
    import transmon_chaos.gates as gates_mod

    def boom(cfg, pulse, grid, unitarity_tol=1e-9):
        raise gates_mod.TransmonChaosError("synthetic failure")

    monkeypatch.setattr(gates_mod, "evolve", boom)
    cfg = SystemConfig(dims=ModeDims(2, 2, 2))
    spec = DeviationSpec(parameter="g", factors=(0.0,))
    rows = robustness_sweep(cfg, ZeroPulse(), TimeGrid(0, 1, 0.01, 100),
                            make_target("identity"), spec)
    assert rows[0].status == "failed"
    assert "synthetic failure" in rows[0].message


def test_cue_local_invariants_are_bounded():
    # sanity: invariants of random 4x4 unitaries stay finite and G2 real
    for i in range(25):
        u = sample_member(EnsembleSpec(kind="cue", dim=4, seed=31), i)
        inv = local_invariants(u)
        assert np.isfinite(inv.g2)
        assert abs(inv.g1) < 10
