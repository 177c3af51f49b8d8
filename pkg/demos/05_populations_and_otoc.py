"""Population diagnostics and out-of-time-ordered correlators on a strongly
driven run.

Watched quantities: how much weight stays in the logical subspace
(p_sub), how many instantaneous eigenstates of U(t) the evolving state
fragments over, the per-transmon conditional occupations, and the OTOC
F(t) = Re <W(t) V W(t) V> for the two built-in operator pairs.
"""

import numpy as np

from transmon_chaos import SystemConfig, TimeGrid, dressed_basis, drift_hamiltonian, \
    evolve, synth_test_pulse
from transmon_chaos.diagnostics import (builtin_otoc_operators,
                                        fock_conditional, level_count_fraction,
                                        occupation_spectrum, otoc,
                                        reduced_occupations, subspace_weight)
from transmon_chaos.spectral import compute_frames

cfg = SystemConfig()
dressed = dressed_basis(drift_hamiltonian(cfg), cfg.dims)
pulse = synth_test_pulse("gaussian_flattop", 5.0, 0.8, rise=1.0)
series = evolve(cfg, pulse, TimeGrid(0.0, 5.0, 0.002, 50))

p_sub = subspace_weight(series, dressed)
print(f"logical-subspace weight: starts at {p_sub[0]:.6f}, "
      f"dips to {p_sub.min():.3f} at t = {series.times[p_sub.argmin()]:.2f} ns")

frames = compute_frames(series)
psi0 = dressed.state(0, 0, 0)
print("\nfragmentation of |00> over instantaneous eigenstates "
      "(fraction with p_n > 1%):")
for idx in range(0, len(series), 5):
    evolved = series.unitaries[idx] @ psi0
    spec = occupation_spectrum(frames[idx], evolved)
    frac = level_count_fraction(spec, 0.01)
    print(f"  t = {series.times[idx]:4.1f} ns   fraction = {frac:.3f}")

evolved = series.unitaries[-1] @ psi0
occ = reduced_occupations(evolved, cfg.dims, t=series.times[-1])
print(f"\nbare occupations at t = {occ.t:.1f} ns:")
print("  transmon 1:", np.round(occ.q1, 3))
print("  transmon 2:", np.round(occ.q2, 3))
print("  cavity    :", np.round(occ.cavity, 3))

_, m1, _, _ = fock_conditional(frames[-1], occupation_spectrum(frames[-1], evolved),
                               cfg.dims)
print("  conditional transmon-1 occupation:", np.round(m1, 3))

print("\nOTOCs from the dressed |00> state:")
for choice in ("quadrature", "number"):
    v, w = builtin_otoc_operators(cfg.dims, choice)
    res = otoc(series, v, w, psi0, choice=choice, initial_state="00")
    print(f"  {choice:10s}: F(0) = {res.values[0]:+.4f}, "
          f"min F = {res.values.min():+.4f}, final F = {res.values[-1]:+.4f}")
