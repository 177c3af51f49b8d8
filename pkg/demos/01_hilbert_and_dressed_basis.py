"""Build the coupled transmon-transmon-cavity Hilbert space and look at the
dressed computational basis.

The system is two anharmonic (Kerr) modes coupled to one cavity mode, all
expressed in a frame rotating at the drive frequency, so only detunings
appear. The logical qubit states are not bare Fock states: they are the
eigenstates of the undriven Hamiltonian that overlap each bare state most.
"""

import numpy as np

from transmon_chaos import SystemConfig, dressed_basis, drift_hamiltonian

cfg = SystemConfig()  # default parameter set, 5 x 5 x 6 levels
print("system:", cfg)
print(f"detunings (GHz): delta1={cfg.delta1:+.3f} delta2={cfg.delta2:+.3f} "
      f"deltac={cfg.deltac:+.3f}")

h = drift_hamiltonian(cfg)
print(f"\ndrift Hamiltonian: {h.shape[0]} x {h.shape[1]}, "
      f"hermiticity defect {np.abs(h - h.conj().T).max():.1e}")

dressed = dressed_basis(h, cfg.dims)
print("\ndressed computational states (bare-state overlap and energy):")
for i1, i2 in ((0, 0), (0, 1), (1, 0), (1, 1)):
    from transmon_chaos.hilbert import FockLabel
    label = FockLabel(i1, i2, 0)
    ov = dressed.overlaps[label]
    print(f"  |{i1}{i2}>  overlap^2 = {ov**2:.4f}   E = {dressed.energy(i1, i2, 0):+.6f} GHz")

# the coupling g hybridizes the bare states; switching it off makes the
# dressed basis collapse back onto the Fock basis
bare = dressed_basis(drift_hamiltonian(SystemConfig(g=0.0)), cfg.dims)
worst = min(bare.overlaps.values())
print(f"\nwith g = 0 the weakest overlap is {worst:.12f} (bare basis recovered)")
