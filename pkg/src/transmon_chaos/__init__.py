"""Driven two-transmon/cavity simulator with chaos diagnostics.

Build the system (hilbert), pick a drive (pulse), propagate the
time-evolution operator on a checkpoint grid (propagator), then analyze:
eigenphase spacing statistics and windowed KL divergences (spectral),
tracked level curvatures and power-law tails (curvature), populations and
OTOCs (diagnostics), and two-qubit gate errors under parameter deviations
(gates). Random-matrix samplers used as test oracles live in rmt.
"""

from . import curvature, diagnostics, errors, gates, hilbert, propagator, pulse, rmt, spectral
from .hilbert import (DressedBasis, FockLabel, ModeDims, SystemConfig,
                      dressed_basis, drift_hamiltonian, drive_operator, ladder)
from .propagator import TimeGrid, UnitarySeries, evolve
from .pulse import load_pulse, save_pulse, synth_test_pulse
from .spectral import eigenphases, ratio_samples, windowed_kl
from .curvature import segment_analysis, track_phases
from .gates import make_target, local_invariants, robustness_sweep

__version__ = "0.1.0"

__all__ = [
    "curvature", "diagnostics", "errors", "gates", "hilbert", "propagator",
    "pulse", "rmt", "spectral",
    "DressedBasis", "FockLabel", "ModeDims", "SystemConfig",
    "dressed_basis", "drift_hamiltonian", "drive_operator", "ladder",
    "TimeGrid", "UnitarySeries", "evolve",
    "load_pulse", "save_pulse", "synth_test_pulse",
    "eigenphases", "ratio_samples", "windowed_kl",
    "segment_analysis", "track_phases",
    "make_target", "local_invariants", "robustness_sweep",
]
