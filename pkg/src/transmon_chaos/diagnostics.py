"""Population diagnostics and out-of-time-ordered correlators.

All quantities act on a checkpointed UnitarySeries:

* bare per-mode occupations of an evolved state (partial-trace diagonals),
* the logical-subspace weight p_sub(t) averaged over the four dressed
  computational states,
* occupations p_n(t) = |<phi_n(t)|U(t)|psi_in>|^2 of the instantaneous
  eigenstates of U(t), the fraction of levels above an occupation
  threshold, and the Fock-conditional probabilities sum_n p_n |<phi_n|f>|^2
  with their per-mode marginals,
* OTOCs F(t) = Re <W(t) V^dag W(t) V>_psi with W(t) = U^dag(t) W U(t),
  evaluated with matrix-vector products only.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import hermiticity_defect
from .errors import NotHermitian
from .hilbert import ladder

__all__ = [
    "ReducedOccupations",
    "OccupationSpectrum",
    "OtocResult",
    "reduced_occupations",
    "subspace_weight",
    "occupation_spectrum",
    "level_count_fraction",
    "fock_conditional",
    "builtin_otoc_operators",
    "otoc",
]

DEFAULT_THRESHOLD = 0.01  # 1% occupation threshold for level counting


@dataclass
class ReducedOccupations:
    """Diagonals of the three single-mode reduced density matrices."""

    t: float
    q1: np.ndarray
    q2: np.ndarray
    cavity: np.ndarray


@dataclass
class OccupationSpectrum:
    """p_n(t) aligned with the phases of an EigenphaseFrame."""

    t: float
    p: np.ndarray


@dataclass
class OtocResult:
    times: np.ndarray
    values: np.ndarray
    choice: str = ""
    initial_state: str = ""


def reduced_occupations(state, dims, t=0.0):
    """Per-mode level populations of a pure state, by marginalizing
    |amplitude|^2 over the other two modes (no density matrix is formed)."""
    prob = (np.abs(np.asarray(state)) ** 2).reshape(dims.n1, dims.n2, dims.nc)
    return ReducedOccupations(
        t=float(t),
        q1=prob.sum(axis=(1, 2)),
        q2=prob.sum(axis=(0, 2)),
        cavity=prob.sum(axis=(0, 1)),
    )


def subspace_weight(series, dressed):
    """p_sub(t): mean probability that a dressed computational state stays
    in the logical subspace, one value per checkpoint.

    p_sub(t) = (1/4) sum_in <psi_in| U^dag(t) Pi_sub U(t) |psi_in> with
    Pi_sub the projector onto the four dressed computational states.
    """
    basis = dressed.computational_states()          # (N, 4)
    out = np.empty(len(series))
    for i, u in enumerate(series.unitaries):
        evolved = u @ basis                          # (N, 4)
        amp = basis.conj().T @ evolved               # (4, 4)
        out[i] = float(np.sum(np.abs(amp) ** 2)) / 4.0
    return out


def occupation_spectrum(frame, evolved_state):
    """p_n = |<phi_n|psi>|^2 for an already-evolved state."""
    p = np.abs(frame.vectors.conj().T @ np.asarray(evolved_state)) ** 2
    return OccupationSpectrum(t=frame.t, p=p)


def level_count_fraction(spectrum, p_threshold=DEFAULT_THRESHOLD):
    """Fraction of levels whose occupation strictly exceeds the threshold."""
    p = spectrum.p if isinstance(spectrum, OccupationSpectrum) else np.asarray(spectrum)
    return float(np.count_nonzero(p > p_threshold)) / p.size


def fock_conditional(frame, spectrum, dims):
    """Joint probability over bare Fock labels,
    P_{i1,i2,ic} = sum_n p_n |<phi_n|i1,i2,ic>|^2, and its three marginals.

    Returns (tensor, marginal_q1, marginal_q2, marginal_cavity).
    """
    p = spectrum.p if isinstance(spectrum, OccupationSpectrum) else np.asarray(spectrum)
    weight = (np.abs(frame.vectors) ** 2) @ p        # over flat Fock index
    tensor = weight.reshape(dims.n1, dims.n2, dims.nc)
    return (tensor, tensor.sum(axis=(1, 2)), tensor.sum(axis=(0, 2)),
            tensor.sum(axis=(0, 1)))


def builtin_otoc_operators(dims, choice):
    """The two Hermitian operator pairs used by the OTOC diagnostics:
    'quadrature' -> V = b1 + b1^dag, W = b2 + b2^dag;
    'number'     -> V = b1^dag b1,  W = b2^dag b2."""
    b1 = ladder(dims, "q1")
    b2 = ladder(dims, "q2")
    if choice == "quadrature":
        return b1 + b1.conj().T, b2 + b2.conj().T
    if choice == "number":
        return b1.conj().T @ b1, b2.conj().T @ b2
    raise ValueError(f"choice must be 'quadrature' or 'number', got {choice!r}")


def otoc(series, v, w, psi, choice="", initial_state="", hermiticity_tol=1e-10):
    """F(t) = Re <psi| W(t) V^dag W(t) V |psi>, W(t) = U^dag(t) W U(t).

    W(t) is never formed as a matrix; each checkpoint costs eight
    matrix-vector products.
    """
    for name, op in (("V", v), ("W", w)):
        scale = max(1.0, float(np.abs(op).max()))
        if hermiticity_defect(op) > hermiticity_tol * scale:
            raise NotHermitian(f"{name} is not Hermitian within {hermiticity_tol:g}")
    psi = np.asarray(psi, dtype=complex)
    vdag = v.conj().T
    values = np.empty(len(series))
    for i, u in enumerate(series.unitaries):
        udag = u.conj().T
        right = udag @ (w @ (u @ (v @ psi)))     # W(t) V |psi>
        right = udag @ (w @ (u @ (vdag @ right)))  # W(t) V^dag W(t) V |psi>
        values[i] = float(np.real(np.vdot(psi, right)))
    return OtocResult(times=series.times.copy(), values=values, choice=choice,
                      initial_state=initial_state)
