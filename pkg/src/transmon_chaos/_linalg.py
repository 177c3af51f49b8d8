"""Small dense-matrix helpers used throughout the package."""

import numpy as np

from .errors import EigenFailure


def hermiticity_defect(a):
    """Max-abs deviation of ``a`` from its own conjugate transpose."""
    return float(np.abs(a - a.conj().T).max())


def unitarity_defect(u):
    """``max |U^dag U - I|``; zero for an exactly unitary matrix."""
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())


def is_hermitian(a, tol=1e-10):
    scale = max(1.0, float(np.abs(a).max()))
    return hermiticity_defect(a) <= tol * scale


def eigh_or_raise(h):
    """Hermitian eigendecomposition, wrapping LAPACK failure."""
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc


def closest_unitary(m):
    """Polar-decomposition projection of ``m`` onto the unitary group."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh
