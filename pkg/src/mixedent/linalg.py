"""Dense linear algebra for one- and two-qubit operators.

Basis convention used throughout the package: |00>, |01>, |10>, |11>,
row-major, with the first ket label belonging to subsystem A.
"""
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import InvalidInputError

HERMITIAN_TOL = 1e-9

PAULI_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_YY = np.kron(PAULI_Y, PAULI_Y).real.astype(np.complex128)


class EigenSystem(NamedTuple):
    """Descending eigenvalues and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _square(m, dims=(2, 4), name="matrix"):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise InvalidInputError(f"{name} must be square with size in {dims}, got shape {m.shape}")
    return m


def hermiticity_gap(m):
    """Largest entry of ``|M - M^H|``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigensystem(h, tol=HERMITIAN_TOL):
    """Diagonalise a 2x2 or 4x4 Hermitian matrix with cyclic Jacobi rotations.

    Parameters
    ----------
    h : array_like
        Hermitian matrix. It is symmetrised as ``(H + H^H)/2`` before
        iterating.
    tol : float
        Largest tolerated ``|H - H^H|`` entry.

    Returns
    -------
    EigenSystem
        Eigenvalues sorted in descending order; eigenvector ``k`` is column
        ``k``. Inside a degenerate cluster the basis is arbitrary.

    Raises
    ------
    InvalidInputError
        ``h`` is not square of size 2 or 4, or not Hermitian within ``tol``.
    NumericError
        The sweep cap was reached.
    """
    h = _square(h)
    gap = hermiticity_gap(h)
    if not gap <= tol:
        raise InvalidInputError(f"matrix is not Hermitian (gap {gap:.3g} > {tol:.3g})")
    w, v = _backend.kernels.eigh(h)
    return EigenSystem(w, v)


def eigvalsh(h, tol=HERMITIAN_TOL):
    return hermitian_eigensystem(h, tol).eigenvalues


def kron(a, b):
    """Kronecker product of two single-qubit operators."""
    a = _square(a, dims=(2,), name="a")
    b = _square(b, dims=(2,), name="b")
    return np.kron(a, b)


def _check_subsystem(label):
    if label not in ("A", "B"):
        raise InvalidInputError(f"subsystem label must be 'A' or 'B', got {label!r}")


def partial_trace(rho, keep="A"):
    """Reduced state of subsystem ``keep`` of a two-qubit operator.

    >>> partial_trace(np.eye(4) / 4, keep="B")
    array([[0.5+0.j, 0. +0.j],
           [0. +0.j, 0.5+0.j]])
    """
    _check_subsystem(keep)
    r4 = _square(rho, dims=(4,), name="rho").reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ikjk->ij", r4)
    return np.einsum("kikj->ij", r4)


def partial_transpose(rho, side="B"):
    """Transpose the indices of one subsystem.

    Exact index permutation, so applying it twice returns the input.
    """
    _check_subsystem(side)
    r4 = _square(rho, dims=(4,), name="rho").reshape(2, 2, 2, 2)
    # r4[a, b, c, d] = <ab|rho|cd>
    axes = (2, 1, 0, 3) if side == "A" else (0, 3, 2, 1)
    return r4.transpose(axes).reshape(4, 4)


def spin_flip(rho):
    """Wootters spin-flipped state ``(Y x Y) rho^* (Y x Y)``.

    Only meaningful with ``rho`` written in the product basis.
    """
    rho = _square(rho, dims=(4,), name="rho")
    return SIGMA_YY @ rho.conj() @ SIGMA_YY
