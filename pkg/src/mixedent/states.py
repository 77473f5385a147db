"""Named two-qubit state families and density-matrix validation."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidStateError
from .linalg import hermiticity_gap, hermitian_eigensystem

SPECTRUM_TOL = 1e-12
REGIME_X = 2.0 / 3.0
REGIME_R = 1.8

_S = 1.0 / np.sqrt(2.0)
BELL_STATES = {
    "phi+": np.array([_S, 0, 0, _S], dtype=np.complex128),
    "phi-": np.array([_S, 0, 0, -_S], dtype=np.complex128),
    "psi+": np.array([0, _S, _S, 0], dtype=np.complex128),
    "psi-": np.array([0, _S, -_S, 0], dtype=np.complex128),
}
BELL_ORDER = ("phi+", "phi-", "psi+", "psi-")


def projector(psi):
    """Density matrix of the (normalised) pure state ``psi``."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bell_projector(name="phi+"):
    return projector(BELL_STATES[name])


def product_state(rho_a, rho_b):
    return np.kron(np.asarray(rho_a, dtype=np.complex128), np.asarray(rho_b, dtype=np.complex128))


def maximally_mixed():
    return np.eye(4, dtype=np.complex128) / 4.0


# -- MEMS -------------------------------------------------------------------

def mems_g(x):
    """Diagonal weight of the MEMS family: 1/3 up to x = 2/3, x/2 above."""
    return 1.0 / 3.0 if x <= REGIME_X else x / 2.0


def mems(x):
    """Maximally entangled mixed state with concurrence ``x``.

    Parameters
    ----------
    x : float
        Off-diagonal amplitude in ``[0, 1]``; equals the concurrence.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise InvalidInputError(f"MEMS parameter x must lie in [0, 1], got {x}")
    g = mems_g(x)
    rho = np.diag([g, 1.0 - 2.0 * g, 0.0, g]).astype(np.complex128)
    rho[0, 3] = rho[3, 0] = x / 2.0
    return rho


def mems_purity(x):
    """Closed-form Tr(rho^2) of ``mems(x)`` from its block spectrum."""
    if x >= REGIME_X:
        return x * x + (1.0 - x) ** 2
    return 1.0 / 3.0 + x * x / 2.0


def mems_x_from_R(R):
    """Invert the participation ratio of the MEMS family."""
    R = float(R)
    if not 1.0 <= R <= 3.0:
        raise InvalidInputError(f"participation ratio must lie in [1, 3], got {R}")
    if R <= REGIME_R:
        # root in [2/3, 1] of x^2 + (1 - x)^2 = 1/R
        return 0.5 * (1.0 + np.sqrt(max(2.0 / R - 1.0, 0.0)))
    return float(np.sqrt(max(2.0 * (1.0 / R - 1.0 / 3.0), 0.0)))


def mems_from_R(R):
    return mems(mems_x_from_R(R))


# -- Ishizaka-Hiroshima -----------------------------------------------------

def as_spectrum(p, sort=False, tol=SPECTRUM_TOL):
    """Check (or sort) a probability 4-vector into descending order.

    With ``sort=False`` an unsorted vector is rejected, which keeps the
    p1 >= p2 >= p3 >= p4 labelling explicit for callers.
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.shape != (4,):
        raise InvalidInputError(f"spectrum must have 4 entries, got {p.shape[0]}")
    if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
        raise InvalidInputError(f"spectrum {p} is not a probability vector")
    if sort:
        p = np.sort(p)[::-1]
    elif np.any(np.diff(p) > tol):
        raise InvalidInputError(f"spectrum {p} is not sorted in descending order")
    return p


def ih_state(p):
    """Ishizaka-Hiroshima state with eigenvalues ``p`` (sorted, descending)."""
    p1, p2, p3, p4 = as_spectrum(p)
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = p2
    rho[3, 3] = p4
    rho[1, 1] = rho[2, 2] = 0.5 * (p3 + p1)
    rho[1, 2] = rho[2, 1] = 0.5 * (p3 - p1)
    return rho


def ih_states(p):
    """Vectorised :func:`ih_state` for an (N, 4) array of sorted spectra."""
    p = np.asarray(p, dtype=float)
    rho = np.zeros((p.shape[0], 4, 4), dtype=np.complex128)
    rho[:, 0, 0] = p[:, 1]
    rho[:, 3, 3] = p[:, 3]
    rho[:, 1, 1] = rho[:, 2, 2] = 0.5 * (p[:, 2] + p[:, 0])
    rho[:, 1, 2] = rho[:, 2, 1] = 0.5 * (p[:, 2] - p[:, 0])
    return rho


def bell_diagonal(w):
    """Mixture of the Bell projectors phi+, phi-, psi+, psi- with weights ``w``."""
    w = np.asarray(w, dtype=float).ravel()
    if w.shape != (4,) or np.any(w < -SPECTRUM_TOL) or abs(w.sum() - 1.0) > SPECTRUM_TOL:
        raise InvalidInputError(f"Bell weights must be 4 nonnegative numbers summing to 1, got {w}")
    return sum(wk * bell_projector(name) for wk, name in zip(w, BELL_ORDER))


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    invariant: str
    magnitude: float

    def __str__(self):
        return f"{self.invariant} violated by {self.magnitude:.6g}"


def check_density(raw, tol=1e-9):
    """List every density-matrix invariant that ``raw`` breaks.

    The checked invariants are ``shape``, ``hermiticity`` (largest
    ``|M - M^H|`` entry), ``trace`` (``|Tr M - 1|``) and ``positivity`` (most
    negative eigenvalue). An empty list means the matrix is a valid state.
    """
    m = np.asarray(raw, dtype=np.complex128)
    if m.shape != (4, 4):
        return [Violation("shape", float("nan"))]
    out = []
    herm = hermiticity_gap(m)
    if not herm <= tol:
        out.append(Violation("hermiticity", herm))
    trace_gap = abs(np.trace(m) - 1.0)
    if not trace_gap <= tol:
        out.append(Violation("trace", float(trace_gap)))
    if not np.all(np.isfinite(m)):
        out.append(Violation("finite", float("nan")))
        return out
    hs = 0.5 * (m + m.conj().T)
    lowest = hermitian_eigensystem(hs).eigenvalues[-1]
    if lowest < -tol:
        out.append(Violation("positivity", float(-lowest)))
    return out


def validate_density(raw, tol=1e-9):
    """Return ``raw`` as a complex 4x4 state or raise :class:`InvalidStateError`."""
    violations = check_density(raw, tol)
    if violations:
        raise InvalidStateError(violations)
    return np.asarray(raw, dtype=np.complex128)
