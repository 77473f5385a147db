"""Scalar functionals of two-qubit states.

Entropies are evaluated from spectra in nats and converted to the requested
logarithm base on return. ``Q1`` selects the von Neumann limit and ``QINF``
the min-entropy limit; both are exact special cases, never large/near-one
numerical values of ``q``.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import InvalidInputError
from .linalg import hermitian_eigensystem, partial_trace, partial_transpose, spin_flip
from .states import BELL_STATES, as_spectrum

Q1 = 1.0
QINF = math.inf

CLIP_TOL = 1e-10
# eigenvalues this small are below the eigensolver's absolute accuracy
ZERO_TOL = 64 * np.finfo(float).eps
ENTANGLED_TOL = 1e-12
CLASSICAL_TOL = 1e-12
PPT_TOL = 1e-10

# Bell basis with phases making maximally entangled states real vectors
MAGIC_BASIS = np.column_stack([
    BELL_STATES["phi+"],
    1j * BELL_STATES["phi-"],
    1j * BELL_STATES["psi+"],
    BELL_STATES["psi-"],
])


def _check_q(q):
    if not q > 0:
        raise InvalidInputError(f"entropic index q must be positive, got {q}")


def _log_base(base):
    if not (base > 0 and base != 1):
        raise InvalidInputError(f"invalid logarithm base {base}")
    return math.log(base)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def clean_spectrum(p, tol=CLIP_TOL):
    """Clip round-off negatives in ``[-tol, 0)`` to zero and renormalise.

    Works along the last axis. Larger negative entries are rejected.
    Entries within ``ZERO_TOL`` of zero are set to exactly zero: for q < 1,
    ``p**q`` would otherwise turn 1e-16 noise into a 1e-8 entropy error.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < -tol):
        raise InvalidInputError(f"spectrum has an eigenvalue below -{tol:g}: {p.min():.3g}")
    p = np.where(p <= ZERO_TOL, 0.0, p)
    return p / p.sum(axis=-1, keepdims=True)


def omega(p, q):
    """``sum_i p_i^q`` with the convention ``0^q = 0``."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return np.sum(np.where(p > 0, p ** q, 0.0), axis=-1)


def von_neumann_entropy(p, base=2):
    p = clean_spectrum(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -np.sum(np.where(p > 0, p * np.log(p), 0.0), axis=-1)
    return _scalar(s / _log_base(base))


def renyi_entropy(p, q, base=2):
    """Renyi q-entropy ``ln(omega_q) / (1 - q)`` of a probability vector.

    ``q = Q1`` gives the von Neumann entropy, ``q = QINF`` gives
    ``-log(max p)``.
    """
    _check_q(q)
    p = clean_spectrum(p)
    if q == QINF:
        s = -np.log(np.max(p, axis=-1))
    elif q == Q1:
        return von_neumann_entropy(p, base)
    else:
        s = _log_omega(p, q) / (1.0 - q)
    return _scalar(s / _log_base(base))


def _log_omega(p, q):
    """``ln sum p^q`` for a normalised ``p``, without cancellation near q = 1
    or underflow at large q."""
    pos = p > 0
    lp = np.log(np.where(pos, p, 1.0))
    if abs(q - 1.0) < 0.5:
        # ln omega = log1p(sum p (p^(q-1) - 1))
        return np.log1p(np.sum(np.where(pos, p * np.expm1((q - 1.0) * lp), 0.0), axis=-1))
    lmax = np.max(np.where(pos, lp, -np.inf), axis=-1, keepdims=True)
    rest = np.sum(np.where(pos, np.exp(q * (lp - lmax)), 0.0), axis=-1)
    return q * lmax[..., 0] + np.log(rest)


def tsallis_entropy(p, q):
    """Tsallis q-entropy ``(1 - omega_q)/(q - 1)`` (nats at q = 1)."""
    _check_q(q)
    if q == QINF:
        raise InvalidInputError("Tsallis entropy has no q = inf member")
    p = clean_spectrum(p)
    if q == Q1:
        return von_neumann_entropy(p, base=math.e)
    return _scalar((1.0 - omega(p, q)) / (q - 1.0))


def tsallis_from_renyi(s_nats, q):
    """Monotone map taking a Renyi entropy (nats) to the Tsallis entropy."""
    return (np.expm1((1.0 - q) * np.asarray(s_nats))) / (1.0 - q)


def participation_ratio(rho):
    """``1 / Tr(rho^2)``, evaluated from the matrix entries."""
    return 1.0 / float(np.sum(np.abs(np.asarray(rho)) ** 2))


def linear_entropy(rho):
    return 1.0 - float(np.sum(np.abs(np.asarray(rho)) ** 2))


def spectrum(rho):
    """Cleaned descending spectrum of a state."""
    return clean_spectrum(hermitian_eigensystem(rho).eigenvalues)


def lambda_max(rho):
    return float(spectrum(rho)[0])


def _spectra(rho):
    return (
        spectrum(rho),
        spectrum(partial_trace(rho, "A")),
        spectrum(partial_trace(rho, "B")),
    )


def _given(label):
    if label not in ("A", "B"):
        raise InvalidInputError(f"conditioning subsystem must be 'A' or 'B', got {label!r}")
    return label


def conditional_renyi(rho, q, given="B", base=2):
    """``S_q(rho_AB) - S_q(rho_given)`` for the Renyi family.

    ``given="B"`` yields S(A|B); ``given="A"`` yields S(B|A).
    """
    _check_q(q)
    _given(given)
    s_ab, s_a, s_b = _spectra(rho)
    cond = s_b if given == "B" else s_a
    return renyi_entropy(s_ab, q, base) - renyi_entropy(cond, q, base)


def conditional_tsallis(rho, q, given="B"):
    """Conditional Tsallis entropy ``(S(AB) - S(B)) / (1 + (1 - q) S(B))``."""
    _check_q(q)
    _given(given)
    s_ab, s_a, s_b = _spectra(rho)
    cond = s_b if given == "B" else s_a
    return _conditional_tsallis_from_spectra(s_ab, cond, q)


def _conditional_tsallis_from_spectra(p_ab, p_cond, q):
    t_ab = tsallis_entropy(p_ab, q)
    t_c = tsallis_entropy(p_cond, q)
    if q == Q1:
        return t_ab - t_c
    return (t_ab - t_c) / (1.0 + (1.0 - q) * t_c)


def classical_inequalities_hold(rho, qset=(QINF,), tol=CLASSICAL_TOL):
    """True when S_q(A|B) >= 0 and S_q(B|A) >= 0 for every q in ``qset``.

    Uses the Renyi form, whose sign matches the Tsallis form.
    """
    s_ab, s_a, s_b = _spectra(rho)
    return _classical_from_spectra(s_ab, s_a, s_b, qset, tol)


def _classical_from_spectra(s_ab, s_a, s_b, qset, tol=CLASSICAL_TOL):
    ok = True
    for q in qset:
        _check_q(q)
        full = renyi_entropy(s_ab, q, math.e)
        ok = ok & (full - renyi_entropy(s_b, q, math.e) >= -tol) \
                & (full - renyi_entropy(s_a, q, math.e) >= -tol)
    return ok


# -- concurrence ------------------------------------------------------------

class ConcurrenceDetail(NamedTuple):
    """Descending square roots of the eigenvalues of rho * spin_flip(rho)."""

    lambdas: np.ndarray
    C: float


def _concurrence_from_eig(rho, eig):
    w, v = eig
    d = np.sqrt(np.clip(w, 0.0, None))
    # rho * rho~ is similar to the PSD matrix D V^H rho~ V D
    m = d[:, None] * (v.conj().T @ spin_flip(rho) @ v) * d[None, :]
    mu = hermitian_eigensystem(0.5 * (m + m.conj().T)).eigenvalues
    lam = np.sqrt(np.clip(mu, 0.0, None))
    return ConcurrenceDetail(lam, max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3])))


def concurrence(rho):
    """Wootters concurrence of a two-qubit state in the product basis."""
    return _concurrence_from_eig(rho, hermitian_eigensystem(rho))


def concurrence_ih(p):
    """Closed-form concurrence ``p1 - p3 - 2 sqrt(p2 p4)`` of an IH state."""
    p1, p2, p3, p4 = as_spectrum(p)
    return max(0.0, float(p1 - p3 - 2.0 * math.sqrt(max(p2 * p4, 0.0))))


def concurrence_ih_batch(p):
    p = np.asarray(p, dtype=float)
    return np.maximum(0.0, p[:, 0] - p[:, 2] - 2.0 * np.sqrt(np.clip(p[:, 1] * p[:, 3], 0.0, None)))


def binary_entropy(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(x > 0, x * np.log2(x), 0.0) - np.where(x < 1, (1 - x) * np.log2(1 - x), 0.0)
    # h(1) evaluates to -0.0; report a plain zero
    return _scalar(h + 0.0)


def entanglement_of_formation(C):
    """Entanglement of formation in bits, ``h((1 + sqrt(1 - C^2)) / 2)``."""
    C = np.asarray(C, dtype=float)
    if np.any(C < -1e-12) or np.any(C > 1 + 1e-12):
        raise InvalidInputError("concurrence must lie in [0, 1]")
    C = np.clip(C, 0.0, 1.0)
    return binary_entropy(0.5 * (1.0 + np.sqrt(1.0 - C * C)))


def fully_entangled_fraction(rho):
    """Largest overlap of ``rho`` with a maximally entangled pure state.

    Maximally entangled states are real unit vectors (up to phase) in the
    magic basis, so the maximum is the top eigenvalue of ``Re(M^H rho M)``.
    """
    rm = MAGIC_BASIS.conj().T @ np.asarray(rho, dtype=np.complex128) @ MAGIC_BASIS
    top = hermitian_eigensystem(rm.real.astype(np.complex128)).eigenvalues[0]
    return float(np.clip(top, 0.0, 1.0))


def ppt_min_eigenvalue(rho):
    return float(hermitian_eigensystem(partial_transpose(rho, "B")).eigenvalues[-1])


def is_ppt(rho, tol=PPT_TOL):
    """Peres-Horodecki test; for two qubits equivalent to separability."""
    return ppt_min_eigenvalue(rho) >= -tol


def ih_concurrence_floor(R):
    """Lower bound ``[sqrt(3R(4 - R)) - R] / (2R)`` on IH concurrence at fixed R."""
    R = np.asarray(R, dtype=float)
    if np.any(R < 1.0) or np.any(R > 3.0):
        raise InvalidInputError("participation ratio must lie in [1, 3]")
    return _scalar((np.sqrt(3.0 * R * (4.0 - R)) - R) / (2.0 * R))


# -- records ----------------------------------------------------------------

RECORD_COLUMNS = ("C", "E", "R", "lambda_max", "SL", "Sinf_AB", "Sinf_BA",
                  "F_EF", "entangled", "classical_ineq")


@dataclass
class MeasureRecord:
    """Every scalar measure of one state.

    ``Sinf_AB``/``Sinf_BA`` are the q = inf conditional Renyi entropies
    S(A|B) and S(B|A) in ``base``; ``tsallis`` maps each finite q of the
    requested set to its conditional Tsallis pair (A|B, B|A).
    """

    C: float
    E: float
    R: float
    lambda_max: float
    SL: float
    Sinf_AB: float
    Sinf_BA: float
    F_EF: float
    entangled: bool
    classical_ineq: bool
    tsallis: dict = field(default_factory=dict)
    base: float = 2.0

    def as_dict(self):
        out = {name: getattr(self, name) for name in RECORD_COLUMNS}
        out["tsallis"] = {_qkey(q): list(v) for q, v in self.tsallis.items()}
        out["base"] = self.base
        return out


def _qkey(q):
    return "inf" if q == QINF else repr(float(q))


def measure_record(rho, qset=(QINF,), base=2):
    """Compute a :class:`MeasureRecord` from one eigendecomposition of rho."""
    rho = np.asarray(rho, dtype=np.complex128)
    eig = hermitian_eigensystem(rho)
    s_ab = clean_spectrum(eig.eigenvalues)
    s_a = spectrum(partial_trace(rho, "A"))
    s_b = spectrum(partial_trace(rho, "B"))
    conc = _concurrence_from_eig(rho, eig).C
    lnb = _log_base(base)
    tsallis = {
        q: (_conditional_tsallis_from_spectra(s_ab, s_b, q),
            _conditional_tsallis_from_spectra(s_ab, s_a, q))
        for q in qset if q != QINF
    }
    purity = float(np.sum(np.abs(rho) ** 2))
    return MeasureRecord(
        C=conc,
        E=float(entanglement_of_formation(conc)),
        R=1.0 / purity,
        lambda_max=float(s_ab[0]),
        SL=1.0 - purity,
        Sinf_AB=math.log(s_b[0] / s_ab[0]) / lnb,
        Sinf_BA=math.log(s_a[0] / s_ab[0]) / lnb,
        F_EF=fully_entangled_fraction(rho),
        entangled=conc > ENTANGLED_TOL,
        classical_ineq=bool(_classical_from_spectra(s_ab, s_a, s_b, qset)),
        tsallis=tsallis,
        base=base,
    )


def batch_measures(rhos, qset=(QINF,), base=2, fef=True):
    """Column-wise measures for a stack of states, keyed by RECORD_COLUMNS.

    Runs the compiled (or numpy) spectral core once per state. Extra keys:
    ``spec``, ``spec_a``, ``spec_b`` (cleaned spectra).
    """
    rhos = np.asarray(rhos, dtype=np.complex128)
    spec, spec_a, spec_b, _, conc = _backend.kernels.state_core_batch(rhos)
    spec, spec_a, spec_b = clean_spectrum(spec), clean_spectrum(spec_a), clean_spectrum(spec_b)
    purity = np.sum(np.abs(rhos) ** 2, axis=(1, 2))
    lnb = _log_base(base)
    cols = {
        "C": conc,
        "E": entanglement_of_formation(conc),
        "R": 1.0 / purity,
        "lambda_max": spec[:, 0],
        "SL": 1.0 - purity,
        "Sinf_AB": np.log(spec_b[:, 0] / spec[:, 0]) / lnb,
        "Sinf_BA": np.log(spec_a[:, 0] / spec[:, 0]) / lnb,
        "F_EF": batch_fully_entangled_fraction(rhos) if fef else np.full(len(rhos), np.nan),
        "entangled": conc > ENTANGLED_TOL,
        "classical_ineq": np.asarray(_classical_from_spectra(spec, spec_a, spec_b, qset)),
        "spec": spec,
        "spec_a": spec_a,
        "spec_b": spec_b,
    }
    return cols


def batch_fully_entangled_fraction(rhos):
    m = MAGIC_BASIS
    rm = (m.conj().T @ np.asarray(rhos, dtype=np.complex128) @ m).real
    top = _backend.kernels.eigvalsh_batch(rm.astype(np.complex128))[:, 0]
    return np.clip(top, 0.0, 1.0)


def batch_ppt_min_eigenvalue(rhos):
    r = np.asarray(rhos, dtype=np.complex128).reshape(-1, 2, 2, 2, 2)
    pt = r.transpose(0, 1, 4, 3, 2).reshape(-1, 4, 4)
    return _backend.kernels.eigvalsh_batch(pt)[:, -1]
