"""Pure numpy implementation of the numerical kernels.

Mirrors the compiled ``_kernels`` extension function for function. Every
routine works on stacks of matrices so a whole Monte Carlo chunk is
processed with a fixed number of array operations.
"""
import numpy as np

from .errors import NumericError

MAX_SWEEPS = 100
OFF_TOL = 1e-14
TINY = 1e-300

# sign pattern of sigma_y (x) sigma_y read along its anti-diagonal
_FLIP_SIGNS = np.array([-1.0, 1.0, 1.0, -1.0])
_FLIP_PERM = np.array([3, 2, 1, 0])


def _off_norm(h):
    n = h.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(h[:, mask]) ** 2, axis=1))


def _rotate(h, v, p, q):
    apq = h[:, p, q]
    r = np.abs(apq)
    nz = r >= TINY
    rs = np.where(nz, r, 1.0)
    u = np.where(nz, apq / rs, 1.0)
    app = h[:, p, p].real.copy()
    aqq = h[:, q, q].real.copy()
    theta = (aqq - app) / (2.0 * rs)
    t = 1.0 / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(theta < 0.0, -t, t)
    t = np.where(nz, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    cc = c[:, None]
    su = (s * u)[:, None]
    scu = (s * np.conj(u))[:, None]

    colp = h[:, :, p].copy()
    colq = h[:, :, q]
    h[:, :, p] = cc * colp - scu * colq
    h[:, :, q] = su * colp + cc * colq
    rowp = h[:, p, :].copy()
    rowq = h[:, q, :]
    h[:, p, :] = cc * rowp - su * rowq
    h[:, q, :] = scu * rowp + cc * rowq
    h[:, p, q] = 0.0
    h[:, q, p] = 0.0
    h[:, p, p] = app - t * r
    h[:, q, q] = aqq + t * r

    if v is not None:
        colp = v[:, :, p].copy()
        colq = v[:, :, q]
        v[:, :, p] = cc * colp - scu * colq
        v[:, :, q] = su * colp + cc * colq


def _jacobi(h, want_vectors):
    """Cyclic complex Jacobi on a stack ``h`` of shape (N, n, n)."""
    h = np.array(h, dtype=np.complex128, copy=True)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    nmat, n, _ = h.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), h.shape).copy() if want_vectors else None
    tol = OFF_TOL * np.maximum(1.0, np.sqrt(np.sum(np.abs(h) ** 2, axis=(1, 2))))
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    active = np.arange(nmat)
    for _ in range(MAX_SWEEPS + 1):
        sub = h[active]
        off = _off_norm(sub)
        still = off > tol[active]
        active = active[still]
        if active.size == 0:
            break
        sub = h[active]
        vsub = v[active] if want_vectors else None
        for p, q in pairs:
            _rotate(sub, vsub, p, q)
        h[active] = sub
        if want_vectors:
            v[active] = vsub
    else:
        raise NumericError(
            f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )

    w = np.real(np.diagonal(h, axis1=1, axis2=2)).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if want_vectors:
        v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def eigh(h):
    """Eigenvalues (descending) and eigenvectors of one Hermitian matrix."""
    w, v = _jacobi(np.asarray(h)[None], True)
    return w[0], v[0]


def eigvalsh_batch(h):
    """Descending eigenvalues for a stack of Hermitian matrices."""
    w, _ = _jacobi(h, False)
    return w


def _qubit_eigvals(m):
    a = m[:, 0, 0].real
    d = m[:, 1, 1].real
    half = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), np.abs(m[:, 0, 1]))
    return np.stack([half + rad, half - rad], axis=1)


def state_core_batch(rho):
    """Spectral core of a stack of two-qubit states.

    Returns ``(spec, spec_a, spec_b, lambdas, conc)``: descending spectra of
    rho, rho_A, rho_B; the descending square roots of the eigenvalues of
    rho * spin_flip(rho); and the concurrence.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    w, v = _jacobi(rho, True)

    r4 = rho.reshape(-1, 2, 2, 2, 2)
    spec_a = _qubit_eigvals(np.einsum("nikjk->nij", r4))
    spec_b = _qubit_eigvals(np.einsum("nkikj->nij", r4))

    flipped = np.conj(rho[:, _FLIP_PERM][:, :, _FLIP_PERM]) * np.outer(_FLIP_SIGNS, _FLIP_SIGNS)
    # rho * flipped is similar to D (V^H flipped V) D with D = sqrt(diag(w))
    t = np.conj(np.swapaxes(v, 1, 2)) @ flipped @ v
    d = np.sqrt(np.clip(w, 0.0, None))
    m = d[:, :, None] * t * d[:, None, :]
    mu = eigvalsh_batch(m)
    lam = np.sqrt(np.clip(mu, 0.0, None))
    conc = np.maximum(0.0, lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3])
    return w, spec_a, spec_b, lam, conc
