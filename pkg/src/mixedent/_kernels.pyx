# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: cyclic complex Jacobi and the per-state spectral core.

Same contract as ``mixedent._pykernels``; one matrix at a time in C.
"""
import numpy as np

from libc.math cimport sqrt, fabs, hypot

from .errors import NumericError

cdef enum:
    MAXN = 8
    MAX_SWEEPS = 100

cdef double OFF_TOL = 1e-14
# below this an off-diagonal entry is dropped instead of rotated
cdef double TINY = 1e-300

cdef double _FS[4]
_FS[:] = [-1.0, 1.0, 1.0, -1.0]


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double complex _conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


cdef int _jacobi(double complex* a, double complex* v, double* w, int n, bint want_v) noexcept nogil:
    """Diagonalise the n x n Hermitian matrix ``a`` (row-major, overwritten).

    Returns 0 on success, -1 if the sweep cap was hit.
    """
    cdef int i, j, k, p, q, sweep
    cdef double fro = 0.0, off, tol, r, app, aqq, theta, t, c, s
    cdef double complex h, u, su, scu, x, y

    for i in range(n):
        a[i * n + i] = a[i * n + i].real
        fro += _abs2(a[i * n + i])
        for j in range(i + 1, n):
            h = 0.5 * (a[i * n + j] + _conj(a[j * n + i]))
            a[i * n + j] = h
            a[j * n + i] = _conj(h)
            fro += 2.0 * _abs2(h)
    tol = OFF_TOL * (sqrt(fro) if fro > 1.0 else 1.0)

    if want_v:
        for i in range(n * n):
            v[i] = 0.0
        for i in range(n):
            v[i * n + i] = 1.0

    sweep = 0
    while True:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += _abs2(a[i * n + j])
        if sqrt(off) <= tol:
            break
        if sweep == MAX_SWEEPS:
            return -1
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                h = a[p * n + q]
                r = hypot(h.real, h.imag)
                if r < TINY:
                    continue
                u = h / r
                app = a[p * n + p].real
                aqq = a[q * n + q].real
                theta = (aqq - app) / (2.0 * r)
                t = 1.0 / (fabs(theta) + hypot(theta, 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                su = s * u
                scu = s * _conj(u)
                for k in range(n):
                    x = a[k * n + p]
                    y = a[k * n + q]
                    a[k * n + p] = c * x - scu * y
                    a[k * n + q] = su * x + c * y
                for k in range(n):
                    x = a[p * n + k]
                    y = a[q * n + k]
                    a[p * n + k] = c * x - su * y
                    a[q * n + k] = scu * x + c * y
                a[p * n + q] = 0.0
                a[q * n + p] = 0.0
                a[p * n + p] = app - t * r
                a[q * n + q] = aqq + t * r
                if want_v:
                    for k in range(n):
                        x = v[k * n + p]
                        y = v[k * n + q]
                        v[k * n + p] = c * x - scu * y
                        v[k * n + q] = su * x + c * y

    for i in range(n):
        w[i] = a[i * n + i].real
    _sort_desc(w, v, n, want_v)
    return 0


cdef void _sort_desc(double* w, double complex* v, int n, bint want_v) noexcept nogil:
    # insertion sort; stable, so ties keep their sweep order
    cdef int i, j, k
    cdef double key
    cdef double complex col[MAXN]
    for i in range(1, n):
        key = w[i]
        if want_v:
            for k in range(n):
                col[k] = v[k * n + i]
        j = i - 1
        while j >= 0 and w[j] < key:
            w[j + 1] = w[j]
            if want_v:
                for k in range(n):
                    v[k * n + j + 1] = v[k * n + j]
            j -= 1
        w[j + 1] = key
        if want_v:
            for k in range(n):
                v[k * n + j + 1] = col[k]


cdef inline void _qubit_eigvals(double complex m00, double complex m01,
                                double complex m11, double* out) noexcept nogil:
    cdef double half = 0.5 * (m00.real + m11.real)
    cdef double rad = hypot(0.5 * (m00.real - m11.real), hypot(m01.real, m01.imag))
    out[0] = half + rad
    out[1] = half - rad


def eigh(h):
    """Eigenvalues (descending) and eigenvectors of one Hermitian matrix."""
    cdef double complex[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef int n = hv.shape[0], i, j, rc
    if n > MAXN or hv.shape[1] != n:
        raise ValueError(f"expected a square matrix of size <= {MAXN}")
    cdef double complex a[MAXN * MAXN]
    cdef double complex vbuf[MAXN * MAXN]
    cdef double wbuf[MAXN]
    for i in range(n):
        for j in range(n):
            a[i * n + j] = hv[i, j]
    with nogil:
        rc = _jacobi(a, vbuf, wbuf, n, True)
    if rc != 0:
        raise NumericError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    w = np.empty(n)
    vec = np.empty((n, n), dtype=np.complex128)
    cdef double[::1] wv = w
    cdef double complex[:, ::1] vv = vec
    for i in range(n):
        wv[i] = wbuf[i]
        for j in range(n):
            vv[i, j] = vbuf[i * n + j]
    return w, vec


def eigvalsh_batch(h):
    """Descending eigenvalues for a stack of Hermitian matrices."""
    cdef double complex[:, :, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef Py_ssize_t nmat = hv.shape[0], m
    cdef int n = hv.shape[1], i, j, rc = 0
    if n > MAXN or hv.shape[2] != n:
        raise ValueError(f"expected square matrices of size <= {MAXN}")
    out = np.empty((nmat, n))
    cdef double[:, ::1] ov = out
    cdef double complex a[MAXN * MAXN]
    cdef double wbuf[MAXN]
    with nogil:
        for m in range(nmat):
            for i in range(n):
                for j in range(n):
                    a[i * n + j] = hv[m, i, j]
            rc = _jacobi(a, NULL, wbuf, n, False)
            if rc != 0:
                break
            for i in range(n):
                ov[m, i] = wbuf[i]
    if rc != 0:
        raise NumericError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    return out


def state_core_batch(rho):
    """Spectral core of a stack of two-qubit states.

    Returns ``(spec, spec_a, spec_b, lambdas, conc)``: descending spectra of
    rho, rho_A, rho_B; the descending square roots of the eigenvalues of
    rho * spin_flip(rho); and the concurrence.
    """
    cdef double complex[:, :, ::1] rv = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t nmat = rv.shape[0], m
    if rv.shape[1] != 4 or rv.shape[2] != 4:
        raise ValueError("expected a stack of 4x4 matrices")
    spec = np.empty((nmat, 4))
    spec_a = np.empty((nmat, 2))
    spec_b = np.empty((nmat, 2))
    lam = np.empty((nmat, 4))
    conc = np.empty(nmat)
    cdef double[:, ::1] sv = spec, sav = spec_a, sbv = spec_b, lv = lam
    cdef double[::1] cv = conc
    cdef double complex a[16]
    cdef double complex sym[16]
    cdef double complex flip[16]
    cdef double complex vec[16]
    cdef double complex tmp[16]
    cdef double complex mm[16]
    cdef double w[4]
    cdef double d[4]
    cdef double mu[4]
    cdef double pair[2]
    cdef double c
    cdef double complex acc, h
    cdef int i, j, k, rc = 0

    with nogil:
        for m in range(nmat):
            for i in range(4):
                sym[i * 4 + i] = rv[m, i, i].real
                for j in range(i + 1, 4):
                    h = 0.5 * (rv[m, i, j] + _conj(rv[m, j, i]))
                    sym[i * 4 + j] = h
                    sym[j * 4 + i] = _conj(h)
            for i in range(16):
                a[i] = sym[i]
            rc = _jacobi(a, vec, w, 4, True)
            if rc != 0:
                break
            for i in range(4):
                sv[m, i] = w[i]
                d[i] = sqrt(w[i]) if w[i] > 0.0 else 0.0

            # reduced states: A keeps the first ket label
            _qubit_eigvals(sym[0] + sym[5], sym[2] + sym[7], sym[10] + sym[15], pair)
            sav[m, 0] = pair[0]
            sav[m, 1] = pair[1]
            _qubit_eigvals(sym[0] + sym[10], sym[1] + sym[11], sym[5] + sym[15], pair)
            sbv[m, 0] = pair[0]
            sbv[m, 1] = pair[1]

            for i in range(4):
                for j in range(4):
                    flip[i * 4 + j] = _FS[i] * _FS[j] * _conj(sym[(3 - i) * 4 + (3 - j)])
            # tmp = flip @ V
            for i in range(4):
                for j in range(4):
                    acc = 0.0
                    for k in range(4):
                        acc = acc + flip[i * 4 + k] * vec[k * 4 + j]
                    tmp[i * 4 + j] = acc
            # mm = D V^H tmp D
            for i in range(4):
                for j in range(4):
                    acc = 0.0
                    for k in range(4):
                        acc = acc + _conj(vec[k * 4 + i]) * tmp[k * 4 + j]
                    mm[i * 4 + j] = d[i] * acc * d[j]
            rc = _jacobi(mm, NULL, mu, 4, False)
            if rc != 0:
                break
            for i in range(4):
                lv[m, i] = sqrt(mu[i]) if mu[i] > 0.0 else 0.0
            c = lv[m, 0] - lv[m, 1] - lv[m, 2] - lv[m, 3]
            cv[m] = c if c > 0.0 else 0.0
    if rc != 0:
        raise NumericError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    return spec, spec_a, spec_b, lam, conc
