"""Hot numeric kernels for the banded eigensolver path.

Everything here is plain scalar-loop code so numba can jit it; the
``NHQFI_NO_NUMBA`` env flag switches to the identical pure-python path
(see :mod:`nhqfi._accel`).
"""

import numpy as np

from ._accel import njit


@njit(cache=True)
def cs_tridiag_eigvals(d_in, e_in, max_iter=80):
    """Eigenvalues of a complex symmetric tridiagonal matrix.

    Implicit-shift QL iteration with complex rotations (c^2 + s^2 = 1),
    which preserves the complex symmetric tridiagonal form.  ``d_in`` is
    the diagonal (length n), ``e_in`` the off-diagonal (length n-1).

    Returns ``(eigvals, nfail)``; ``nfail`` counts eigenvalues whose
    iteration did not converge (callers must treat nfail > 0 as failure).
    """
    n = d_in.size
    d = d_in.copy()
    ee = np.zeros(n, dtype=np.complex128)
    for i in range(n - 1):
        ee[i] = e_in[i]
    nfail = 0
    for l in range(n):
        for it in range(max_iter + 1):
            if it == max_iter:
                nfail += 1
                break
            m = l
            while m < n - 1:
                tst = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= 2.3e-16 * tst:
                    break
                m += 1
            if m == l:
                break
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = np.sqrt(g * g + 1.0)
            if abs(g + r) >= abs(g - r):
                gpr = g + r
            else:
                gpr = g - r
            g = d[m] - d[l] + ee[l] / gpr
            s = 1.0 + 0j
            c = 1.0 + 0j
            p = 0.0 + 0j
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = np.sqrt(f * f + g * g)
                ee[i + 1] = r
                if r == 0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if not broke:
                d[l] -= p
                ee[l] = g
                ee[m] = 0.0
    return d, nfail


@njit(cache=True)
def rs_tridiag_eigvals(d_in, e_in, max_iter=80):
    """Real-symmetric specialization of the QL iteration (float64 twin)."""
    n = d_in.size
    d = d_in.copy()
    ee = np.zeros(n, dtype=np.float64)
    for i in range(n - 1):
        ee[i] = e_in[i]
    nfail = 0
    for l in range(n):
        for it in range(max_iter + 1):
            if it == max_iter:
                nfail += 1
                break
            m = l
            while m < n - 1:
                tst = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= 2.3e-16 * tst:
                    break
                m += 1
            if m == l:
                break
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = np.sqrt(g * g + 1.0)
            if abs(g + r) >= abs(g - r):
                gpr = g + r
            else:
                gpr = g - r
            g = d[m] - d[l] + ee[l] / gpr
            s = 1.0
            c = 1.0
            p = 0.0
            broke = False
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = np.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    broke = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if not broke:
                d[l] -= p
                ee[l] = g
                ee[m] = 0.0
    return d, nfail


@njit(cache=True)
def tridiag_solve_shifted(d, u, lo, lam, b):
    """Solve ``(T - lam I) x = b`` for tridiagonal T, with partial pivoting.

    T has diagonal ``d``, superdiagonal ``u`` and subdiagonal ``lo``.
    Row swaps introduce a second superdiagonal, carried in ``c2``.
    """
    n = d.size
    c0 = np.empty(n, dtype=np.complex128)
    c1 = np.zeros(n, dtype=np.complex128)
    c2 = np.zeros(n, dtype=np.complex128)
    low = np.zeros(n, dtype=np.complex128)
    x = np.empty(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        c0[i] = d[i] - lam
        x[i] = b[i]
        if abs(c0[i]) > scale:
            scale = abs(c0[i])
    for i in range(n - 1):
        c1[i] = u[i]
        low[i] = lo[i]
        if abs(u[i]) > scale:
            scale = abs(u[i])
        if abs(lo[i]) > scale:
            scale = abs(lo[i])
    # relative pivot floor: keeps exact-singular solves finite (inverse
    # iteration only needs the direction, which the floor preserves)
    tiny = 2.3e-16 * scale if scale > 0.0 else 1e-300
    for i in range(n - 1):
        if abs(low[i]) > abs(c0[i]):
            c0[i], low[i] = low[i], c0[i]
            c1[i], c0[i + 1] = c0[i + 1], c1[i]
            c2[i], c1[i + 1] = c1[i + 1], c2[i]
            x[i], x[i + 1] = x[i + 1], x[i]
        if abs(c0[i]) < tiny:
            c0[i] = tiny
        mfac = low[i] / c0[i]
        c0[i + 1] -= mfac * c1[i]
        c1[i + 1] -= mfac * c2[i]
        x[i + 1] -= mfac * x[i]
    if abs(c0[n - 1]) < tiny:
        c0[n - 1] = tiny
    x[n - 1] = x[n - 1] / c0[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - c1[n - 2] * x[n - 1]) / c0[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - c1[i] * x[i + 1] - c2[i] * x[i + 2]) / c0[i]
    return x


@njit(cache=True)
def _unit_normalize(x, fallback):
    """Overflow-safe in-place normalization; resets to fallback if degenerate."""
    m = 0.0
    ok = True
    for i in range(x.size):
        a = abs(x[i])
        if a != a or a == np.inf:
            ok = False
            break
        if a > m:
            m = a
    if not ok or m == 0.0:
        for i in range(x.size):
            x[i] = fallback[i]
        m = 0.0
        for i in range(x.size):
            a = abs(x[i])
            if a > m:
                m = a
    nrm = 0.0
    for i in range(x.size):
        x[i] /= m
        nrm += abs(x[i]) ** 2
    nrm = np.sqrt(nrm)
    for i in range(x.size):
        x[i] /= nrm
    return x


@njit(cache=True)
def inverse_iteration(d, u, lo, lam, x0, iters):
    """Eigenvector of tridiagonal T for (approximate) eigenvalue ``lam``."""
    x = _unit_normalize(x0.copy(), x0)
    for _ in range(iters):
        x = tridiag_solve_shifted(d, u, lo, lam, x)
        x = _unit_normalize(x, x0)
    return x


def warmup():
    """Trigger jit compilation of all kernels (no-op on the fallback path)."""
    d = np.zeros(4, complex)
    e = np.ones(3, complex)
    cs_tridiag_eigvals(d, e)
    rs_tridiag_eigvals(np.zeros(4), np.ones(3))
    x0 = np.ones(4, complex)
    inverse_iteration(d, e, e, 0.1 + 0j, x0, 2)
