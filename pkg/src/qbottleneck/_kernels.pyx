# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: cyclic Jacobi for small dense Hermitian matrices, batched entropies, the classical bottleneck update."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, log, exp, INFINITY, isfinite
from libc.string cimport memcpy

cnp.import_array()

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

cdef int MAX_SWEEPS = 60


cdef int _jacobi(double complex* a, double complex* v, int n, double rel_tol) noexcept nogil:
    """Diagonalise ``a`` (row-major, n x n) in place; accumulate rotations in ``v`` if not NULL.

    Returns the number of sweeps used.
    """
    cdef int p, q, k, sweep
    cdef double fro2 = 0.0, off2, re, im, apq_abs, theta, t, c, s, app, aqq
    cdef double complex ph, sp, spc, ap, aq
    for k in range(n * n):
        fro2 += creal(a[k]) * creal(a[k]) + cimag(a[k]) * cimag(a[k])
    if v != NULL:
        for k in range(n * n):
            v[k] = 0.0
        for k in range(n):
            v[k * n + k] = 1.0
    cdef double thresh = 0.5 * rel_tol * rel_tol * fro2
    for sweep in range(MAX_SWEEPS):
        # squared norm of the strict upper triangle (half the off-diagonal mass)
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                re = creal(a[p * n + q])
                im = cimag(a[p * n + q])
                off2 += re * re + im * im
        if off2 <= thresh or off2 == 0.0:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                re = creal(a[p * n + q])
                im = cimag(a[p * n + q])
                apq_abs = sqrt(re * re + im * im)
                if apq_abs == 0.0:
                    continue
                ph = a[p * n + q] / apq_abs
                app = creal(a[p * n + p])
                aqq = creal(a[q * n + q])
                theta = (aqq - app) / (2.0 * apq_abs)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                sp = s * ph
                spc = conj(sp)
                # a <- a J with J[p,q] = s*ph, J[q,p] = -s*conj(ph)
                for k in range(n):
                    ap = a[k * n + p]
                    aq = a[k * n + q]
                    a[k * n + p] = c * ap - spc * aq
                    a[k * n + q] = sp * ap + c * aq
                # a <- J^H a
                for k in range(n):
                    ap = a[p * n + k]
                    aq = a[q * n + k]
                    a[p * n + k] = c * ap - sp * aq
                    a[q * n + k] = spc * ap + c * aq
                a[p * n + q] = 0.0
                a[q * n + p] = 0.0
                a[p * n + p] = creal(a[p * n + p])
                a[q * n + q] = creal(a[q * n + q])
                if v != NULL:
                    for k in range(n):
                        ap = v[k * n + p]
                        aq = v[k * n + q]
                        v[k * n + p] = c * ap - spc * aq
                        v[k * n + q] = sp * ap + c * aq
    return MAX_SWEEPS


def jacobi_eigh(cnp.ndarray h, double rel_tol=1e-14):
    """Eigenvalues (ascending) and eigenvectors (columns) of one Hermitian matrix."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2, mode="c"] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef int n = a.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2, mode="c"] v = np.empty((n, n), dtype=np.complex128)
    cdef int sweeps
    with nogil:
        sweeps = _jacobi(&a[0, 0], &v[0, 0], n, rel_tol)
    w = np.real(np.diagonal(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], sweeps


def eigvalsh_batch(cnp.ndarray h, double rel_tol=1e-14):
    """Ascending eigenvalues for a stack of Hermitian matrices, shape (m, n, n)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3, mode="c"] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef int m = a.shape[0], n = a.shape[1], i, k
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] w = np.empty((m, n), dtype=np.float64)
    with nogil:
        for i in range(m):
            _jacobi(&a[i, 0, 0], NULL, n, rel_tol)
            for k in range(n):
                w[i, k] = creal(a[i, k, k])
    w.sort(axis=1)
    return w


def entropy_batch(cnp.ndarray h, double neg_tol=1e-10, double rel_tol=1e-14):
    """Von Neumann entropies (nats) for a stack of density matrices.

    Returns ``(entropies, min_eigenvalues)``; eigenvalues in ``[-neg_tol, 0)``
    count as zero, more negative ones are left for the caller to reject.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=3, mode="c"] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef int m = a.shape[0], n = a.shape[1], i, k
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.empty(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lo = np.empty(m, dtype=np.float64)
    cdef double lam, acc, mn
    with nogil:
        for i in range(m):
            _jacobi(&a[i, 0, 0], NULL, n, rel_tol)
            acc = 0.0
            mn = creal(a[i, 0, 0])
            for k in range(n):
                lam = creal(a[i, k, k])
                if lam < mn:
                    mn = lam
                if lam > 0.0:
                    acc -= lam * log(lam)
            s[i] = acc
            lo[i] = mn
    return s, lo


cdef double _entropy_inplace(double complex* a, int n, double* mn) noexcept nogil:
    cdef int k
    cdef double lam, acc = 0.0
    _jacobi(a, NULL, n, 1e-14)
    mn[0] = creal(a[0])
    for k in range(n):
        lam = creal(a[k * n + k])
        if lam < mn[0]:
            mn[0] = lam
        if lam > 0.0:
            acc -= lam * log(lam)
    return acc


def channel_entropies(cnp.ndarray kraus, cnp.ndarray rho_xy, cnp.ndarray purifier, int dy):
    """Entropies of the channel outputs for a stack of Kraus channels.

    ``kraus`` has shape ``(m, r, d_out, d_in)``, ``rho_xy`` is the input state
    on ``x (x) y`` and ``purifier`` the coefficient matrix ``W`` of the pure
    state ``|w> = vec(W)`` on ``xp (x) x``.  Returns ``(S(xt), S(xt y),
    S(xp xt), min_eigenvalue)``, each of length ``m``.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=4, mode="c"] k = np.ascontiguousarray(kraus, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2, mode="c"] rho = np.ascontiguousarray(rho_xy, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2, mode="c"] w = np.ascontiguousarray(purifier, dtype=np.complex128)
    cdef int m = k.shape[0], r = k.shape[1], dout = k.shape[2], din = k.shape[3]
    cdef int dxp = w.shape[0]
    if rho.shape[0] != din * dy or w.shape[1] != din:
        raise ValueError("dimension mismatch between channels, state and purifier")
    cdef int nxy = dout * dy, nxp = dxp * dout
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s_xt = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s_xty = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s_xpxt = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lo = np.empty(m)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b_xty = np.empty(nxy * nxy, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b_xt = np.empty(dout * dout, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b_tau = np.empty(nxp * nxp, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b_t = np.empty(dout * din * dy * dy, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b_u = np.empty(nxp, dtype=np.complex128)
    cdef double complex* xty = &b_xty[0]
    cdef double complex* xt = &b_xt[0]
    cdef double complex* tau = &b_tau[0]
    cdef double complex* t1 = &b_t[0]
    cdef double complex* u = &b_u[0]
    cdef int c, kk, a, b, i, j, y, z, ap, bp, p, q
    cdef double complex acc
    cdef double mn, mn2
    with nogil:
        for c in range(m):
            for p in range(nxy * nxy):
                xty[p] = 0.0
            for p in range(nxp * nxp):
                tau[p] = 0.0
            for kk in range(r):
                # t1[a, y, j, z] = sum_i K[a, i] rho[i y, j z]
                for a in range(dout):
                    for y in range(dy):
                        for j in range(din):
                            for z in range(dy):
                                acc = 0.0
                                for i in range(din):
                                    acc = acc + k[c, kk, a, i] * rho[i * dy + y, j * dy + z]
                                t1[((a * dy + y) * din + j) * dy + z] = acc
                # xty[a y, b z] += sum_j t1[a, y, j, z] conj(K[b, j])
                for a in range(dout):
                    for y in range(dy):
                        for b in range(dout):
                            for z in range(dy):
                                acc = 0.0
                                for j in range(din):
                                    acc = acc + t1[((a * dy + y) * din + j) * dy + z] * conj(k[c, kk, b, j])
                                xty[(a * dy + y) * nxy + b * dy + z] += acc
                # u[ap, a] = sum_i W[ap, i] K[a, i]; tau += u u^dagger
                for ap in range(dxp):
                    for a in range(dout):
                        acc = 0.0
                        for i in range(din):
                            acc = acc + w[ap, i] * k[c, kk, a, i]
                        u[ap * dout + a] = acc
                for p in range(nxp):
                    for q in range(nxp):
                        tau[p * nxp + q] += u[p] * conj(u[q])
            for a in range(dout):
                for b in range(dout):
                    acc = 0.0
                    for y in range(dy):
                        acc = acc + xty[(a * dy + y) * nxy + b * dy + y]
                    xt[a * dout + b] = acc
            s_xt[c] = _entropy_inplace(xt, dout, &mn)
            s_xty[c] = _entropy_inplace(xty, nxy, &mn2)
            if mn2 < mn:
                mn = mn2
            s_xpxt[c] = _entropy_inplace(tau, nxp, &mn2)
            if mn2 < mn:
                mn = mn2
            lo[c] = mn
    return s_xt, s_xty, s_xpxt, lo


def ib_loop(cnp.ndarray pxy_in, cnp.ndarray q_in, double beta, double damping, double tol, int max_iters):
    """Iterate the classical bottleneck update; returns ``(channel, iterations)``.

    Same arithmetic as ``classical_ib._update`` with the damped blend and the
    max-norm stopping rule of ``ib_iterate``.
    """
    cdef double[:, ::1] pxy = np.ascontiguousarray(pxy_in, dtype=np.float64)
    cdef double[:, ::1] q = np.array(q_in, dtype=np.float64, order="C")
    cdef int nx = pxy.shape[0], ny = pxy.shape[1], nt = q.shape[0]
    cdef double[::1] px = np.zeros(nx)
    cdef double[:, ::1] py_x = np.zeros((nx, ny))
    cdef double[:, ::1] logp = np.zeros((nx, ny))
    cdef double[::1] plogp = np.zeros(nx)
    cdef double[::1] pxt = np.zeros(nt)
    cdef double[::1] logpxt = np.zeros(nt)
    cdef double[:, ::1] logq = np.zeros((nt, ny))
    cdef double[:, ::1] new = np.zeros((nt, nx))
    cdef double[::1] col = np.zeros(nt)
    cdef int x, y, t, it = 0
    cdef double s, top, kl, delta, v
    cdef bint inf_kl
    with nogil:
        for x in range(nx):
            s = 0.0
            for y in range(ny):
                s += pxy[x, y]
            px[x] = s
            plogp[x] = 0.0
            for y in range(ny):
                py_x[x, y] = pxy[x, y] / s
                if py_x[x, y] > 0:
                    logp[x, y] = log(py_x[x, y])
                    plogp[x] += py_x[x, y] * logp[x, y]
        for it in range(1, max_iters + 1):
            for t in range(nt):
                s = 0.0
                for x in range(nx):
                    s += q[t, x] * px[x]
                pxt[t] = s
                logpxt[t] = log(s) if s > 0 else -INFINITY
                for y in range(ny):
                    v = 0.0
                    for x in range(nx):
                        v += q[t, x] * pxy[x, y]
                    # log P(y | xt); -inf marks a lost support
                    logq[t, y] = log(v / s) if (s > 0 and v > 0) else -INFINITY
            for x in range(nx):
                top = -INFINITY
                for t in range(nt):
                    if beta > 0:
                        kl = plogp[x]
                        inf_kl = False
                        for y in range(ny):
                            if py_x[x, y] > 0:
                                if not isfinite(logq[t, y]):
                                    inf_kl = True
                                    break
                                kl -= py_x[x, y] * logq[t, y]
                        col[t] = -INFINITY if inf_kl else logpxt[t] - beta * kl
                    else:
                        col[t] = logpxt[t]
                    if col[t] > top:
                        top = col[t]
                if not isfinite(top):
                    # column lost all support; keep it on the marginal
                    top = -INFINITY
                    for t in range(nt):
                        col[t] = logpxt[t] if pxt[t] > 0 else log(1e-300)
                        if col[t] > top:
                            top = col[t]
                s = 0.0
                for t in range(nt):
                    col[t] = exp(col[t] - top)
                    s += col[t]
                for t in range(nt):
                    new[t, x] = col[t] / s
            delta = 0.0
            for t in range(nt):
                for x in range(nx):
                    v = new[t, x]
                    if damping < 1:
                        v = (1.0 - damping) * q[t, x] + damping * v
                    if fabs(v - q[t, x]) > delta:
                        delta = fabs(v - q[t, x])
                    q[t, x] = v
            if delta < tol:
                break
    return np.asarray(q), it
