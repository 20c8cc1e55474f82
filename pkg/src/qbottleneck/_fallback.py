"""Pure-Python counterparts of the compiled kernels in ``_kernels.pyx``.

``jacobi_eigh`` runs the same cyclic Jacobi sweep as the compiled version.
The batched routines delegate to LAPACK through ``numpy.linalg.eigvalsh``,
since a per-rotation Python loop over every population member is too slow
to drive the random search.
"""

import math

import numpy as np

MAX_SWEEPS = 60


def jacobi_eigh(h, rel_tol=1e-14):
    a = np.array(h, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    thresh = rel_tol * rel_tol * float(np.sum(np.abs(a) ** 2))
    off_mask = ~np.eye(n, dtype=bool)
    sweeps = MAX_SWEEPS
    for sweep in range(MAX_SWEEPS):
        off2 = float(np.sum(np.abs(a[off_mask]) ** 2))
        if off2 <= thresh or off2 == 0.0:
            sweeps = sweep
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                ph = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if theta >= 0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * ph.conjugate() * aq
                a[:, q] = s * ph * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * ph * aq
                a[q, :] = s * ph.conjugate() * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * ph.conjugate() * vq
                v[:, q] = s * ph * vp + c * vq
    w = np.real(np.diagonal(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], sweeps


def eigvalsh_batch(h, rel_tol=1e-14):
    return np.linalg.eigvalsh(np.asarray(h, dtype=np.complex128))


def entropy_batch(h, neg_tol=1e-10, rel_tol=1e-14):
    w = eigvalsh_batch(h)
    pos = np.where(w > 0.0, w, 1.0)
    s = -np.sum(np.where(w > 0.0, w * np.log(pos), 0.0), axis=-1)
    return s, w[..., 0].copy()


def channel_entropies(kraus, rho_xy, purifier, dy):
    k = np.asarray(kraus, dtype=np.complex128)
    m, r, d_out, d_in = k.shape
    w = np.asarray(purifier, dtype=np.complex128)
    rho4 = np.asarray(rho_xy, dtype=np.complex128).reshape(d_in, dy, d_in, dy)
    t1 = np.matmul(k.reshape(m * r * d_out, d_in), rho4.reshape(d_in, -1)).reshape(m, r, d_out, dy, d_in, dy)
    xty = np.einsum("mkayjz,mkbj->maybz", t1, k.conj()).reshape(m, d_out * dy, d_out * dy)
    xt = np.einsum("mayby->mab", xty.reshape(m, d_out, dy, d_out, dy))
    u = np.matmul(w[None, None], np.swapaxes(k, -1, -2)).reshape(m, r, -1)
    tau = np.einsum("mki,mkj->mij", u, u.conj())
    s_xt, lo1 = entropy_batch(xt)
    s_xty, lo2 = entropy_batch(xty)
    s_tau, lo3 = entropy_batch(tau)
    return s_xt, s_xty, s_tau, np.minimum(np.minimum(lo1, lo2), lo3)


def ib_loop(pxy, q, beta, damping, tol, max_iters):
    from .classical_ib import _update

    pxy = np.asarray(pxy, dtype=float)
    q = np.array(q, dtype=float)
    py_x = pxy / pxy.sum(axis=1, keepdims=True)
    it = 0
    for it in range(1, max_iters + 1):
        new = _update(pxy, py_x, q, beta)
        if damping < 1:
            new = (1.0 - damping) * q + damping * new
        delta = float(np.max(np.abs(new - q)))
        q = new
        if delta < tol:
            break
    return q, it
