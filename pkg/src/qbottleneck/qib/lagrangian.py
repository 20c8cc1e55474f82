"""Lagrangian, its gradient, and the self-consistent fixed-point iteration.

The optimisation variable is ``X = Psi^{T_x}``, the Choi matrix partially
transposed on the input.  Both output states are linear in it:

    rho_{xt y}[a y, b z] = sum_ij X[j a, i b] rho_xy[i y, j z]
    tau_{xp xt}          = (W (x) I) Psi (W^dagger (x) I)

with ``W`` the purifier coefficient matrix.  Gradients are assembled from the
Hilbert-Schmidt adjoints of these two maps, so every entropy contributes one
``-(log sigma + I)`` term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import SolverConfig
from ..errors import DomainError
from ..qstate import ChoiMatrix
from ..tensor_core import (
    RANK_TOL,
    SubsystemDims,
    hermitian_eig,
    hermitize,
    matrix_func,
    matrix_inv_sqrt,
    matrix_log,
    partial_trace,
    partial_transpose,
)
from .instance import Evaluation, ProblemInstance, evaluate_choi

# floor used when a log must stay finite on a kernel (exp of it is then ~0)
LOG_FLOOR = 1e-300


def _psi(psi) -> np.ndarray:
    return np.asarray(psi.matrix if isinstance(psi, ChoiMatrix) else psi, dtype=np.complex128)


def _dims(instance: ProblemInstance, psi: np.ndarray) -> tuple[int, int]:
    d_x = instance.d_x
    d_xt, rem = divmod(psi.shape[0], d_x)
    if rem or psi.shape != (d_x * d_xt, d_x * d_xt):
        raise ValueError(f"Choi matrix of shape {psi.shape} does not fit d_x = {d_x}")
    return d_x, d_xt


def output_states(instance: ProblemInstance, psi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(rho_xt, rho_{xt y}, tau_{xp xt})`` for a (not necessarily CPTP) Choi matrix."""
    psi = _psi(psi)
    d_x, d_xt = _dims(instance, psi)
    d_y = instance.d_y
    p4 = psi.reshape(d_x, d_xt, d_x, d_xt)
    r4 = instance.rho_xy.reshape(d_x, d_y, d_x, d_y)
    rho_xty = np.einsum("iajb,iyjz->aybz", p4, r4).reshape(d_xt * d_y, -1)
    big = np.kron(instance.purifier, np.eye(d_xt))
    tau = big @ psi @ big.conj().T
    rho_xt = np.einsum("ayby->ab", rho_xty.reshape(d_xt, d_y, d_xt, d_y))
    return hermitize(rho_xt), hermitize(rho_xty), hermitize(tau)


def _adjoint_rho(instance: ProblemInstance, k: np.ndarray, d_xt: int) -> np.ndarray:
    """``F^*(K)`` for ``F: X -> rho_{xt y}``, as an operator on ``x (x) xt``."""
    d_x, d_y = instance.d_x, instance.d_y
    k4 = k.reshape(d_xt, d_y, d_xt, d_y)
    r4 = instance.rho_xy.reshape(d_x, d_y, d_x, d_y)
    return np.einsum("bzay,iyjz->ibja", k4, r4).reshape(d_x * d_xt, -1)


def _adjoint_tau(instance: ProblemInstance, k: np.ndarray, d_xt: int) -> np.ndarray:
    """``F^*(K)`` for ``F: X -> tau_{xp xt}``."""
    d_x = instance.d_x
    w = instance.purifier
    k4 = k.reshape(d_x, d_xt, d_x, d_xt)
    return np.einsum("qbpa,pi,qj->ibja", k4, w, w.conj()).reshape(d_x * d_xt, -1)


def _log(h: np.ndarray, flags: set, name: str) -> np.ndarray:
    e = hermitian_eig(h)
    if e.values[0] <= RANK_TOL * max(abs(e.values[-1]), 1.0):
        flags.add(name)
        return matrix_log(h, support_only=True, eig=e)
    return matrix_log(h, eig=e)


def _entropy(h: np.ndarray) -> float:
    w = hermitian_eig(h).values
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def _lambda_term(lam, d_x: int, d_xt: int) -> np.ndarray:
    if lam is None:
        return np.zeros((d_x * d_xt, d_x * d_xt), dtype=np.complex128)
    lam = np.asarray(lam, dtype=np.complex128)
    if lam.shape != (d_x, d_x):
        raise ValueError(f"Lambda must be {d_x}x{d_x}")
    return np.kron(lam, np.eye(d_xt))


def lagrangian(instance: ProblemInstance, psi, beta: float, Lambda=None) -> float:
    """``I(X';Xt) - beta I(Xt;Y) - Tr[Psi^{T_x} (Lambda (x) I)]``.

    All marginals are taken from the output states, so the value is a smooth
    function of ``Psi`` even off the trace-preserving set.
    """
    psi = _psi(psi)
    d_x, d_xt = _dims(instance, psi)
    rho_xt, rho_xty, tau = output_states(instance, psi)
    tau_xp, tau_xt, rho_y = _marginals(tau, rho_xty, d_x, d_xt, instance.d_y)
    i_xpxt = _entropy(tau_xp) + _entropy(tau_xt) - _entropy(tau)
    i_xty = _entropy(rho_xt) + _entropy(rho_y) - _entropy(rho_xty)
    x = partial_transpose(psi, _choi_dims(d_x, d_xt), "x")
    constraint = np.trace(x @ _lambda_term(Lambda, d_x, d_xt)).real
    return float(i_xpxt - beta * i_xty - constraint)


def _choi_dims(d_x: int, d_xt: int) -> SubsystemDims:
    return SubsystemDims.of(x=d_x, xt=d_xt)


def _marginals(tau, rho_xty, d_x, d_xt, d_y):
    t4 = tau.reshape(d_x, d_xt, d_x, d_xt)
    tau_xp = hermitize(np.einsum("paqa->pq", t4))
    tau_xt = hermitize(np.einsum("papb->ab", t4))
    rho_y = hermitize(np.einsum("ayaz->yz", rho_xty.reshape(d_xt, d_y, d_xt, d_y)))
    return tau_xp, tau_xt, rho_y


def lagrangian_gradient(instance: ProblemInstance, psi, beta: float, Lambda=None, *, return_flags: bool = False):
    """Gradient ``G`` on ``x (x) xt`` with ``dL = Tr(G B)`` for ``X = Psi^{T_x}`` moved along ``B``.

    Logs of rank-deficient states are taken on their support; the names of
    such states are returned when ``return_flags`` is set.
    """
    psi = _psi(psi)
    d_x, d_xt = _dims(instance, psi)
    d_y = instance.d_y
    flags: set = set()
    rho_xt, rho_xty, tau = output_states(instance, psi)
    tau_xp, tau_xt, rho_y = _marginals(tau, rho_xty, d_x, d_xt, d_y)
    eye_xt = np.eye(d_xt)
    k_tau = (
        -np.kron(_log(tau_xp, flags, "tau_xp"), eye_xt)
        - np.kron(np.eye(d_x), _log(tau_xt, flags, "tau_xt"))
        + _log(tau, flags, "tau_xp_xt")
        - np.eye(d_x * d_xt)
    )
    k_rho = beta * (
        np.kron(_log(rho_xt, flags, "rho_xt"), np.eye(d_y))
        + np.kron(eye_xt, _log(rho_y, flags, "rho_y"))
        - _log(rho_xty, flags, "rho_xt_y")
        + np.eye(d_xt * d_y)
    )
    g = _adjoint_tau(instance, k_tau, d_xt) + _adjoint_rho(instance, k_rho, d_xt) - _lambda_term(Lambda, d_x, d_xt)
    g = hermitize(g)
    return (g, sorted(flags)) if return_flags else g


def multiplier_estimate(
    instance: ProblemInstance, psi, beta: float, support_tol: float = 1e-9
) -> tuple[np.ndarray, float, int]:
    """Multiplier ``Lambda`` that best cancels the unconstrained gradient ``G_0``.

    Returns ``(Lambda, residual, rank)``.  For full-rank ``Psi`` this is
    ``Lambda = Tr_xt G_0 / d_xt`` and ``residual = max|G_0 - Lambda (x) I|``.
    When ``Psi`` has a kernel (a boundary point of the CP cone) stationarity
    only holds on its support ``P``: in the Choi frame ``P (G - Lambda^T (x) I) P``
    is fitted by least squares and its largest entry reported.
    """
    psi = _psi(psi)
    d_x, d_xt = _dims(instance, psi)
    dims = _choi_dims(d_x, d_xt)
    g0 = lagrangian_gradient(instance, psi, beta)
    eye_xt = np.eye(d_xt)
    w, v = hermitian_eig(hermitize(psi))
    on = w > support_tol * max(float(w[-1]), 1.0)
    rank = int(on.sum())
    if rank == len(w):
        lam = hermitize(partial_trace(g0, dims, ["x"]) / d_xt)
        return lam, float(np.max(np.abs(g0 - np.kron(lam, eye_xt)))), rank
    proj = v[:, on] @ v[:, on].conj().T
    g_psi = partial_transpose(g0, dims, "x")
    target = proj @ g_psi @ proj
    basis = _hermitian_basis(d_x)
    cols = np.stack([(proj @ np.kron(e, eye_xt) @ proj).reshape(-1) for e in basis], axis=1)
    a = np.concatenate([cols.real, cols.imag])
    y = np.concatenate([target.reshape(-1).real, target.reshape(-1).imag])
    coef = np.linalg.lstsq(a, y, rcond=None)[0]
    m = sum(c * e for c, e in zip(coef, basis))
    lam = hermitize(m.T)
    return lam, float(np.max(np.abs(target - proj @ np.kron(m, eye_xt) @ proj))), rank


def _hermitian_basis(d: int) -> list[np.ndarray]:
    out = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d), dtype=np.complex128)
            if i == j:
                e[i, i] = 1.0
                out.append(e)
                continue
            e[i, j] = e[j, i] = 1.0
            out.append(e)
            f = np.zeros((d, d), dtype=np.complex128)
            f[i, j], f[j, i] = 1j, -1j
            out.append(f)
    return out


def distortion_operator(instance: ProblemInstance, rho_xt: np.ndarray, rho_xty: np.ndarray, beta: float) -> np.ndarray:
    """``beta I (x) log rho_xt - beta (rho_x^{-1/2} (x) I) T (rho_x^{-1/2} (x) I)`` on ``x (x) xt``.

    ``T[i b, j a] = sum_{y z} rho_xy[i y, j z] (log rho_{xt y})[b z, a y]`` is
    the partial trace over ``y`` pairing the input correlations with the log
    of the output.  For diagonal inputs the ``(x, xt)`` entry is
    ``beta (ln P(xt) - sum_y P(y|x) ln P(xt, y))``.  Logs are taken on the
    support; a zero overlap between ``rho_xy`` and the kernel of the output is
    genuinely undefined and raises ``DomainError``.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    d_x = instance.d_x
    d_xt = rho_xt.shape[0]
    if beta == 0:
        return np.zeros((d_x * d_xt, d_x * d_xt), dtype=np.complex128)
    if np.trace(rho_xty).real <= 0:
        raise DomainError("output state vanishes: the distortion is undefined")
    flags: set = set()
    log_xt = _log(hermitize(rho_xt), flags, "rho_xt")
    log_xty = _log(hermitize(rho_xty), flags, "rho_xt_y")
    t = _adjoint_rho(instance, log_xty, d_xt)
    s = np.kron(matrix_inv_sqrt(instance.rho_x), np.eye(d_xt))
    return hermitize(beta * np.kron(np.eye(d_x), log_xt) - beta * (s @ t @ s))


@dataclass
class FixedPointDiagnostics:
    iterations: int
    converged: bool
    step: float  # last max|Delta Psi|
    residual: float  # stationarity residual on the support of Psi
    Lambda: np.ndarray
    choi_rank: int
    lambda_iterations: int  # worst inner solve for the normalisation
    tp_error: float  # max|Tr_xt Psi - I| before the final congruence
    rank_deficient: bool
    history: list[float] = field(default_factory=list, repr=False)


def _mixed_identity_choi(d: int, eps: float = 0.1) -> np.ndarray:
    return (1.0 - eps) * ChoiMatrix.identity(d).matrix + eps * np.eye(d * d) / d


def _clipped_log(h: np.ndarray) -> tuple[np.ndarray, bool]:
    e = hermitian_eig(hermitize(h))
    scale = max(abs(e.values[-1]), 1.0)
    deficient = bool(e.values[0] <= RANK_TOL * scale)
    return matrix_func(h, lambda w: np.log(np.maximum(w, LOG_FLOOR)), eig=e), deficient


def _solve_normaliser(z: np.ndarray, r: np.ndarray, d_xt: int, tol: float = 1e-14, max_iter: int = 500):
    """Find Hermitian ``L`` with ``Tr_xt exp(Z + L (x) I) = R``.

    Exact in one step when ``L (x) I`` commutes with ``Z``; otherwise the
    correction ``log R - log Tr_xt exp(...)`` is iterated.
    """
    d_x = r.shape[0]
    dims = _choi_dims(d_x, d_xt)
    log_r = matrix_log(r)
    lam = np.zeros((d_x, d_x), dtype=np.complex128)
    it = 0
    for it in range(1, max_iter + 1):
        e = matrix_func(z + np.kron(lam, np.eye(d_xt)), np.exp)
        t = hermitize(partial_trace(e, dims, ["x"]))
        if np.max(np.abs(t - r)) <= tol * max(1.0, float(np.max(np.abs(r)))):
            return e, it
        lam = hermitize(lam + log_r - matrix_log(t))
    return matrix_func(z + np.kron(lam, np.eye(d_xt)), np.exp), it


def fixed_point_solve(
    instance: ProblemInstance,
    beta: float,
    config: SolverConfig | None = None,
    *,
    init=None,
    d_out: int | None = None,
) -> tuple[Evaluation, ChoiMatrix, FixedPointDiagnostics]:
    """Damped self-consistent iteration for a stationary channel at fixed ``beta``.

    Each step forms ``Psi' = (R^{-1/2} (x) I) exp(I (x) log rho_xt - D + L (x) I) (R^{-1/2} (x) I)``
    with ``R = rho_x^T`` and ``D`` the distortion operator moved to the
    Choi frame, ``L`` chosen so that ``Tr_xt Psi' = I``; a final congruence by
    ``G^{-1/2}`` with ``G = Tr_xt Psi'`` removes round-off.  The update is
    blended as ``(1 - a) Psi + a Psi'`` with ``a = config.damping``.
    Experimental: convergence is not guaranteed off the diagonal case.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    config = config or SolverConfig()
    d_x = instance.d_x
    d_xt = d_x if d_out is None else d_out
    if init is None:
        if d_xt != d_x:
            raise ValueError("default initial channel needs d_out = d_x")
        psi = _mixed_identity_choi(d_x)
    else:
        psi = _psi(init).copy()
    _dims(instance, psi)
    dims = _choi_dims(d_x, d_xt)
    r = hermitize(instance.rho_x.T)
    r_is = np.kron(matrix_inv_sqrt(r, support_only=False), np.eye(d_xt))
    s = np.kron(matrix_inv_sqrt(instance.rho_x, support_only=False), np.eye(d_xt))
    alpha = config.damping
    history: list[float] = []
    converged = False
    deficient = False
    worst_inner = 0
    tp_err = 0.0
    it = 0
    for it in range(1, config.max_fp_iters + 1):
        rho_xt, rho_xty, _ = output_states(instance, psi)
        log_xt, d1 = _clipped_log(rho_xt)
        log_xty, d2 = _clipped_log(rho_xty)
        deficient |= d1 or d2
        t = _adjoint_rho(instance, log_xty, d_xt)
        d_x_frame = beta * np.kron(np.eye(d_x), log_xt) - beta * (s @ t @ s)
        d_psi = partial_transpose(hermitize(d_x_frame), dims, "x")
        z = hermitize(np.kron(np.eye(d_x), log_xt) - d_psi)
        e, inner = _solve_normaliser(z, r, d_xt)
        worst_inner = max(worst_inner, inner)
        cand = hermitize(r_is @ e @ r_is)
        g = hermitize(partial_trace(cand, dims, ["x"]))
        tp_err = float(np.max(np.abs(g - np.eye(d_x))))
        gis = np.kron(matrix_inv_sqrt(g, support_only=False), np.eye(d_xt))
        cand = hermitize(gis @ cand @ gis)
        new = (1.0 - alpha) * psi + alpha * cand
        step = float(np.max(np.abs(new - psi)))
        history.append(step)
        psi = new
        if step < config.fixed_point_tol:
            converged = True
            break
    choi = ChoiMatrix(psi, d_x, d_xt)
    lam, residual, rank = multiplier_estimate(instance, psi, beta)
    diag = FixedPointDiagnostics(
        it, converged, history[-1] if history else 0.0, residual, lam, rank, worst_inner, tp_err, deficient, history
    )
    return evaluate_choi(instance, choi), choi, diag
