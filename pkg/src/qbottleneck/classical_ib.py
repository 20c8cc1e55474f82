"""Classical Information Bottleneck: self-consistent channel iteration and rate curves.

Channels are column-stochastic matrices ``Q[xt, x] = P(xt | x)``; joint
distributions are ``P[x, y]``.  All informations are in nats.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .config import SolverConfig
from .errors import DegenerateInstanceError

SUM_TOL = 1e-12
STOCHASTIC_TOL = 1e-10


def joint_distribution(pxy) -> np.ndarray:
    """Validate a joint table; rows with ``P(x) = 0`` are dropped (``P(y|x)`` is undefined there)."""
    p = np.asarray(pxy, dtype=float)
    if p.ndim != 2 or p.size == 0:
        raise ValueError(f"joint distribution must be a non-empty matrix, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("joint distribution has negative or non-finite entries")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"joint distribution sums to {p.sum():.15g}, not 1")
    return p[p.sum(axis=1) > 0]


def load_joint(path) -> np.ndarray:
    """Read ``{"px_y": [[...]]}`` (row-major ``|X| x |Y|``) and validate it."""
    with open(path) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or "px_y" not in obj:
        raise ValueError("joint distribution file needs a 'px_y' table")
    return joint_distribution(obj["px_y"])


def save_joint(path, pxy) -> None:
    with open(path, "w") as fh:
        json.dump({"px_y": np.asarray(pxy, dtype=float).tolist()}, fh)


def validate_channel(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or np.any(q < -STOCHASTIC_TOL):
        raise ValueError("channel must be a non-negative matrix")
    dev = np.max(np.abs(q.sum(axis=0) - 1.0))
    if dev > STOCHASTIC_TOL:
        raise ValueError(f"channel columns deviate from normalisation by {dev:.3e}")
    return q


def entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def mutual_information(pab) -> float:
    pab = np.asarray(pab, dtype=float)
    return entropy(pab.sum(axis=1)) + entropy(pab.sum(axis=0)) - entropy(pab)


def kl_divergence(p, q) -> float:
    """``sum p ln(p/q)`` with ``0 ln 0 = 0``; ``math.inf`` when ``p`` has mass where ``q`` has none."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    on = p > 0
    if np.any(q[on] <= 0):
        return math.inf
    return float(np.sum(p[on] * np.log(p[on] / q[on])))


def _kl_matrix(py_x: np.ndarray, py_xt: np.ndarray) -> np.ndarray:
    """``KL[xt, x] = KL(P(y|x) || P(y|xt))``, +inf on support violations."""
    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = np.log(py_xt)  # (xt, y)
        plogp = np.where(py_x > 0, py_x * np.log(np.where(py_x > 0, py_x, 1.0)), 0.0).sum(axis=1)
        # cross term -sum_y p(y|x) log q(y|xt); masked where p(y|x) = 0
        cross = np.where(py_x[None, :, :] > 0, py_x[None, :, :] * log_q[:, None, :], 0.0).sum(axis=2)
    return plogp[None, :] - cross


@dataclass
class IBSolution:
    channel: np.ndarray
    beta: float
    I_xxt: float
    I_xty: float
    iterations: int
    residual: float
    lagrangian_trace: list[float] = field(default_factory=list, repr=False)


def _marginals(pxy: np.ndarray, q: np.ndarray):
    px = pxy.sum(axis=1)
    pxt = q @ px
    joint_xty = q @ pxy  # (xt, y) = sum_x Q[xt,x] P(x,y)
    with np.errstate(divide="ignore", invalid="ignore"):
        py_xt = np.where(pxt[:, None] > 0, joint_xty / pxt[:, None], 0.0)
    return px, pxt, joint_xty, py_xt


def _update(pxy: np.ndarray, py_x: np.ndarray, q: np.ndarray, beta: float) -> np.ndarray:
    _, pxt, _, py_xt = _marginals(pxy, q)
    with np.errstate(divide="ignore"):
        logits = np.log(pxt)[:, None] - beta * _kl_matrix(py_x, py_xt) if beta > 0 else np.broadcast_to(
            np.log(pxt)[:, None], q.shape
        ).copy()
    logits = np.where(np.isnan(logits), -np.inf, logits)
    top = np.max(logits, axis=0)
    bad = ~np.isfinite(top)
    if np.any(bad):  # column lost all support; keep it on the marginal
        logits[:, bad] = np.log(np.where(pxt > 0, pxt, 1e-300))[:, None]
        top = np.max(logits, axis=0)
    w = np.exp(logits - top[None, :])
    return w / w.sum(axis=0, keepdims=True)


def informations(pxy: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    """``(I(X;Xt), I(Xt;Y))`` for channel ``q`` on joint ``pxy``."""
    px = pxy.sum(axis=1)
    return mutual_information(q * px[None, :]), mutual_information(q @ pxy)


def lagrangian(pxy: np.ndarray, q: np.ndarray, beta: float) -> float:
    i_xxt, i_xty = informations(pxy, q)
    return i_xxt - beta * i_xty


def fixed_point_residual(pxy: np.ndarray, q: np.ndarray, beta: float) -> float:
    py_x = pxy / pxy.sum(axis=1, keepdims=True)
    return float(np.max(np.abs(_update(pxy, py_x, q, beta) - q)))


def perturbed_identity(d_xt: int, d_x: int, eps: float = 0.1) -> np.ndarray:
    q = np.zeros((d_xt, d_x))
    for x in range(d_x):
        q[x % d_xt, x] = 1.0
    return (1.0 - eps) * q + eps / d_xt


def random_channel(d_xt: int, d_x: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.exponential(size=(d_xt, d_x))
    return q / q.sum(axis=0, keepdims=True)


def ib_iterate(
    pxy,
    beta: float,
    d_xt: int | None = None,
    init: np.ndarray | None = None,
    config: SolverConfig | None = None,
    *,
    damping: float = 1.0,
    track_lagrangian: bool = False,
) -> IBSolution:
    """Iterate ``P(xt|x) = P(xt) exp(-beta KL(P(y|x) || P(y|xt))) / Z`` to a fixed point.

    Stops when the largest entry change of the channel falls below
    ``config.fixed_point_tol`` or after ``config.ib_max_iters`` sweeps.
    ``damping < 1`` blends each update with the previous channel; at small
    beta the constant-channel fixed points form a continuum, so the limit
    reached depends on the damping.
    """
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    config = config or SolverConfig()
    pxy = joint_distribution(pxy)
    d_x = pxy.shape[0]
    d_xt = d_x if d_xt is None else int(d_xt)
    if d_xt < 1:
        raise ValueError("d_xt must be >= 1")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    q = validate_channel(perturbed_identity(d_xt, d_x) if init is None else init).copy()
    if q.shape != (d_xt, d_x):
        raise ValueError(f"init has shape {q.shape}, expected {(d_xt, d_x)}")
    if not track_lagrangian:
        q, it = _backend.ib_loop(pxy, q, float(beta), float(damping), config.fixed_point_tol, config.ib_max_iters)
        i_xxt, i_xty = informations(pxy, q)
        return IBSolution(q, float(beta), i_xxt, i_xty, it, fixed_point_residual(pxy, q, beta))
    py_x = pxy / pxy.sum(axis=1, keepdims=True)
    trace = [lagrangian(pxy, q, beta)]
    it = 0
    for it in range(1, config.ib_max_iters + 1):
        new = _update(pxy, py_x, q, beta)
        if damping < 1:
            new = (1.0 - damping) * q + damping * new
        delta = float(np.max(np.abs(new - q)))
        q = new
        trace.append(lagrangian(pxy, q, beta))
        if delta < config.fixed_point_tol:
            break
    i_xxt, i_xty = informations(pxy, q)
    return IBSolution(q, float(beta), i_xxt, i_xty, it, fixed_point_residual(pxy, q, beta), trace)


@dataclass
class ClassicalPoint:
    J: float
    rate: float
    I_xxt: float
    I_xty: float
    feasible: bool
    beta: float
    channel: np.ndarray | None


@dataclass
class ClassicalCurve:
    points: list[ClassicalPoint]
    I_xy: float
    I_ref: float
    sweep: list[IBSolution] = field(default_factory=list, repr=False)

    @property
    def J(self) -> np.ndarray:
        return np.array([p.J for p in self.points])

    @property
    def R(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])


def _candidates_at(pxy, beta, d_xt, config, seeds) -> list[IBSolution]:
    d_x = pxy.shape[0]
    inits = [perturbed_identity(d_xt, d_x)]
    inits += [random_channel(d_xt, d_x, np.random.default_rng(s)) for s in seeds]
    return [ib_iterate(pxy, beta, d_xt, init, config) for init in inits]


def classical_rate_curve(
    pxy,
    J_grid,
    d_xt: int | None = None,
    config: SolverConfig | None = None,
    normalization: str = "quantum",
    refine_steps: int = 40,
) -> ClassicalCurve:
    """Minimal ``I(X;Xt) / I_ref`` subject to ``I(Xt;Y) / I(X;Y) >= J`` for every ``J`` on the grid.

    ``normalization="quantum"`` divides by ``I(X;X') = 2 H(X)``, the
    reference information of the purified quantum embedding of the diagonal
    state; ``"nats"`` leaves the rate in nats.  Candidates come from a
    geometric beta sweep with random restarts, the two endpoint channels
    (constant and, if ``d_xt >= |X|``, the identity), a bisection in beta
    between the sweep points that bracket each target, and a blend of the
    best candidate towards the constant channel.
    """
    config = config or SolverConfig()
    pxy = joint_distribution(pxy)
    d_x = pxy.shape[0]
    d_xt = d_x if d_xt is None else int(d_xt)
    J_grid = np.asarray(J_grid, dtype=float)
    if np.any(J_grid <= 0) or np.any(J_grid > 1):
        raise ValueError("J grid values must lie in (0, 1]")
    i_xy = mutual_information(pxy)
    if i_xy <= 1e-12:
        raise DegenerateInstanceError("I(X;Y) = 0: nothing relevant to preserve")
    if normalization == "quantum":
        i_ref = 2.0 * entropy(pxy.sum(axis=1))
    elif normalization == "nats":
        i_ref = 1.0
    else:
        raise ValueError(f"unknown normalization {normalization!r}")

    sweep: list[IBSolution] = []
    best_by_beta: list[IBSolution] = []
    for k, beta in enumerate(config.beta_grid):
        seeds = [np.random.SeedSequence(config.seed, spawn_key=(k, r)) for r in range(config.restarts)]
        sols = _candidates_at(pxy, beta, d_xt, config, seeds)
        sweep.extend(sols)
        # per beta, the lowest-Lagrangian solution is the branch followed by the bisection
        best_by_beta.append(min(sols, key=lambda s: s.I_xxt - beta * s.I_xty))

    endpoints = [np.full((d_xt, d_x), 1.0 / d_xt)]
    if d_xt >= d_x:
        ident = np.zeros((d_xt, d_x))
        ident[np.arange(d_x), np.arange(d_x)] = 1.0
        endpoints.append(ident)
    for q in endpoints:
        a, b = informations(pxy, q)
        sweep.append(IBSolution(q, math.inf if q.max() == 1.0 else 0.0, a, b, 0, 0.0))

    points = []
    memo: dict[float, IBSolution] = {}  # bisections for nearby targets revisit the same betas
    for J in J_grid:
        need = J * i_xy - 1e-12 * i_xy
        cands = [s for s in sweep if s.I_xty >= need]
        refined = _bisect_beta(pxy, d_xt, config, best_by_beta, need, refine_steps, memo)
        if refined is not None:
            cands.append(refined)
            sweep.append(refined)
        if cands:
            best = min(cands, key=lambda s: s.I_xxt)
            blended = _blend_to_constant(pxy, best, need, refine_steps)
            if blended is not None and blended.I_xxt < best.I_xxt:
                best = blended
            points.append(
                ClassicalPoint(float(J), best.I_xxt / i_ref, best.I_xxt, best.I_xty, True, best.beta, best.channel)
            )
        else:
            points.append(ClassicalPoint(float(J), math.nan, math.nan, math.nan, False, math.nan, None))
    return ClassicalCurve(points, i_xy, i_ref, sweep)


def _blend_to_constant(pxy, sol: IBSolution, need: float, steps: int) -> IBSolution | None:
    """Shrink ``sol`` towards the constant channel on its own output marginal.

    Near a first-order transition every point of the curve's initial segment
    shares one beta, so the sweep cannot target them; mixing with the
    constant channel moves ``I(Xt;Y)`` continuously down to zero.
    """
    q = sol.channel
    const = np.repeat((q @ pxy.sum(axis=1))[:, None], q.shape[1], axis=1)
    lo, hi = 0.0, 1.0
    best = None
    for _ in range(steps):
        t = 0.5 * (lo + hi)
        a, b = informations(pxy, (1.0 - t) * const + t * q)
        if b >= need:
            hi, best = t, (a, b)
        else:
            lo = t
    if best is None:
        return None
    return IBSolution((1.0 - hi) * const + hi * q, sol.beta, best[0], best[1], 0, math.nan)


def _bisect_beta(pxy, d_xt, config, branch, need, steps, memo=None) -> IBSolution | None:
    ok = [i for i, s in enumerate(branch) if s.I_xty >= need]
    if not ok or ok[0] == 0:
        return None
    hi_i = ok[0]
    lo_b, hi_b = branch[hi_i - 1].beta, branch[hi_i].beta
    hi_sol = branch[hi_i]
    d_x = pxy.shape[0]
    init = perturbed_identity(d_xt, d_x)
    for _ in range(steps):
        mid = math.sqrt(lo_b * hi_b)
        sol = memo.get(mid) if memo is not None else None
        if sol is None:
            sol = ib_iterate(pxy, mid, d_xt, init, config)
            if memo is not None:
                memo[mid] = sol
        if sol.I_xty >= need:
            hi_b, hi_sol = mid, sol
        else:
            lo_b = mid
        if hi_b / lo_b - 1.0 < 1e-9:
            break
    return hi_sol
