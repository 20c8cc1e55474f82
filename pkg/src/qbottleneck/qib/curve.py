"""Rate curves over a grid of relevance targets, and a convexity diagnostic."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SolverConfig
from ..errors import InfeasibleError
from ..qstate import KrausChannel
from .instance import Evaluation, ProblemInstance
from .search import search

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-6


@dataclass(frozen=True)
class CurvePoint:
    J: float  # grid target
    R: float  # normalized rate of the witness (nan when infeasible)
    evaluation: Evaluation | None
    channel: KrausChannel | None
    feasible: bool
    evals: int
    raw_R: float  # search result before the monotone post-pass
    replaced_from: int | None = None  # grid index whose witness was reused
    error: str | None = None


@dataclass
class RateCurve:
    points: list[CurvePoint]
    repairs: list[tuple[int, int, float]] = field(default_factory=list)  # (index, donor, R drop)

    @property
    def J(self) -> np.ndarray:
        return np.array([p.J for p in self.points])

    @property
    def R(self) -> np.ndarray:
        return np.array([p.R for p in self.points])

    @property
    def feasible(self) -> bool:
        return all(p.feasible for p in self.points)


def validate_grid(J_grid) -> list[float]:
    grid = [float(j) for j in J_grid]
    if not grid:
        raise ValueError("empty J grid")
    if any(not (0.0 < j <= 1.0) or not math.isfinite(j) for j in grid):
        raise ValueError("grid values must lie in (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    return grid


def rate_curve(
    instance: ProblemInstance,
    J_grid,
    config: SolverConfig | None = None,
    *,
    d_out: int | None = None,
) -> RateCurve:
    """Normalized rate at every grid target.

    Points are searched from the highest target down, each population seeded
    with the witness of the point above; grid index ``k`` owns RNG stream ``k``.
    A post-pass then makes the curve nondecreasing: a witness feasible at a
    higher target is feasible at every lower one, so cheaper ones are reused.
    """
    config = config or SolverConfig()
    grid = validate_grid(J_grid)
    results: list[CurvePoint | None] = [None] * len(grid)
    warm: tuple[KrausChannel, ...] = ()
    for k in reversed(range(len(grid))):
        try:
            res = search(instance, grid[k], config, warm_start=warm, d_out=d_out, point=k)
        except InfeasibleError as exc:
            log.warning("grid point J=%g infeasible: %s", grid[k], exc)
            evals = exc.best.evals if exc.best is not None else 0
            results[k] = CurvePoint(grid[k], math.nan, None, None, False, evals, math.nan, error=exc.reason)
            continue
        results[k] = CurvePoint(grid[k], res.evaluation.R_norm, res.evaluation, res.channel, True, res.evals, res.evaluation.R_norm)
        warm = (res.channel,)
    return monotone_pass(RateCurve(results))


def monotone_pass(curve: RateCurve) -> RateCurve:
    """Replace each point by the cheapest feasible witness at or above its target."""
    pts = list(curve.points)
    repairs = []
    donor = None
    for k in reversed(range(len(pts))):
        p = pts[k]
        if not p.feasible:
            continue
        if donor is not None and pts[donor].R < p.R:
            d = pts[donor]
            drop = p.R - d.R
            if drop > MONOTONE_TOL:
                log.info("optimizer noise at J=%g: rate %.3e above the witness from J=%g", p.J, drop, d.J)
            repairs.append((k, donor, drop))
            src = d.replaced_from if d.replaced_from is not None else donor
            pts[k] = CurvePoint(p.J, d.R, d.evaluation, d.channel, True, p.evals, p.raw_R, replaced_from=src)
        else:
            donor = k
    return RateCurve(pts, curve.repairs + repairs)


@dataclass(frozen=True)
class ConvexityReport:
    passed: bool
    slack: float
    second_differences: np.ndarray
    violations: list[tuple[int, float, float]]  # (index, J, second difference)

    def __str__(self) -> str:
        head = f"convexity (slack {self.slack:g}): {'pass' if self.passed else 'fail'}"
        lines = [f"  J={j:.4f}: second difference {d:+.4e}" for _, j, d in self.violations]
        return "\n".join([head] + lines)


def convexity_check(curve, slack: float = 0.0) -> ConvexityReport:
    """Second differences of R over J must be ``>= -slack``.

    On a non-uniform grid the second difference at ``k`` is twice the gap
    between the chord through the neighbours and ``R_k``; on a uniform grid it
    is the usual ``R[k+1] - 2 R[k] + R[k-1]``.  Accepts a :class:`RateCurve` or
    a pair ``(J, R)``; infeasible (nan) points are skipped.
    """
    if isinstance(curve, RateCurve):
        J, R = curve.J, curve.R
    else:
        J, R = (np.asarray(a, dtype=float) for a in curve)
    ok = np.isfinite(R)
    J, R = J[ok], R[ok]
    if len(J) < 3:
        raise ValueError("convexity check needs at least 3 points")
    h0 = J[1:-1] - J[:-2]
    h1 = J[2:] - J[1:-1]
    chord = (h1 * R[:-2] + h0 * R[2:]) / (h0 + h1)
    d2 = 2.0 * (chord - R[1:-1])
    bad = [(i + 1, float(J[i + 1]), float(v)) for i, v in enumerate(d2) if v < -slack]
    return ConvexityReport(not bad, slack, d2, bad)


def default_grid(n: int = 19, start: float = 0.05, stop: float = 0.95) -> list[float]:
    return [round(float(x), 12) for x in np.linspace(start, stop, n)]
