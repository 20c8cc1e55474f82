"""Closed-form check: dephasing on classically correlated two-qubit states."""

from __future__ import annotations

from dataclasses import dataclass

from ..presets import classical_state
from ..qstate import KrausChannel
from .instance import build_instance, evaluate

BENCHMARK_TOL = 1e-10


@dataclass(frozen=True)
class DephasingReport:
    p: tuple[float, ...]
    J_norm: float
    R_norm: float
    I_xt_y: float  # nats
    I_xp_xt: float  # nats

    @property
    def passed(self) -> bool:
        return abs(self.J_norm - 1.0) <= BENCHMARK_TOL and abs(self.R_norm - 0.5) <= BENCHMARK_TOL

    def __str__(self) -> str:
        return (
            f"dephasing p={self.p}: J_norm={self.J_norm:.12f} R_norm={self.R_norm:.12f} "
            f"I(Xt;Y)={self.I_xt_y:.6f} I(X';Xt)={self.I_xp_xt:.6f} nats"
        )


def analytic_dephasing_benchmark(p, *, check: bool = True) -> DephasingReport:
    """Evaluate ``rho -> (rho + Z rho Z)/2`` on the classical preset with weights ``p``.

    The channel keeps every classical correlation with ``y`` but only half of
    the reference information, so ``J_norm = 1`` and ``R_norm = 1/2``.  With
    ``check`` an ``AssertionError`` is raised when either misses by more than
    ``1e-10``.  A product state raises ``DegenerateInstanceError``.
    """
    inst = build_instance(classical_state(p))
    ev = evaluate(inst, KrausChannel.dephasing())
    report = DephasingReport(tuple(float(x) for x in p), ev.J_norm, ev.R_norm, ev.I_xt_y, ev.I_xp_xt)
    if check and not report.passed:
        raise AssertionError(f"analytic benchmark failed: {report}")
    return report
