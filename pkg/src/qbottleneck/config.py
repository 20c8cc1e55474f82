"""Solver configuration shared by the classical and quantum solvers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np


def default_beta_grid() -> tuple[float, ...]:
    return tuple(float(b) for b in np.geomspace(2.0**-4, 2.0**10, 30))


@dataclass(frozen=True)
class SolverConfig:
    # random search
    population: int = 64
    survivors: int = 8
    iterations: int = 1500
    mutation_scale: float = 0.3
    mutation_decay: float = 0.97
    mutation_floor: float = 1e-3
    kraus_rank: int | None = None  # None: d_in * d_out
    restarts: int = 4
    constraint_mode: str = "filter"  # "filter" | "penalty"
    penalty_weight: float = 10.0
    # beta sweeps and fixed-point iterations
    beta_grid: tuple[float, ...] = field(default_factory=default_beta_grid)
    fixed_point_tol: float = 1e-10
    max_fp_iters: int = 20000
    damping: float = 0.3
    # classical iteration budget
    ib_max_iters: int = 100000
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.survivors < 1 or self.survivors > self.population:
            raise ValueError("need 1 <= survivors <= population")
        if self.mutation_scale <= 0 or self.mutation_floor <= 0:
            raise ValueError("mutation scales must be positive")
        if not 0 < self.mutation_decay <= 1:
            raise ValueError("mutation_decay must lie in (0, 1]")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.constraint_mode not in ("filter", "penalty"):
            raise ValueError(f"unknown constraint_mode {self.constraint_mode!r}")
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("restarts and iterations must be >= 1")
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))

    def replace(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)
