"""Elitist random search over CPTP maps in their Stinespring (stacked isometry) form.

A channel with ``r`` Kraus operators ``K_k`` (each ``d_out x d_in``) is stored
as the isometry ``V = [K_1; ...; K_r]`` of shape ``(r d_out, d_in)``; the
completeness relation is exactly ``V^dagger V = I``.  Mutation perturbs ``V``
and restores orthonormal columns, so every candidate is CPTP by construction.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..config import SolverConfig
from ..errors import InfeasibleError
from ..qstate import KrausChannel
from ..tensor_core import orthonormalize, orthonormalize_batch, random_isometry
from .instance import Evaluation, ProblemInstance, evaluate_batch, normalise

# a point counts as feasible when J_norm >= J_target - FEAS_TOL (absorbs round-off at J_target = 1)
FEAS_TOL = 1e-12


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def default_rank(d_in: int, d_out: int) -> int:
    return d_in * d_out


def to_isometry(channel: KrausChannel, kraus_rank: int | None = None) -> np.ndarray:
    """Stack Kraus operators into ``V``, zero-padding to ``kraus_rank`` operators."""
    r = channel.rank if kraus_rank is None else kraus_rank
    k = channel.kraus
    if k.shape[0] > r:
        # compress to the minimal Kraus rank first
        from ..qstate import choi_to_kraus, kraus_to_choi

        k = choi_to_kraus(kraus_to_choi(channel)).kraus
        if k.shape[0] > r:
            raise ValueError(f"channel needs {k.shape[0]} Kraus operators, rank limit is {r}")
    pad = np.zeros((r - k.shape[0],) + k.shape[1:], dtype=np.complex128)
    return np.concatenate([k, pad]).reshape(r * channel.d_out, channel.d_in)


def from_isometry(v: np.ndarray, d_out: int) -> KrausChannel:
    return KrausChannel(v.reshape(-1, d_out, v.shape[-1]))


def random_channel(d_in: int, d_out: int, kraus_rank: int, rng: np.random.Generator) -> KrausChannel:
    """Channel whose Kraus operators are the blocks of a Haar random isometry."""
    if kraus_rank < 1:
        raise ValueError("kraus_rank must be >= 1")
    return from_isometry(random_isometry(d_in, kraus_rank * d_out, rng), d_out)


def _noise(shape, scale: float, rng: np.random.Generator) -> np.ndarray:
    # complex Gaussian entries with E|z|^2 = scale^2
    g = rng.standard_normal(shape + (2,))
    return (scale / np.sqrt(2.0)) * (g[..., 0] + 1j * g[..., 1])


def mutate_channel(channel: KrausChannel, scale: float, rng: np.random.Generator) -> KrausChannel:
    """Perturb the stacked isometry by complex Gaussian noise and re-orthonormalize."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    v = to_isometry(channel)
    return from_isometry(orthonormalize(v + _noise(v.shape, scale, rng)), channel.d_out)


@dataclass(frozen=True)
class SearchResult:
    evaluation: Evaluation
    channel: KrausChannel
    feasible: bool
    evals: int
    restart: int


@dataclass
class _Tracker:
    """Best feasible candidate and highest-J candidate seen during one restart."""

    best_r: float = np.inf
    best_v: np.ndarray | None = None
    best_raw: tuple[float, float] = (0.0, 0.0)
    closest_j: float = -np.inf
    closest_v: np.ndarray | None = None
    closest_raw: tuple[float, float] = (0.0, 0.0)
    evals: int = 0

    def absorb(self, instance, batch, rank, d_out, j_target):
        m, _, d_in = batch.shape
        i_xty, i_xpxt = evaluate_batch(instance, batch.reshape(m, rank, d_out, d_in))
        self.evals += m
        j = i_xty / instance.I_xy
        r = i_xpxt / instance.I_xpx
        feasible = j >= j_target - FEAS_TOL
        if feasible.any():
            idx = np.flatnonzero(feasible)
            b = idx[np.argmin(r[idx])]
            if r[b] < self.best_r:
                self.best_r, self.best_v, self.best_raw = float(r[b]), batch[b].copy(), (i_xty[b], i_xpxt[b])
        c = int(np.argmax(j))
        if j[c] > self.closest_j:
            self.closest_j, self.closest_v, self.closest_raw = float(j[c]), batch[c].copy(), (i_xty[c], i_xpxt[c])
        return j, r


def _ranking(j, r, j_target, config) -> np.ndarray:
    if config.constraint_mode == "penalty":
        return np.argsort(r + config.penalty_weight * np.maximum(0.0, j_target - j), kind="stable")
    # feasible candidates first by rate, then infeasible ones by distance to the target
    feasible = j >= j_target - FEAS_TOL
    return np.lexsort((np.where(feasible, r, j_target - j), ~feasible))


def _run_restart(instance, j_target, config, seeds, d_out, rank, point, restart) -> _Tracker:
    d_in = instance.d_x
    n_pop, n_keep = config.population, config.survivors
    rows = rank * d_out
    rng = _rng(config.seed, point, restart, 0)
    n_seed = min(len(seeds), n_pop)
    pop = np.empty((n_pop, rows, d_in), dtype=np.complex128)
    if n_seed:
        pop[:n_seed] = seeds[:n_seed]
    if n_seed < n_pop:
        pop[n_seed:] = orthonormalize_batch(_noise((n_pop - n_seed, rows, d_in), 1.0, rng))

    track = _Tracker()
    j, r = track.absorb(instance, pop, rank, d_out, j_target)
    n_child = n_pop - n_keep
    parents = np.arange(n_child) % n_keep
    for gen in range(1, config.iterations):
        keep = _ranking(j, r, j_target, config)[:n_keep]
        scale = max(config.mutation_floor, config.mutation_scale * config.mutation_decay ** (gen - 1))
        rng = _rng(config.seed, point, restart, gen)
        elite = pop[keep]
        children = orthonormalize_batch(elite[parents] + _noise((n_child, rows, d_in), scale, rng))
        j_c, r_c = track.absorb(instance, children, rank, d_out, j_target)
        pop = np.concatenate([elite, children])
        j = np.concatenate([j[keep], j_c])
        r = np.concatenate([r[keep], r_c])
    return track


def search(
    instance: ProblemInstance,
    J_target: float,
    config: SolverConfig | None = None,
    *,
    warm_start: tuple[KrausChannel, ...] = (),
    d_out: int | None = None,
    point: int = 0,
) -> SearchResult:
    """Random search for the cheapest channel with ``J_norm >= J_target``.

    Every restart starts from the identity channel (always feasible when
    ``d_out >= d_x``), the ``warm_start`` channels and Haar random fill.
    ``point`` selects an independent RNG stream, so grid points can be run in
    any order.  Raises :class:`InfeasibleError` if no feasible channel is seen.
    """
    config = config or SolverConfig()
    if not J_target > 0:
        raise ValueError("J_target must be positive")
    if J_target > 1.0:
        raise InfeasibleError(
            f"J_target = {J_target} exceeds 1: no channel can raise I(X;Y) (data processing)",
            reason="target_above_one",
        )
    d_in = instance.d_x
    d_out = d_in if d_out is None else d_out
    rank = config.kraus_rank or default_rank(d_in, d_out)
    seeds = []
    if d_out >= d_in:
        eye = np.zeros((d_out, d_in), dtype=np.complex128)
        eye[:d_in, :d_in] = np.eye(d_in)
        seeds.append(to_isometry(KrausChannel(eye), rank))
    seeds += [to_isometry(ch, rank) for ch in warm_start]

    def run(restart):
        return _run_restart(instance, J_target, config, seeds, d_out, rank, point, restart)

    if config.threads > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run, range(config.restarts)))
    else:
        outcomes = [run(k) for k in range(config.restarts)]

    evals = sum(o.evals for o in outcomes)
    # first restart wins ties, independent of completion order
    best = min(range(len(outcomes)), key=lambda k: (outcomes[k].best_r, k))
    o = outcomes[best]
    if o.best_v is None:
        c = max(range(len(outcomes)), key=lambda k: (outcomes[k].closest_j, -k))
        oc = outcomes[c]
        report = SearchResult(normalise(instance, *oc.closest_raw), from_isometry(oc.closest_v, d_out), False, evals, c)
        raise InfeasibleError(
            f"no channel reached J_norm >= {J_target} (best {oc.closest_j:.6f}) within the search budget",
            reason="budget_exhausted",
            best=report,
        )
    return SearchResult(normalise(instance, *o.best_raw), from_isometry(o.best_v, d_out), True, evals, best)


def random_search(
    instance: ProblemInstance, J_target: float, config: SolverConfig | None = None, **kwargs
) -> tuple[Evaluation, KrausChannel]:
    """Best feasible ``(evaluation, channel)``; keyword arguments as in :func:`search`."""
    res = search(instance, J_target, config, **kwargs)
    return res.evaluation, res.channel
