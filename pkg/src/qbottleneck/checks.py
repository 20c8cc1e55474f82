"""Seeded numerical self-checks shared by the ``verify`` command and the test suite.

Each function draws its own random instances from ``seed`` and returns the
raw error measures; callers decide on tolerances.
"""

from __future__ import annotations

import math

import numpy as np

from .qstate import (
    KrausChannel,
    choi_to_kraus,
    kraus_to_choi,
    purify,
    validate_cptp,
    von_neumann_entropy,
)
from .tensor_core import SubsystemDims, partial_trace, partial_transpose, random_isometry, trace_norm


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def random_kraus(d_in: int, d_out: int, rank: int, rng: np.random.Generator) -> KrausChannel:
    return KrausChannel(random_isometry(d_in, rank * d_out, rng).reshape(rank, d_out, d_in))


def gradient_fd_errors(
    n_points: int = 20, seed: int = 0, eps: float = 1e-5, min_eig: float = 1e-3, relative_to: str = "derivative"
) -> np.ndarray:
    """Relative error of the analytic directional derivative against a central difference.

    Points are full-rank two-qubit inputs with full Kraus-rank channels, a
    random ``beta`` in ``[0, 5]`` and a random multiplier; directions are
    Hermitian with unit Frobenius norm.  Channels whose Choi matrix has an
    eigenvalue below ``min_eig`` are redrawn: that close to the cone boundary
    the difference quotient is dominated by its ``eps^2`` truncation term.
    ``relative_to="gradient"`` divides by ``||G||_F`` instead of the directional
    derivative, which stays meaningful when the direction is nearly orthogonal to ``G``.
    """
    if relative_to not in ("derivative", "gradient"):
        raise ValueError(f"unknown relative_to {relative_to!r}")
    from .qib.instance import build_instance
    from .qib.lagrangian import lagrangian, lagrangian_gradient

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(101,)))
    dims = SubsystemDims.of(x=2, xt=2)
    out = []
    for _ in range(n_points):
        inst = build_instance(random_density(4, rng))
        psi = kraus_to_choi(random_kraus(2, 2, 4, rng)).matrix
        while np.linalg.eigvalsh(psi)[0] < min_eig:
            psi = kraus_to_choi(random_kraus(2, 2, 4, rng)).matrix
        beta = float(rng.uniform(0.0, 5.0))
        lam = random_hermitian(2, rng)
        b = random_hermitian(4, rng)
        b /= np.linalg.norm(b)
        x = partial_transpose(psi, dims, "x")

        def f(xx):
            return lagrangian(inst, partial_transpose(xx, dims, "x"), beta, lam)

        fd = (f(x + eps * b) - f(x - eps * b)) / (2.0 * eps)
        g = lagrangian_gradient(inst, psi, beta, lam)
        an = float(np.trace(g @ b).real)
        scale = abs(an) if relative_to == "derivative" else float(np.linalg.norm(g))
        out.append(abs(fd - an) / max(scale, 1e-300))
    return np.array(out)


def cptp_roundtrip_errors(n: int = 50, seed: int = 0) -> tuple[np.ndarray, bool]:
    """Action error of Kraus -> Choi -> Kraus on random states, and whether every Choi passed validation."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(102,)))
    errs = []
    all_valid = True
    for _ in range(n):
        d_in, d_out = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        # at least ceil(d_in / d_out) operators for the isometry to exist
        rank = int(rng.integers(-(-d_in // d_out), d_in * d_out + 1))
        ch = random_kraus(d_in, d_out, rank, rng)
        choi = kraus_to_choi(ch)
        all_valid &= validate_cptp(choi).passed
        back = choi_to_kraus(choi)
        rho = random_density(d_in, rng)
        errs.append(float(np.max(np.abs(ch(rho) - back(rho)))))
    return np.array(errs), bool(all_valid)


def data_processing_sample(n: int = 200, seed: int = 0) -> np.ndarray:
    """``J_norm`` of random channels on random two-qubit inputs of random rank."""
    from .qib.instance import build_instance, evaluate

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(103,)))
    out = []
    while len(out) < n:
        rho = random_density(4, rng, rank=int(rng.integers(1, 5)))
        try:
            inst = build_instance(rho)
        except ValueError:
            continue
        ch = random_kraus(2, 2, int(rng.integers(1, 5)), rng)
        out.append(evaluate(inst, ch).J_norm)
    return np.array(out)


def fannes_sample(n: int = 200, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``(|S(rho) - S(sigma)|, t ln d + eta(t) / ln 2)`` for random close pairs, ``t = ||rho - sigma||_1 <= 1/e``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(104,)))
    lhs, rhs = [], []
    for _ in range(n):
        d = int(rng.integers(2, 6))
        rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        other = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        mix = float(rng.uniform(0.0, 1.0))
        sigma = (1.0 - mix) * rho + mix * other
        t = trace_norm(rho - sigma)
        if t > 1.0 / math.e:
            # shrink the mixing so the pair lies in the bound's range
            mix *= (1.0 / math.e) / t * float(rng.uniform(0.1, 1.0))
            sigma = (1.0 - mix) * rho + mix * other
            t = trace_norm(rho - sigma)
        eta = -t * math.log(t) if t > 0 else 0.0
        lhs.append(abs(von_neumann_entropy(rho) - von_neumann_entropy(sigma)))
        rhs.append(t * math.log(d) + eta / math.log(2.0))
    return np.array(lhs), np.array(rhs)


def purification_errors(n: int = 50, seed: int = 0) -> tuple[float, float]:
    """Worst ``max|Tr_xp tau - rho|`` and worst ``|Tr tau^2 - 1|`` over random states."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(105,)))
    marg, purity = 0.0, 0.0
    for _ in range(n):
        d = int(rng.integers(2, 5))
        rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        tau, dims = purify(rho)
        marg = max(marg, float(np.max(np.abs(partial_trace(tau, dims, ["x"]) - rho))))
        purity = max(purity, abs(float(np.trace(tau @ tau).real) - 1.0))
    return marg, purity

