"""Dense complex linear algebra on small Hilbert spaces.

Composite indices follow one convention everywhere: factors are ordered as
listed in :class:`SubsystemDims`, the leftmost factor varies slowest
(row-major).  Labels used across the package are ``"x"``, ``"xp"`` (the
purifying reference X'), ``"y"`` and ``"xt"`` (the channel output).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import DomainError, NotHermitianError

HERMITICITY_TOL = 1e-12
RANK_TOL = 1e-12
JACOBI_TOL = 1e-14


@dataclass(frozen=True)
class SubsystemDims:
    """Ordered, labelled tensor factors."""

    labels: tuple[str, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.sizes):
            raise ValueError("labels and sizes differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in {self.labels}")
        if any(int(s) < 1 for s in self.sizes):
            raise ValueError(f"factor sizes must be >= 1, got {self.sizes}")

    @classmethod
    def of(cls, **factors: int) -> "SubsystemDims":
        """``SubsystemDims.of(x=2, y=2)``; keyword order is factor order."""
        return cls(tuple(factors), tuple(int(v) for v in factors.values()))

    @property
    def total(self) -> int:
        return int(np.prod(self.sizes))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def size(self, label: str) -> int:
        return self.sizes[self.index(label)]

    def keep(self, labels: Iterable[str]) -> "SubsystemDims":
        keep = set(labels)
        for lab in keep:
            self.index(lab)
        pairs = [(l, s) for l, s in zip(self.labels, self.sizes) if l in keep]
        return SubsystemDims(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def relabel(self, old: str, new: str, size: int | None = None) -> "SubsystemDims":
        i = self.index(old)
        labels = list(self.labels)
        sizes = list(self.sizes)
        labels[i] = new
        if size is not None:
            sizes[i] = int(size)
        return SubsystemDims(tuple(labels), tuple(sizes))

    def __add__(self, other: "SubsystemDims") -> "SubsystemDims":
        return SubsystemDims(self.labels + other.labels, self.sizes + other.sizes)


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _check_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermiticity_error(h: np.ndarray) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def hermitize(h: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part; used on results of products that are Hermitian in exact arithmetic."""
    h = np.asarray(h, dtype=np.complex128)
    return 0.5 * (h + h.conj().T)


def hermitian_eig(h: np.ndarray, tol: float = HERMITICITY_TOL) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back ascending, eigenvectors as the columns of a unitary.
    Raises :class:`NotHermitianError` when ``max|H - H^dagger| > tol``.
    """
    h = _check_square(h)
    err = hermiticity_error(h)
    if err > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {err:.3e})")
    w, v, _ = _backend.jacobi_eigh(np.ascontiguousarray(hermitize(h)), JACOBI_TOL)
    return EigenDecomposition(w, v)


def _reassemble(values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return hermitize((vectors * values) @ vectors.conj().T)


def matrix_func(
    h: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    support_only: bool = False,
    *,
    eig: EigenDecomposition | None = None,
) -> np.ndarray:
    """Apply ``f`` to the spectrum of a Hermitian matrix.

    With ``support_only`` eigenvalues below ``RANK_TOL * max|lambda|`` are
    mapped to zero instead of being passed to ``f``.
    """
    w, v = eig if eig is not None else hermitian_eig(h)
    w = np.asarray(w, dtype=float)
    if support_only:
        scale = float(np.max(np.abs(w))) if w.size else 0.0
        on = w > RANK_TOL * scale
        fw = np.zeros_like(w)
        if np.any(on):
            fw[on] = f(w[on])
    else:
        fw = np.asarray(f(w), dtype=float)
    return _reassemble(fw, v)


def _check_nonnegative(w: np.ndarray, name: str, strict: bool) -> None:
    scale = max(float(np.max(np.abs(w))), 1.0) if w.size else 1.0
    if strict and np.any(w <= 0):
        raise DomainError(f"{name} needs a positive definite argument (min eigenvalue {w.min():.3e})")
    if np.any(w < -1e-10 * scale):
        raise DomainError(f"{name} of a matrix with negative eigenvalue {w.min():.3e}")


def matrix_log(h: np.ndarray, support_only: bool = False, *, eig=None) -> np.ndarray:
    """Natural logarithm; with ``support_only`` the 0 log 0 = 0 convention applies on the kernel."""
    e = eig if eig is not None else hermitian_eig(h)
    _check_nonnegative(e.values, "log", strict=not support_only)
    return matrix_func(h, np.log, support_only, eig=e)


def matrix_exp(h: np.ndarray, *, eig=None) -> np.ndarray:
    return matrix_func(h, np.exp, eig=eig)


def matrix_sqrt(h: np.ndarray, *, eig=None) -> np.ndarray:
    e = eig if eig is not None else hermitian_eig(h)
    _check_nonnegative(e.values, "sqrt", strict=False)
    return matrix_func(h, lambda w: np.sqrt(np.clip(w, 0.0, None)), eig=e)


def matrix_inv_sqrt(h: np.ndarray, support_only: bool = True, *, eig=None) -> np.ndarray:
    """``H^{-1/2}``; the pseudo-inverse on the support when ``support_only``."""
    e = eig if eig is not None else hermitian_eig(h)
    _check_nonnegative(e.values, "inverse sqrt", strict=not support_only)
    return matrix_func(h, lambda w: 1.0 / np.sqrt(w), support_only, eig=e)


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of factors, folded left to right.

    ``kron(a, b, c)`` is ``np.kron(np.kron(a, b), c)``; the fixed fold order
    makes repeated assemblies bit-identical.
    """
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f))
    return out


def _as_tensor(m: np.ndarray, dims: SubsystemDims) -> np.ndarray:
    m = np.asarray(m)
    n = dims.total
    if m.shape != (n, n):
        raise ValueError(f"matrix shape {m.shape} inconsistent with dims {dims.sizes}")
    return m.reshape(dims.sizes + dims.sizes)


def partial_trace(m: np.ndarray, dims: SubsystemDims, keep: Iterable[str]) -> np.ndarray:
    """Trace out every factor not in ``keep``; kept factors stay in ``dims`` order."""
    keep = set(keep)
    kept_idx = [dims.index(l) for l in dims.labels if l in keep]
    for lab in keep:
        dims.index(lab)
    t = _as_tensor(m, dims)
    k = len(dims.sizes)
    row = list(range(k))
    col = [i if i not in kept_idx else k + i for i in range(k)]
    out_sub = [i for i in kept_idx] + [k + i for i in kept_idx]
    res = np.einsum(t, row + col, out_sub)
    d = int(np.prod([dims.sizes[i] for i in kept_idx])) if kept_idx else 1
    return res.reshape(d, d)


def partial_transpose(m: np.ndarray, dims: SubsystemDims, sys: str) -> np.ndarray:
    """Transpose the indices of factor ``sys`` only."""
    i = dims.index(sys)
    k = len(dims.sizes)
    t = _as_tensor(m, dims)
    axes = list(range(2 * k))
    axes[i], axes[k + i] = axes[k + i], axes[i]
    return t.transpose(axes).reshape(dims.total, dims.total)


def permute(m: np.ndarray, dims: SubsystemDims, order: Sequence[str]) -> np.ndarray:
    """Reorder tensor factors of an operator to the label order ``order``."""
    perm = [dims.index(l) for l in order]
    if sorted(perm) != list(range(len(dims.sizes))):
        raise ValueError(f"order {order} is not a permutation of {dims.labels}")
    k = len(perm)
    t = _as_tensor(m, dims)
    return t.transpose(perm + [k + p for p in perm]).reshape(dims.total, dims.total)


def trace_norm(h: np.ndarray) -> float:
    return float(np.sum(np.abs(hermitian_eig(h).values)))


def random_isometry(d_in: int, d_out: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed isometry ``V`` (``d_out x d_in``, ``V^dagger V = I``).

    QR of a standard complex Gaussian matrix, with the phases of R's diagonal
    moved into Q so the distribution is invariant under left unitaries.
    """
    if d_out < d_in:
        raise ValueError(f"an isometry needs d_out >= d_in (got {d_in} -> {d_out})")
    g = (rng.standard_normal((d_out, d_in)) + 1j * rng.standard_normal((d_out, d_in))) / np.sqrt(2.0)
    return orthonormalize(g)


def orthonormalize(g: np.ndarray) -> np.ndarray:
    """Phase-fixed Q factor of a thin QR decomposition."""
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * ph


def orthonormalize_batch(g: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(d)
    ph = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    return q * ph[..., None, :]
