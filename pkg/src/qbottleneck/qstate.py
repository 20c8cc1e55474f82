"""Quantum states, entropies and channel representations.

States are plain complex ``ndarray`` objects paired with a
:class:`~qbottleneck.tensor_core.SubsystemDims`.  Channels come in two
representations:

* :class:`KrausChannel`, ``N(rho) = sum_k K_k rho K_k^dagger``;
* :class:`ChoiMatrix`, ``Psi = sum_ij |i><j| (x) N(|i><j|)`` on ``x (x) xt``
  (input factor first, unnormalised so that ``Tr_xt Psi = I_x`` for a
  trace-preserving map).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .errors import InvalidStateError, NotCompletelyPositiveError
from .tensor_core import (
    RANK_TOL,
    SubsystemDims,
    hermitian_eig,
    hermiticity_error,
    hermitize,
    partial_trace,
    partial_transpose,
)

NEG_TOL = 1e-10
TRACE_TOL = 1e-10
COMPLETENESS_TOL = 1e-10


def validate_density(rho: np.ndarray, tol: float = NEG_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array, raising InvalidStateError if it is not a state."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {rho.shape}")
    if hermiticity_error(rho) > 1e-12:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density matrix has trace {np.trace(rho).real:.12g}")
    w = hermitian_eig(rho).values
    if w[0] < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return rho


def entropy_from_spectrum(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -NEG_TOL:
        raise InvalidStateError(f"negative eigenvalue {w.min():.3e} in entropy")
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-Tr rho ln rho`` in nats; eigenvalues within ``-1e-10`` of zero count as zero."""
    return entropy_from_spectrum(hermitian_eig(hermitize(rho)).values)


def entropies(stack: np.ndarray) -> np.ndarray:
    """Entropies of a stack ``(m, n, n)`` of density matrices via the kernel backend."""
    s, lo = _backend.entropy_batch(np.ascontiguousarray(stack))
    if lo.size and lo.min() < -NEG_TOL:
        raise InvalidStateError(f"negative eigenvalue {lo.min():.3e} in batched entropy")
    return s


def mutual_information(rho: np.ndarray, dims: SubsystemDims) -> float:
    """``S(A) + S(B) - S(AB)`` for a two-factor state."""
    if len(dims.labels) != 2:
        raise ValueError("mutual_information needs exactly two factors")
    a, b = dims.labels
    return (
        von_neumann_entropy(partial_trace(rho, dims, [a]))
        + von_neumann_entropy(partial_trace(rho, dims, [b]))
        - von_neumann_entropy(rho)
    )


def _purification_basis(rho: np.ndarray):
    offdiag = rho - np.diag(np.diagonal(rho))
    if np.max(np.abs(offdiag), initial=0.0) <= 1e-14:
        # keep the computational pairing |i>_xp |i>_x for diagonal inputs
        return np.clip(np.diagonal(rho).real, 0.0, None), np.eye(rho.shape[0], dtype=np.complex128)
    w, v = hermitian_eig(hermitize(rho))
    order = np.argsort(-w, kind="stable")
    return np.clip(w[order], 0.0, None), v[:, order]


def purification_vector(rho: np.ndarray) -> np.ndarray:
    """``|w> = sum_i sqrt(lambda_i) |i>_xp |v_i>_x`` as a coefficient matrix ``W[i, :] = sqrt(lambda_i) v_i``.

    The vector itself is ``W.reshape(-1)`` in the (xp, x) product basis.
    """
    lam, v = _purification_basis(np.asarray(rho, dtype=np.complex128))
    return np.sqrt(lam)[:, None] * v.T


def purify(rho: np.ndarray) -> tuple[np.ndarray, SubsystemDims]:
    """Pure state on ``xp (x) x`` whose ``x`` marginal is ``rho``.

    Diagonal inputs are purified in the computational pairing; otherwise the
    eigenvectors are taken in order of decreasing eigenvalue.  The reference
    always has the same dimension as ``rho``.
    """
    rho = validate_density(rho)
    w = purification_vector(rho).reshape(-1)
    d = rho.shape[0]
    return np.outer(w, w.conj()), SubsystemDims.of(xp=d, x=d)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map from ``d_in`` to ``d_out`` dimensions; ``kraus`` has shape ``(r, d_out, d_in)``."""

    kraus: np.ndarray
    d_in: int = field(init=False)
    d_out: int = field(init=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3:
            raise ValueError(f"Kraus operators must be a stack of matrices, got shape {k.shape}")
        object.__setattr__(self, "kraus", k)
        object.__setattr__(self, "d_out", k.shape[1])
        object.__setattr__(self, "d_in", k.shape[2])
        res = self.completeness_error()
        if res > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators violate completeness by {res:.3e}")

    @property
    def rank(self) -> int:
        return self.kraus.shape[0]

    def completeness_error(self) -> float:
        k = self.kraus
        s = np.einsum("kai,kaj->ij", k.conj(), k)
        return float(np.max(np.abs(s - np.eye(k.shape[2]))))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        k = self.kraus
        return np.einsum("kai,ij,kbj->ab", k, rho, k.conj())

    @classmethod
    def identity(cls, d: int) -> "KrausChannel":
        return cls(np.eye(d, dtype=np.complex128)[None])

    @classmethod
    def dephasing(cls) -> "KrausChannel":
        """Qubit ``rho -> (rho + Z rho Z) / 2``."""
        z = np.diag([1.0, -1.0]).astype(np.complex128)
        return cls(np.stack([z, np.eye(2)]) / np.sqrt(2.0))

    @classmethod
    def replacement(cls, sigma: np.ndarray, d_in: int) -> "KrausChannel":
        """``rho -> Tr(rho) sigma``."""
        sigma = validate_density(sigma)
        lam, v = hermitian_eig(sigma)
        ops = []
        for l, vec in zip(lam, v.T):
            if l <= RANK_TOL:
                continue
            for i in range(d_in):
                e = np.zeros(d_in, dtype=np.complex128)
                e[i] = 1.0
                ops.append(np.sqrt(l) * np.outer(vec, e))
        return cls(np.stack(ops))

    def to_json(self) -> dict:
        return {"d_in": self.d_in, "d_out": self.d_out, "kraus": [encode_matrix(k) for k in self.kraus]}

    @classmethod
    def from_json(cls, obj: dict) -> "KrausChannel":
        d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
        ops = np.stack([decode_matrix(m, d_out, d_in) for m in obj["kraus"]])
        return cls(ops)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix on ``x (x) xt`` (labels in that order)."""

    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        n = self.d_in * self.d_out
        if m.shape != (n, n):
            raise ValueError(f"Choi matrix shape {m.shape} does not match {self.d_in}x{self.d_out}")
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> SubsystemDims:
        return SubsystemDims.of(x=self.d_in, xt=self.d_out)

    @classmethod
    def identity(cls, d: int) -> "ChoiMatrix":
        phi = np.eye(d, dtype=np.complex128).reshape(-1)
        return cls(np.outer(phi, phi), d, d)

    def to_json(self) -> dict:
        return {"d_in": self.d_in, "d_out": self.d_out, "choi": encode_matrix(self.matrix)}

    @classmethod
    def from_json(cls, obj: dict) -> "ChoiMatrix":
        d_in, d_out = int(obj["d_in"]), int(obj["d_out"])
        n = d_in * d_out
        return cls(decode_matrix(obj["choi"], n, n), d_in, d_out)


def encode_matrix(m: np.ndarray) -> list:
    """Row-major nested list of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def decode_matrix(obj, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`encode_matrix`; a flat list of pairs is accepted too."""
    a = np.asarray(obj, dtype=float)
    if a.shape[-1] != 2 or a.size != rows * cols * 2:
        raise ValueError(f"expected {rows}x{cols} matrix of [re, im] pairs, got array of shape {a.shape}")
    a = a.reshape(rows, cols, 2)
    return a[..., 0] + 1j * a[..., 1]


def save_channel(path, channel: KrausChannel | ChoiMatrix) -> None:
    Path(path).write_text(json.dumps(channel.to_json()))


def load_channel(path) -> KrausChannel | ChoiMatrix:
    """Read a channel file; ``"kraus"`` files give a KrausChannel, ``"choi"`` files a ChoiMatrix."""
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict):
        raise ValueError("channel file must hold a JSON object")
    if "kraus" in obj:
        return KrausChannel.from_json(obj)
    if "choi" in obj:
        return ChoiMatrix.from_json(obj)
    raise ValueError("channel file has neither 'kraus' nor 'choi'")


def _move_to_front(rho: np.ndarray, dims: SubsystemDims, target: str):
    i = dims.index(target)
    k = len(dims.sizes)
    t = rho.reshape(dims.sizes + dims.sizes)
    perm = [i] + [j for j in range(k) if j != i]
    t = t.transpose(perm + [k + p for p in perm])
    d = dims.sizes[i]
    rest = dims.total // d
    return t.reshape(d, rest, d, rest), perm


def _move_back(t: np.ndarray, dims: SubsystemDims, perm, d_new: int) -> np.ndarray:
    k = len(dims.sizes)
    sizes = [dims.sizes[p] for p in perm]
    sizes[0] = d_new
    t = t.reshape(sizes + sizes)
    inv = list(np.argsort(perm))
    t = t.transpose(inv + [k + p for p in inv])
    n = int(np.prod(sizes))
    return t.reshape(n, n)


def apply_channel(
    channel: KrausChannel, rho: np.ndarray, dims: SubsystemDims, target: str
) -> np.ndarray:
    """``sum_k (K_k (x) I) rho (K_k (x) I)^dagger`` on factor ``target``.

    The output keeps the factor order of ``dims`` with ``target`` resized to
    ``channel.d_out``.
    """
    if dims.size(target) != channel.d_in:
        raise ValueError(f"channel input dim {channel.d_in} != factor {target!r} dim {dims.size(target)}")
    t, perm = _move_to_front(np.asarray(rho, dtype=np.complex128), dims, target)
    k = channel.kraus
    out = np.einsum("kai,irjs,kbj->arbs", k, t, k.conj())
    return _move_back(out, dims, perm, channel.d_out)


def kraus_to_choi(channel: KrausChannel) -> ChoiMatrix:
    k = channel.kraus
    # Psi[(i,a),(j,b)] = sum_k K_k[a,i] conj(K_k[b,j])
    m = np.einsum("kai,kbj->iajb", k, k.conj()).reshape(channel.d_in * channel.d_out, -1)
    return ChoiMatrix(m, channel.d_in, channel.d_out)


def choi_to_kraus(choi: ChoiMatrix) -> KrausChannel:
    """Kraus operators ``sqrt(mu) * reshape(u)`` from the eigenpairs of the Choi matrix."""
    w, v = hermitian_eig(hermitize(choi.matrix), tol=1e-9)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if w[0] < -NEG_TOL * scale:
        raise NotCompletelyPositiveError(f"Choi matrix has negative eigenvalue {w[0]:.3e}")
    keep = w > RANK_TOL * scale
    order = np.argsort(-w[keep], kind="stable")
    ops = []
    for mu, u in zip(w[keep][order], v[:, keep][:, order].T):
        ops.append(np.sqrt(mu) * u.reshape(choi.d_in, choi.d_out).T)
    if not ops:
        raise NotCompletelyPositiveError("Choi matrix is zero")
    return KrausChannel(np.stack(ops))


def choi_apply(
    choi: ChoiMatrix, rho: np.ndarray, dims: SubsystemDims, target: str, new_label: str | None = None
) -> tuple[np.ndarray, SubsystemDims]:
    """``Tr_target[(Psi^{T_target} (x) I)(rho (x) I_out)]``, the channel acting on one factor.

    Returns the output state and its dims (``target`` replaced by ``new_label``,
    default ``"xt"``, in the same position).
    """
    if dims.size(target) != choi.d_in:
        raise ValueError(f"Choi input dim {choi.d_in} != factor {target!r} dim {dims.size(target)}")
    pt = partial_transpose(choi.matrix, choi.dims, "x")
    t, perm = _move_to_front(np.asarray(rho, dtype=np.complex128), dims, target)
    pt4 = pt.reshape(choi.d_in, choi.d_out, choi.d_in, choi.d_out)
    # (PT (x) I_rest)(I_out (x) rho): contract the shared input index, then trace it
    out = np.einsum("jaib,irjs->arbs", pt4, t)
    new_label = new_label or "xt"
    new_dims = dims.relabel(target, new_label, choi.d_out)
    return _move_back(out, dims, perm, choi.d_out), new_dims


@dataclass(frozen=True)
class CPTPReport:
    min_eigenvalue: float
    tp_deviation: float
    positive: bool
    trace_preserving: bool

    @property
    def passed(self) -> bool:
        return self.positive and self.trace_preserving

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "fail"
        return (
            f"CPTP: {verdict} (min eigenvalue {self.min_eigenvalue:.3e}, "
            f"max|Tr_xt Psi - I| {self.tp_deviation:.3e})"
        )


def validate_cptp(choi: ChoiMatrix, tol: float = 1e-8) -> CPTPReport:
    w = hermitian_eig(hermitize(choi.matrix), tol=1e-9).values
    reduced = partial_trace(choi.matrix, choi.dims, ["x"])
    dev = float(np.max(np.abs(reduced - np.eye(choi.d_in))))
    return CPTPReport(float(w[0]), dev, bool(w[0] >= -tol), bool(dev <= tol))


def joint_from_choi(choi: ChoiMatrix, tau: np.ndarray, tau_dims: SubsystemDims | None = None) -> np.ndarray:
    """Output ``tau_{xp xt}`` of the channel applied to the ``x`` half of a pure ``tau_{xp x}``.

    Writing the purification as ``|w> = (W (x) I)|Phi>`` with coefficient
    matrix ``W`` (``W W^dagger`` is the reference marginal), the result is
    ``(W (x) I) Psi (W^dagger (x) I)``.  When ``W`` is real and diagonal this
    is ``(rho_xp^{1/2} (x) I) Psi (rho_xp^{1/2} (x) I)``.
    """
    tau = np.asarray(tau, dtype=np.complex128)
    if tau_dims is None:
        d = int(round(np.sqrt(tau.shape[0])))
        tau_dims = SubsystemDims.of(xp=d, x=d)
    if tau_dims.labels != ("xp", "x"):
        raise ValueError("tau must be labelled (xp, x)")
    if tau_dims.size("x") != choi.d_in:
        raise ValueError(f"Choi input dim {choi.d_in} != x dim {tau_dims.size('x')}")
    w, v = hermitian_eig(hermitize(tau))
    if abs(w[-1] - 1.0) > 1e-9:
        raise InvalidStateError("joint_from_choi needs a pure purification")
    wmat = (np.sqrt(w[-1]) * v[:, -1]).reshape(tau_dims.sizes)
    big = np.kron(wmat, np.eye(choi.d_out))
    return hermitize(big @ choi.matrix @ big.conj().T)
