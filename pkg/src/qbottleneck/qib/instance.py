"""Problem instances and evaluation of the relevance constraint and the rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _backend
from ..errors import DegenerateInstanceError
from ..qstate import (
    ChoiMatrix,
    KrausChannel,
    choi_apply,
    joint_from_choi,
    apply_channel,
    mutual_information,
    purification_vector,
    validate_density,
    von_neumann_entropy,
)
from ..tensor_core import SubsystemDims, partial_trace


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    rho_xy: np.ndarray
    dims: SubsystemDims  # labels ("x", "y")
    rho_x: np.ndarray
    rho_y: np.ndarray
    tau: np.ndarray  # pure state on (xp, x)
    purifier: np.ndarray  # coefficient matrix W, |w> = vec(W)
    I_xy: float
    I_xpx: float
    S_x: float
    S_y: float

    @property
    def d_x(self) -> int:
        return self.dims.size("x")

    @property
    def d_y(self) -> int:
        return self.dims.size("y")

    @property
    def tau_dims(self) -> SubsystemDims:
        return SubsystemDims.of(xp=self.d_x, x=self.d_x)


def build_instance(rho_xy, dims: SubsystemDims | None = None) -> ProblemInstance:
    """Marginal, purification and reference informations for a bipartite input."""
    rho_xy = validate_density(rho_xy)
    if dims is None:
        d = int(round(np.sqrt(rho_xy.shape[0])))
        dims = SubsystemDims.of(x=d, y=d)
    if dims.labels != ("x", "y"):
        raise ValueError("instance state must be labelled (x, y)")
    if dims.total != rho_xy.shape[0]:
        raise ValueError("dims do not match the state")
    rho_x = partial_trace(rho_xy, dims, ["x"])
    rho_y = partial_trace(rho_xy, dims, ["y"])
    i_xy = mutual_information(rho_xy, dims)
    if i_xy <= 1e-12:
        raise DegenerateInstanceError(f"I(X;Y) = {i_xy:.3e}: the state carries no relevant correlation")
    w = purification_vector(rho_x)
    vec = w.reshape(-1)
    s_x = von_neumann_entropy(rho_x)
    return ProblemInstance(
        rho_xy=rho_xy,
        dims=dims,
        rho_x=rho_x,
        rho_y=rho_y,
        tau=np.outer(vec, vec.conj()),
        purifier=w,
        I_xy=i_xy,
        I_xpx=2.0 * s_x,
        S_x=s_x,
        S_y=von_neumann_entropy(rho_y),
    )


@dataclass(frozen=True)
class Evaluation:
    I_xt_y: float  # I(Xt;Y) on rho_{xt y}
    I_xp_xt: float  # I(X';Xt) on tau_{xp xt}
    J_norm: float
    R_norm: float


def output_states(instance: ProblemInstance, kraus: np.ndarray):
    """Batched ``rho_xt``, ``rho_{xt y}`` and ``tau_{xp xt}`` for Kraus stacks ``(m, r, d_out, d_in)``."""
    k = np.asarray(kraus, dtype=np.complex128)
    m, r, d_out, d_in = k.shape
    dx, dy = instance.d_x, instance.d_y
    kc = k.conj()
    rho4 = instance.rho_xy.reshape(dx, dy, dx, dy)
    # rho_{xt y}[a y, b z] = sum_k K[a,i] rho[i y, j z] conj(K[b,j])
    t1 = np.matmul(k.reshape(m * r * d_out, d_in), rho4.reshape(dx, -1)).reshape(m, r, d_out, dy, dx, dy)
    rho_xty = np.einsum("mkayjz,mkbj->mayzb", t1, kc).transpose(0, 1, 2, 4, 3).reshape(m, d_out * dy, d_out * dy)
    rho_xt = np.einsum("mayby->mab", rho_xty.reshape(m, d_out, dy, d_out, dy))
    # tau_{xp xt}: Kraus vectors u_k = W K_k^T
    u = np.matmul(instance.purifier[None, None], np.swapaxes(k, -1, -2)).reshape(m, r, dx * d_out)
    tau_xpxt = np.einsum("mki,mkj->mij", u, u.conj())
    return rho_xt, rho_xty, tau_xpxt


def evaluate_batch(instance: ProblemInstance, kraus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(I(Xt;Y), I(X';Xt))`` in nats for every channel in a Kraus stack ``(m, r, d_out, d_in)``."""
    k = np.asarray(kraus, dtype=np.complex128)
    if k.ndim != 4 or k.shape[3] != instance.d_x:
        raise ValueError(f"expected Kraus stack (m, r, d_out, {instance.d_x}), got {k.shape}")
    s_xt, s_xty, s_xpxt, _ = _backend.channel_entropies(k, instance.rho_xy, instance.purifier, instance.d_y)
    i_xty = s_xt + instance.S_y - s_xty
    # the reference marginal of tau_{xp xt} is untouched by the channel
    i_xpxt = s_xt + instance.S_x - s_xpxt
    return i_xty, i_xpxt


def normalise(instance: ProblemInstance, i_xty: float, i_xpxt: float) -> Evaluation:
    return Evaluation(float(i_xty), float(i_xpxt), float(i_xty / instance.I_xy), float(i_xpxt / instance.I_xpx))


def evaluate_choi(instance: ProblemInstance, choi: ChoiMatrix) -> Evaluation:
    """Relevance and rate of a channel given by its Choi matrix."""
    if choi.d_in != instance.d_x:
        raise ValueError(f"channel input dim {choi.d_in} != d_x {instance.d_x}")
    rho_xty, _ = choi_apply(choi, instance.rho_xy, instance.dims, "x")
    tau_xpxt = joint_from_choi(choi, instance.tau, instance.tau_dims)
    i_xty = mutual_information(rho_xty, SubsystemDims.of(xt=choi.d_out, y=instance.d_y))
    i_xpxt = mutual_information(tau_xpxt, SubsystemDims.of(xp=instance.d_x, xt=choi.d_out))
    return normalise(instance, i_xty, i_xpxt)


def evaluate(instance: ProblemInstance, channel: KrausChannel) -> Evaluation:
    """Relevance and rate of one channel, computed from explicit output states."""
    if channel.d_in != instance.d_x:
        raise ValueError(f"channel input dim {channel.d_in} != d_x {instance.d_x}")
    rho_xty = apply_channel(channel, instance.rho_xy, instance.dims, "x")
    tau_xpxt = apply_channel(channel, instance.tau, instance.tau_dims, "x")
    i_xty = mutual_information(rho_xty, SubsystemDims.of(xt=channel.d_out, y=instance.d_y))
    i_xpxt = mutual_information(tau_xpxt, SubsystemDims.of(xp=instance.d_x, xt=channel.d_out))
    return normalise(instance, i_xty, i_xpxt)
