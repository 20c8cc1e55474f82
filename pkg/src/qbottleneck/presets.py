"""The two-qubit example states: classical, Bell mixture and the v/w mixture."""

from __future__ import annotations

import numpy as np

from .tensor_core import SubsystemDims

XY = SubsystemDims.of(x=2, y=2)

# computational basis |x y>, index 2*x + y; 0 = up, 1 = down
UU, UD, DU, DD = 0, 1, 2, 3


def classical_state(p) -> np.ndarray:
    """``p1|uu><uu| + p2|du><du| + p3|ud><ud| + p4|dd><dd|`` (first label is x)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("classical preset needs 4 non-negative probabilities summing to 1")
    rho = np.zeros((4, 4), dtype=np.complex128)
    for weight, idx in zip(p, (UU, DU, UD, DD)):
        rho[idx, idx] = weight
    return rho


def bell_mix_state() -> np.ndarray:
    """``1/2 |uu><uu| + 1/4 |uu><dd| + 1/4 |dd><uu| + 1/2 |dd><dd|``."""
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[UU, UU] = rho[DD, DD] = 0.5
    rho[UU, DD] = rho[DD, UU] = 0.25
    return rho


def vw_mix_state(p) -> np.ndarray:
    """``p1 |v><v| + p2 |w><w|`` with ``v = (|uu> + |dd>)/sqrt 2`` and ``w = |dd>``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("vw_mix preset needs 2 non-negative probabilities summing to 1")
    v = np.zeros(4, dtype=np.complex128)
    v[UU] = v[DD] = 1 / np.sqrt(2)
    w = np.zeros(4, dtype=np.complex128)
    w[DD] = 1.0
    return p[0] * np.outer(v, v.conj()) + p[1] * np.outer(w, w.conj())


PRESETS = {
    "classical": (classical_state, 4),
    "bell_mix": (lambda params: bell_mix_state(), 0),
    "vw_mix": (vw_mix_state, 2),
}


def preset_state(name: str, params=()) -> np.ndarray:
    try:
        build, n = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    params = list(params or [])
    if len(params) != n:
        raise ValueError(f"preset {name!r} takes {n} parameters, got {len(params)}")
    return build(params)


def classical_joint(p) -> np.ndarray:
    """Joint table ``P[x, y]`` on the diagonal of :func:`classical_state`."""
    return np.real(np.diagonal(classical_state(p))).reshape(2, 2)
