"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``QIB_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the pure-Python fallback is used.
"""

import os

from . import _fallback

_forced = os.environ.get("QIB_PURE_PYTHON", "") not in ("", "0")

if _forced:
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        kernels = _fallback
        BACKEND = "python"

jacobi_eigh = kernels.jacobi_eigh
eigvalsh_batch = kernels.eigvalsh_batch
entropy_batch = kernels.entropy_batch
channel_entropies = kernels.channel_entropies
ib_loop = kernels.ib_loop

__all__ = ["BACKEND", "jacobi_eigh", "eigvalsh_batch", "entropy_batch", "channel_entropies", "ib_loop", "kernels"]
