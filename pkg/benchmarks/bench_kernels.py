"""Compiled kernels against the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``.  Times the small Hermitian
eigensolver, the batched entropy kernel, the per-generation channel
evaluation, the classical bottleneck loop, and one random-search grid
point under each backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qbottleneck import _fallback
from qbottleneck.config import SolverConfig
from qbottleneck.presets import vw_mix_state
from qbottleneck.qib.instance import build_instance
from qbottleneck.tensor_core import orthonormalize_batch

try:
    from qbottleneck import _kernels
except ImportError:  # extension not built
    _kernels = None


_SEARCH_SNIPPET = """
import time
from qbottleneck import BACKEND, SolverConfig
from qbottleneck.presets import vw_mix_state
from qbottleneck.qib import build_instance, search
inst = build_instance(vw_mix_state([0.4, 0.6]))
t = time.perf_counter()
res = search(inst, 0.9, SolverConfig(iterations=300, restarts=1))
print(f"random search, 300 generations ({BACKEND}): {time.perf_counter() - t:.2f} s, R = {res.evaluation.R_norm:.6f}")
"""


def _best(fn, number, repeat=5):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _population(m, rank, rng):
    g = rng.standard_normal((m, rank * 2, 2)) + 1j * rng.standard_normal((m, rank * 2, 2))
    return orthonormalize_batch(g).reshape(m, rank, 2, 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--search", action="store_true", help="also time a full random-search point")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    inst = build_instance(vw_mix_state([0.4, 0.6]))
    kraus = _population(64, 4, rng)
    h = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    h = h + h.conj().T
    stack = np.stack([k[0] @ k[0].conj().T + np.eye(2) for k in kraus])
    stack4 = rng.standard_normal((64, 4, 4)) + 1j * rng.standard_normal((64, 4, 4))
    stack4 = stack4 @ stack4.conj().transpose(0, 2, 1)

    pxy = rng.exponential(size=(3, 3))
    pxy /= pxy.sum()
    q0 = rng.exponential(size=(3, 3))
    q0 /= q0.sum(axis=0)

    backends = [("python", _fallback)] + ([("compiled", _kernels)] if _kernels is not None else [])
    cases = [
        ("jacobi_eigh 8x8", lambda b: b.jacobi_eigh(h, 1e-14), 200),
        ("entropy_batch 64 x 2x2", lambda b: b.entropy_batch(stack), 500),
        ("entropy_batch 64 x 4x4", lambda b: b.entropy_batch(stack4), 200),
        ("channel_entropies 64 channels", lambda b: b.channel_entropies(kraus, inst.rho_xy, inst.purifier, 2), 100),
        ("ib_loop 3x3, 500 sweeps", lambda b: b.ib_loop(pxy, q0, 5.0, 1.0, 0.0, 500), 5),
    ]
    print(f"{'kernel':<32}" + "".join(f"{name:>14}" for name, _ in backends) + ("   speedup" if len(backends) == 2 else ""))
    for label, fn, number in cases:
        times = [_best(lambda b=b: fn(b), number) for _, b in backends]
        line = f"{label:<32}" + "".join(f"{t * 1e6:>11.1f} us" for t in times)
        if len(times) == 2:
            line += f"   {times[0] / times[1]:6.2f}x"
        print(line)

    if args.search:
        # the backend is fixed at import, so each run gets its own interpreter
        for name, _ in backends:
            env = dict(os.environ, QIB_PURE_PYTHON="1" if name == "python" else "0")
            out = subprocess.run([sys.executable, "-c", _SEARCH_SNIPPET], env=env, capture_output=True, text=True, check=True)
            print(out.stdout.strip())

if __name__ == "__main__":
    main()
