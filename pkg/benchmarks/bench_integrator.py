"""Timing comparison of the two splitting-integrator backends.

Run:  python3 benchmarks/bench_integrator.py [n_steps]

The jitted kernel and the plain-numpy fallback share one source of truth for
the update rule, so this only measures dispatch and loop overhead; both
backends produce bitwise-identical trajectories (see tests/test_kernels.py).
"""

import sys
import time

import numpy as np

from nhimlab import FlowState, HamiltonianSpec
from nhimlab import _kernels


def run(fn, state, h, n, args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(state, h, n, *args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    n_steps = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    hs = HamiltonianSpec(eps=0.01, mu=0.001)
    args = hs.kernel_args()
    z0 = FlowState(p=0.05, q=0.1, I=0.03, theta=0.7, J=0.2, phi=0.0).as_array()
    h = 1e-3

    _kernels.advance_numba(z0, h, 10, *args)  # compile outside the timing loop

    t_numba = run(_kernels.advance_numba, z0, h, n_steps, args)
    t_python = run(_kernels.advance_python, z0, h, n_steps, args)

    out_a = _kernels.advance_numba(z0, h, n_steps, *args)
    out_b = _kernels.advance_python(z0, h, n_steps, *args)
    agree = np.array_equal(out_a, out_b)

    print(f"n_steps={n_steps}")
    print(f"numba   elapsed_sec={t_numba:.4f} steps_per_sec={n_steps / t_numba:.3g}")
    print(f"python  elapsed_sec={t_python:.4f} steps_per_sec={n_steps / t_python:.3g}")
    print(f"speedup={t_python / t_numba:.1f}x bitwise_equal={agree}")


if __name__ == "__main__":
    main()
