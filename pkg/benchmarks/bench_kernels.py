"""Compare the numba and numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case runs once to warm up (numba compiles or loads its cache), then
reports the best of ``--repeat`` timings per path and the largest
difference between the two results.
"""

import argparse
import os
import time

import numpy as np

from cdspeed import kernels
from cdspeed.cdrive import COLLECTIVE, total_hamiltonian_stack
from cdspeed.dynamics import half_step_grid, initial_eigenstates
from cdspeed.model import lz3


def _hermitian_stack(rng, b, n):
    x = rng.normal(size=(b, n, n)) + 1j * rng.normal(size=(b, n, n))
    return x + np.conj(np.swapaxes(x, 1, 2))


def _cases():
    rng = np.random.default_rng(0)
    small = _hermitian_stack(rng, 40_001, 3)
    large = _hermitian_stack(rng, 2000, 6)
    traj = lz3().trajectory()
    steps = 20_000
    hs = total_hamiltonian_stack(traj, COLLECTIVE, half_step_grid(traj.tau, steps))
    psi0 = initial_eigenstates(traj)
    return [
        ("jacobi 3x3 x 40001", lambda: kernels.jacobi_eigh(small)[0]),
        ("jacobi 6x6 x 2000", lambda: kernels.jacobi_eigh(large)[0]),
        ("rk4 LZ3 20000 steps", lambda: kernels.rk4_evolve(hs, psi0, traj.tau / steps)[0]),
    ]


def _run(fn, flag, repeat):
    os.environ[kernels.ENV_FLAG] = flag
    out = fn()
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    saved = os.environ.get(kernels.ENV_FLAG)
    print(f"numba available: {kernels.HAVE_NUMBA}")
    print(f"{'case':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max diff':>12}")
    try:
        for name, fn in _cases():
            t_np, r_np = _run(fn, "1", args.repeat)
            if kernels.HAVE_NUMBA:
                t_nb, r_nb = _run(fn, "", args.repeat)
                diff = float(np.max(np.abs(r_nb - r_np)))
                print(f"{name:<24}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}{diff:>12.1e}")
            else:
                print(f"{name:<24}{'-':>12}{t_np:>12.4f}{'-':>10}{'-':>12}")
    finally:
        if saved is None:
            os.environ.pop(kernels.ENV_FLAG, None)
        else:
            os.environ[kernels.ENV_FLAG] = saved


if __name__ == "__main__":
    main()
