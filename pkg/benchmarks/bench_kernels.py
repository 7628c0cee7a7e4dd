"""Benchmark: compiled kernel extension vs the NumPy reference backend.

Times the hot sampling kernels on Monte Carlo sized workloads and an
end-to-end estimate in each backend.  Run from the repository root:

    python benchmarks/bench_kernels.py

The end-to-end comparison re-executes this script with
FUNCBALL_PURE_PYTHON=1, because the backend is chosen at import time.
"""

import os
import subprocess
import sys
import time

import numpy as np


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels():
    from funcball import kernels

    backends = kernels.available_backends()
    rng = np.random.default_rng(1)
    shapes = [(10_000, 64), (10_000, 400), (100_000, 64)]
    print(f"{'kernel':<18} {'shape':<14} " + " ".join(f"{b.BACKEND:>12}" for b in backends) + "  speedup")
    for nrow, ncol in shapes:
        z = rng.standard_gamma(0.5, size=(nrow, ncol))
        w = rng.standard_exponential(nrow)
        signs = rng.integers(0, 2, size=(nrow, ncol)) * 2.0 - 1.0
        x = backends[-1].ball_transform(z, w, signs, 2.0, ncol**0.5)

        cases = [
            ("ball_transform", lambda b: b.ball_transform(z, w, signs, 2.0, ncol**0.5)),
            ("pow_sum_rows", lambda b: b.pow_sum_rows(x, 4.0)),
            ("pwl_mean_square", lambda b: b.pwl_mean_square(x)),
        ]
        for name, call in cases:
            times = [timeit(lambda b=b: call(b)) for b in backends]
            cells = " ".join(f"{t * 1e3:>10.2f}ms" for t in times)
            speedup = times[-1] / times[0] if len(times) > 1 else 1.0
            print(f"{name:<18} {f'{nrow}x{ncol}':<14} {cells}  {speedup:>6.2f}x")


def bench_end_to_end():
    from funcball import kernels
    from funcball.averages import FunctionalSpec
    from funcball.ball import ball
    from funcball.mclab import mc_functional_average

    functional = FunctionalSpec.univariate(lambda x: x * x)
    spec = ball(2)

    def run():
        mc_functional_average(functional, 400, spec, 20_000, 7)

    run()  # warm up
    elapsed = timeit(run, repeats=3)
    print(f"end-to-end mc (n=400, 20k samples) [{kernels.backend_name()}]: {elapsed * 1e3:.1f}ms")


if __name__ == "__main__":
    if os.environ.get("FUNCBALL_PURE_PYTHON"):
        bench_end_to_end()
    else:
        bench_kernels()
        bench_end_to_end()
        sys.stdout.flush()
        subprocess.run(
            [sys.executable, __file__],
            env={**os.environ, "FUNCBALL_PURE_PYTHON": "1"},
            check=True,
        )
