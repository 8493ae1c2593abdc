"""Compare the numba kernels with the pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the batched tomographic loss, the 4x4 Jacobi eigensolver and one full
differential-evolution trial with each backend, and checks that both
backends return the same numbers.
"""
import argparse
import time

import numpy as np

from qstdark import _accel, _kernels, linalg
from qstdark.de import FitConfig, minimize_tomography_loss
from qstdark.estimation import default_bounds
from qstdark.model import NoiseModel, simulate_counts
from qstdark.states import bell_state, pair_kets


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def row(name, t_numba, t_numpy, agree):
    print(f"{name:<28}{t_numba * 1e3:>12.3f}{t_numpy * 1e3:>12.3f}{t_numpy / t_numba:>10.1f}x   {agree}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=1600)
    args = ap.parse_args()

    counts = simulate_counts(bell_state(), NoiseModel(1000, 0.2, 50), seed=0, sampling="poisson")
    kets = np.ascontiguousarray(pair_kets())
    bounds = default_bounds(counts, "dark")
    b = np.array(bounds)
    rng = np.random.default_rng(0)
    pop = b[:, 0] + rng.random((60, 19)) * (b[:, 1] - b[:, 0])

    print(f"{'kernel':<28}{'numba ms':>12}{'numpy ms':>12}{'speedup':>11}   agree")
    largs = (pop, counts.counts, kets, _kernels.MLE, True)
    t1, a = best_of(lambda: _kernels.batch_loss_numba(*largs), args.repeat)
    t2, c = best_of(lambda: _kernels.batch_loss_numpy(*largs), args.repeat)
    row("batch loss (60 x 19)", t1, t2, np.allclose(a, c, rtol=1e-12))

    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = h + h.conj().T
    jargs = (h, linalg.JACOBI_TOL, linalg.JACOBI_MAX_SWEEPS)
    t1, a = best_of(lambda: linalg._jacobi_numba(*jargs), args.repeat)
    t2, c = best_of(lambda: linalg._jacobi_numpy(*jargs), args.repeat)
    row("jacobi eig 4x4", t1, t2, np.allclose(np.sort(a[0]), np.sort(c[0]), atol=1e-12))

    cfg = FitConfig(iterations=args.iterations)
    saved = _accel.USE_NUMBA
    results = {}
    timings = {}
    for flag in (True, False):
        _accel.USE_NUMBA = flag
        timings[flag], results[flag] = best_of(
            lambda: minimize_tomography_loss(counts.counts, kets, _kernels.MLE, True, bounds, cfg, 1),
            1 if not flag else args.repeat)
    _accel.USE_NUMBA = saved
    agree = np.isclose(results[True][1], results[False][1], rtol=1e-9)
    row(f"DE trial ({args.iterations} gens)", timings[True], timings[False], agree)


if __name__ == "__main__":
    main()
