"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

The reverse-run comparison re-imports the package in a subprocess with
CLUSTERFLOW_PURE=1 so that the whole pipeline uses the fallback.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from clusterflow.kernels import _fallback

try:
    from clusterflow.kernels import _core
except ImportError:  # extension not built
    _core = None

REVERSE_RUN = (
    "from clusterflow import RngStream, WeightSequence, run_reverse, BACKEND\n"
    "import time\n"
    "base = RngStream.for_labels(1, 'bench')\n"
    "t0 = time.perf_counter()\n"
    "for r in range({reps}):\n"
    "    run_reverse(WeightSequence.unit(), 20, base.spawn(r))\n"
    "print(BACKEND, time.perf_counter() - t0)\n"
)


def kernel_cases(n=200_000, seed=0):
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(size=n)
    right = rng.random(n) < 0.5
    tent, merged = _fallback.tentative_gaps(gaps, right)
    mult = np.ones(n, dtype=np.int64)
    w = rng.integers(0, 1000, size=20_000).astype(np.int64)
    mask = rng.random(w.size + 4) < 1 / 3
    return {
        "tentative_gaps(n=2e5)": lambda k: k.tentative_gaps(gaps, right),
        "fold(n=2e5)": lambda k: k.fold(tent, merged, mult),
        "reverse_expand(len=2e4)": lambda k: k.reverse_expand(w, 0, mask, -2, False),
        "sum_squares_exact(len=2e4)": lambda k: k.sum_squares_exact(w),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def reverse_run(reps, pure):
    env = dict(os.environ)
    env.pop("CLUSTERFLOW_PURE", None)
    if pure:
        env["CLUSTERFLOW_PURE"] = "1"
    res = subprocess.run([sys.executable, "-c", REVERSE_RUN.format(reps=reps)],
                         env=env, capture_output=True, text=True, check=True)
    backend, seconds = res.stdout.split()
    return backend, float(seconds)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--reverse-replicas", type=int, default=200)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':30s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, call in kernel_cases().items():
        a = best(lambda: call(_fallback), args.repeat) * 1e3
        if _core is None:
            print(f"{name:30s} {a:11.2f}")
            continue
        b = best(lambda: call(_core), args.repeat) * 1e3
        print(f"{name:30s} {a:11.2f} {b:12.2f} {a / b:8.2f}")
    reps = args.reverse_replicas
    _, pure = reverse_run(reps, pure=True)
    backend, default = reverse_run(reps, pure=False)
    print(f"\nreverse run, {reps} replicas x T=20: fallback {pure:.2f}s, {backend} {default:.2f}s "
          f"(speedup {pure / default:.2f})")


if __name__ == "__main__":
    main()
