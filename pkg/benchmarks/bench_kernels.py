#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-Python fallback.

Times the hot kernels (matmul, Gram eigenvalues, Frobenius reductions,
Wanda scores) at desk-scale sizes, plus one end-to-end profile evaluation,
and prints the speedup. Run after ``pip install -e .``:

    python benchmarks/bench_kernels.py [--sizes 32,64,128] [--repeats 5]
"""

import argparse
import time

from sparsalloc._kernels import _py
from sparsalloc.rng import SplitMix64

try:
    from sparsalloc._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats, min_time=0.05):
    # one warmup, then best-of-repeats; short kernels loop until min_time
    fn()
    best = float("inf")
    for _ in range(repeats):
        n = 0
        t0 = time.perf_counter()
        elapsed = 0.0
        while elapsed < min_time:
            fn()
            n += 1
            elapsed = time.perf_counter() - t0
        best = min(best, elapsed / n)
    return best


def bench_kernels(n, d, repeats):
    rng = SplitMix64(1)
    a = rng.fill_uniform(n * n, -1, 1)
    b = rng.fill_uniform(n * d, -1, 1)
    gram = _py.matmul(a, n, n, a, n)
    norms = rng.fill_uniform(n, 0.1, 2.0)
    cases = [
        (f"matmul {n}x{n}x{d}", lambda impl: impl.matmul(a, n, n, b, d)),
        (f"sym_eigvals {n}", lambda impl: impl.sym_eigvals(gram, n)),
        (f"frob_diff_sq {n * d}", lambda impl: impl.frob_diff_sq(b, b)),
        (f"wanda_scores {n}x{n}", lambda impl: impl.wanda_scores(a, n, n, norms)),
    ]
    for label, call in cases:
        t_py = timeit(lambda: call(_py), repeats)
        if _core is None:
            print(f"{label:24s} python {t_py * 1e3:9.3f} ms   (no compiled backend)")
            continue
        t_c = timeit(lambda: call(_core), repeats)
        print(
            f"{label:24s} python {t_py * 1e3:9.3f} ms   compiled {t_c * 1e3:8.3f} ms"
            f"   speedup {t_py / t_c:7.1f}x"
        )


def bench_end_to_end(repeats):
    from sparsalloc.netmodel import Activation, generate_calibration, generate_net
    from sparsalloc.pruner import WandaStyle
    from sparsalloc.search import ObjectiveKind, evaluate_objective
    from sparsalloc.allocator import allocate_arithmetic
    import sparsalloc._kernels as kernels

    net = generate_net(8, [64] * 9, Activation.LINEAR, 3)
    calib = generate_calibration(64, 128, 4)
    profile = allocate_arithmetic(0.7, 8, 0.01)

    def once():
        evaluate_objective(net, calib, profile, WandaStyle(), ObjectiveKind.TOTAL_RECON_ERROR)

    t = timeit(once, repeats, min_time=0.2)
    print(
        f"{'objective eval (8x64)':24s} {kernels.BACKEND:8s} backend "
        f"{t * 1e3:9.3f} ms per profile"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="32,64,128")
    parser.add_argument("--samples", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend not built; timing the pure-Python fallback only\n")
    for n in (int(tok) for tok in args.sizes.split(",")):
        bench_kernels(n, args.samples, args.repeats)
        print()
    bench_end_to_end(args.repeats)


if __name__ == "__main__":
    main()
