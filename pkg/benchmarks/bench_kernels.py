"""Benchmark the Monte Carlo walk kernel: numba backend vs numpy fallback.

Run from the repository root:

    python benchmarks/bench_kernels.py [--n 200000] [--length 30]

Both backends consume identical pre-drawn uniforms, so this also re-checks
that they produce the same alphabet sizes and entropies.
"""

import argparse
import time

import numpy as np

from melic import _kernels


def make_inputs(n, length, seed=0):
    rng = np.random.default_rng(seed)
    vals = np.arange(-5, 6, dtype=np.int64)
    probs = np.array([6 - abs(int(v)) for v in vals], dtype=float)
    probs /= probs.sum()
    lengths = np.full(n, length, dtype=np.int64)
    half = np.full(n, 6, dtype=np.int64)
    uniforms = rng.random((n, length - 1))
    return vals, probs, lengths, -half, half, uniforms


def run(fn, inputs, repeats=3):
    vals, probs, lengths, lo, hi, uniforms = inputs
    n = lengths.shape[0]
    out_a = np.zeros(n, dtype=np.int64)
    out_h = np.zeros(n, dtype=np.float64)
    fn(vals, probs, lengths, lo, hi, uniforms, out_a, out_h)  # warm-up / JIT compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(vals, probs, lengths, lo, hi, uniforms, out_a, out_h)
        best = min(best, time.perf_counter() - t0)
    return best, out_a.copy(), out_h.copy()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200000, help="number of walks")
    parser.add_argument("--length", type=int, default=30, help="notes per walk")
    args = parser.parse_args()

    inputs = make_inputs(args.n, args.length)
    print(f"active backend: {_kernels.backend()}  ({args.n} walks of length {args.length})")

    t_py, a_py, h_py = run(_kernels._walk_chunk_py, inputs)
    print(f"numpy fallback : {t_py:.3f}s  ({args.n / t_py:,.0f} walks/s)")

    if _kernels.backend() == "numba":
        t_nb, a_nb, h_nb = run(_kernels.walk_chunk, inputs)
        print(f"numba kernel   : {t_nb:.3f}s  ({args.n / t_nb:,.0f} walks/s)")
        print(f"speedup        : {t_py / t_nb:.1f}x")
        same_a = np.array_equal(a_py, a_nb)
        max_dh = float(np.nanmax(np.abs(h_py - h_nb))) if a_py.size else 0.0
        print(f"outputs agree  : A exact={same_a}, max |dH|={max_dh:.2e}")
    else:
        print("numba unavailable or disabled (MELIC_NO_NUMBA); fallback only")


if __name__ == "__main__":
    main()
