"""Compiled vs pure-Python timings of the hot loop kernels.

Run with ``python3 benchmarks/bench_kernels.py``. The pure path uses each
kernel's ``py_func`` body, which is exactly what runs when
SYMBAND_DISABLE_NUMBA=1 is set.
"""

import argparse
import time

import numpy as np

from symband import _kernels as K
from symband import problems


def best_of(fn, repeat):
    out = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out = min(out, time.perf_counter() - t)
    return out


def cases(n, b):
    rng = np.random.default_rng(0)
    ab = rng.standard_normal((b + 1, n))
    ab[0] += 4 * (b + 1)
    cap = 2 * n * b + 16

    def tridiag(kernel):
        work = np.zeros((b + 2, n))
        work[: b + 1] = ab
        kernel(work, n, b, np.zeros(cap, np.int64), np.zeros(cap), np.zeros(cap), False)

    def ldlt(kernel):
        kernel(ab.copy(), n, b, np.zeros(n), np.zeros((b + 1, n)))

    d, e = ab[0].copy(), ab[1, : n - 1].copy()

    def tql(kernel):
        kernel(d.copy(), np.append(e, 0.0), np.zeros((1, 1)), False, 50 * n)

    yield "band_to_tridiag", K.band_to_tridiag_kernel, tridiag
    yield "ldlt", K.ldlt_kernel, ldlt
    yield "tql", K.tql_kernel, tql


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--b", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.numba_enabled():
        print("numba is disabled; both columns time the pure path")
    print(f"{'kernel':<18}{'compiled [s]':>14}{'pure [s]':>12}{'speedup':>10}")
    for name, kernel, run in cases(args.n, args.b):
        run(kernel)  # compile outside the timing
        fast = best_of(lambda: run(kernel), args.repeat)
        slow = best_of(lambda: run(K.py_func(kernel)), 1)
        print(f"{name:<18}{fast:>14.4f}{slow:>12.4f}{slow / fast:>10.1f}")

    # one end-to-end solve for scale
    p = problems.model_problem(args.n).pencil
    from symband.eigsolve import gen_sym_band_eig

    gen_sym_band_eig(p)
    t = best_of(lambda: gen_sym_band_eig(p), args.repeat)
    print(f"gen_sym_band_eig on the dim-{args.n} model pencil: {t:.4f} s")


if __name__ == "__main__":
    main()
