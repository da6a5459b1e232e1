"""Benchmark the compiled kernel lane against the pure-NumPy fallback.

Usage: python benchmarks/bench_kernels.py [n]

Times every shared kernel on 2-d (n^2) and 3-d (n^3 / 4) mode counts and
prints a side-by-side table.  The same comparisons can be forced package-wide
by setting HALLMHD_PURE_PYTHON=1 before import.
"""

import sys
import time

import numpy as np

from hallmhd import _kernels_np

try:
    from hallmhd import _kernels as _compiled
except ImportError:
    _compiled = None


def _timeit(fn, *args, repeat=50):
    fn(*args)  # warm-up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat * 1e6


def bench(m: int, label: str):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, m))
    b = rng.standard_normal((3, m))
    u = rng.standard_normal((2, m))
    grad = rng.standard_normal((2, 3, m))
    k = rng.standard_normal((3, m))
    invk2 = rng.random(m)
    w = rng.random(m)
    v = (rng.standard_normal((3, m)) + 1j * rng.standard_normal((3, m)))
    f = v[0].copy()
    e = np.exp(-rng.random(m))
    y = f.copy()
    k1, k2, k3, k4 = (f * c for c in (0.1, 0.2, 0.3, 0.4))

    cases = [
        ("cross3", lambda K: K.cross3(a, b)),
        ("advect", lambda K: K.advect(u, grad)),
        ("curl_mode", lambda K: K.curl_mode(k, v)),
        ("divergence_mode", lambda K: K.divergence_mode(k, v)),
        ("gradient_mode", lambda K: K.gradient_mode(k, f)),
        ("project_mode", lambda K: K.project_mode(k, invk2, v)),
        ("abs2_sum", lambda K: K.abs2_sum(f)),
        ("weighted_abs2_sum", lambda K: K.weighted_abs2_sum(w, f)),
        ("add_weighted", lambda K: K.add_weighted(v.copy(), w, -0.1, v)),
        ("if_stage_pre", lambda K: K.if_stage_pre(e, y, 0.1, k1)),
        ("if_final", lambda K: K.if_final(e, e, y, k1, k2, k3, k4, 1e-3)),
    ]

    print(f"\n== {label} (m = {m}) ==")
    header = f"{'kernel':<20} {'numpy (us)':>12} {'compiled (us)':>14} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_np = _timeit(call, _kernels_np)
        if _compiled is None:
            print(f"{name:<20} {t_np:>12.1f} {'n/a':>14} {'-':>8}")
        else:
            t_cy = _timeit(call, _compiled)
            print(f"{name:<20} {t_np:>12.1f} {t_cy:>14.1f} {t_np / t_cy:>8.2f}")


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
    if _compiled is None:
        print("compiled extension not available; showing NumPy lane only")
    bench(n * n, f"2-d grid {n}^2")
    bench(n * n * n // 4, f"3-d grid {n}^3 / 4")


if __name__ == "__main__":
    main()
