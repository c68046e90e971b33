"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from superhedge import kernels, lp
from superhedge.interval import IntervalModelParams, lambda_weights
from superhedge.payoffs import PiecewisePayoff


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _tableau(rng, m, n):
    """Phase-2 tableau of a feasible, bounded random LP with slack basis."""
    A = rng.uniform(0.1, 1.0, size=(m, n))
    b = rng.uniform(1.0, 2.0, size=m)
    c = -rng.uniform(0.5, 1.0, size=n)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = c
    return T, np.arange(n, n + m, dtype=np.intp), n + m


def bench_simplex(mod, rng, repeat):
    T0, basis0, ne = _tableau(rng, 120, 160)

    def run():
        mod.simplex_iterate(T0.copy(), basis0.copy(), ne, lp.TOL, 100_000)
    return _best(run, repeat)


def bench_rollback(mod, repeat, n=2000):
    w = lambda_weights(0.99, 1.01)
    lam = np.full(n, float(w.lambda_))
    oml = np.full(n, float(w.one_minus_lambda))
    j = np.arange(n + 1)
    terminal = np.maximum(100.0 * 0.99 ** (n - j) * 1.01 ** j - 100.0, 0.0)
    return _best(lambda: mod.rollback_recombining(terminal, lam, oml), repeat)


def bench_eval_point(mod, rng, repeat, n=18):
    params = IntervalModelParams(n, rng.uniform(0.9, 1.0, n), rng.uniform(1.0, 1.1, n), 100.0)
    ws = [lambda_weights(d, u) for d, u in zip(params.k_d, params.k_u)]
    lam = np.array([w.lambda_ for w in ws], dtype=float)
    oml = np.array([w.one_minus_lambda for w in ws], dtype=float)
    kind = np.zeros(n, dtype=np.int64)
    a, b = PiecewisePayoff.call(100.0).affine_arrays()
    kd, ku = np.array(params.k_d), np.array(params.k_u)
    return _best(lambda: mod.eval_point(100.0, 0, kd, ku, lam, oml, kind, 1.0, a, b), repeat)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["python"] + (["cython"] if kernels.compiled_available() else [])
    rows = []
    for name in backends:
        mod = kernels.get_backend(name)
        rng = np.random.default_rng(args.seed)
        rows.append((name,
                     bench_simplex(mod, rng, args.repeat),
                     bench_rollback(mod, args.repeat),
                     bench_eval_point(mod, rng, args.repeat)))
    print(f"{'backend':<8} {'simplex 120x160':>16} {'rollback n=2000':>16} {'eval_point n=18':>16}")
    for name, *times in rows:
        print(f"{name:<8} " + " ".join(f"{t * 1e3:>14.2f}ms" for t in times))
    if len(rows) == 2:
        speed = [p / c for p, c in zip(rows[0][1:], rows[1][1:])]
        print(f"{'speedup':<8} " + " ".join(f"{s:>15.1f}x" for s in speed))
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
