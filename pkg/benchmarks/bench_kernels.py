"""Compiled core vs pure-Python fallback on the two hot kernels.

    python benchmarks/bench_kernels.py [--trials 20000] [--horizon 200]

Both backends must agree exactly; the script checks that before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from recruitment._core import _fallback
from recruitment.evaluator import ScoreTables
from recruitment.experiments import builtin_case
from recruitment.indices import _log_ratio
from recruitment.model import CategoryParams, Category
from recruitment.policies import Scorer

try:
    from recruitment._core import _kernels
except ImportError:  # extension not built
    _kernels = None


def lattice_args(horizon: int):
    cat = CategoryParams(Category.A, 0.5, 1.0, 0.8, 0.7, 0.9)
    return (_log_ratio(cat.p0, 1 - cat.p0), _log_ratio(cat.qH, 1 - cat.qL), _log_ratio(1 - cat.qH, cat.qL),
            cat.qH, cat.qL, cat.Pbar, cat.v, 0.9, horizon, 0, 0)


def bench_lattice(mod, horizon: int, repeat: int) -> tuple[float, tuple[float, float]]:
    lat = mod.Lattice(*lattice_args(horizon))
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = lat.bracket(2.5e-10, False)
    return (time.perf_counter() - t0) / repeat, out


def bench_simulate(mod, trials: int) -> tuple[float, np.ndarray]:
    s = builtin_case("P2").scenario_after
    scorer = Scorer(s)
    tables = ScoreTables(s, scorer, rows=8, cols=64)
    for ci in (0, 1):
        for n1 in range(2):
            tables.fill(ci, n1, 0)
    a, b = s.catA, s.catB
    args = (np.array([a.qH, b.qH]), np.array([a.qL, b.qL]), np.array([a.p0, b.p0]))
    init = (np.array([0, 1], dtype=np.int64), np.zeros(2, dtype=np.int64), np.zeros(2, dtype=np.int64),
            np.array([a.p0, b.p0]))
    counts = np.zeros(4, dtype=np.int64)
    t0 = time.perf_counter()
    trial = 0
    while trial < trials:
        trial, ci, n1, n0 = mod.simulate(trial, trials, 12345, 10_000, s.muA, s.muB, *args, tables.tables[0],
                                         tables.tables[1], scorer.threshold, False, *init, counts)
        if ci >= 0:
            tables.fill(ci, n1, n0)
    return time.perf_counter() - t0, counts


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--horizon", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    results = {}
    for name, mod in backends:
        tl, root = bench_lattice(mod, args.horizon, args.repeat)
        ts, counts = bench_simulate(mod, args.trials)
        results[name] = (tl, root, ts, counts)
        print(f"{name:7s} lattice bracket (H={args.horizon}): {tl * 1e3:9.2f} ms   "
              f"simulate ({args.trials} trials): {ts * 1e3:9.2f} ms")
    if _kernels:
        py, cy = results["python"], results["cython"]
        assert py[1] == cy[1], "lattice roots differ between backends"
        assert (py[3] == cy[3]).all(), "simulation counts differ between backends"
        print(f"speedup: lattice x{py[0] / cy[0]:.0f}, simulate x{py[2] / cy[2]:.0f}; outputs identical")


if __name__ == "__main__":
    main()
