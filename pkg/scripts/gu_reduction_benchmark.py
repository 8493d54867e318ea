"""Wall time and optimal value of the reduced GU/CGU program versus the
full block SDP on random cyclic instances.

    python3 scripts/gu_reduction_benchmark.py --trials 3
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from udisc import solve, solve_cgu, solve_gu
from udisc.generate import cgu_instance


@dataclass
class BenchConfig:
    shapes: tuple[tuple[int, int, int], ...] = ((4, 4, 1), (6, 6, 1), (8, 8, 1), (6, 2, 3), (8, 4, 2), (10, 5, 2))
    trials: int = 3
    seed: int = 0


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def run(cfg: BenchConfig):
    seed = cfg.seed
    for n, l, r in cfg.shapes:
        t_red = t_full = gap = 0.0
        for _ in range(cfg.trials):
            c = cgu_instance(n, l, r, seed=seed).symmetric()
            seed += 1
            reduced = solve_gu if r == 1 else solve_cgu
            red, dt = timed(lambda: reduced(c))
            t_red += dt
            full, dt = timed(lambda: solve(c.ensemble()))
            t_full += dt
            gap = max(gap, abs(red.p_detect - full.p_detect))
        yield n, l, r, t_red / cfg.trials, t_full / cfg.trials, gap


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=BenchConfig.trials)
    ap.add_argument("--seed", type=int, default=BenchConfig.seed)
    args = ap.parse_args(argv)
    print(f"{'n':>3} {'l':>3} {'r':>3} {'reduced s':>10} {'full s':>10} {'speedup':>8} {'max |dP_D|':>11}")
    for n, l, r, tr, tf, gap in run(BenchConfig(trials=args.trials, seed=args.seed)):
        print(f"{n:3d} {l:3d} {r:3d} {tr:10.4f} {tf:10.4f} {tf / tr:8.1f} {gap:11.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
