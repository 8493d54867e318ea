"""Optimality residuals of the SDP solver over random feasible instances.

Prints the worst value of every residual checked by ``verify_optimality``
plus the iteration histogram, which is how the polishing endgame was tuned.

    python3 scripts/certificate_survey.py --instances 300 --max-dim 8
"""

from __future__ import annotations

import argparse
import collections
import sys
from dataclasses import dataclass

import numpy as np

from udisc import solve, verify_optimality
from udisc.generate import random_instance


@dataclass
class SurveyConfig:
    instances: int = 200
    max_dim: int = 8
    max_states: int = 4
    seed: int = 0
    tol: float = 1e-6


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(SurveyConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = SurveyConfig(**vars(ap.parse_args(argv)))
    rng = np.random.default_rng(cfg.seed)
    worst = collections.defaultdict(float)
    iters = collections.Counter()
    failed = 0
    for _ in range(cfg.instances):
        n = int(rng.integers(2, cfg.max_dim + 1))
        m = int(rng.integers(2, min(cfg.max_states, n) + 1))
        e = random_instance(n, m, seed=rng).ensemble()
        sol = solve(e)
        rep = verify_optimality(e, sol.measurement, sol.certificate, cfg.tol)
        failed += not rep.passed
        iters[sol.iterations] += 1
        for key in ("completeness", "zero_error", "slackness_Z_Pi0", "slackness_blocks", "gap"):
            worst[key] = max(worst[key], abs(rep.residuals[key]))
        for key in ("measurement_psd", "dual_psd", "dual_feasibility"):
            worst[key] = max(worst[key], -rep.residuals[key])
    for key, val in worst.items():
        print(f"{key:>18}: {val:.2e}")
    print("iterations:", dict(sorted(iters.items())))
    print(f"failed at tol {cfg.tol:g}: {failed}/{cfg.instances}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
