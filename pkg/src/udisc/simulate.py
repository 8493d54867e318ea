"""Monte Carlo sampling of measurement outcomes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import StateEnsemble
from .solver import Measurement

CLIP_TOL = 1e-8


class ProbabilityError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationReport:
    shots: int
    seed: int
    allocations: tuple[int, ...]
    counts: np.ndarray  # (m + 1) x m, outcome by true state
    empirical_etas: tuple[float, ...]
    wrong_detections: int

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "allocations": list(self.allocations),
            "counts": self.counts.tolist(),
            "empirical_etas": list(self.empirical_etas),
            "wrong_detections": self.wrong_detections,
        }


def born_table(e: StateEnsemble, measurement: Measurement, clip_tol: float = CLIP_TOL) -> np.ndarray:
    """Column ``j`` is the outcome distribution ``Tr(rho_j Pi_i)`` for state ``j``.

    Negative values down to ``-clip_tol`` and wrong-detection entries
    (``i != 0, i != j``) of size at most ``clip_tol`` are set to zero; each
    column is then renormalized.
    """
    m = e.m
    table = np.empty((m + 1, m))
    for j, rho in enumerate(e.states):
        for i, op in enumerate(measurement.operators):
            table[i, j] = np.real(np.trace(rho @ op))
    if (bad := table.min()) < -clip_tol:
        i, j = np.unravel_index(np.argmin(table), table.shape)
        raise ProbabilityError(f"Born probability Tr(rho_{j + 1} Pi_{i}) = {bad:.3e} is negative")
    cross = np.ones_like(table, dtype=bool)
    cross[0] = False
    cross[1:][np.eye(m, dtype=bool)] = False
    table[(table < 0) | (cross & (np.abs(table) <= clip_tol))] = 0.0
    sums = table.sum(axis=0)
    if np.any(sums <= 0):
        raise ProbabilityError("an outcome distribution has zero total mass")
    return table / sums


def allocate(shots: int, priors) -> tuple[int, ...]:
    return tuple(int(x) for x in np.rint(shots * np.asarray(priors)))


def simulate(e: StateEnsemble, measurement: Measurement, shots: int, seed: int) -> SimulationReport:
    if shots < 0:
        raise ValueError("shots must be non-negative")
    rng = np.random.default_rng(seed)
    probs = born_table(e, measurement)
    alloc = allocate(shots, e.priors)
    counts = np.zeros_like(probs, dtype=np.int64)
    for j, nj in enumerate(alloc):
        counts[:, j] = rng.multinomial(nj, probs[:, j])
    etas = tuple(float(counts[j + 1, j] / nj) if nj else 0.0 for j, nj in enumerate(alloc))
    wrong = int(counts[1:].sum() - np.trace(counts[1:]))
    return SimulationReport(shots, seed, alloc, counts, etas, wrong)
