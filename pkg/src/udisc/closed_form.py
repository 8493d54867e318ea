"""Analytic optimal measurements and dual certificates for two special cases.

* mutually orthogonal signal spaces: ``Pi_i = P_i``, ``Z = sum p_i P_i rho_i P_i``;
* two states whose signal spaces are one-dimensional, with a three-way
  branch on which detector is switched off.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg as la
from .ensemble import SignalSpace, StateEnsemble, signal_spaces
from .solver import Measurement, Solution, make_certificate

ORTHO_TOL = 1e-9
# |f| within this of 1 means the two signal lines coincide
DEGENERATE_TOL = 1e-9
# |f| below this is treated as orthogonal signal lines
ZERO_OVERLAP_TOL = 1e-12


class PreconditionError(ValueError):
    pass


class Branch(str, enum.Enum):
    FIRST_DOMINANT = "FirstDominant"
    SECOND_DOMINANT = "SecondDominant"
    INTERIOR = "Interior"


def _reduced(e: StateEnsemble, spaces):
    r = e.reduced()
    return r, (signal_spaces(r) if spaces is None else list(spaces))


def _finish(e: StateEnsemble, method: str, detectors, z, notes=()) -> Solution:
    measurement = Measurement.assemble(e, [e.lift(d) for d in detectors])
    cert = make_certificate(e, measurement, e.lift(z))
    return Solution(
        method=method,
        measurement=measurement,
        certificate=cert,
        gap=cert.trace - measurement.p_detect,
        notes=list(notes),
    )


def orthogonality_violation(spaces: Sequence[SignalSpace]):
    """Worst ``(i, j, ||P_i P_j||)`` over pairs, or ``None`` when all pairs
    are orthogonal within tolerance."""
    worst = None
    for a in range(len(spaces)):
        for b in range(a + 1, len(spaces)):
            if spaces[a].dim == 0 or spaces[b].dim == 0:
                continue
            overlap = np.linalg.norm(la.dagger(spaces[a].theta) @ spaces[b].theta, 2)
            if overlap > ORTHO_TOL and (worst is None or overlap > worst[2]):
                worst = (a, b, float(overlap))
    return worst


def solve_orthogonal(e: StateEnsemble, spaces: Sequence[SignalSpace] | None = None, notes=()) -> Solution:
    r, spaces = _reduced(e, spaces)
    bad = orthogonality_violation(spaces)
    if bad is not None:
        i, j, norm = bad
        raise PreconditionError(
            f"signal spaces {i + 1} and {j + 1} are not orthogonal: ||P_{i + 1} P_{j + 1}|| = {norm:.3e}"
        )
    detectors, z = [], np.zeros((r.dim, r.dim), dtype=complex)
    for s in spaces:
        if s.detectable:
            detectors.append(s.projector)
            z = z + s.projector @ r.weighted(s.index) @ s.projector
        else:
            detectors.append(np.zeros_like(z))
    return _finish(e, "orthogonal", detectors, la.sym(z), notes)


@dataclass(frozen=True)
class PairGeometry:
    theta1: np.ndarray
    theta2: np.ndarray
    theta2_perp: np.ndarray
    d1: float
    d2: float
    f: complex
    e: complex
    branch: Branch
    s: complex | None

    @property
    def alphas(self) -> tuple[float, float]:
        """Detector weights ``(alpha_1, alpha_2)`` for the active branch."""
        if self.branch is Branch.FIRST_DOMINANT:
            return 1.0, 0.0
        if self.branch is Branch.SECOND_DOMINANT:
            return 0.0, 1.0
        f2 = abs(self.f) ** 2
        a1 = (1 - np.sqrt(self.d2 * f2 / self.d1)) / (1 - f2)
        a2 = (1 - np.sqrt(self.d1 * f2 / self.d2)) / (1 - f2)
        return float(a1), float(a2)

    @property
    def p_detect(self) -> float:
        a1, a2 = self.alphas
        return self.d1 * a1 + self.d2 * a2


def branch_of(d1: float, d2: float, f_abs2: float) -> Branch:
    # boundary ties go to the first case
    if d2 - d1 * f_abs2 <= 0:
        return Branch.FIRST_DOMINANT
    if d1 - d2 * f_abs2 <= 0:
        return Branch.SECOND_DOMINANT
    return Branch.INTERIOR


def pair_geometry(e: StateEnsemble, spaces: Sequence[SignalSpace] | None = None) -> PairGeometry:
    """Scalars describing a two-state problem with one-dimensional signal
    spaces. ``e`` and ``spaces`` are taken in support coordinates."""
    if e.m != 2:
        raise PreconditionError(f"pair solver needs exactly 2 states, got {e.m}")
    spaces = signal_spaces(e) if spaces is None else list(spaces)
    dims = [s.dim for s in spaces]
    if dims != [1, 1]:
        raise PreconditionError(f"pair solver needs one-dimensional signal spaces, got dimensions {dims}")
    if not all(s.detectable for s in spaces):
        raise PreconditionError("pair solver needs both states to be detectable")
    t1, t2 = spaces[0].theta[:, 0], spaces[1].theta[:, 0]
    d1 = float(np.real(np.vdot(t1, e.weighted(0) @ t1)))
    d2 = float(np.real(np.vdot(t2, e.weighted(1) @ t2)))
    f = complex(np.vdot(t2, t1))
    if abs(f) >= 1 - DEGENERATE_TOL:
        raise PreconditionError(f"signal spaces coincide (|f| = {abs(f):.12f}, e = 0): degenerate pair")
    v = t1 - f * t2
    perp = la.fix_phases((v / np.linalg.norm(v))[:, None])[:, 0]
    e_ = complex(np.vdot(perp, t1))
    branch = branch_of(d1, d2, abs(f) ** 2)
    s = None
    if branch is Branch.INTERIOR and abs(f) > ZERO_OVERLAP_TOL:
        s = (np.conj(f) / np.conj(e_)) * (np.sqrt(d1 / (d2 * abs(f) ** 2)) - 1)
    return PairGeometry(t1, t2, perp, d1, d2, f, e_, branch, s)


def pair_dual(g: PairGeometry) -> np.ndarray:
    if g.branch is Branch.FIRST_DOMINANT:
        return g.d1 * np.outer(g.theta1, g.theta1.conj())
    if g.branch is Branch.SECOND_DOMINANT:
        return g.d2 * np.outer(g.theta2, g.theta2.conj())
    v = g.theta2 + g.s * g.theta2_perp
    return g.d2 * np.outer(v, v.conj())


def solve_rank1_pair(e: StateEnsemble, spaces: Sequence[SignalSpace] | None = None) -> Solution:
    r, spaces = _reduced(e, spaces)
    g = pair_geometry(r, spaces)
    if abs(g.f) <= ZERO_OVERLAP_TOL:
        return solve_orthogonal(e, spaces, notes=["f = 0: routed to the orthogonal closed form"])
    a1, a2 = g.alphas
    detectors = [a1 * np.outer(g.theta1, g.theta1.conj()), a2 * np.outer(g.theta2, g.theta2.conj())]
    sol = _finish(e, "pair", detectors, la.sym(pair_dual(g)), [f"branch {g.branch.value}"])
    return sol
