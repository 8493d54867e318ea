"""Geometrically uniform (GU) and compound GU ensembles.

For states ``rho_i = U_i rho U_i^*`` generated by an abelian group of
unitaries, an optimal measurement can be taken covariant,
``Pi_i = U_i Pi U_i^*``, so only the generator ``Pi`` has to be optimized.
The compound case has several generators sharing one group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg as la
from . import sdp
from .ensemble import StateEnsemble, build_ensemble, signal_spaces
from .solver import Measurement, Solution, make_certificate

GROUP_TOL = 1e-8
UNITARY_TOL = 1e-9


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class UnitaryGroup:
    """Abelian group of unitaries with ``elements[0] = I``.

    ``table[j, i] = k`` iff ``U_j^* U_i = U_k``.
    """

    elements: tuple[np.ndarray, ...]
    table: np.ndarray

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def conjugate(self, i: int, op: np.ndarray) -> np.ndarray:
        u = self.elements[i]
        return la.sym(u @ op @ la.dagger(u))

    def orbit(self, op: np.ndarray) -> list[np.ndarray]:
        return [self.conjugate(i, op) for i in range(self.order)]

    def average(self, op: np.ndarray) -> np.ndarray:
        """Group twirl ``(1/|G|) sum_i U_i op U_i^*``."""
        return sum(self.orbit(op)) / self.order


def _match(elements, target, tol):
    for k, u in enumerate(elements):
        if la.max_abs(target - u) <= tol:
            return k
    return None


def validate_group(elements: Sequence, tol: float = GROUP_TOL) -> UnitaryGroup:
    if len(elements) == 0:
        raise GroupError("group needs at least one element")
    els = []
    for i, u in enumerate(elements):
        u = la.as_matrix(u)
        if u.shape[0] != u.shape[1]:
            raise GroupError(f"element {i} is not square: shape {u.shape}")
        if els and u.shape != els[0].shape:
            raise GroupError(f"element {i} has shape {u.shape}, expected {els[0].shape}")
        err = la.max_abs(la.dagger(u) @ u - np.eye(u.shape[0]))
        if err > UNITARY_TOL:
            raise GroupError(f"element {i} is not unitary: max |U*U - I| = {err:.3e}")
        els.append(u)
    n = els[0].shape[0]
    if la.max_abs(els[0] - np.eye(n)) > tol:
        raise GroupError("first element must be the identity")
    for a in range(len(els)):
        for b in range(a + 1, len(els)):
            if la.max_abs(els[a] - els[b]) <= tol:
                raise GroupError(f"elements {a} and {b} coincide")
    m = len(els)
    table = np.empty((m, m), dtype=int)
    for j in range(m):
        for i in range(m):
            if la.max_abs(els[i] @ els[j] - els[j] @ els[i]) > tol:
                raise GroupError(f"elements {j} and {i} do not commute")
            k = _match(els, la.dagger(els[j]) @ els[i], tol)
            if k is None:
                raise GroupError(f"not closed: U_{j}^* U_{i} matches no element")
            table[j, i] = k
    table.setflags(write=False)
    return UnitaryGroup(tuple(els), table)


@dataclass(frozen=True)
class GUEnsemble:
    group: UnitaryGroup
    generator: np.ndarray

    def states(self) -> list[np.ndarray]:
        return self.group.orbit(self.generator)

    def ensemble(self) -> StateEnsemble:
        m = self.group.order
        return build_ensemble(self.states(), [1 / m] * m)


@dataclass(frozen=True)
class CGUEnsemble:
    """States ``rho_{ik} = U_i rho_k U_i^*``, listed generator-major:
    index ``k * l + i``."""

    group: UnitaryGroup
    generators: tuple[np.ndarray, ...]

    def states(self) -> list[np.ndarray]:
        return [s for g in self.generators for s in self.group.orbit(g)]

    def ensemble(self) -> StateEnsemble:
        total = self.group.order * len(self.generators)
        return build_ensemble(self.states(), [1 / total] * total)


def _check_matches(states, e: StateEnsemble, tol):
    if len(states) != e.m:
        raise GroupError(f"symmetry block generates {len(states)} states but the ensemble has {e.m}")
    for i, (a, b) in enumerate(zip(states, e.states)):
        if la.max_abs(a - b) > tol:
            raise GroupError(f"state {i} is not the group image of its generator")
    if la.max_abs(e.priors - 1 / e.m) > 1e-9:
        raise GroupError("symmetric ensembles need uniform priors")


def gu_from_ensemble(e: StateEnsemble, group: UnitaryGroup, tol: float = 1e-8) -> GUEnsemble:
    g = GUEnsemble(group, e.states[0])
    _check_matches(g.states(), e, tol)
    return g


def cgu_from_ensemble(
    e: StateEnsemble, group: UnitaryGroup, generators: Sequence[np.ndarray], tol: float = 1e-8
) -> CGUEnsemble:
    c = CGUEnsemble(group, tuple(la.hermitian(g) for g in generators))
    _check_matches(c.states(), e, tol)
    return c


@dataclass(frozen=True)
class ReducedSize:
    """Real unknowns and constraint counts of the reduced and full programs
    as formulated over full ``n x n`` Hermitian operators."""

    reduced_unknowns: int
    full_unknowns: int
    reduced_constraints: int
    full_constraints: int


def program_size(n: int, group_order: int, generators: int = 1) -> ReducedSize:
    lr = group_order * generators
    return ReducedSize(generators * n * n, lr * n * n, lr + 1, lr * lr + 1)


def _reduced_solve(group: UnitaryGroup, generators: Sequence[np.ndarray], method: str, opts) -> Solution:
    l, r = group.order, len(generators)
    full = CGUEnsemble(group, tuple(generators)).ensemble()
    spaces = signal_spaces(full, opts.get("rank_tol"))
    n = group.dim

    blocks = []
    for k, rho in enumerate(generators):
        s = spaces[k * l]
        if not s.detectable:
            continue
        # one generator block; its orbit supplies one map per group element
        c = la.sym(la.dagger(s.theta) @ rho @ s.theta) / r
        maps = tuple(u @ s.theta for u in group.elements)
        blocks.append(sdp.Block(c, maps, k))
    problem = sdp.BlockSdp(tuple(blocks), np.eye(n, dtype=complex))
    sol = sdp.solve(
        problem,
        gap_tol=opts.get("gap_tol", 1e-8),
        feas_tol=opts.get("feas_tol", 1e-9),
        max_iter=opts.get("max_iter", 200),
        callback=opts.get("callback"),
    )
    gens = [np.zeros((n, n), dtype=complex) for _ in range(r)]
    for blk, delta in zip(problem.blocks, sol.primal_blocks):
        theta = spaces[blk.label * l].theta
        gens[blk.label] = la.sym(theta @ delta @ la.dagger(theta))
    detectors = [op for g in gens for op in group.orbit(g)]
    measurement = Measurement.assemble(full, detectors)
    # twirled reduced dual is feasible for the full dual program
    z = group.average(sol.dual)
    certificate = make_certificate(full, measurement, z, spaces)
    notes = [] if problem.blocks else ["no state is unambiguously detectable: Pi_0 = I"]
    return Solution(
        method=method,
        measurement=measurement,
        certificate=certificate,
        status=sol.status.value,
        gap=sol.gap,
        iterations=sol.iterations,
        notes=notes,
        problem=problem,
        generators=tuple(gens),
    )


def solve_gu(g: GUEnsemble, **opts) -> Solution:
    """Optimal covariant measurement for a GU ensemble from one reduced SDP
    over the generator ``Pi`` (restricted to the first signal space)."""
    return _reduced_solve(g.group, [g.generator], "gu", opts)


def solve_cgu(c: CGUEnsemble, **opts) -> Solution:
    return _reduced_solve(c.group, list(c.generators), "cgu", opts)


def symmetrize(measurement: Measurement, group: UnitaryGroup, e: StateEnsemble) -> Measurement:
    """Average ``Pi_i -> (1/m) sum_j U_j Pi_{r(j,i)} U_j^*`` over the group."""
    m = group.order
    if measurement.m != m or e.m != m:
        raise GroupError(f"measurement has {measurement.m} outcomes for a group of order {m}")
    dets = measurement.operators[1:]
    out = []
    for i in range(m):
        acc = sum(group.conjugate(j, dets[group.table[j, i]]) for j in range(m))
        out.append(acc / m)
    return Measurement.assemble(e, out)


def covariance_error(measurement: Measurement, group: UnitaryGroup, generators: int = 1) -> float:
    """Largest ``||Pi_{ik} - U_i Pi_{1k} U_i^*||`` over the measurement."""
    l = group.order
    dets = measurement.operators[1:]
    worst = 0.0
    for k in range(generators):
        base = dets[k * l]
        for i in range(l):
            worst = max(worst, la.max_abs(dets[k * l + i] - group.conjugate(i, base)))
    return worst
