"""Primal-dual interior-point solver for block-constrained Hermitian SDPs.

The problem family is::

    maximize    sum_i Re Tr(C_i D_i)
    subject to  sum_i sum_k A_ik D_i A_ik^*  <=  B,    D_i >= 0

with dual::

    minimize    Re Tr(B Z)
    subject to  sum_k A_ik^* Z A_ik - C_i >= 0,   Z >= 0.

Each block usually has a single map ``A_i``; several maps per block arise
when one generator is shared by a whole group orbit.

Internally the pair is cast in the usual standard form
``min <C, X> s.t. <A_j, X> = b_j, X >= 0`` / ``max b.y s.t. C - A^T y = S >= 0``
where ``y`` holds real coordinates of the ``D_i`` (so ``S = (slack, D_1, ...)``)
and ``X = (Z, W_1, ...)`` with ``W_i`` the dual constraint slacks. Search
directions use Nesterov-Todd scaling with a Mehrotra predictor-corrector.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import linalg as la

log = logging.getLogger(__name__)

STEP_FRACTION = 0.98
REGULARIZATION = 1e-12
REFINEMENT_STEPS = 2
MAX_POLISH = 15


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class Block:
    objective: np.ndarray
    maps: tuple[np.ndarray, ...]
    label: int | None = None

    @property
    def size(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class BlockSdp:
    blocks: tuple[Block, ...]
    bound: np.ndarray

    def __post_init__(self):
        n = self.bound.shape[0]
        if self.bound.shape != (n, n) or la.max_abs(self.bound - la.dagger(self.bound)) > la.HERMITIAN_TOL:
            raise ValueError("bound must be a square Hermitian matrix")
        if not la.is_psd(self.bound):
            raise ValueError("bound must be positive semidefinite")
        for i, blk in enumerate(self.blocks):
            r = blk.size
            if la.max_abs(blk.objective - la.dagger(blk.objective)) > la.HERMITIAN_TOL:
                raise ValueError(f"block {i}: objective is not Hermitian")
            if not blk.maps:
                raise ValueError(f"block {i}: no maps")
            for a in blk.maps:
                if a.shape != (n, r):
                    raise ValueError(f"block {i}: map has shape {a.shape}, expected {(n, r)}")
                if la.orthonormality_error(a) > la.ORTHO_TOL:
                    raise ValueError(f"block {i}: map columns are not orthonormal")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple], bound=None, labels=None) -> "BlockSdp":
        """Build from ``(C_i, A_i)`` pairs; ``bound`` defaults to the identity."""
        pairs = list(pairs)
        if bound is None:
            if not pairs:
                raise ValueError("need a bound when there are no blocks")
            bound = np.eye(np.shape(pairs[0][1])[0])
        labels = labels if labels is not None else list(range(len(pairs)))
        blocks = []
        for (c, a), lab in zip(pairs, labels):
            a = np.asarray(a, dtype=complex)
            if a.ndim == 1:
                a = a[:, None]
            c = np.atleast_2d(np.asarray(c, dtype=complex))
            blocks.append(Block(c, (a,), lab))
        return cls(tuple(blocks), np.asarray(bound, dtype=complex))

    @property
    def ambient_dim(self) -> int:
        return self.bound.shape[0]

    @property
    def variable_count(self) -> int:
        """Number of real unknowns: ``r^2`` per Hermitian ``r x r`` block."""
        return sum(b.size ** 2 for b in self.blocks)

    def apply(self, deltas: Sequence[np.ndarray]) -> np.ndarray:
        """``sum_i sum_k A_ik D_i A_ik^*``."""
        out = np.zeros_like(self.bound)
        for blk, d in zip(self.blocks, deltas):
            for a in blk.maps:
                out = out + a @ d @ la.dagger(a)
        return la.sym(out)

    def adjoint(self, z: np.ndarray, i: int) -> np.ndarray:
        """``sum_k A_ik^* Z A_ik``."""
        return la.sym(sum(la.dagger(a) @ z @ a for a in self.blocks[i].maps))

    def dual_slack(self, z: np.ndarray, i: int) -> np.ndarray:
        return self.adjoint(z, i) - self.blocks[i].objective

    def primal_value(self, deltas: Sequence[np.ndarray]) -> float:
        return float(sum(np.real(np.trace(b.objective @ d)) for b, d in zip(self.blocks, deltas)))

    def dual_value(self, z: np.ndarray) -> float:
        return float(np.real(np.trace(self.bound @ z)))


@dataclass(frozen=True)
class SdpSolution:
    primal_blocks: tuple[np.ndarray, ...]
    slack: np.ndarray
    dual: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    status: Status
    history: tuple[tuple[int, float, float, float], ...] = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def herm_basis(r: int) -> np.ndarray:
    """Orthonormal basis of the real space of ``r x r`` Hermitian matrices
    under ``<A, B> = Re Tr(A* B)``; shape ``(r*r, r, r)``."""
    out = []
    for k in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[k, k] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for k in range(r):
        for l in range(k + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[k, l] = e[l, k] = s
            out.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[k, l] = -1j * s
            e[l, k] = 1j * s
            out.append(e)
    return np.array(out).reshape(r * r, r, r)


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.vdot(a, b)))


def _inner_many(stack: np.ndarray, m: np.ndarray) -> np.ndarray:
    n = stack.shape[0]
    return np.real(stack.reshape(n, -1).conj() @ m.reshape(-1))


class _Layout:
    """Coordinates and constraint data of one problem in standard form."""

    def __init__(self, p: BlockSdp):
        self.p = p
        self.bases = [herm_basis(b.size) for b in p.blocks]
        sizes = [len(e) for e in self.bases]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.N = int(self.offsets[-1])
        n = p.ambient_dim
        fs = []
        for blk, basis in zip(p.blocks, self.bases):
            f = np.zeros((len(basis), n, n), dtype=complex)
            for a in blk.maps:
                f += a @ basis @ la.dagger(a)
            fs.append(f)
        self.F = np.concatenate(fs) if fs else np.zeros((0, n, n), dtype=complex)
        self.b = np.concatenate(
            [_inner_many(basis, blk.objective) for blk, basis in zip(p.blocks, self.bases)]
        ) if fs else np.zeros(0)
        self.nu = n + sum(b.size for b in p.blocks)

    def sl(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])

    def deltas(self, y: np.ndarray) -> list[np.ndarray]:
        return [np.tensordot(y[self.sl(i)], basis, axes=1) for i, basis in enumerate(self.bases)]

    def coords(self, deltas: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([_inner_many(basis, d) for basis, d in zip(self.bases, deltas)])

    def S(self, y: np.ndarray) -> list[np.ndarray]:
        """Dual-side iterate ``C - A^T y`` = (slack, D_1, ...)."""
        ds = self.deltas(y)
        return [la.sym(self.p.bound - np.tensordot(y, self.F, axes=1))] + ds

    def AT(self, y: np.ndarray) -> list[np.ndarray]:
        return [np.tensordot(y, self.F, axes=1)] + [-d for d in self.deltas(y)]

    def A(self, X: Sequence[np.ndarray]) -> np.ndarray:
        out = _inner_many(self.F, X[0])
        for i, basis in enumerate(self.bases):
            out[self.sl(i)] -= _inner_many(basis, X[i + 1])
        return out

    def schur(self, Ws: Sequence[np.ndarray]) -> np.ndarray:
        N = self.N
        w0 = Ws[0]
        t = w0 @ self.F @ w0
        M = np.real(self.F.reshape(N, -1).conj() @ t.reshape(N, -1).T)
        for i, basis in enumerate(self.bases):
            wi = Ws[i + 1]
            t = wi @ basis @ wi
            k = len(basis)
            M[self.sl(i), self.sl(i)] += np.real(basis.reshape(k, -1).conj() @ t.reshape(k, -1).T)
        return (M + M.T) / 2


def _nt_scaling(x: np.ndarray, s: np.ndarray):
    """NT scaling ``G`` with ``G^-1 X G^-* = G^* S G = diag(sigma)``."""
    lx = np.linalg.cholesky(x)
    ls = np.linalg.cholesky(s)
    u, sigma, vh = np.linalg.svd(la.dagger(ls) @ lx)
    g = lx @ la.dagger(vh) / np.sqrt(sigma)
    return g, sigma


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    lx = np.linalg.cholesky(x)
    t = scipy.linalg.solve_triangular(lx, dx, lower=True)
    t = scipy.linalg.solve_triangular(lx, la.dagger(t), lower=True)
    lam = np.linalg.eigvalsh(la.sym(t))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _step_length(xs, dxs) -> float:
    alpha = min(_max_step(x, dx) for x, dx in zip(xs, dxs))
    return min(1.0, STEP_FRACTION * alpha)


def solve(
    problem: BlockSdp,
    *,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-9,
    max_iter: int = 200,
    comp_tol: float = 1e-9,
    callback: Callable[[int, float, float, float], None] | None = None,
) -> SdpSolution:
    """Solve a :class:`BlockSdp` to relative duality gap ``gap_tol``.

    Once the gap target is met, up to ``MAX_POLISH`` further steps are taken
    while the complementarity products ``||Z Pi_0||`` and ``||W_i D_i||``
    exceed ``comp_tol`` (relative); a small gap alone does not make the pair
    satisfy complementary slackness entrywise. The certified iterate with
    the smallest products is returned.

    Deterministic: fixed initialization, no randomness. On ``MaxIterations``
    or ``NumericalFailure`` the best iterate found is returned with its
    honest gap.
    """
    p = problem
    n = p.ambient_dim
    if not p.blocks:
        z = np.zeros((n, n), dtype=complex)
        return SdpSolution((), p.bound.copy(), z, 0.0, 0.0, 0.0, 0, Status.OPTIMAL)

    lay = _Layout(p)
    bmin = np.linalg.eigvalsh(p.bound)[0]
    if bmin <= 0:
        raise ValueError("bound must be positive definite for a strictly feasible start")
    load = np.linalg.eigvalsh(p.apply([np.eye(b.size) for b in p.blocks]))[-1]
    t0 = 0.5 * bmin / load
    y = lay.coords([t0 * np.eye(b.size) for b in p.blocks])
    lam = max(np.linalg.norm(b.objective, 2) for b in p.blocks) + 1.0
    z0 = lam * np.eye(n, dtype=complex)
    X = [z0] + [p.dual_slack(z0, i) for i in range(len(p.blocks))]
    bnorm = 1.0 + np.linalg.norm(lay.b)

    history = []
    best = None
    status = Status.MAX_ITERATIONS

    def record(it):
        S = lay.S(y)
        pv = float(lay.b @ y)
        dv = p.dual_value(X[0])
        gap = dv - pv
        pinf = np.linalg.norm(lay.b - lay.A(X)) / bnorm
        history.append((it, pv, dv, gap))
        if callback is not None:
            callback(it, pv, dv, gap)
        log.debug("iter %3d  primal %.12e  dual %.12e  gap %.3e  pinf %.2e", it, pv, dv, gap, pinf)
        rel = gap / max(1.0, abs(dv))
        return S, pv, dv, gap, rel, pinf

    it = 0
    polish = 0
    certified = None  # (comp, y, X) with the gap target met
    while True:
        S, pv, dv, gap, rel, pinf = record(it)
        if rel <= gap_tol and pinf <= feas_tol:
            comp = max(la.max_abs(x @ s) for x, s in zip(X, S)) / max(1.0, abs(dv))
            if certified is None or comp < certified[0]:
                certified = (comp, y.copy(), [x.copy() for x in X])
            if comp <= comp_tol or polish >= MAX_POLISH:
                break
            polish += 1
        elif pinf <= feas_tol and (best is None or abs(rel) < abs(best[0])):
            best = (rel, y.copy(), [x.copy() for x in X])
        if it == max_iter:
            break
        try:
            y_new, X_new = _iterate(lay, y, X, S)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, FloatingPointError) as exc:
            log.debug("numerical failure at iteration %d: %s", it + 1, exc)
            status = Status.NUMERICAL_FAILURE
            break
        if not (np.all(np.isfinite(y_new)) and all(np.all(np.isfinite(x)) for x in X_new)):
            status = Status.NUMERICAL_FAILURE
            break
        y, X = y_new, X_new
        it += 1

    if certified is not None:
        status = Status.OPTIMAL
        y, X = certified[1], certified[2]
    elif best is not None:
        y, X = best[1], best[2]
    S = lay.S(y)
    z = la.sym(X[0])
    pv = float(lay.b @ y)
    dv = p.dual_value(z)
    return SdpSolution(
        primal_blocks=tuple(la.sym(d) for d in S[1:]),
        slack=S[0],
        dual=z,
        primal_value=pv,
        dual_value=dv,
        gap=dv - pv,
        iterations=it,
        status=status,
        history=tuple(history),
    )


def _iterate(lay: _Layout, y: np.ndarray, X: list[np.ndarray], S: list[np.ndarray]):
    nu = lay.nu
    mu = sum(_inner(x, s) for x, s in zip(X, S)) / nu
    scal = [_nt_scaling(x, s) for x, s in zip(X, S)]
    Gs = [g for g, _ in scal]
    sig = [s for _, s in scal]
    Ws = [g @ la.dagger(g) for g in Gs]
    M = lay.schur(Ws)
    msolve = _factor(M)
    Rp = lay.b - lay.A(X)

    def direction(Rc):
        rhs = Rp - lay.A(Rc)
        dy = msolve(rhs)
        for _ in range(REFINEMENT_STEPS):
            dy = dy + msolve(rhs - M @ dy)
        dS = [-m for m in lay.AT(dy)]
        dX = [la.sym(rc - w @ ds @ w) for rc, w, ds in zip(Rc, Ws, dS)]
        return dy, dX, dS

    # predictor
    dy_a, dX_a, dS_a = direction([-x for x in X])
    dX_a = _consistent(lay, dX_a[0])
    ap = _step_length(X, dX_a)
    ad = _step_length(S, dS_a)
    mu_aff = sum(_inner(x + ap * dx, s + ad * ds) for x, dx, s, ds in zip(X, dX_a, S, dS_a)) / nu
    sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))
    second = []
    for g, dx, ds in zip(Gs, dX_a, dS_a):
        ginv = np.linalg.inv(g)
        DX = ginv @ dx @ la.dagger(ginv)
        DS = la.dagger(g) @ ds @ g
        second.append(DX @ DS + DS @ DX)

    # corrector
    Rc = []
    for g, sv, sec in zip(Gs, sig, second):
        R = 2 * sigma * mu * np.eye(len(sv)) - 2 * np.diag(sv ** 2) - sec
        T = R / (sv[:, None] + sv[None, :])
        Rc.append(la.sym(g @ T @ la.dagger(g)))
    dy, dX, dS = direction(Rc)
    dX = _consistent(lay, dX[0])
    ap = _step_length(X, dX)
    ad = _step_length(S, dS)
    z = la.sym(X[0] + ap * dX[0])
    return y + ad * dy, _consistent(lay, z, shift=True)


def _factor(m: np.ndarray):
    """Solver for the Schur system. The diagonal shift is a fallback only:
    applied up front it biases directions enough to stall the endgame."""
    try:
        fac = scipy.linalg.cho_factor(m)
        return lambda r: scipy.linalg.cho_solve(fac, r)
    except np.linalg.LinAlgError:
        pass
    shifted = m + REGULARIZATION * max(1.0, float(np.max(np.diag(m)))) * np.eye(len(m))
    try:
        fac = scipy.linalg.cho_factor(shifted)
        return lambda r: scipy.linalg.cho_solve(fac, r)
    except np.linalg.LinAlgError:
        lu = scipy.linalg.lu_factor(shifted)
        return lambda r: scipy.linalg.lu_solve(lu, r)


def _consistent(lay: _Layout, z: np.ndarray, shift: bool = False) -> list[np.ndarray]:
    """X-side blocks generated by ``Z`` alone, so ``A(X) = b`` holds exactly."""
    p = lay.p
    if shift:
        return [z] + [p.dual_slack(z, i) for i in range(len(p.blocks))]
    return [z] + [p.adjoint(z, i) for i in range(len(p.blocks))]


@dataclass(frozen=True)
class CertificateCheck:
    """Residuals of a claimed primal/dual pair, recomputed from scratch."""

    block_min_eigs: tuple[float, ...]
    bound_violation: float
    slack_mismatch: float
    slack_min_eig: float
    dual_min_eig: float
    dual_constraint_min_eigs: tuple[float, ...]
    primal_value: float
    dual_value: float
    gap: float
    witness: float

    @property
    def witness_error(self) -> float:
        return abs(self.gap - self.witness)

    def violations(self, tol: float) -> list[str]:
        bad = []
        if any(v < -tol for v in self.block_min_eigs):
            bad.append("block_psd")
        if self.bound_violation > tol:
            bad.append("bound")
        if self.slack_mismatch > tol:
            bad.append("slack_mismatch")
        if self.slack_min_eig < -tol:
            bad.append("slack_psd")
        if self.dual_min_eig < -tol:
            bad.append("dual_psd")
        if any(v < -tol for v in self.dual_constraint_min_eigs):
            bad.append("dual_constraints")
        if self.gap < -tol:
            bad.append("weak_duality")
        return bad

    def passed(self, tol: float, gap_tol: float | None = None) -> bool:
        ok = not self.violations(tol)
        if gap_tol is not None:
            ok = ok and self.gap <= gap_tol * max(1.0, abs(self.dual_value))
        return ok


def check_certificate(p: BlockSdp, s: SdpSolution) -> CertificateCheck:
    deltas = s.primal_blocks
    z = la.sym(s.dual)
    residual_bound = la.sym(p.bound - p.apply(deltas))
    wis = [p.dual_slack(z, i) for i in range(len(p.blocks))]
    pv = p.primal_value(deltas)
    dv = p.dual_value(z)
    witness = sum(_inner(d, w) for d, w in zip(deltas, wis)) + _inner(residual_bound, z)
    return CertificateCheck(
        block_min_eigs=tuple(la.min_eigenvalue(d) for d in deltas),
        bound_violation=max(0.0, -la.min_eigenvalue(residual_bound)),
        slack_mismatch=la.max_abs(residual_bound - s.slack),
        slack_min_eig=la.min_eigenvalue(s.slack),
        dual_min_eig=la.min_eigenvalue(z),
        dual_constraint_min_eigs=tuple(la.min_eigenvalue(w) for w in wis),
        primal_value=pv,
        dual_value=dv,
        gap=dv - pv,
        witness=witness,
    )
