"""State ensembles, signal spaces and feasibility of unambiguous detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la

TRACE_TOL = 1e-6
FEAS_TOL = 1e-9


class EnsembleError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateEnsemble:
    """Density operators ``states`` with strictly positive ``priors``.

    ``support`` is an orthonormal basis of the range of the sum of the
    states. When it is not the whole space, :meth:`reduced` gives the
    equivalent ensemble expressed in support coordinates and :meth:`lift`
    maps operators back.
    """

    states: tuple[np.ndarray, ...]
    priors: np.ndarray
    support: np.ndarray

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.states)

    @property
    def deflated(self) -> bool:
        return self.support.shape[1] < self.dim

    def weighted(self, i: int) -> np.ndarray:
        return self.priors[i] * self.states[i]

    def reduced(self) -> "StateEnsemble":
        if not self.deflated:
            return self
        v = self.support
        k = v.shape[1]
        states = tuple(_frozen(la.sym(la.dagger(v) @ rho @ v)) for rho in self.states)
        return StateEnsemble(states, self.priors, _frozen(np.eye(k)))

    def lift(self, op: np.ndarray) -> np.ndarray:
        """Embed an operator on the support back into the ambient space."""
        if not self.deflated:
            return np.array(op, dtype=complex)
        v = self.support
        return la.sym(v @ op @ la.dagger(v))


def build_ensemble(
    matrices: Sequence,
    priors: Sequence[float],
    *,
    hermitian_tol: float = la.HERMITIAN_TOL,
    psd_tol: float = la.PSD_TOL,
    trace_tol: float = TRACE_TOL,
    rank_tol: float | None = None,
) -> StateEnsemble:
    """Validate density matrices and priors into a :class:`StateEnsemble`.

    Traces and the prior sum may be off by at most ``trace_tol``; they are
    renormalized. Anything further off is rejected.
    """
    if len(matrices) == 0:
        raise EnsembleError("ensemble needs at least one state")
    if len(matrices) != len(priors):
        raise EnsembleError(f"{len(matrices)} states but {len(priors)} priors")
    p = np.array(priors, dtype=float)
    for i, pi in enumerate(p):
        if not np.isfinite(pi) or pi <= 0:
            raise EnsembleError(f"prior {i} is non-positive ({pi}); priors must satisfy p_i > 0")
    if abs(p.sum() - 1) > trace_tol:
        raise EnsembleError(f"priors sum to {p.sum():.12g}, not 1")
    p = p / p.sum()
    p.setflags(write=False)

    states = []
    dim = None
    for i, mat in enumerate(matrices):
        try:
            h = la.hermitian(mat, hermitian_tol)
        except la.LinalgError as exc:
            raise EnsembleError(f"state {i}: {exc}") from None
        if dim is None:
            dim = h.shape[0]
        elif h.shape[0] != dim:
            raise EnsembleError(f"state {i} has dimension {h.shape[0]}, expected {dim}")
        check = la.is_psd(h, psd_tol)
        if not check:
            raise EnsembleError(f"state {i} has negative eigenvalue {check.min_eigenvalue:.3e}")
        tr = float(np.trace(h).real)
        if abs(tr - 1) > trace_tol:
            raise EnsembleError(f"state {i} has trace {tr:.12g}, not 1")
        states.append(_frozen(h / tr))

    support = la.range_basis(np.sum(states, axis=0), rank_tol)
    if support.shape[1] == dim:
        support = np.eye(dim, dtype=complex)
    return StateEnsemble(tuple(states), p, _frozen(support))


@dataclass(frozen=True)
class SignalSpace:
    """Intersection of the kernels of all states other than ``index``."""

    index: int
    theta: np.ndarray
    projector: np.ndarray
    detectable: bool
    max_eta: float

    @property
    def dim(self) -> int:
        return self.theta.shape[1]


def _space(e: StateEnsemble, i: int, theta: np.ndarray, feas_tol: float) -> SignalSpace:
    proj = la.projector(theta)
    eta = float(np.clip(np.real(np.trace(e.states[i] @ proj)), 0.0, 1.0))
    return SignalSpace(i, _frozen(theta), _frozen(proj), eta > feas_tol, eta)


def signal_spaces(
    e: StateEnsemble, rank_tol: float | None = None, feas_tol: float = FEAS_TOL
) -> list[SignalSpace]:
    """Signal space of every state. A lone state gets the whole space."""
    if e.m == 1:
        return [_space(e, 0, np.eye(e.dim, dtype=complex), feas_tol)]
    out = []
    for i in range(e.m):
        others = [rho for j, rho in enumerate(e.states) if j != i]
        out.append(_space(e, i, la.intersect_kernels(others, rank_tol), feas_tol))
    return out


def with_bases(spaces: Sequence[SignalSpace], thetas: Sequence[np.ndarray]) -> list[SignalSpace]:
    """Same signal spaces, described by different orthonormal bases."""
    return [
        SignalSpace(s.index, _frozen(t), s.projector, s.detectable, s.max_eta)
        for s, t in zip(spaces, thetas)
    ]


def rotate_bases(spaces: Sequence[SignalSpace], rng: np.random.Generator) -> list[SignalSpace]:
    """Replace each basis by ``theta @ U`` for a Haar-random unitary ``U``."""
    thetas = [s.theta @ la.random_unitary(s.dim, rng) if s.dim else s.theta for s in spaces]
    return with_bases(spaces, thetas)


@dataclass(frozen=True)
class FeasibilityReport:
    dims: tuple[int, ...]
    detectable: tuple[bool, ...]
    max_etas: tuple[float, ...]
    support_dim: int
    dim: int
    isometry: np.ndarray = field(repr=False)

    @property
    def overall(self) -> bool:
        return any(self.detectable)

    @property
    def deflated(self) -> bool:
        return self.support_dim < self.dim


def check_feasibility(
    e: StateEnsemble, rank_tol: float | None = None, feas_tol: float = FEAS_TOL
) -> FeasibilityReport:
    spaces = signal_spaces(e, rank_tol, feas_tol)
    return FeasibilityReport(
        dims=tuple(s.dim for s in spaces),
        detectable=tuple(s.detectable for s in spaces),
        max_etas=tuple(s.max_eta for s in spaces),
        support_dim=e.support.shape[1],
        dim=e.dim,
        isometry=e.support,
    )
