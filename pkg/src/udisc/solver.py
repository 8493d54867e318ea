"""Optimal unambiguous discrimination through the block SDP and its dual."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la
from . import sdp
from .ensemble import SignalSpace, StateEnsemble, signal_spaces

ZERO_ERR_TOL = 1e-8
CERT_TOL = 1e-6


@dataclass(frozen=True)
class Measurement:
    """POVM ``operators[0]`` (inconclusive) through ``operators[m]``."""

    operators: tuple[np.ndarray, ...]
    etas: tuple[float, ...]
    p_detect: float
    p_inconclusive: float

    @classmethod
    def assemble(cls, e: StateEnsemble, detectors: Sequence[np.ndarray], inconclusive=None) -> "Measurement":
        """Complete ``detectors`` (one per state) with ``Pi_0 = I - sum Pi_i``
        unless an explicit ``inconclusive`` operator is given."""
        dets = [la.sym(np.asarray(d, dtype=complex)) for d in detectors]
        if len(dets) != e.m:
            raise ValueError(f"{len(dets)} detection operators for {e.m} states")
        if inconclusive is None:
            inconclusive = np.eye(e.dim) - sum(dets)
        ops = (la.sym(np.asarray(inconclusive, dtype=complex)),) + tuple(dets)
        etas = tuple(float(np.real(np.trace(rho @ d))) for rho, d in zip(e.states, dets))
        p_detect = float(np.dot(e.priors, etas))
        p_inc = float(sum(p * np.real(np.trace(rho @ ops[0])) for p, rho in zip(e.priors, e.states)))
        return cls(ops, etas, p_detect, p_inc)

    @property
    def m(self) -> int:
        return len(self.operators) - 1

    def completeness_error(self) -> float:
        n = self.operators[0].shape[0]
        return la.max_abs(sum(self.operators) - np.eye(n))

    def cross_error(self, e: StateEnsemble) -> float:
        """Largest ``|Tr(rho_j Pi_i)|`` over ``i != j``, both >= 1."""
        worst = 0.0
        for i, op in enumerate(self.operators[1:]):
            for j, rho in enumerate(e.states):
                if i != j:
                    worst = max(worst, abs(np.trace(rho @ op)))
        return float(worst)

    def min_eigenvalue(self) -> float:
        return min(la.min_eigenvalue(op) for op in self.operators)


@dataclass(frozen=True)
class DualCertificate:
    Z: np.ndarray
    trace: float
    dual_feas_residuals: tuple[float, ...]
    psd_residual: float
    slack_residual: float
    block_residuals: tuple[float, ...]


def _blocks(e: StateEnsemble, spaces, z):
    """``Theta_i^* (Z - p_i rho_i) Theta_i`` for each state."""
    return [la.sym(la.dagger(s.theta) @ (z - e.weighted(s.index)) @ s.theta) for s in spaces]


def make_certificate(
    e: StateEnsemble, measurement: Measurement, z: np.ndarray, spaces: Sequence[SignalSpace] | None = None
) -> DualCertificate:
    spaces = signal_spaces(e) if spaces is None else spaces
    z = la.sym(np.asarray(z, dtype=complex))
    blocks = _blocks(e, spaces, z)
    feas, comp = [], []
    for s, blk in zip(spaces, blocks):
        if s.dim == 0:
            feas.append(0.0)
            comp.append(0.0)
            continue
        delta = la.dagger(s.theta) @ measurement.operators[s.index + 1] @ s.theta
        feas.append(la.min_eigenvalue(blk))
        comp.append(la.max_abs(blk @ delta))
    return DualCertificate(
        Z=z,
        trace=float(np.real(np.trace(z))),
        dual_feas_residuals=tuple(feas),
        psd_residual=la.min_eigenvalue(z),
        slack_residual=la.max_abs(z @ measurement.operators[0]),
        block_residuals=tuple(comp),
    )


@dataclass
class Solution:
    """Result of any solve path: measurement, certificate and diagnostics."""

    method: str
    measurement: Measurement
    certificate: DualCertificate
    status: str = sdp.Status.OPTIMAL.value
    gap: float = 0.0
    iterations: int = 0
    notes: list[str] = field(default_factory=list)
    problem: sdp.BlockSdp | None = None
    generators: tuple[np.ndarray, ...] = ()

    @property
    def p_detect(self) -> float:
        return self.measurement.p_detect

    def __iter__(self):
        yield self.measurement
        yield self.certificate


def build_primal(e: StateEnsemble, spaces: Sequence[SignalSpace]) -> sdp.BlockSdp:
    """One block per detectable state: ``C_i = p_i Theta_i^* rho_i Theta_i``, ``A_i = Theta_i``."""
    pairs, labels = [], []
    for s in spaces:
        if not s.detectable:
            continue
        pairs.append((la.sym(la.dagger(s.theta) @ e.weighted(s.index) @ s.theta), s.theta))
        labels.append(s.index)
    return sdp.BlockSdp.from_pairs(pairs, bound=np.eye(e.dim, dtype=complex), labels=labels)


@dataclass(frozen=True)
class DualProgram:
    """``min Tr(Z)`` s.t. ``Theta_i^* (Z - p_i rho_i) Theta_i >= 0`` and ``Z >= 0``."""

    ensemble: StateEnsemble
    spaces: tuple[SignalSpace, ...]

    @property
    def lower_bounds(self) -> list[np.ndarray]:
        """Right-hand sides ``Theta_i^* p_i rho_i Theta_i``."""
        e = self.ensemble
        return [la.sym(la.dagger(s.theta) @ e.weighted(s.index) @ s.theta) for s in self.spaces]

    def constraints(self, z: np.ndarray) -> list[np.ndarray]:
        return _blocks(self.ensemble, self.spaces, la.sym(np.asarray(z, dtype=complex)))

    def objective(self, z: np.ndarray) -> float:
        return float(np.real(np.trace(z)))

    def violation(self, z: np.ndarray, tol: float = la.PSD_TOL):
        """First violated constraint as ``(name, min_eigenvalue)`` or ``None``."""
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.ensemble.dim,) * 2:
            raise ValueError(f"Z has shape {z.shape}, expected {(self.ensemble.dim,) * 2}")
        lam = la.min_eigenvalue(z)
        if lam < -tol:
            return ("Z >= 0", lam)
        for s, blk in zip(self.spaces, self.constraints(z)):
            if s.dim and (lam := la.min_eigenvalue(blk)) < -tol:
                return (f"Theta_{s.index + 1}^*(Z - p_{s.index + 1} rho_{s.index + 1})Theta_{s.index + 1} >= 0", lam)
        return None


def build_dual(e: StateEnsemble, spaces: Sequence[SignalSpace] | None = None) -> DualProgram:
    return DualProgram(e, tuple(signal_spaces(e) if spaces is None else spaces))


class DualInfeasible(ValueError):
    def __init__(self, constraint: str, eigenvalue: float):
        super().__init__(f"Z violates {constraint} (min eigenvalue {eigenvalue:.3e})")
        self.constraint = constraint
        self.eigenvalue = eigenvalue


def upper_bound(e: StateEnsemble, z: np.ndarray, tol: float = la.PSD_TOL) -> float:
    """Certified upper bound ``Tr(Z)`` on the detection probability for a
    dual-feasible ``Z``; raises :class:`DualInfeasible` otherwise."""
    dual = build_dual(e)
    bad = dual.violation(z, tol)
    if bad is not None:
        raise DualInfeasible(*bad)
    return dual.objective(z)


def solve(
    e: StateEnsemble,
    *,
    spaces: Sequence[SignalSpace] | None = None,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-9,
    max_iter: int = 200,
    callback=None,
) -> Solution:
    """Optimal measurement and dual certificate via the block SDP.

    Works on the support of the ensemble; ``spaces`` (signal spaces of
    ``e.reduced()``) may be supplied to fix particular bases.
    """
    r = e.reduced()
    spaces = signal_spaces(r) if spaces is None else list(spaces)
    problem = build_primal(r, spaces)
    sol = sdp.solve(problem, gap_tol=gap_tol, feas_tol=feas_tol, max_iter=max_iter, callback=callback)
    detectors = [np.zeros((r.dim, r.dim), dtype=complex) for _ in range(r.m)]
    for blk, delta in zip(problem.blocks, sol.primal_blocks):
        theta = blk.maps[0]
        detectors[blk.label] = theta @ delta @ la.dagger(theta)
    measurement = Measurement.assemble(e, [e.lift(d) for d in detectors])
    certificate = make_certificate(e, measurement, e.lift(sol.dual))
    notes = []
    if not problem.blocks:
        notes.append("no state is unambiguously detectable: Pi_0 = I")
    return Solution(
        method="sdp",
        measurement=measurement,
        certificate=certificate,
        status=sol.status.value,
        gap=sol.gap,
        iterations=sol.iterations,
        notes=notes,
        problem=problem,
    )


@dataclass(frozen=True)
class OptimalityReport:
    residuals: dict[str, float]
    failures: tuple[str, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed


def verify_optimality(
    e: StateEnsemble, measurement: Measurement, z: np.ndarray | DualCertificate, tol: float = CERT_TOL
) -> OptimalityReport:
    """Check a measurement/dual pair against the optimality conditions.

    Passes iff the measurement is feasible (PSD, complete, zero-error), Z is
    dual feasible, ``Z Pi_0 = 0``, ``Theta_i^*(Z - p_i rho_i)Theta_i Delta_i = 0``
    and ``Tr(Z) = P_D``, all within ``tol``. Every quantity is recomputed
    from the inputs.
    """
    if isinstance(z, DualCertificate):
        z = z.Z
    z = np.asarray(z, dtype=complex)
    n = e.dim
    if z.shape != (n, n) or len(measurement.operators) != e.m + 1:
        raise ValueError("measurement or Z is inconsistent with the ensemble")
    if any(op.shape != (n, n) for op in measurement.operators):
        raise ValueError("measurement operators have the wrong dimension")
    m = Measurement.assemble(e, measurement.operators[1:], measurement.operators[0])
    cert = make_certificate(e, m, z)
    res = {
        "measurement_psd": m.min_eigenvalue(),
        "completeness": m.completeness_error(),
        "zero_error": m.cross_error(e),
        "dual_psd": cert.psd_residual,
        "dual_feasibility": min(cert.dual_feas_residuals, default=0.0),
        "slackness_Z_Pi0": cert.slack_residual,
        "slackness_blocks": max(cert.block_residuals, default=0.0),
        "gap": cert.trace - m.p_detect,
    }
    for i, (f, b) in enumerate(zip(cert.dual_feas_residuals, cert.block_residuals), start=1):
        res[f"dual_feasibility_{i}"] = f
        res[f"slackness_block_{i}"] = b
    failures = []
    for key in ("measurement_psd", "dual_psd", "dual_feasibility"):
        if res[key] < -tol:
            failures.append(key)
    for key in ("completeness", "zero_error", "slackness_Z_Pi0", "slackness_blocks"):
        if res[key] > tol:
            failures.append(key)
    if abs(res["gap"]) > tol:
        failures.append("gap")
    return OptimalityReport(res, tuple(failures), tol)
