"""Dense complex Hermitian linear algebra.

Matrices are plain ``numpy`` arrays throughout: a Hermitian operator is a
square complex array, and a subspace basis is an ``n x r`` array with
orthonormal columns (``r`` may be zero).
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
ORTHO_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-10


class LinalgError(ValueError):
    pass


class EigenFailure(LinalgError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def as_matrix(a, dim: int | None = None) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise LinalgError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if dim is not None and m.shape != (dim, dim):
        raise LinalgError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    return m


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``a`` as Hermitian and return its exact symmetrization."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise LinalgError(f"Hermitian operator must be square, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise LinalgError(f"matrix is not Hermitian: max |H - H*| = {dev:.3e}")
    return (m + m.conj().T) / 2


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def sym(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive."""
    v = np.array(vectors, dtype=complex)
    for k in range(v.shape[1]):
        col = v[:, k]
        pivot = int(np.argmax(np.abs(col)))
        a = col[pivot]
        if abs(a) > 0:
            v[:, k] = col * (abs(a) / a)
    return v


def canonical_basis(vectors: np.ndarray) -> np.ndarray:
    """Basis-independent orthonormal basis for the span of ``vectors``.

    The projector onto the span is factored by pivoted QR, so any two bases
    of the same subspace map to the same output (up to rounding). Columns are
    ordered by ascending pivot index and phase-normalized.
    """
    n, r = vectors.shape
    if r == 0:
        return np.zeros((n, 0), dtype=complex)
    proj = vectors @ dagger(vectors)
    q, _, piv = scipy.linalg.qr(proj, pivoting=True)
    q = q[:, :r]
    order = np.argsort(piv[:r], kind="stable")
    return fix_phases(q[:, order])


def eigh(h: np.ndarray, cluster_tol: float = DEFAULT_RANK_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending.
    Eigenvectors inside a degenerate cluster (gap below ``cluster_tol``
    times the spectral radius) are replaced by the canonical basis of the
    cluster, so output does not depend on LAPACK's arbitrary choice.
    """
    h = as_matrix(h)
    h = hermitian(h, HERMITIAN_TOL * max(1.0, max_abs(h)))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenFailure(f"eigendecomposition did not converge: {exc}", float("nan"))
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    residual = max_abs(h @ v - v * w)
    if not np.all(np.isfinite(w)) or residual > 1e-8 * scale:
        raise EigenFailure("eigendecomposition residual too large", residual)
    gap = cluster_tol * scale
    out = np.empty_like(v)
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[stop - 1] < gap:
            stop += 1
        block = v[:, start:stop]
        out[:, start:stop] = canonical_basis(block) if stop - start > 1 else fix_phases(block)
        start = stop
    return w, out


def _threshold(w: np.ndarray, rank_tol: float | None) -> float:
    tol = DEFAULT_RANK_TOL if rank_tol is None else rank_tol
    lam_max = float(np.max(np.abs(w))) if w.size else 0.0
    return tol * lam_max


def null_space(h: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of a PSD matrix.

    Eigenvalues at or below ``rank_tol * lambda_max`` count as zero; the zero
    matrix has the whole space as kernel.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    w, v = np.linalg.eigh(sym(h))
    if not w.size or np.max(np.abs(w)) == 0.0:
        return np.eye(n, dtype=complex)
    k = int(np.sum(w <= _threshold(w, rank_tol)))
    return canonical_basis(v[:, :k])


def range_basis(h: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical range of a PSD matrix."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    w, v = np.linalg.eigh(sym(h))
    if not w.size or np.max(np.abs(w)) == 0.0:
        return np.zeros((n, 0), dtype=complex)
    k = int(np.sum(w <= _threshold(w, rank_tol)))
    return canonical_basis(v[:, k:])


def intersect_kernels(operators: Sequence[np.ndarray], rank_tol: float | None = None) -> np.ndarray:
    """Basis of the intersection of the kernels of PSD operators.

    For PSD summands the kernel of the sum is exactly the intersection.
    """
    if not operators:
        raise LinalgError("intersect_kernels needs at least one operator")
    dims = {np.shape(op) for op in operators}
    if len(dims) != 1:
        raise LinalgError(f"dimension mismatch among operators: {sorted(dims)}")
    total = np.sum([np.asarray(op, dtype=complex) for op in operators], axis=0)
    return null_space(total, rank_tol)


def projector(basis: np.ndarray) -> np.ndarray:
    return sym(basis @ dagger(basis))


def orthonormality_error(basis: np.ndarray) -> float:
    r = basis.shape[1]
    if r == 0:
        return 0.0
    return max_abs(dagger(basis) @ basis - np.eye(r))


class PsdCheck(NamedTuple):
    ok: bool
    min_eigenvalue: float
    witness: np.ndarray | None

    def __bool__(self) -> bool:
        return self.ok


def is_psd(h: np.ndarray, tol: float = PSD_TOL) -> PsdCheck:
    """True iff ``lambda_min >= -tol * max(1, lambda_max)``; on failure the
    most negative eigenpair is returned as witness."""
    w, v = np.linalg.eigh(sym(np.asarray(h, dtype=complex)))
    lam_min, lam_max = float(w[0]), float(w[-1])
    if lam_min >= -tol * max(1.0, lam_max):
        return PsdCheck(True, lam_min, None)
    return PsdCheck(False, lam_min, fix_phases(v[:, :1])[:, 0])


def min_eigenvalue(h: np.ndarray) -> float:
    h = np.asarray(h, dtype=complex)
    if h.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(sym(h))[0])


def psd_sqrt_factor(h: np.ndarray) -> np.ndarray:
    """A factor ``L`` with ``L L* = h`` for positive definite ``h``."""
    w, v = np.linalg.eigh(sym(h))
    return v * np.sqrt(np.clip(w, 0.0, None))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))
