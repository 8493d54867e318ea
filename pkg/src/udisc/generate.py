"""Random feasible instances.

Every state gets a kernel that contains the reserved directions of all
other states, so each reserved direction lies in its own state's signal
space and is seen by that state with positive weight.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import linalg as la
from .io import Instance, Symmetry

KINDS = ("random", "pair", "orthogonal", "gu", "cgu")


class GenerationError(ValueError):
    pass


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _gaussian(rng, rows, cols) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def density_with_kernel(rng, n: int, rank: int, kernel: np.ndarray | None) -> np.ndarray:
    """``G G^* / Tr`` with ``G`` Gaussian ``n x rank`` and ``kernel`` columns projected out."""
    g = _gaussian(rng, n, rank)
    if kernel is not None and kernel.shape[1]:
        q, _ = np.linalg.qr(kernel)
        g = g - q @ (la.dagger(q) @ g)
    rho = g @ la.dagger(g)
    return la.sym(rho / np.real(np.trace(rho)))


def _priors(rng, m: int, priors) -> list[float]:
    if priors is None:
        p = rng.dirichlet(np.full(m, 2.0))
        return [float(x) for x in p / p.sum()]
    if len(priors) != m:
        raise GenerationError(f"{len(priors)} priors for {m} states")
    return [float(x) for x in priors]


def _check_ranks(n: int, m: int, ranks: Sequence[int], reserved: int) -> None:
    cap = n - (reserved - 1)
    for i, r in enumerate(ranks):
        if r < 1:
            raise GenerationError(f"rank of state {i + 1} must be at least 1, got {r}")
        if r > cap:
            raise GenerationError(
                f"rank {r} of state {i + 1} leaves no reserved direction: "
                f"rank <= dim - (reserved - 1) = {n} - ({reserved} - 1) = {cap}"
            )


def _resolve_ranks(rng, n: int, m: int, ranks, reserved: int) -> list[int]:
    cap = n - (reserved - 1)
    if cap < 1:
        raise GenerationError(
            f"dimension too small: {reserved} reserved directions need dim >= {reserved}, got {n}"
        )
    if ranks is None:
        return [int(r) for r in rng.integers(1, cap + 1, size=m)]
    ranks = list(ranks)
    if len(ranks) == 1:
        ranks = ranks * m
    if len(ranks) != m:
        raise GenerationError(f"{len(ranks)} ranks for {m} states")
    _check_ranks(n, m, ranks, reserved)
    return [int(r) for r in ranks]


def random_instance(dim: int, states: int, ranks=None, seed=None, priors=None) -> Instance:
    """Mixed states with linearly independent reserved directions."""
    rng = _rng(seed)
    n, m = dim, states
    if m < 1:
        raise GenerationError("need at least one state")
    ranks = _resolve_ranks(rng, n, m, ranks, m)
    q = _gaussian(rng, n, m)
    mats = [density_with_kernel(rng, n, ranks[i], np.delete(q, i, axis=1)) for i in range(m)]
    return Instance(n, _priors(rng, m, priors), mats)


def pair_instance(dim: int, seed=None, priors=None) -> Instance:
    """Two states of rank ``dim - 1``: both signal spaces are lines."""
    if dim < 2:
        raise GenerationError(f"pair instances need dim >= 2, got {dim}")
    return random_instance(dim, 2, [dim - 1], seed, priors)


def orthogonal_instance(dim: int, states: int, seed=None, priors=None) -> Instance:
    """Signal spaces are random orthogonal blocks ``B_i``; each state has
    full rank on ``B_i`` plus a shared block ``W``."""
    rng = _rng(seed)
    n, m = dim, states
    if n < m:
        raise GenerationError(f"orthogonal instances need dim >= states: {n} < {m}")
    w = int(rng.integers(0, n - m + 1))
    extra = rng.multinomial(n - m - w, np.full(m, 1 / m))
    sizes = [1 + int(x) for x in extra]
    basis = np.linalg.qr(_gaussian(rng, n, n))[0]
    starts = np.cumsum([0] + sizes)
    shared = basis[:, starts[-1]:]
    mats = []
    for i in range(m):
        block = np.hstack([basis[:, starts[i]:starts[i + 1]], shared])
        coeff = _gaussian(rng, block.shape[1], block.shape[1])
        g = block @ coeff
        rho = g @ la.dagger(g)
        mats.append(la.sym(rho / np.real(np.trace(rho))))
    return Instance(n, _priors(rng, m, priors), mats)


def cyclic_group(dim: int, order: int, seed=None) -> list[np.ndarray]:
    """``U_j = Q diag(omega^(j (k mod order))) Q^*`` for ``j = 0..order-1``."""
    if dim < order:
        raise GenerationError(f"cyclic group of order {order} needs dim >= {order}, got {dim}")
    rng = _rng(seed)
    q = la.random_unitary(dim, rng)
    powers = np.arange(dim) % order
    out = []
    for j in range(order):
        phases = np.exp(2j * np.pi * j * powers / order)
        out.append((q * phases) @ la.dagger(q))
    out[0] = np.eye(dim, dtype=complex)
    return out


def cgu_instance(dim: int, order: int, generators: int, ranks=None, seed=None) -> Instance:
    """Compound GU: ``rho_{ik} = U_i rho_k U_i^*`` with ``order * generators``
    reserved directions ``U_i q_k``."""
    rng = _rng(seed)
    n, l, r = dim, order, generators
    total = l * r
    if n < total:
        raise GenerationError(
            f"need dim >= order * generators = {l} * {r} = {total} reserved directions, got dim {n}"
        )
    ranks = _resolve_ranks(rng, n, r, ranks, total)
    group = cyclic_group(n, l, rng)
    qs = _gaussian(rng, n, r)
    directions = np.column_stack([u @ qs[:, k] for k in range(r) for u in group])
    gens = []
    for k in range(r):
        kernel = np.delete(directions, k * l, axis=1)
        gens.append(density_with_kernel(rng, n, ranks[k], kernel))
    states = [la.sym(u @ g @ la.dagger(u)) for g in gens for u in group]
    kind = "gu" if r == 1 else "cgu"
    sym = Symmetry(kind, group, gens if kind == "cgu" else [])
    return Instance(n, [1 / total] * total, states, sym)


def gu_instance(dim: int, states: int, ranks=None, seed=None) -> Instance:
    return cgu_instance(dim, states, 1, ranks, seed)


def generate(kind: str, dim: int, states: int = 2, ranks=None, seed=None, generators: int = 2) -> Instance:
    if kind == "random":
        return random_instance(dim, states, ranks, seed)
    if kind == "pair":
        if states != 2:
            raise GenerationError(f"pair instances have exactly 2 states, got {states}")
        if ranks is not None and any(r != dim - 1 for r in ranks):
            raise GenerationError(f"pair instances use rank dim - 1 = {dim - 1}")
        return pair_instance(dim, seed)
    if kind == "orthogonal":
        if ranks is not None:
            raise GenerationError("orthogonal instances choose their own ranks")
        return orthogonal_instance(dim, states, seed)
    if kind == "gu":
        return gu_instance(dim, states, ranks, seed)
    if kind == "cgu":
        return cgu_instance(dim, states, generators, ranks, seed)
    raise GenerationError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
