import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udisc import linalg as la
from _instances import diag, kernel_oracle, pure


def rand_herm(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def rand_psd(rng, n, rank):
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return g @ g.conj().T


seeds = st.integers(0, 2**32 - 1)


def test_eigh_identity():
    w, v = la.eigh(np.eye(2))
    assert np.allclose(w, [1, 1])
    assert la.orthonormality_error(v) < 1e-12


def test_eigh_diagonal():
    w, v = la.eigh(diag(-3, 5))
    assert np.allclose(w, [-3, 5])
    assert np.allclose(np.abs(v), np.eye(2))


def test_eigh_pauli_x():
    w, v = la.eigh(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(w, [-1, 1])
    assert np.isclose(abs(np.vdot(v[:, 0], [1, -1])) / np.sqrt(2), 1)
    assert np.isclose(abs(np.vdot(v[:, 1], [1, 1])) / np.sqrt(2), 1)


def test_eigh_phase_convention():
    w, v = la.eigh(np.array([[0, 1j], [-1j, 0]]))
    for col in v.T:
        k = np.argmax(np.abs(col))
        assert col[k].imag == 0 and col[k].real > 0


def test_eigh_rejects_non_hermitian():
    with pytest.raises(la.LinalgError):
        la.eigh(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 16))
def test_eigh_reconstruction(seed, n):
    h = rand_herm(np.random.default_rng(seed), n)
    w, v = la.eigh(h)
    assert np.all(np.diff(w) >= 0)
    err = la.max_abs(h - v @ np.diag(w) @ v.conj().T)
    assert err <= 1e-10 * max(1.0, la.max_abs(h))


def test_eigh_degenerate_cluster_is_canonical():
    rng = np.random.default_rng(0)
    u = la.random_unitary(4, rng)
    h = u @ diag(1, 1, 2, 3) @ u.conj().T
    _, v1 = la.eigh(h)
    _, v2 = la.eigh(h + 0)
    assert np.array_equal(v1, v2)


def test_null_space_zero_matrix():
    assert np.allclose(la.null_space(np.zeros((3, 3))), np.eye(3))


def test_null_space_rank_one_projector():
    b = la.null_space(pure([1, 0]))
    assert b.shape == (2, 1)
    assert np.allclose(b[:, 0], [0, 1])


def test_null_space_known_factorization():
    rng = np.random.default_rng(5)
    v = la.random_unitary(3, rng)
    h = v @ diag(1, 2, 0) @ v.conj().T
    b = la.null_space(h)
    assert b.shape == (3, 1)
    assert np.linalg.norm(h @ b) <= 1e-10


def test_intersect_identical_kernels():
    b = la.intersect_kernels([pure([1, 0]), pure([1, 0])])
    assert b.shape == (2, 1) and np.allclose(b[:, 0], [0, 1])


def test_intersect_disjoint_kernels():
    assert la.intersect_kernels([pure([1, 0]), pure([0, 1])]).shape == (2, 0)


def test_intersect_dim4_example():
    rho = diag(0.5, 0.5, 0, 0)
    sigma = diag(0, 0.5, 0.5, 0)
    b = la.intersect_kernels([rho, sigma])
    assert b.shape == (4, 1)
    for h in (rho, sigma):
        assert np.linalg.norm(h @ b) <= 1e-12
    oracle = kernel_oracle([rho, sigma])
    assert np.allclose(la.projector(b), oracle @ oracle.conj().T)


def test_intersect_dimension_mismatch():
    with pytest.raises(la.LinalgError):
        la.intersect_kernels([np.eye(2), np.eye(3)])


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_intersect_annihilates_every_operator(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    ops = [rand_psd(rng, n, int(rng.integers(1, n))) for _ in range(int(rng.integers(1, 4)))]
    b = la.intersect_kernels(ops)
    for h in ops:
        assert np.linalg.norm(h @ b) <= 1e-9 * max(1.0, la.max_abs(h))
    oracle = kernel_oracle(ops)
    assert b.shape[1] == oracle.shape[1]


def test_projector_examples():
    assert np.allclose(la.projector(np.zeros((3, 0))), np.zeros((3, 3)))
    assert np.allclose(la.projector(np.eye(2)), np.eye(2))
    v = np.array([[1], [1]]) / np.sqrt(2)
    assert np.allclose(la.projector(v), 0.5 * np.ones((2, 2)))


def test_is_psd_examples():
    assert la.is_psd(np.eye(2))
    chk = la.is_psd(diag(1, -1))
    assert not chk and np.isclose(chk.min_eigenvalue, -1)
    assert np.allclose(np.abs(chk.witness), [0, 1])
    p = la.projector(la.null_space(pure([1, 1j])))
    assert la.is_psd(p - p @ p)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_rank_nullity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 10))
    h = rand_psd(rng, n, int(rng.integers(0, n + 1)))
    total = la.projector(la.null_space(h)) + la.projector(la.range_basis(h))
    assert la.max_abs(total - np.eye(n)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_null_space_dimension_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 10))
    h = rand_psd(rng, n, int(rng.integers(0, n + 1)))
    u = la.random_unitary(n, rng)
    assert la.null_space(h).shape[1] == la.null_space(u @ h @ u.conj().T).shape[1]
