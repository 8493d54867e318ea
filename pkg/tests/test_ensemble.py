import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udisc import linalg as la
from udisc.ensemble import EnsembleError, build_ensemble, check_feasibility, signal_spaces
from _instances import diag, dim3_mixed, ket, kernel_oracle, orthogonal_pair, pure, random_feasible

seeds = st.integers(0, 2**32 - 1)


def test_build_qubit_pair():
    e = build_ensemble([pure([1, 0]), pure([0, 1])], [0.5, 0.5])
    assert e.m == 2 and e.dim == 2 and not e.deflated


def test_build_single_mixed_state():
    e = build_ensemble([diag(0.5, 0.5)], [1.0])
    assert e.m == 1
    assert np.allclose(e.states[0], np.eye(2) / 2)


def test_build_rejects_negative_prior():
    with pytest.raises(EnsembleError, match="non-positive"):
        build_ensemble([pure([1, 0])], [-0.2])


@pytest.mark.parametrize(
    "mats, priors, msg",
    [
        ([pure([1, 0])], [0.5], "sum"),
        ([np.array([[0.5, 1], [0, 0.5]])], [1.0], "Hermitian"),
        ([diag(1.5, -0.5)], [1.0], "eigenvalue"),
        ([diag(0.6, 0.6)], [1.0], "trace"),
        ([pure([1, 0]), diag(1, 0, 0)], [0.5, 0.5], "dimension"),
    ],
)
def test_build_rejections(mats, priors, msg):
    with pytest.raises(EnsembleError, match=msg):
        build_ensemble(mats, priors)


def test_build_is_immutable():
    e = orthogonal_pair()
    with pytest.raises(ValueError):
        e.states[0][0, 0] = 2


def test_orthogonal_pair_signal_spaces():
    sp = signal_spaces(orthogonal_pair())
    assert np.allclose(sp[0].projector, pure([1, 0]))
    assert np.allclose(sp[1].projector, pure([0, 1]))
    assert all(np.isclose(s.max_eta, 1) for s in sp)


def test_dim3_signal_spaces():
    e = dim3_mixed()
    sp = signal_spaces(e)
    assert np.allclose(sp[0].projector, pure([1, 0, 0]))
    assert np.allclose(sp[1].projector, pure([0, 0, 1]))
    for i, s in enumerate(sp):
        k = kernel_oracle([e.states[1 - i]])
        assert np.allclose(s.projector, k @ k.conj().T)
        assert np.isclose(s.max_eta, 0.5)


def test_identical_states_undetectable():
    rho = diag(0.5, 0.5, 0)
    sp = signal_spaces(build_ensemble([rho, rho], [0.5, 0.5]))
    for s in sp:
        assert s.dim == 1
        assert s.max_eta == 0 and not s.detectable


def test_single_state_gets_whole_space():
    sp = signal_spaces(build_ensemble([diag(0.5, 0.5)], [1.0]))
    assert sp[0].dim == 2 and np.isclose(sp[0].max_eta, 1)


def test_feasibility_reports():
    rep = check_feasibility(orthogonal_pair())
    assert rep.overall and rep.detectable == (True, True)
    rho = diag(0.5, 0.5)
    assert not check_feasibility(build_ensemble([rho, rho], [0.5, 0.5])).overall
    rep = check_feasibility(dim3_mixed())
    assert rep.detectable == (True, True)
    assert np.allclose(rep.max_etas, 0.5)


def test_deflation_exposes_isometry():
    e = build_ensemble([pure(ket(1, 0, 0, 0)), pure(ket(1, 1, 0, 0))], [0.5, 0.5])
    assert e.deflated
    rep = check_feasibility(e)
    assert rep.support_dim == 2 and rep.isometry.shape == (4, 2)
    assert la.orthonormality_error(rep.isometry) < 1e-12
    r = e.reduced()
    for rho, small in zip(e.states, r.states):
        assert np.allclose(e.lift(small), rho)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_signal_space_annihilates_other_states(seed):
    e = random_feasible(np.random.default_rng(seed))
    sp = signal_spaces(e)
    for i, s in enumerate(sp):
        assert s.detectable
        assert 0 <= s.max_eta <= 1
        for j, rho in enumerate(e.states):
            if i != j:
                assert la.max_abs(s.projector @ rho) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_signal_spaces_unitarily_covariant(seed):
    rng = np.random.default_rng(seed)
    e = random_feasible(rng, n_max=6)
    w = la.random_unitary(e.dim, rng)
    f = build_ensemble([w @ rho @ w.conj().T for rho in e.states], e.priors)
    for a, b in zip(signal_spaces(e), signal_spaces(f)):
        assert la.max_abs(w @ a.projector @ w.conj().T - b.projector) <= 1e-9


def test_max_eta_one_iff_supported_inside():
    e = build_ensemble([pure([1, 0, 0]), diag(0, 0.5, 0.5)], [0.5, 0.5])
    sp = signal_spaces(e)
    assert np.isclose(sp[0].max_eta, 1) and np.isclose(sp[1].max_eta, 1)
    assert sp[0].dim == 1 and sp[1].dim == 2
    e = dim3_mixed()
    assert all(s.max_eta < 1 for s in signal_spaces(e))
