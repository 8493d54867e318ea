import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udisc import linalg as la
from udisc import solver
from udisc.ensemble import build_ensemble
from udisc.generate import cgu_instance, gu_instance
from udisc.solver import Measurement, verify_optimality
from udisc.symmetry import (
    CGUEnsemble,
    GroupError,
    GUEnsemble,
    covariance_error,
    gu_from_ensemble,
    program_size,
    solve_cgu,
    solve_gu,
    symmetrize,
    validate_group,
)
from _instances import ket, pure

seeds = st.integers(0, 2**32 - 1)

X = np.array([[0, 1], [1, 0]], dtype=complex)
SHIFT = np.roll(np.eye(3), 1, axis=0).astype(complex)


def cyclic3():
    return validate_group([np.eye(3), SHIFT, SHIFT @ SHIFT])


def test_pauli_group_table():
    g = validate_group([np.eye(2), X])
    assert g.order == 2
    assert g.table.tolist() == [[0, 1], [1, 0]]


def test_cyclic_table_is_subtraction():
    g = cyclic3()
    for j in range(3):
        for i in range(3):
            assert g.table[j, i] == (i - j) % 3


def test_t_gate_not_closed():
    t = np.diag([1, np.exp(1j * np.pi / 4)])
    with pytest.raises(GroupError, match="not closed"):
        validate_group([np.eye(2), t])


@pytest.mark.parametrize(
    "elements, msg",
    [
        ([X, np.eye(2)], "identity"),
        ([np.eye(2), 2 * X], "unitary"),
        ([np.eye(2), np.eye(2)], "coincide"),
        ([np.eye(2), X, np.diag([1, -1]), X @ np.diag([1, -1])], "commute"),
    ],
)
def test_group_rejections(elements, msg):
    with pytest.raises(GroupError, match=msg):
        validate_group(elements)


def test_orthogonal_gu_pair():
    g = GUEnsemble(validate_group([np.eye(2), X]), pure([1, 0]))
    sol = solve_gu(g)
    assert np.allclose(sol.generators[0], pure([1, 0]), atol=1e-7)
    assert sol.p_detect == pytest.approx(1, abs=1e-7)


def test_cyclic_pure_states_match_full():
    g = GUEnsemble(cyclic3(), pure(ket(1, 1, 0)))
    red = solve_gu(g)
    full = solver.solve(g.ensemble())
    assert abs(red.p_detect - full.p_detect) <= 1e-6
    assert covariance_error(red.measurement, g.group) <= 1e-8
    assert verify_optimality(g.ensemble(), red.measurement, red.certificate).passed


def test_maximally_mixed_generator():
    g = GUEnsemble(cyclic3(), np.eye(3) / 3)
    sol = solve_gu(g)
    assert sol.p_detect == 0
    assert sol.notes


def test_cgu_single_generator_is_gu():
    g = GUEnsemble(cyclic3(), pure(ket(1, 1, 0)))
    c = CGUEnsemble(g.group, (g.generator,))
    assert solve_cgu(c).p_detect == solve_gu(g).p_detect


def test_cgu_pauli_two_generators():
    tilt = pure(ket(np.cos(0.3), np.sin(0.3)))
    c = CGUEnsemble(validate_group([np.eye(2), X]), (pure([1, 0]), tilt))
    assert abs(solve_cgu(c).p_detect - solver.solve(c.ensemble()).p_detect) <= 1e-6


def test_cgu_shared_kernels_infeasible():
    rho = np.diag([0.5, 0.5, 0]).astype(complex)
    u = np.diag([1, -1, 1]).astype(complex)
    c = CGUEnsemble(validate_group([np.eye(3), u]), (rho, rho))
    assert solve_cgu(c).p_detect == 0


def test_nonuniform_priors_rejected():
    g = GUEnsemble(cyclic3(), pure(ket(1, 1, 0)))
    e = build_ensemble(g.states(), [0.5, 0.3, 0.2])
    with pytest.raises(GroupError, match="uniform"):
        gu_from_ensemble(e, g.group)


def test_program_size_counts():
    inst = gu_instance(5, 4, seed=3)
    g = inst.symmetric()
    sz = program_size(5, 4)
    assert (sz.reduced_unknowns, sz.full_unknowns) == (25, 100)
    assert (sz.reduced_constraints, sz.full_constraints) == (5, 17)
    red = solve_gu(g)
    full = solver.solve(g.ensemble())
    assert len(red.problem.blocks) == 1
    assert len(full.problem.blocks) == 4
    assert full.problem.variable_count == 4 * red.problem.variable_count


def test_symmetrize_fixed_point():
    g = gu_instance(4, 3, seed=5).symmetric()
    sol = solve_gu(g)
    e = g.ensemble()
    sym = symmetrize(sol.measurement, g.group, e)
    for a, b in zip(sym.operators, sol.measurement.operators):
        assert la.max_abs(a - b) <= 1e-10


def test_symmetrize_full_solution():
    g = gu_instance(5, 3, seed=6).symmetric()
    e = g.ensemble()
    full = solver.solve(e)
    sym = symmetrize(full.measurement, g.group, e)
    assert abs(sym.p_detect - full.p_detect) <= 1e-8
    assert covariance_error(sym, g.group) <= 1e-8
    assert sym.cross_error(e) <= 1e-8
    assert sym.completeness_error() <= 1e-9
    assert sym.min_eigenvalue() >= -1e-8


def test_symmetrize_permuted_labels_breaks():
    g = gu_instance(5, 3, seed=6).symmetric()
    e = g.ensemble()
    full = solver.solve(e)
    dets = list(full.measurement.operators[1:])
    swapped = Measurement.assemble(e, [dets[1], dets[2], dets[0]])
    sym = symmetrize(swapped, g.group, e)
    assert sym.cross_error(e) > 1e-3 or sym.p_detect < full.p_detect - 1e-3


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_gu_reduction_matches_full(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 7))
    n = int(rng.integers(m, 7))
    g = gu_instance(n, m, seed=rng).symmetric()
    red = solve_gu(g)
    e = g.ensemble()
    assert abs(red.p_detect - solver.solve(e).p_detect) <= 1e-6
    assert covariance_error(red.measurement, g.group) <= 1e-8
    assert red.measurement.cross_error(e) <= 1e-8
    assert verify_optimality(e, red.measurement, red.certificate).passed


@settings(max_examples=10, deadline=None)
@given(seed=seeds)
def test_cgu_reduction_matches_full(seed):
    rng = np.random.default_rng(seed)
    l, r = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2)][int(rng.integers(0, 5))]
    n = int(rng.integers(l * r, 9))
    c = cgu_instance(n, l, r, seed=rng).symmetric()
    red = solve_cgu(c)
    e = c.ensemble()
    assert abs(red.p_detect - solver.solve(e).p_detect) <= 1e-6
    assert covariance_error(red.measurement, c.group, r) <= 1e-8
    assert red.measurement.cross_error(e) <= 1e-8
