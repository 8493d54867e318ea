import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udisc.simulate import ProbabilityError, born_table, simulate
from udisc.solver import Measurement, solve
from _instances import SQ2, orthogonal_pair, overlapping_pair, random_feasible

seeds = st.integers(0, 2**32 - 1)
N = 100_000


def test_orthogonal_pair_deterministic():
    e = orthogonal_pair()
    rep = simulate(e, solve(e).measurement, N, 1)
    assert rep.wrong_detections == 0
    assert rep.empirical_etas == (1.0, 1.0)


def test_overlapping_pair_statistics():
    e = overlapping_pair()
    m = solve(e).measurement
    rep = simulate(e, m, N, 3)
    assert rep.wrong_detections == 0
    for eta, hat, nj in zip(m.etas, rep.empirical_etas, rep.allocations):
        assert eta == pytest.approx(1 - 1 / SQ2, abs=1e-7)
        assert abs(hat - eta) <= 3 * np.sqrt(eta * (1 - eta) / nj)


def test_corrupted_solution_has_wrong_detections():
    e = overlapping_pair()
    m = solve(e).measurement
    bad = Measurement.assemble(e, [0.5 * (m.operators[1] + m.operators[2])] * 2)
    assert simulate(e, bad, N, 0).wrong_detections > 0


def test_negative_probability_rejected():
    e = orthogonal_pair()
    ops = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    bad = Measurement.assemble(e, ops, np.diag([-1e-6, 0.0]))
    with pytest.raises(ProbabilityError):
        born_table(e, bad)


def test_tiny_negatives_clipped():
    e = orthogonal_pair()
    bad = Measurement.assemble(e, [np.diag([1.0, -1e-9]), np.diag([0.0, 1.0])], np.zeros((2, 2)))
    t = born_table(e, bad)
    assert t.min() == 0
    assert np.allclose(t.sum(axis=0), 1)


def test_deterministic_given_seed():
    e = random_feasible(np.random.default_rng(1))
    m = solve(e).measurement
    a, b = simulate(e, m, N, 9), simulate(e, m, N, 9)
    assert np.array_equal(a.counts, b.counts)


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_simulation_laws(seed):
    rng = np.random.default_rng(seed)
    e = random_feasible(rng)
    m = solve(e).measurement
    rep = simulate(e, m, N, seed)
    assert rep.wrong_detections == 0
    assert rep.counts.sum(axis=0).tolist() == list(rep.allocations)
    assert rep.counts.shape == (e.m + 1, e.m)
