import numpy as np
import pytest

from udisc import linalg as la
from udisc.closed_form import orthogonality_violation
from udisc.ensemble import check_feasibility, signal_spaces
from udisc.generate import GenerationError, generate
from udisc.symmetry import validate_group


def test_pair_kind():
    e = generate("pair", 4, seed=7).ensemble()
    assert [s.dim for s in signal_spaces(e)] == [1, 1]
    assert check_feasibility(e).overall


def test_orthogonal_kind():
    e = generate("orthogonal", 3, 2, seed=1).ensemble()
    p = [s.projector for s in signal_spaces(e)]
    assert la.max_abs(p[0] @ p[1]) <= 1e-10
    assert orthogonality_violation(signal_spaces(e)) is None


def test_gu_kind():
    inst = generate("gu", 3, 3, seed=2)
    assert inst.symmetry is not None and inst.symmetry.kind == "gu"
    g = validate_group(inst.symmetry.unitaries)
    assert g.order == 3
    assert check_feasibility(inst.ensemble()).overall


def test_deterministic():
    a = generate("random", 5, 3, seed=42)
    b = generate("random", 5, 3, seed=42)
    assert all(np.array_equal(x, y) for x, y in zip(a.matrices, b.matrices))
    assert a.priors == b.priors


def test_impossible_rank_profile_shows_arithmetic():
    with pytest.raises(GenerationError, match=r"4 - \(3 - 1\) = 2"):
        generate("random", 4, 3, ranks=[3])


def test_gu_needs_room():
    with pytest.raises(GenerationError, match=r"4 \* 1 = 4 reserved directions, got dim 3"):
        generate("gu", 3, 4)


@pytest.mark.parametrize("kind", ["random", "pair", "orthogonal", "gu"])
def test_generated_instances_always_feasible(kind):
    rng = np.random.default_rng(0)
    for seed in range(250):
        n = int(rng.integers(2, 7))
        m = 2 if kind == "pair" else int(rng.integers(2, n + 1))
        e = generate(kind, n, m, seed=seed).ensemble()
        rep = check_feasibility(e)
        assert all(rep.detectable), (kind, seed)
