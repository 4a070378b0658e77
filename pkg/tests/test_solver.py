import numpy as np
import pytest

from curvfunc.errors import InvalidInput
from curvfunc.solver import FAMILIES, SolveConfig, get_family, reduced_value, solve, sweep


def berger_critical_x(t):
    return (2 + 4 * t) / (3 + t)


@pytest.mark.parametrize("t", [-0.25, 0.0, 0.75])
def test_berger_points(t):
    result = solve("berger", t, config=SolveConfig(starts=12))
    xs = sorted(p.params[0] for p in result.points)
    assert xs == pytest.approx(sorted([1.0, berger_critical_x(t)]), abs=1e-10)
    for p in result.points:
        assert p.residual_tensor_norm < 1e-8
    einstein = [p for p in result.points if p.is_einstein]
    assert len(einstein) == 1 and einstein[0].params[0] == pytest.approx(1.0)


def test_berger_branch_sign_window():
    pts = {round(p.params[0], 8): p for p in solve("berger", 0.8, config=SolveConfig(starts=12)).points}
    branch = pts[round(berger_critical_x(0.8), 8)]
    assert branch.min_sectional < -1e-6
    assert branch.sectional_flag == "exact"


def test_no_berger_branch_below_minus_half():
    result = solve("berger", -0.75, config=SolveConfig(starts=12))
    assert all(p.is_einstein for p in result.points)


def test_diagonal_dedup_permutations():
    fam = get_family("diagonal-su2")
    a = fam.canonical(np.array([2.0, 3.0]))
    b = fam.canonical(np.array([3.0 / 2.0, 1.0 / 2.0]))  # (2, 3, 1) rescaled by 1/2
    assert np.allclose(a, b)


def test_diagonal_su2_finds_round_and_berger_type():
    t = 0.0
    result = solve("diagonal-su2", t, config=SolveConfig(starts=16, seed=3))
    keys = [FAMILIES["diagonal-su2"].canonical(np.array(p.params)) for p in result.points]
    for i in range(len(keys)):
        for j in range(i):
            assert np.linalg.norm(keys[i] - keys[j]) >= 1e-6
    assert any(p.is_einstein for p in result.points)
    for p in result.points:
        assert p.residual_tensor_norm < 1e-8


def test_reduced_value_is_scale_free():
    fam = get_family("diagonal-su2")
    assert reduced_value(fam, [2.0, 0.5], 0.1) == pytest.approx(
        reduced_value(get_family("diagonal-su2"), [2.0, 0.5], 0.1))


def test_unknown_family():
    with pytest.raises(InvalidInput):
        get_family("heisenberg")


def test_solve_is_deterministic():
    cfg = SolveConfig(starts=10, seed=5)
    a = solve("diagonal-su2", -0.3, config=cfg)
    b = solve("diagonal-su2", -0.3, config=cfg)
    assert [p.params for p in a.points] == [p.params for p in b.points]


def test_threads_do_not_change_results():
    a = solve("berger", 0.1, config=SolveConfig(starts=8))
    b = solve("berger", 0.1, config=SolveConfig(starts=8, threads=4))
    assert [p.params for p in a.points] == [p.params for p in b.points]


def test_sweep_tracks_branch():
    ts = np.linspace(-0.2, 0.2, 5)
    res = sweep("berger", ts, config=SolveConfig(starts=8))
    ne = res.non_einstein()
    assert len(ne) == 5
    for p in ne:
        assert p.params[0] == pytest.approx(berger_critical_x(p.t), abs=1e-10)
    assert not res.branch_reports


def test_sweep_rejects_non_monotone_grid():
    with pytest.raises(InvalidInput):
        sweep("berger", [0.0, 0.1, 0.05])
