import dataclasses
import math

import pytest

from lorenz_errors import NotNiceError
from lorenz_map import Interval
from orbits import periodic_orbits
from return_maps import (
    NiceVerdict, check_full_branches, first_return, first_return_value, is_nice, periodic_accumulation,
    periodic_approximants, periodic_gap_interval,
)

FULL_GAP = Interval(0.25, 0.75)


def test_interval_bounded_by_periodic_orbit_is_nice(full_map):
    nice = is_nice(full_map, FULL_GAP)
    assert nice.verdict is NiceVerdict.NICE
    assert nice.is_nice


def test_interval_whose_boundary_returns_is_not_nice(full_map):
    nice = is_nice(full_map, Interval(0.2, 0.8))
    assert nice.verdict is NiceVerdict.NOT_NICE
    assert nice.witness is not None
    assert nice.to_dict()["verdict"] == NiceVerdict.NOT_NICE.value


def test_is_nice_requires_the_critical_point(full_map):
    with pytest.raises(ValueError):
        is_nice(full_map, Interval(0.1, 0.3))


def test_whole_interval_returns_in_one_step(full_map):
    decomp = first_return(full_map, Interval(0.0, 1.0), horizon=100)
    assert len(decomp.branches) == 2
    assert [br.return_time for br in decomp.branches] == [1, 1]
    assert decomp.covered_fraction == pytest.approx(1.0)
    assert not decomp.horizon_exhausted


def test_return_map_to_periodic_gap_has_full_branches(full_map):
    decomp = first_return(full_map, FULL_GAP, horizon=1000)
    assert decomp.branches
    assert decomp.covered_fraction > 0.999
    report = check_full_branches(full_map, decomp)
    assert report.passed, report.failures


def test_branches_are_ordered_and_disjoint(full_map):
    branches = first_return(full_map, FULL_GAP, horizon=1000).branches
    for left, right in zip(branches, branches[1:]):
        assert left.domain.hi <= right.domain.lo


def test_return_map_refuses_non_nice_interval(full_map):
    with pytest.raises(NotNiceError):
        first_return(full_map, Interval(0.2, 0.8), horizon=1000)


def test_first_return_value(full_map):
    assert first_return_value(full_map, Interval(0.0, 1.0), 0.25, 10) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        first_return_value(full_map, FULL_GAP, 0.25, 10)


def test_periodic_gap_interval_of_period_two_map(period_two_map):
    gap = periodic_gap_interval(period_two_map, 4)
    assert gap.lo == pytest.approx(5 / 14)
    assert gap.hi == pytest.approx(9 / 14)


def test_periodic_gap_interval_reuses_orbits(period_two_map):
    orbits = periodic_orbits(period_two_map, 4)
    assert periodic_gap_interval(period_two_map, 4, orbits) == periodic_gap_interval(period_two_map, 4)


def test_periodic_points_accumulate_on_critical_point(full_map):
    rows = periodic_accumulation(full_map, 8)
    assert [row["radius"] for row in rows] == [0.1, 0.01, 0.001]
    assert rows[0]["left"] and rows[0]["right"]


def test_no_accumulation_in_contracting_map(contracting_map):
    rows = periodic_accumulation(contracting_map, 8, radii=[0.1])
    assert rows == [{"radius": 0.1, "left": False, "right": False}]


def test_approximants_of_periodic_ends_are_constant(full_map):
    left, right = periodic_approximants(full_map, FULL_GAP, 3, 8)
    assert left == [0.25, 0.25, 0.25]
    assert right == [0.75, 0.75, 0.75]


def test_shrunk_branch_image_fails_the_full_branch_check(full_map):
    decomp = first_return(full_map, FULL_GAP, horizon=1000)
    i, branch = next((i, br) for i, br in enumerate(decomp.branches) if not br.touches_critical)
    faulty = dataclasses.replace(branch, image=Interval(branch.image.lo, branch.image.hi - 0.01))
    branches = decomp.branches[:i] + [faulty] + decomp.branches[i + 1:]
    report = check_full_branches(full_map, dataclasses.replace(decomp, branches=branches))
    assert not report.passed
    assert [(e["branch"], e["check"]) for e in report.failures] == [(i, "full_image")]


def test_nice_verdict_persists_at_double_horizon(full_map):
    for J in (FULL_GAP, Interval(0.2, 0.8)):
        first = is_nice(full_map, J, horizon=500)
        second = is_nice(full_map, J, horizon=1000)
        assert first.verdict is second.verdict
        if first.verdict is NiceVerdict.NOT_NICE:
            assert first.witness == second.witness


def test_approximants_of_a_non_periodic_end(full_map):
    # b -> q -> 1/4 -> 3/4 -> 1/4: preperiodic, so its orbit avoids (1/4, b)
    q = (1.0 - math.sqrt(0.75)) / 2.0
    b = (1.0 + math.sqrt(q)) / 2.0
    J = Interval(0.25, b)
    assert is_nice(full_map, J).is_nice
    left, right = periodic_approximants(full_map, J, 1, 8, horizon=1000)
    assert left == [0.25]
    assert len(right) == 1
    x = right[0]
    assert full_map.c < x < b
    y, period = x, None
    for k in range(1, 9):
        y = full_map.evaluate(y)
        if abs(y - x) <= 1e-8:
            period = k
            break
    assert period is not None and period > 1
