import pytest

from lorenz_errors import InvariantViolation, LinkedIntervalsDetected, RecordInvalid
from lorenz_map import Interval, Side
from renormalization import (
    RenormalizationRecord, build_tower, check_non_linking, cycle_sets, detect_renormalization, entry_times,
    linked, renormalization_cycle, renormalize, verify_record,
)

P_GAP = Interval(5 / 14, 9 / 14)


@pytest.fixture(scope="module")
def twice_tower():
    from lorenz_map import named_map

    return build_tower(named_map("T"), 3, 8, grid=1024)


def test_period_two_map_has_one_renormalization(period_two_map):
    records = detect_renormalization(period_two_map, 8)
    assert len(records) == 1
    rec = records[0]
    assert rec.J.lo == pytest.approx(5 / 14)
    assert rec.J.hi == pytest.approx(9 / 14)
    assert (rec.period_a, rec.period_b) == (2, 2)


def test_full_map_is_not_renormalizable(full_map):
    assert detect_renormalization(full_map, 8) == []


def test_verify_record_reports_each_check(period_two_map):
    checks = verify_record(period_two_map, RenormalizationRecord(P_GAP, 2, 2))
    assert checks["passed"]
    assert checks["periodic_a"] and checks["periodic_b"]
    assert checks["left_inclusion"] and checks["right_inclusion"]


def test_bogus_record_fails_verification(period_two_map):
    bogus = RenormalizationRecord(Interval(0.3, 0.7), 2, 2)
    checks = verify_record(period_two_map, bogus)
    assert not checks["passed"]
    assert not checks["periodic_a"]
    with pytest.raises(RecordInvalid):
        renormalize(period_two_map, bogus)


def test_record_invalid_is_an_invariant_violation():
    assert issubclass(RecordInvalid, InvariantViolation)


def test_renormalized_view_is_a_lorenz_map(period_two_map):
    view = renormalize(period_two_map, RenormalizationRecord(P_GAP, 2, 2))
    assert view.c == pytest.approx(0.5)
    assert view.depth == 1
    assert view.itinerary_word(Side.LEFT) == "LR"
    assert view.itinerary_word(Side.RIGHT) == "RL"
    # the returning halves stay inside J
    for x in (0.05, 0.25, 0.45, 0.55, 0.75, 0.95):
        assert 0.0 <= view.evaluate(x) <= 1.0


def test_record_affine_maps(period_two_map):
    rec = RenormalizationRecord(P_GAP, 2, 2)
    assert rec.rescale(0.5) == pytest.approx(0.5)
    assert rec.unscale(rec.rescale(0.3)) == pytest.approx(0.3)
    assert rec.scale == pytest.approx(4 / 14)


def test_renormalization_cycle_spans_the_orbit_of_J(period_two_map):
    cycle = renormalization_cycle(period_two_map, RenormalizationRecord(P_GAP, 2, 2))
    assert any(iv.contains_interval(P_GAP, 1e-12) for iv in cycle)
    assert cycle[0].lo == pytest.approx(0.3)
    assert cycle[-1].hi == pytest.approx(0.7)


def test_entry_times(period_two_map):
    times = entry_times(period_two_map, [0.5, 0.3, 0.0], P_GAP, 50)
    assert times[0] == 0
    assert times[1] >= 1
    # the fixed point 0 never enters
    assert times[2] == 51


def test_cycle_sets_of_period_two_map(period_two_map):
    sets = cycle_sets(period_two_map, RenormalizationRecord(P_GAP, 2, 2), sample_budget=512, grid=256)
    assert len(sets.K_J) == len(sets.U_J)
    for k, u in zip(sets.K_J, sets.U_J):
        assert k.lo <= u.lo + 1e-9 and u.hi <= k.hi + 1e-9


@pytest.mark.parametrize(
    "first, second, expected",
    [
        ((0.2, 0.6), (0.4, 0.8), True),
        ((0.2, 0.6), (0.2, 0.5), True),
        ((0.2, 0.8), (0.3, 0.6), False),
        ((0.2, 0.8), (0.2, 0.8), False),
        ((0.1, 0.2), (0.3, 0.4), False),
    ],
)
def test_linked(first, second, expected):
    assert linked(Interval(*first), Interval(*second)) is expected


def test_non_linking_raises_on_crossing_records():
    records = [
        RenormalizationRecord(Interval(0.2, 0.6), 2, 2),
        RenormalizationRecord(Interval(0.4, 0.8), 3, 3),
    ]
    with pytest.raises(LinkedIntervalsDetected) as info:
        check_non_linking(records, 1e-12)
    assert info.value.details["first"]["J"] == [0.2, 0.6]


def test_non_linking_accepts_nested_records():
    check_non_linking([
        RenormalizationRecord(Interval(0.2, 0.8), 2, 2),
        RenormalizationRecord(Interval(0.3, 0.6), 4, 4),
    ], 1e-12)


def test_tower_of_full_map_is_empty(full_map):
    tower = build_tower(full_map, 3, 8)
    assert tower.depth == 0
    assert tower.deepest_view is None
    assert tower.solenoid_cover is None


def test_tower_of_period_two_map(period_two_map):
    tower = build_tower(period_two_map, 3, 8)
    assert tower.depth == 1
    assert tower.deepest_view.c == pytest.approx(0.5)
    assert tower.cycle_sets == []


def test_twice_renormalizable_tower_nests(twice_tower):
    assert twice_tower.depth == 2
    outer, inner = twice_tower.records
    assert outer.J.lo == pytest.approx(5 / 17)
    assert outer.J.hi == pytest.approx(12 / 17)
    assert (outer.period_a, outer.period_b) == (2, 2)
    assert (inner.period_a, inner.period_b) == (4, 4)
    assert outer.J.lo < inner.J.lo < 0.5 < inner.J.hi < outer.J.hi


def test_twice_renormalizable_trapping_regions_nest(twice_tower):
    outer, inner = twice_tower.cycle_sets
    assert inner.k_cover(1024).issubset(outer.k_cover(1024), margin_cells=1)
    assert twice_tower.solenoid_cover is not None
    assert not twice_tower.solenoid_cover.is_empty()


def test_tower_rows(twice_tower):
    rows = twice_tower.to_rows()
    assert rows[0] == "# a b period_a period_b depth"
    assert rows[1].endswith(" 2 2 1")
    assert rows[2].endswith(" 4 4 2")


def test_tower_depth_must_be_positive(full_map):
    with pytest.raises(ValueError):
        build_tower(full_map, 0, 8)
