import math

import pytest

import classifier
from classifier import (
    CHAOTIC, INCONCLUSIVE, PERIODIC, SUMMARY_COLUMNS, AttractorCovers, AttractorReport, ClassifierParams,
    TransitivityEvidence,
    assemble_trapping_region, basin_coverage, classify, entropy_lower_bound, transitivity_check,
    trapping_region, verdict_stable,
)
from lorenz_errors import InvariantViolation
from lorenz_map import Interval, named_map
from orbits import IntervalCover, PeriodicOrbit, Stability, periodic_orbits
from renormalization import build_tower
from return_maps import ReturnBranch, ReturnMapDecomposition

LIGHT = ClassifierParams(max_period=12, grid=1024, horizon=2000, invariance_samples=2000,
                         basin_grid=200, basin_iterations=2000, rotation_n=10_000)


@pytest.fixture(scope="module")
def full_report():
    return classify(named_map("F"), LIGHT)


@pytest.fixture(scope="module")
def contracting_report():
    return classify(named_map("C"), LIGHT)


def _report(kind):
    return AttractorReport(kind=kind, detail={}, lambda_cover=IntervalCover(8), evidence=[],
                           periodic_density_check={}, entropy_lower_bound=0.0, lyapunov_witnesses=[],
                           parameters={}, params=ClassifierParams())


def test_contracting_map_has_one_periodic_attractor(contracting_report):
    assert contracting_report.kind == PERIODIC
    attractors = contracting_report.detail["attractors"]
    assert len(attractors) == 1
    assert attractors[0]["points"] == pytest.approx([0.0])
    assert contracting_report.evidence_named("basin_coverage")["total"] >= 0.999
    assert contracting_report.entropy_lower_bound == 0.0


def test_summary_row_columns(contracting_report):
    row = contracting_report.summary_row()
    assert set(row) == set(SUMMARY_COLUMNS)
    assert row["kind"] == PERIODIC
    assert row["cells"] == 1


def test_period_two_attractor():
    report = classify(named_map("P"), LIGHT)
    assert report.kind == PERIODIC
    periods = [a["period"] for a in report.detail["attractors"]]
    assert periods == [2]


def test_full_map_is_a_chaotic_interval(full_report):
    assert full_report.kind == CHAOTIC
    assert full_report.lambda_cover.fraction >= 0.99
    assert full_report.entropy_lower_bound == pytest.approx(math.log(2.0))
    assert len(full_report.lyapunov_witnesses) >= 5
    assert full_report.periodic_density_check["fraction"] >= 0.9


def test_full_map_evidence(full_report):
    assert full_report.evidence_named("trapping_invariance")["passed"]
    assert full_report.evidence_named("critical_in_generic")["passed"]
    assert full_report.evidence_named("transitivity")["passed"]
    assert full_report.evidence_named("visit_density")["passed"]
    assert full_report.evidence_named("cherry")["passed"] is False
    assert full_report.evidence_named("missing") is None


def test_report_serializes(full_report):
    data = full_report.to_dict()
    assert data["kind"] == CHAOTIC
    assert data["params"]["grid"] == 1024
    assert data["lambda_cover"]["grid_size"] == 1024


def test_trapping_region_of_period_two_map(period_two_map):
    tower = build_tower(period_two_map, 3, 8)
    region = trapping_region(period_two_map, 8, tower, samples=2000)
    assert (region.ell, region.r) == (2, 2)
    assert region.base.lo == pytest.approx(5 / 14)
    assert region.components[0].lo == pytest.approx(0.3)
    assert region.components[-1].hi == pytest.approx(0.7)
    assert region.invariant
    assert region.contains(0.5)


def test_base_alone_is_not_trapping(period_two_map):
    region = assemble_trapping_region(period_two_map, Interval(5 / 14, 9 / 14), 1, 1, samples=1000)
    assert region.escapes > 0
    assert not region.invariant
    assert region.witnesses


def test_entropy_from_full_branches():
    J = Interval(0.0, 1.0)
    branches = [
        ReturnBranch(Interval(0.0, 0.3), 1, Interval(0.0, 1.0), False),
        ReturnBranch(Interval(0.3, 0.5), 2, Interval(0.0, 1.0), True),
        ReturnBranch(Interval(0.5, 0.7), 2, Interval(0.0, 1.0), True),
        ReturnBranch(Interval(0.7, 1.0), 5, Interval(0.2, 1.0), False),
    ]
    decomp = ReturnMapDecomposition(J=J, branches=branches, covered_fraction=1.0, horizon=10)
    assert entropy_lower_bound(decomp) == pytest.approx(math.log(3.0) / 2.0)


def test_entropy_needs_two_full_branches():
    decomp = ReturnMapDecomposition(
        J=Interval(0.0, 1.0),
        branches=[ReturnBranch(Interval(0.0, 1.0), 1, Interval(0.0, 1.0), False)],
        covered_fraction=1.0,
        horizon=1,
    )
    assert entropy_lower_bound(decomp) == 0.0


def test_transitivity_on_single_cell_is_vacuous(full_map):
    evidence = transitivity_check(full_map, IntervalCover.from_points(64, [0.3]))
    assert evidence.passed and evidence.vacuous


def test_transitivity_on_full_map(full_map):
    evidence = transitivity_check(full_map, IntervalCover.full(64), trials=4)
    assert evidence.passed
    assert len(evidence.trials) == 4


def test_basin_coverage_of_contracting_map(contracting_map):
    attractors = [o for o in periodic_orbits(contracting_map, 4) if o.is_attractor]
    basin = basin_coverage(contracting_map, attractors, grid=100, iterations=2000)
    assert basin.total == 1.0
    assert basin.fractions == [1.0]


def test_more_than_two_attractors_is_an_invariant_violation(monkeypatch, contracting_map):
    fake = [PeriodicOrbit("L", [x], 1, 0.5, Stability.ATTRACTING) for x in (0.1, 0.2, 0.3)]
    monkeypatch.setattr(classifier, "periodic_orbits", lambda lorenz, max_period: fake)
    with pytest.raises(InvariantViolation):
        classify(contracting_map, LIGHT)


def test_doubled_params():
    params = ClassifierParams(grid=512, horizon=100, seed=7)
    doubled = params.doubled()
    assert (doubled.grid, doubled.horizon, doubled.seed) == (1024, 200, 8)
    assert params.doubled(seed=3).seed == 3
    assert doubled.max_period == params.max_period


def test_verdict_stability_rule():
    assert verdict_stable(_report(PERIODIC), _report(PERIODIC))
    assert verdict_stable(_report(CHAOTIC), _report(INCONCLUSIVE))
    assert not verdict_stable(_report(CHAOTIC), _report(PERIODIC))


@pytest.mark.slow
def test_contracting_verdict_stable_under_doubling(contracting_map):
    first = classify(contracting_map, LIGHT)
    second = classify(contracting_map, LIGHT.doubled())
    assert verdict_stable(first, second)


def test_failed_transitivity_blocks_the_chaotic_verdict(monkeypatch, full_map):
    stuck = {"cell": 3, "interval": [0.003, 0.0035], "coverage": 0.4, "iterations": 1000, "reached": False}
    monkeypatch.setattr(classifier, "transitivity_check",
                        lambda *args, **kwargs: TransitivityEvidence(passed=False, trials=[stuck]))
    report = classify(full_map, LIGHT)
    assert report.kind == INCONCLUSIVE
    assert "transitivity" in report.reason
    assert report.evidence_named("transitivity")["passed"] is False


def test_escaping_trapping_region_blocks_the_chaotic_verdict(monkeypatch, full_map):
    original = classifier.check_invariance

    def leaky(lorenz, region, samples, seed=0):
        region = original(lorenz, region, samples, seed)
        region.escapes = 500
        return region

    monkeypatch.setattr(classifier, "check_invariance", leaky)
    report = classify(full_map, LIGHT)
    assert report.kind == INCONCLUSIVE
    assert "not invariant" in report.reason
    assert report.evidence_named("trapping_invariance")["passed"] is False


def test_critical_cover_must_span_the_generic_cover(monkeypatch, full_map):
    covers = AttractorCovers(generic=IntervalCover.full(LIGHT.grid),
                             critical=IntervalCover.from_intervals(LIGHT.grid, [Interval(0.4, 0.6)]))
    monkeypatch.setattr(classifier, "attractor_estimate", lambda *args, **kwargs: covers)
    report = classify(full_map, LIGHT)
    assert report.kind == INCONCLUSIVE
    assert report.reason == "critical cover does not span the generic cover"
    assert report.evidence_named("cover_agreement")["passed"] is False
    assert report.evidence_named("critical_in_generic")["passed"]


def test_full_map_covers_agree(full_report):
    agreement = full_report.evidence_named("cover_agreement")
    assert agreement["passed"] and agreement["spans"]


def test_trapping_region_of_twice_renormalizable_map(twice_renormalizable_map):
    tower = build_tower(twice_renormalizable_map, 3, 8)
    region = trapping_region(twice_renormalizable_map, 8, tower, samples=2000)
    assert region.base == tower.records[-1].J
    assert region.ell >= 2 and region.r >= 2
    assert region.invariant
    assert region.contains(0.5)


@pytest.mark.slow
def test_period_two_verdict_stable_under_doubling(period_two_map):
    first = classify(period_two_map, LIGHT)
    second = classify(period_two_map, LIGHT.doubled())
    assert first.kind == second.kind == PERIODIC
    assert verdict_stable(first, second)


@pytest.mark.slow
def test_twice_renormalizable_verdict_stable_under_doubling(twice_renormalizable_map):
    first = classify(twice_renormalizable_map, LIGHT)
    second = classify(twice_renormalizable_map, LIGHT.doubled())
    assert verdict_stable(first, second)
