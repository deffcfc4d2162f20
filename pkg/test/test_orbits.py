import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lorenz_errors import NoPeriodicOrbitInWindow
from lorenz_map import Interval, Side, SignedPoint, StandardLorenzMap
from orbits import (
    IntervalCover, Stability, alpha_estimate, critical_orbits, homterval_check, iterate, lyapunov,
    lyndon_words, minimal_period_orbit, omega_estimate, periodic_orbits, preimages, push_interval,
    visit_density,
)


def _random_maps(count, seed):
    rng = np.random.default_rng(seed)
    maps = []
    while len(maps) < count:
        c, a, b, v1, v0 = rng.uniform([0.1, 1.2, 1.2, 0.2, 0.0], [0.9, 4.0, 4.0, 1.0, 0.8])
        if v0 < v1 - 0.01:
            maps.append(StandardLorenzMap(float(c), float(a), float(b), float(v1), float(v0)))
    return maps


def test_iterate_period_two_orbit_is_exact(full_map):
    orbit = iterate(full_map, SignedPoint(0.25), 4)
    assert orbit.points == [0.25, 0.75, 0.25, 0.75, 0.25]
    assert orbit.hit_critical_at is None
    assert len(orbit) == 5


def test_iterate_resolves_the_critical_point_by_side(full_map):
    left = iterate(full_map, SignedPoint(0.5, Side.LEFT), 2)
    right = iterate(full_map, SignedPoint(0.5, Side.RIGHT), 2)
    assert left.points == [0.5, 1.0, 1.0]
    assert right.points == [0.5, 0.0, 0.0]
    assert left.hit_critical_at == 0


def test_later_critical_hits_use_the_side_resolution_not_the_start_side():
    # c+ -> v0 = 0.25 -> f(0.25) = 0.75 * v1 = c
    lorenz = StandardLorenzMap(0.5, 2.0, 2.0, 2.0 / 3.0, 0.25)
    default = iterate(lorenz, SignedPoint(0.5, Side.RIGHT), 3)
    assert default.points[1] == 0.25
    assert default.points[2] == pytest.approx(0.5, abs=1e-12)
    assert default.points[3] == pytest.approx(2.0 / 3.0)
    assert default.side_resolution is Side.LEFT
    right = iterate(lorenz, SignedPoint(0.5, Side.RIGHT), 3, Side.RIGHT)
    assert right.points[3] == 0.25


def test_iterate_rejects_zero_steps(full_map):
    with pytest.raises(ValueError):
        iterate(full_map, SignedPoint(0.1), 0)


def test_critical_orbits(full_map):
    left, right = critical_orbits(full_map, 3)
    assert left.points == [0.5, 1.0, 1.0, 1.0]
    assert right.points == [0.5, 0.0, 0.0, 0.0]


def test_orbit_rows_have_header(full_map):
    rows = iterate(full_map, SignedPoint(0.25), 1).to_rows()
    assert rows[0] == "# n x"
    assert rows[1:] == ["0 0.25", "1 0.75"]


def test_lyndon_words_order():
    assert list(lyndon_words(3)) == [(0,), (0, 0, 1), (0, 1), (0, 1, 1), (1,)]
    assert len(list(lyndon_words(4))) == 8


def test_periodic_orbits_of_full_map(full_map):
    orbits = periodic_orbits(full_map, 2)
    assert [o.period for o in orbits] == [1, 1, 2]
    assert orbits[0].points == pytest.approx([0.0])
    assert orbits[1].points == pytest.approx([1.0])
    assert sorted(orbits[2].points) == pytest.approx([0.25, 0.75])
    for orbit in orbits:
        assert orbit.multiplier == pytest.approx(4.0)
        assert orbit.stability is Stability.REPELLING


def test_periodic_orbits_of_contracting_map(contracting_map):
    orbits = periodic_orbits(contracting_map, 4)
    assert [o.points[0] for o in orbits] == pytest.approx([0.0, 1.0])
    attracting, repelling = orbits
    assert attracting.stability is Stability.ATTRACTING
    assert attracting.multiplier == pytest.approx(0.8)
    assert repelling.stability is Stability.REPELLING


def test_periodic_orbit_count_grows_with_period(full_map):
    # full branches: one orbit per Lyndon word
    assert len(periodic_orbits(full_map, 5)) == len(list(lyndon_words(5)))


def test_at_most_two_attractors_on_random_maps():
    for lorenz in _random_maps(30, seed=11):
        orbits = periodic_orbits(lorenz, 8)
        assert sum(o.is_attractor for o in orbits) <= 2, lorenz.parameters()


@pytest.mark.slow
def test_at_most_two_attractors_on_many_random_maps():
    for lorenz in _random_maps(200, seed=12):
        orbits = periodic_orbits(lorenz, 16)
        assert sum(o.is_attractor for o in orbits) <= 2, lorenz.parameters()


def test_lyapunov_on_period_two_orbit(full_map):
    estimate = lyapunov(full_map, SignedPoint(0.25), 10_000)
    assert estimate.value == pytest.approx(math.log(2.0))
    assert not estimate.aborted_at_critical
    assert estimate.recompute(full_map) == pytest.approx(estimate.value)


def test_lyapunov_aborts_at_critical_point(full_map):
    estimate = lyapunov(full_map, SignedPoint(0.5), 10)
    assert estimate.aborted_at_critical
    assert estimate.n == 0


def test_lyapunov_negative_in_contracting_basin(contracting_map):
    assert lyapunov(contracting_map, SignedPoint(0.3), 2000).value < 0


def test_preimages_of_full_map(full_map):
    found = preimages(full_map, 0.75)
    assert [p.x for p in found] == pytest.approx([0.25, (1 + math.sqrt(0.75)) / 2])
    assert [p.side for p in found] == [Side.LEFT, Side.RIGHT]


def test_preimages_include_critical_point(period_two_map):
    found = preimages(period_two_map, 0.7)
    assert SignedPoint(0.5, Side.LEFT) in found


def test_preimages_respect_branch_images(contracting_map):
    assert [p.side for p in preimages(contracting_map, 0.05)] == [Side.LEFT]
    assert [p.side for p in preimages(contracting_map, 0.5)] == [Side.RIGHT]
    with pytest.raises(ValueError):
        preimages(contracting_map, 1.5)


def test_alpha_estimate_of_full_map_spreads(full_map):
    cover = alpha_estimate(full_map, 0.3, 12, grid=64)
    assert cover.fraction > 0.9


def test_omega_estimate_of_contracting_map(contracting_map):
    cover = omega_estimate(contracting_map, SignedPoint(0.3), 1000, 100, grid=64)
    assert cover.cell_count == 1
    assert cover.contains_point(0.0)


def test_omega_estimate_of_full_map_fills_interval(full_map):
    cover = omega_estimate(full_map, SignedPoint(0.1234567), 100, 20_000, grid=64)
    assert cover.fraction == 1.0


def test_minimal_period_orbit_in_left_window(period_two_map):
    found = minimal_period_orbit(period_two_map, Side.LEFT, 0.2, 4)
    assert found.orbit.period == 2
    assert found.unique


def test_minimal_period_orbit_missing(contracting_map):
    with pytest.raises(NoPeriodicOrbitInWindow):
        minimal_period_orbit(contracting_map, Side.LEFT, 0.2, 4)


def test_push_interval(contracting_map):
    image = push_interval(contracting_map, Interval(0.6, 0.7))
    assert image.lo == pytest.approx(0.136)
    assert image.hi == pytest.approx(0.244)
    assert push_interval(contracting_map, Interval(0.4, 0.6)) is None


def test_homterval_candidate_in_contracting_map(contracting_map):
    evidence = homterval_check(contracting_map, Interval(0.6, 0.7), 50)
    assert evidence.is_homterval_candidate
    assert evidence.max_length == pytest.approx(0.108)


def test_homterval_straddle_detected(full_map):
    evidence = homterval_check(full_map, Interval(0.4, 0.6), 50)
    assert evidence.straddles_at == 0
    assert not evidence.is_homterval_candidate


def test_visit_density_full_map(full_map):
    density = visit_density(full_map, Interval(0.5 - 1 / 64, 0.5 + 1 / 64), grid=1024, horizon=1000)
    assert density.fraction >= 0.99


class TestIntervalCover:
    def test_from_intervals_open_right_end(self):
        cover = IntervalCover.from_intervals(8, [Interval(0.25, 0.5)])
        assert cover.cells().tolist() == [2, 3]

    def test_intervals_and_gaps(self):
        cover = IntervalCover.from_points(10, [0.05, 0.15, 0.55])
        assert [(i.lo, i.hi) for i in cover.intervals] == [(0.0, 0.2), (0.5, 0.6)]
        assert [(g.lo, g.hi) for g in cover.gaps()] == [(0.2, 0.5)]

    def test_union_across_grids(self):
        coarse = IntervalCover.from_points(4, [0.1])
        fine = IntervalCover.from_points(8, [0.9])
        union = coarse.union(fine)
        assert union.grid_size == 8
        assert union.cells().tolist() == [0, 1, 7]

    def test_subset_with_margin(self):
        inner = IntervalCover.from_points(16, [0.5])
        outer = IntervalCover.from_points(16, [0.45])
        assert not inner.issubset(outer)
        assert inner.issubset(outer, margin_cells=1)

    def test_coarsen_and_refine(self):
        cover = IntervalCover.from_points(8, [0.3])
        assert cover.coarsen(2).cells().tolist() == [1]
        assert cover.refine(2).coarsen(2) == cover
        with pytest.raises(ValueError):
            cover.coarsen(3)

    def test_full_and_empty(self):
        assert IntervalCover.full(5).fraction == 1.0
        assert IntervalCover(5).is_empty()
        with pytest.raises(ValueError):
            IntervalCover(0)


@pytest.mark.parametrize("start", [0.1234567, 0.6])
def test_omega_cover_grows_with_orbit_length(full_map, contracting_map, start):
    for lorenz in (full_map, contracting_map):
        short = omega_estimate(lorenz, SignedPoint(start), 100, 500, grid=256)
        long = omega_estimate(lorenz, SignedPoint(start), 100, 5000, grid=256)
        assert short.issubset(long)
        assert long.cell_count >= short.cell_count


@st.composite
def map_parameters(draw):
    c = draw(st.floats(0.2, 0.8))
    alpha = draw(st.floats(1.2, 4.0))
    beta = draw(st.floats(1.2, 4.0))
    v1 = draw(st.floats(0.3, 1.0))
    v0 = draw(st.floats(0.0, v1 - 0.05))
    return c, alpha, beta, v1, v0


@settings(max_examples=30, deadline=None)
@given(map_parameters())
def test_periodic_orbits_close_up_and_carry_their_multiplier(params):
    lorenz = StandardLorenzMap(*params)
    for orbit in periodic_orbits(lorenz, 5):
        if orbit.stability is Stability.SUPER_ATTRACTOR or any(abs(x - lorenz.c) <= 1e-6 for x in orbit.points):
            continue
        pts = orbit.points
        assert len(pts) == orbit.period
        for k, x in enumerate(pts):
            assert lorenz.evaluate(x) == pytest.approx(pts[(k + 1) % orbit.period], abs=1e-8)
        product = math.prod(abs(lorenz.derivative(x)) for x in pts)
        assert orbit.multiplier == pytest.approx(product, rel=1e-9, abs=1e-300)
