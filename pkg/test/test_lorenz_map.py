import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from lorenz_errors import CriticalPointDerivative, InvalidMapSpec, ValueOutsideBranchImage
from lorenz_map import (
    Interval, Side, SignedPoint, StandardLorenzMap, evaluate, invert_branch, named_map, schwarzian, validate,
)

SMOOTH_MAPS = [
    dict(c=0.5, alpha=2.0, beta=2.0, v1=1.0, v0=0.0),
    dict(c=0.5, alpha=2.0, beta=2.0, v1=0.2, v0=0.1),
    dict(c=0.3, alpha=1.5, beta=3.0, v1=0.9, v0=0.2),
    dict(c=0.7, alpha=2.5, beta=1.8, v1=0.95, v0=0.35),
]


@st.composite
def valid_parameters(draw):
    c = draw(st.floats(0.05, 0.95))
    alpha = draw(st.floats(1.1, 4.0))
    beta = draw(st.floats(1.1, 4.0))
    v1 = draw(st.floats(0.1, 1.0))
    v0 = draw(st.floats(0.0, 0.95))
    assume(v0 < v1 - 1e-3)
    return dict(c=c, alpha=alpha, beta=beta, v1=v1, v0=v0)


def test_full_map_values(full_map):
    assert full_map.evaluate(0.25) == pytest.approx(0.75)
    assert full_map.evaluate(0.75) == pytest.approx(0.25)
    assert full_map.evaluate(0.0) == 0.0
    assert full_map.evaluate(1.0) == 1.0


def test_critical_point_is_one_sided(full_map):
    assert evaluate(full_map, SignedPoint(0.5, Side.LEFT)) == 1.0
    assert evaluate(full_map, SignedPoint(0.5, Side.RIGHT)) == 0.0


def test_evaluate_array_matches_scalar(period_two_map):
    xs = np.linspace(0.0, 1.0, 257)
    expected = [period_two_map.evaluate(float(x)) for x in xs]
    np.testing.assert_allclose(period_two_map.evaluate_array(xs), expected, rtol=0, atol=1e-15)


def test_derivative_vanishes_only_at_critical_point(full_map):
    with pytest.raises(CriticalPointDerivative):
        full_map.derivative(0.5)
    assert full_map.derivative(0.25) == pytest.approx(2.0)
    assert full_map.derivative_array(np.array([0.5]))[0] == 0.0


@pytest.mark.parametrize(
    "params",
    [
        dict(c=0.0, alpha=2, beta=2, v1=1, v0=0),
        dict(c=0.5, alpha=1.0, beta=2, v1=1, v0=0),
        dict(c=0.5, alpha=2, beta=2, v1=0.3, v0=0.3),
        dict(c=0.5, alpha=2, beta=2, v1=1.2, v0=0),
    ],
)
def test_invalid_parameters_reported(params):
    report = validate(params)
    assert not report.valid
    assert report.violations
    with pytest.raises(InvalidMapSpec):
        StandardLorenzMap(**params)


def test_invalid_map_spec_is_a_value_error():
    with pytest.raises(ValueError):
        StandardLorenzMap(c=1.5, alpha=2, beta=2, v1=1, v0=0)


def test_missing_parameter_listed():
    report = validate({"c": 0.5, "alpha": 2, "beta": 2, "v1": 1})
    assert "v0 is required" in report.violations


def test_valid_report_carries_critical_values(contracting_map):
    report = validate(contracting_map)
    assert report.valid
    assert report.critical_values == {"left": 0.2, "right": 0.1}
    assert report.derivative_vanishes_at_c


def test_critical_values_need_not_straddle_c():
    report = validate(dict(c=0.5, alpha=2, beta=2, v1=0.2, v0=0.1))
    assert report.valid
    assert max(report.critical_values.values()) < 0.5
    assert not validate(dict(c=0.5, alpha=2, beta=2, v1=0.1, v0=0.2)).valid


def test_named_instances():
    assert named_map("T").v1 == 0.85
    with pytest.raises(ValueError):
        named_map("Z")


@settings(max_examples=100, deadline=None)
@given(valid_parameters(), st.sampled_from([Side.LEFT, Side.RIGHT]), st.floats(0.0, 1.0))
def test_inversion_round_trip(params, side, t):
    lorenz = StandardLorenzMap(**params)
    lo, hi = lorenz.branch_image(side)
    y = lo + t * (hi - lo)
    x = invert_branch(lorenz, side, y)
    assert lorenz.branch_domain(side).contains(x)
    assert abs(lorenz.branch(side, x) - y) <= 1e-9


def test_inversion_outside_image_raises(contracting_map):
    with pytest.raises(ValueOutsideBranchImage):
        contracting_map.invert_branch(Side.LEFT, 0.5)


def test_inversion_of_critical_value_is_critical_point(period_two_map):
    assert period_two_map.invert_branch(Side.LEFT, 0.7) == 0.5
    assert period_two_map.invert_branch(Side.RIGHT, 0.3) == 0.5


@pytest.mark.parametrize("params", SMOOTH_MAPS)
def test_derivative_matches_central_differences(params):
    lorenz = StandardLorenzMap(**params)
    h = 1e-6
    for x in np.linspace(0.01, 0.99, 1000):
        if abs(x - lorenz.c) <= 1e-2:
            continue
        numeric = (lorenz.evaluate(x + h) - lorenz.evaluate(x - h)) / (2 * h)
        assert lorenz.derivative(x) == pytest.approx(numeric, rel=1e-6)


@pytest.mark.parametrize("params", SMOOTH_MAPS)
def test_schwarzian_is_the_power_law_value(params):
    lorenz = StandardLorenzMap(**params)
    c = lorenz.c
    for x in np.linspace(0.01, 0.99, 1000):
        if abs(x - c) <= 1e-3:
            continue
        exponent = lorenz.alpha if x < c else lorenz.beta
        expected = -(exponent ** 2 - 1.0) / (2.0 * (x - c) ** 2)
        value = schwarzian(lorenz, x)
        assert value < 0
        assert value == pytest.approx(expected, rel=1e-9)


def test_higher_derivatives(full_map):
    # left branch is 4x(1-x)
    assert full_map.derivative(0.2, order=2) == pytest.approx(-8.0)
    assert full_map.derivative(0.2, order=3) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        full_map.derivative(0.2, order=4)


def test_side_parse():
    assert Side.parse("c-") is Side.LEFT
    assert Side.parse("right") is Side.RIGHT
    with pytest.raises(ValueError):
        Side.parse("up")


def test_interval_helpers():
    iv = Interval(0.2, 0.6)
    assert iv.length == pytest.approx(0.4)
    assert iv.midpoint == pytest.approx(0.4)
    assert iv.contains(0.6)
    assert not iv.interior_contains(0.6)
    assert iv.contains_interval(Interval(0.3, 0.5))
    assert not iv.overlaps(Interval(0.6, 0.9))
    assert Interval.at(0.3).point
    with pytest.raises(ValueError):
        Interval(0.5, 0.5)


def test_to_dict_round_trip(twice_renormalizable_map):
    again = StandardLorenzMap.from_dict(twice_renormalizable_map.to_dict())
    assert again.parameters() == twice_renormalizable_map.parameters()
    assert math.isclose(again.tol.eps_point, twice_renormalizable_map.tol.eps_point)
