import pytest

from lorenz_config import Tolerances, get_tolerances, run_defaults


def test_default_tolerances_are_ordered():
    tol = get_tolerances()
    assert tol.eps_critical <= tol.eps_point
    assert tol.max_bisect >= 1


def test_overrides_replace_single_fields():
    tol = get_tolerances({"eps_value": 1e-7, "max_bisect": "60"})
    assert tol.eps_value == 1e-7
    assert tol.max_bisect == 60
    assert tol.eps_point == Tolerances().eps_point


def test_unknown_override_key_rejected():
    with pytest.raises(ValueError, match="Unknown tolerance keys"):
        get_tolerances({"eps_typo": 1e-3})


def test_critical_tolerance_may_not_exceed_point_tolerance():
    with pytest.raises(ValueError, match="eps_critical"):
        Tolerances(eps_point=1e-12, eps_critical=1e-10)


@pytest.mark.parametrize("field", ["eps_point", "eps_critical", "eps_value"])
def test_non_positive_tolerances_rejected(field):
    with pytest.raises(ValueError):
        get_tolerances({field: 0.0})


def test_run_defaults_keys():
    assert set(run_defaults()) == {"grid", "horizon", "max_period", "seed", "workers"}
