import math

import pytest

from zetaladder.moments import (
    fourth_moment_leading,
    moment_integral,
    second_moment_asymptotic,
    windowed_numeric_moment,
    windowed_second_asymptotic,
)
from zetaladder.number_theory import C0


def test_asymptotic_formulas():
    T = 1e4
    ln = math.log(T)
    assert math.isclose(second_moment_asymptotic(T), T * ln + (2 * 0.5772156649015329 - 1
                                                              - 1.8378770664093454) * T)
    assert math.isclose(windowed_second_asymptotic(T, 100.0), 100 * ln + 100 * (
        2 * 0.5772156649015329 - 1.8378770664093454))
    assert fourth_moment_leading(T) == C0 * T * ln ** 4


def test_domain():
    with pytest.raises(ValueError):
        second_moment_asymptotic(50)
    with pytest.raises(ValueError):
        windowed_second_asymptotic(1e4, 2e4)
    with pytest.raises(ValueError):
        windowed_numeric_moment(1e4, 10.0, 3)
    with pytest.raises(ValueError):
        windowed_numeric_moment(1e4, 0.0, 2)


def test_second_moment_window():
    est = windowed_numeric_moment(1e4, 1e3, 2)
    assert est.kind == "second"
    assert 0.9 < est.ratio < 1.1
    assert est.ratio == est.numeric / est.asymptotic_main


def test_moment_integral_positive_and_additive():
    a = moment_integral(2000.0, 2100.0, 4)
    b = moment_integral(2000.0, 2050.0, 4).value + moment_integral(2050.0, 2100.0, 4).value
    assert a.value > 0
    assert math.isclose(a.value, b, rel_tol=1e-9)
