import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetaladder import quadrature as quad
from zetaladder.moments import z_power


def test_polynomial_exact():
    est = quad.integrate(lambda x: x ** 7 - 3 * x ** 2, 0.0, 2.0)
    assert math.isclose(est.value, 2.0 ** 8 / 8 - 8.0, rel_tol=1e-14)


def test_oscillatory():
    est = quad.integrate(np.sin, 0.0, 50.0, tol=1e-12)
    assert abs(est.value - (1 - math.cos(50.0))) < 1e-12
    assert est.err_est <= 1e-12


def test_refinement_failure():
    with pytest.raises(quad.QuadratureError):
        quad.integrate(lambda x: np.sqrt(np.abs(x - 1.234)), 0.0, 3.0, tol=1e-15, max_depth=1)


def test_bad_interval():
    with pytest.raises(ValueError):
        quad.integrate(np.sin, 1.0, 1.0)


def test_panel_widths():
    n = quad.panel_count(1e5, 1e5 + 100)
    assert 100 / n <= quad.KAPPA * quad.zero_gap(1e5 + 100)
    assert quad.panel_edges(0.0, 1.0, 3)[-1] == 1.0


def test_running_integral():
    lo, hi = np.array([0.0, 1.0]), np.array([1.0, 3.0])
    x = quad.gl_nodes(lo, hi)
    run = quad.gl_running(lo, hi, np.cos(x))
    assert np.allclose(run, np.sin(x) - np.sin(lo)[:, None], atol=1e-13)


def test_multi_matches_single():
    f = lambda lo, hi, x: np.stack([np.cos(x), x * x], axis=-1)
    a, b = quad.integrate_panels_multi(f, 0.0, 30.0, 2, tol=[1e-10, 1e-8])
    assert math.isclose(a.value, quad.integrate(np.cos, 0.0, 30.0).value, rel_tol=1e-14)
    assert math.isclose(b.value, 9000.0, rel_tol=1e-14)


def test_pairwise_and_cumsum():
    x = np.full(1001, 0.1)
    assert math.isclose(quad.pairwise_sum(x), 100.1, rel_tol=1e-15)
    assert quad.pairwise_sum(np.array([])) == 0.0
    c = quad.compensated_cumsum(np.array([1e16, 1.0, -1e16, 1.0]))
    assert c.tolist() == [0.0, 1e16, 1e16 + 1.0, 1.0, 2.0]


def test_cumulative_grid():
    g = quad.cumulative_grid(np.cos, 0.0, 10.1, 0.25)
    assert g.t[-1] == 10.1 and g.t.size == 42
    assert np.allclose(g.prefix, np.sin(g.t), atol=1e-13)
    assert g.pairs()[1] == (0.25, g.prefix[1])


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(100, 500), st.floats(0.5, 20))
def test_linearity(a, b, lo, width):
    f, g = np.cos, lambda x: x * np.sin(x)
    hi = lo + width
    q = lambda h: quad.integrate(h, lo, hi, tol=1e-8).value
    lhs = q(lambda x: a * f(x) + b * g(x))
    rhs = a * q(f) + b * q(g)
    assert math.isclose(lhs, rhs, rel_tol=1e-11, abs_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(100, 500), st.floats(0.5, 20), st.floats(0.05, 0.95))
def test_additivity(lo, width, frac):
    f = lambda x: np.cos(x) * np.exp(np.sin(x))
    hi = lo + width
    mid = lo + frac * width
    whole = quad.integrate(f, lo, hi).value
    parts = quad.integrate(f, lo, mid).value + quad.integrate(f, mid, hi).value
    assert math.isclose(whole, parts, rel_tol=1e-11, abs_tol=1e-11)


def test_threads_bit_identical():
    f = z_power(2)
    one = quad.integrate(f, 1e4, 1.5e4, tol=1e-6)
    four = quad.integrate(z_power(2, threads=4), 1e4, 1.5e4, tol=1e-6, threads=4)
    assert one == four
    g1 = quad.cumulative_grid(f, 1e3, 3e3, 0.25, chunk=500)
    g4 = quad.cumulative_grid(f, 1e3, 3e3, 0.25, threads=4, chunk=500)
    assert np.array_equal(g1.prefix, g4.prefix)


def _peaked(lo, hi, x):
    return 1.0 / (1e-6 + (x - 0.3) ** 2)


PEAK_EXACT = 1e3 * (math.atan(0.7e3) + math.atan(0.3e3))


def test_adaptive_peak():
    est, = quad.integrate_adaptive(_peaked, 0.0, 1.0, tol=1e-8)
    assert abs(est.value - PEAK_EXACT) <= max(est.err_est, 1e-12 * PEAK_EXACT)
    assert est.err_est <= 1e-8
    uniform = quad.panel_count(0.0, 1.0)
    assert est.panels < 200 * uniform


def test_adaptive_vector_and_threads():
    f = lambda lo, hi, x: np.stack([_peaked(lo, hi, x), np.cos(x)], axis=-1)
    one = quad.integrate_adaptive(f, 0.0, 1.0, tol=[1e-8, 1e-12], width=2, kappa=1e-3)
    four = quad.integrate_adaptive(f, 0.0, 1.0, tol=[1e-8, 1e-12], width=2, kappa=1e-3,
                                   threads=4)
    assert one == four
    assert abs(one[1].value - math.sin(1.0)) < 1e-12


def test_adaptive_gives_up():
    with pytest.raises(quad.QuadratureError):
        quad.integrate_adaptive(lambda lo, hi, x: np.abs(x - 0.3) ** -0.5, 0.0, 1.0,
                                tol=1e-14, max_rounds=3)
