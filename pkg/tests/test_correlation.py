import math

import numpy as np
import pytest

from zetaladder import correlation as corr
from zetaladder.number_theory import C0, EULER_C

T, U = 1e4, 1e3


@pytest.fixture(scope="module")
def report6(small_ladder):
    return corr.correlation6(small_ladder, 1e4)


def test_window_resolution(small_ladder):
    spec = corr.make_window(small_ladder, 1e4)
    assert spec.U == 1e4 ** 0.895
    assert spec.image[0] < spec.image[1]
    assert not spec.admissible
    assert corr.make_window(small_ladder, 1e4, u_exponent=1 / 3).admissible


def test_window_rejections(small_ladder):
    with pytest.raises(corr.WindowError):
        corr.make_window(small_ladder, 1e4, epsilon=0.07)  # U > T
    with pytest.raises(corr.WindowError):
        corr.make_window(small_ladder, 1.9e4)  # beyond the ladder
    with pytest.raises(corr.WindowError):
        corr.make_window(small_ladder, 50.0)
    with pytest.raises(corr.WindowError):
        corr.correlation6(small_ladder, 5e3)


@pytest.mark.parametrize("kind,bound", [("const_one", 1e-9), ("linear", 1e-6),
                                        ("abs_z_4", 1e-4)])
def test_transform_identity(small_ladder, kind, bound):
    r = corr.transform_identity_check(small_ladder, kind, T, U)
    assert r["rel_diff"] <= bound
    # exact by construction: only quadrature error remains
    assert abs(r["lhs"] - r["rhs"]) <= 10 * (r["lhs_err"] + r["rhs_err"]) + 1e-12 * abs(r["rhs"])


def test_transform_unknown(small_ladder):
    with pytest.raises(ValueError):
        corr.transform_identity_check(small_ladder, "cubic", T, U)


def test_report_algebra(report6):
    r = report6
    assert r.ratio * r.rhs == pytest.approx(r.lhs, rel=1e-15)
    assert r.rhs == C0 * r.spec.U * math.log(r.spec.T) ** 5
    assert r.spec.T < r.alpha < r.spec.T + r.spec.U
    lo, hi = r.phi_prime_range
    assert lo <= r.lhs / r.intermediate_hat <= hi
    assert abs(r.g_alpha - r.lhs / r.spec.U) <= 1e-9 * r.lhs / r.spec.U
    assert 0.5 <= r.ratio <= 2.0


def test_prediction_is_square_root_of_ratio(small_ladder, report6):
    r = report6
    p = corr.prediction_check(small_ladder, r.spec.T, r.spec.U, mean=r.lhs / r.spec.U)
    assert p.alpha == r.alpha and p.rhs_pred > 0
    implied = math.sqrt(r.g_alpha / (C0 * math.log(p.alpha) ** 5)) - 1
    assert p.residual == pytest.approx(implied, abs=1e-9)
    assert p.shift == pytest.approx(p.alpha - small_ladder.phi_half(p.alpha), rel=1e-15)


def test_image_fourth_consistency(small_ladder, report6):
    m = corr.image_fourth_check(small_ladder, report6.spec.T, report6.spec.U)
    assert m.kind == "fourth"
    assert abs(2 * m.numeric - report6.intermediate_hat) <= 2 * m.quad_err + report6.intermediate_err


def test_correlation4(small_ladder):
    r = corr.correlation4(small_ladder, 1e4)
    assert r.lhs >= 0
    assert r.rhs == r.spec.U * math.log(1e4) ** 2
    assert math.isnan(r.alpha)


def test_geometry(small_ladder):
    u = corr.geometry_window(1e4)
    g = corr.segment_geometry(small_ladder, 1e4, u)
    assert g.disjoint
    assert g.rho == 1e4 - g.image[1]
    assert g.rho > g.rho_lower_bound == (1 - EULER_C - 0.02) * 1e4 / math.log(1e4)
    full = corr.segment_geometry(small_ladder, 1e4, corr.window_length(1e4))
    assert not full.disjoint and full.rho == 0.0


def test_crossings_synthetic():
    # g(t) = t^2 crosses 2 at sqrt 2, then sin crosses 0 at multiples of pi
    g = lambda t: t * t
    alpha = next(corr.crossings(g, 1.0, 2.0, 2.0, 0.05))
    assert abs(alpha - math.sqrt(2)) <= 1e-9
    roots = list(corr.crossings(np.sin, 1.0, 10.0, 0.0, 0.1))
    assert np.allclose(roots, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-9)


def test_crossings_constant():
    assert list(corr.crossings(lambda t: np.ones_like(t), 0.0, 1.0, 2.0, 0.1)) == []


def test_deterministic(small_ladder, report6):
    again = corr.correlation6(small_ladder, 1e4)
    assert again == report6


def test_fourth_order_window_arithmetic():
    U = corr.window_length(1e6, 0.01, corr.FOURTH_EXPONENT)
    assert U == pytest.approx(131.8, rel=1e-3)
    assert U * math.log(1e6) ** 2 == pytest.approx(2.516e4, rel=1e-3)
