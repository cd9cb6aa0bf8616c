"""Ladder-coupled window experiments.

Every experiment works on a source window [T, T+U] and its ladder image
[phi(T)/2, phi(T+U)/2].  Integrands that mix the two heights are
integrated with :meth:`LadderModel.window_panel_fn`, so phi/2 at the
quadrature nodes comes from the same Z values as the source integrand.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .ladder import LadderError, phi_prime
from .moments import FOURTH, MomentEstimate, moment_integral
from .number_theory import C0, EULER_C, pnt_defect_reference
from .zeta_engine import hardy_z_nodes

SIXTH_EXPONENT = 0.875
FOURTH_EXPONENT = 1.0 / 3.0
DEFAULT_EPSILON = 0.01
DEFAULT_RTOL = 1e-6
MEAN_RTOL = 1e-10
IMAGE_ZERO = 1e-6
# Z^4(phi/2) Z^2 has about three times the bandwidth of Z^2 and sharp
# peaks where Z(phi/2) is large; the error sits in a few percent of the
# panels, so it is integrated adaptively from half the default width
SIXTH_KAPPA = quad.KAPPA / 2
TRANSFORM_KINDS = ("const_one", "linear", "abs_z_4")


class WindowError(ValueError):
    """A window that cannot be set up (empty, too long, or off the ladder)."""


@dataclass(frozen=True)
class WindowSpec:
    T: float
    epsilon: float
    u_exponent: float
    U: float
    image: tuple
    # U <= T / ln T; recorded, not enforced (see make_window)
    admissible: bool


@dataclass(frozen=True)
class SegmentGeometry:
    source: tuple
    image: tuple
    disjoint: bool
    rho: float
    rho_lower_bound: float


@dataclass(frozen=True)
class MeanValuePoint:
    alpha: float
    g_alpha: float
    mean: float
    target: float


@dataclass(frozen=True)
class Prediction:
    alpha: float
    lhs_abs_z: float
    rhs_pred: float
    residual: float
    shift: float
    shift_reference: float
    shift_ratio: float
    error: str = None


@dataclass(frozen=True)
class CorrelationReport:
    kind: str
    spec: WindowSpec
    lhs: float
    rhs: float
    ratio: float
    intermediate_hat: float
    intermediate_ratio: float
    intermediate_err: float
    phi_prime_range: tuple
    alpha: float
    g_alpha: float
    prediction_residual: float
    shift_ratio: float
    geometry: SegmentGeometry
    quad_err: float
    mode: str
    tol: float
    wall_time: float = field(compare=False)


def window_length(T, epsilon=DEFAULT_EPSILON, u_exponent=SIXTH_EXPONENT):
    return float(T) ** (u_exponent + 2.0 * epsilon)


def geometry_window(T, epsilon=DEFAULT_EPSILON, u_exponent=SIXTH_EXPONENT):
    """Longest window for which the disjointness bound on rho is guaranteed.

    The bound rho > (1 - c - 2 eps) T / ln T needs U <= eps T / ln T on
    top of the defect law; below T ~ 1e30 that is shorter than
    T^(u_exponent + 2 eps), so the minimum of the two is used.
    """
    T = float(T)
    return min(window_length(T, epsilon, u_exponent), epsilon * T / math.log(T))


def make_window(model, T, epsilon=DEFAULT_EPSILON, u_exponent=SIXTH_EXPONENT, U=None):
    """Resolve U = T^(u_exponent + 2 eps) (or use ``U``) and its ladder image.

    Windows with U >= T are rejected.  U <= T / ln T is only recorded in
    ``admissible``: at reachable T the default exponent already exceeds it.
    """
    T = float(T)
    if T < 100:
        raise WindowError(f"window needs T >= 100, got {T}")
    if not 0 < epsilon:
        raise WindowError("epsilon must be positive")
    U = window_length(T, epsilon, u_exponent) if U is None else float(U)
    if not 0 < U < T:
        raise WindowError(f"window length U={U:.6g} must lie in (0, T) for T={T:.6g}")
    if not model.covers(T, T + U):
        raise WindowError(f"ladder does not cover [{T:.6g}, {T + U:.6g}]")
    lo, hi = model.phi_half(np.array([T, T + U]))
    if not lo < hi:
        raise WindowError("empty image segment")
    return WindowSpec(T=T, epsilon=float(epsilon), u_exponent=float(u_exponent), U=U,
                      image=(float(lo), float(hi)), admissible=U <= T / math.log(T))


# -- substitution identity --------------------------------------------------------

def _transform_integrand(kind, threads):
    if kind == "const_one":
        return lambda x: np.ones_like(x)
    if kind == "linear":
        return lambda x: x
    if kind == "abs_z_4":
        return lambda x: hardy_z_nodes(x, threads=threads) ** 4
    raise ValueError(f"unknown transform integrand {kind!r}; expected one of {TRANSFORM_KINDS}")


def transform_identity_check(model, kind, T, U, rtol=1e-10, threads=1):
    """Both sides of int f(phi/2) Zhat^2 dt = 2 int_image f.

    The left side is integrated over the source window with the ladder
    carried along the nodes; the right side independently over the image.
    For ``const_one`` the right side is twice the image length.
    """
    f = _transform_integrand(kind, threads)
    spec = make_window(model, T, U=U)
    a, b = spec.image
    scale = {"const_one": 1.0, "linear": T, "abs_z_4": C0 * math.log(T) ** 4}[kind]
    tol = rtol * U * scale

    def integrand(x, z, y):
        return f(y) * (z * z) / phi_prime(2.0 * y)

    left = quad.integrate_panels(model.window_panel_fn(integrand, threads), T, T + U,
                                 tol=2.0 * tol, threads=threads)
    if kind == "const_one":
        rhs, rhs_err = 2.0 * (b - a), 0.0
    else:
        right = quad.integrate(f, a, b, tol=tol, threads=threads)
        rhs, rhs_err = 2.0 * right.value, 2.0 * right.err_est
    return {"lhs": left.value, "rhs": rhs, "rel_diff": abs(left.value - rhs) / abs(rhs),
            "lhs_err": left.err_est, "rhs_err": rhs_err}


# -- geometry ---------------------------------------------------------------------

def segment_geometry(model, T, U, epsilon=DEFAULT_EPSILON):
    """Gap between [T, T+U] and its image, against (1 - c - 2 eps) T / ln T."""
    spec = make_window(model, T, epsilon, U=U)
    lo, hi = spec.image
    src = (spec.T, spec.T + spec.U)
    disjoint = hi < src[0] or lo > src[1]
    if disjoint and lo > src[1]:
        raise LadderError("image segment lies right of its source")
    rho = max(0.0, src[0] - hi)
    bound = (1.0 - EULER_C - 2.0 * epsilon) * spec.T / math.log(spec.T)
    return SegmentGeometry(source=src, image=spec.image, disjoint=disjoint, rho=rho,
                           rho_lower_bound=bound)


# -- image fourth moment ------------------------------------------------------------

def image_fourth_check(model, T, U, rtol=DEFAULT_RTOL, threads=1):
    """int over the image segment of Z^4 against C0 U ln^4 T."""
    spec = make_window(model, T, U=U)
    est = moment_integral(*spec.image, 4, rtol=rtol, threads=threads)
    main = C0 * spec.U * math.log(spec.T) ** 4
    return MomentEstimate(kind=FOURTH, T=spec.T, U=spec.U, numeric=est.value,
                          asymptotic_main=main, ratio=est.value / main, quad_err=est.err_est)


# -- mean-value point ---------------------------------------------------------------

def _sixth_g(model):
    def g(t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        y = model.phi_half(t)
        zy = hardy_z_nodes(y)
        zt = hardy_z_nodes(t)
        return zy ** 4 * zt ** 2

    return g


def crossings(g, a, b, level, step, rtol=MEAN_RTOL, batch=256):
    """Yield the crossings of ``level`` by g on [a, b], left to right.

    g is sampled on a + k * step (plus b) in batches; each sign change of
    g - level is refined by bisection until |g - level| <= rtol * |level|
    or the bracket is a few ulps wide.  g takes and returns 1-D arrays.
    """
    tol = rtol * abs(level)
    k = 0
    prev_t = prev_d = None
    while True:
        ts = a + step * np.arange(k, k + batch, dtype=np.float64)
        ts = ts[ts < b]
        if ts.size < batch:
            ts = np.append(ts, b)
        ds = g(ts) - level
        for t, d in zip(ts.tolist(), ds.tolist()):
            if abs(d) <= tol:
                yield t
            elif prev_d is not None and (prev_d < 0) != (d < 0) and abs(prev_d) > tol:
                yield _bisect(g, level, prev_t, prev_d, t, tol)
            prev_t, prev_d = t, d
        if ts[-1] >= b:
            return
        k += batch


def _bisect(g, level, lo, d_lo, hi, tol):
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return mid
        d = float(g(np.array([mid]))[0]) - level
        if abs(d) <= tol:
            return mid
        if (d < 0) == (d_lo < 0):
            lo, d_lo = mid, d
        else:
            hi = mid


def _sixth_integral(model, spec, rtol, threads):
    def integrand(x, z, y):
        zy4 = hardy_z_nodes(y, threads=threads) ** 4
        z2 = z * z
        return np.stack([zy4 * z2, zy4 * z2 / phi_prime(2.0 * y)], axis=-1)

    main = C0 * spec.U * math.log(spec.T) ** 5
    lhs, hat = quad.integrate_adaptive(
        model.window_panel_fn(integrand, threads), spec.T, spec.T + spec.U,
        tol=[rtol * main, rtol * main / math.log(spec.T)], width=2, kappa=SIXTH_KAPPA,
        threads=threads)
    return lhs, hat


def mean_value_point(model, T, U, mean=None, rtol=DEFAULT_RTOL, threads=1):
    """Leftmost point of [T, T+U] where g = Z^4(phi/2) Z^2 meets its window mean.

    The scan step is half the local zero gap.  If g never crosses the
    mean on the scan (constant g) the left endpoint is returned.
    """
    spec = make_window(model, T, U=U)
    if mean is None:
        lhs, _ = _sixth_integral(model, spec, rtol, threads)
        mean = lhs.value / spec.U
    return _mean_value_from(model, spec, mean)


def _mean_value_from(model, spec, mean, skip=0):
    g = _sixth_g(model)
    step = 0.5 * float(quad.zero_gap(spec.T))
    found = None
    for i, alpha in enumerate(crossings(g, spec.T, spec.T + spec.U, mean, step)):
        if i >= skip:
            found = alpha
            break
    alpha = spec.T if found is None else found
    return MeanValuePoint(alpha=alpha, g_alpha=float(g(np.array([alpha]))[0]), mean=mean,
                          target=C0 * math.log(spec.T) ** 5)


def prediction_check(model, T, U, mean=None, rtol=DEFAULT_RTOL, threads=1):
    """|Z(alpha)| against ln^{5/2} alpha / (sqrt 2 pi Z^2(phi(alpha)/2)).

    Crossings where |Z(phi(alpha)/2)| < 1e-6 are skipped.  Also returns
    the shift alpha - phi(alpha)/2 against (1 - c) pi(T).
    """
    spec = make_window(model, T, U=U)
    if mean is None:
        lhs, _ = _sixth_integral(model, spec, rtol, threads)
        mean = lhs.value / spec.U
    return _predict_from(model, spec, mean)


def _predict_from(model, spec, mean):
    g = _sixth_g(model)
    step = 0.5 * float(quad.zero_gap(spec.T))
    for alpha in crossings(g, spec.T, spec.T + spec.U, mean, step):
        y = float(model.phi_half(alpha))
        zt, zy = hardy_z_nodes(np.array([alpha, y]))
        if abs(zy) < IMAGE_ZERO:
            continue
        lhs_abs = abs(float(zt))
        pred = math.log(alpha) ** 2.5 / (math.sqrt(2.0) * math.pi * float(zy) ** 2)
        shift = alpha - y
        ref = pnt_defect_reference(spec.T)
        return Prediction(alpha=alpha, lhs_abs_z=lhs_abs, rhs_pred=pred,
                          residual=lhs_abs / pred - 1.0, shift=shift, shift_reference=ref,
                          shift_ratio=shift / ref)
    nan = float("nan")
    return Prediction(alpha=nan, lhs_abs_z=nan, rhs_pred=nan, residual=nan, shift=nan,
                      shift_reference=nan, shift_ratio=nan,
                      error="no mean-value crossing with |Z(phi(alpha)/2)| >= 1e-6 in window")


# -- correlations -------------------------------------------------------------------

def correlation6(model, T, epsilon=DEFAULT_EPSILON, u_exponent=SIXTH_EXPONENT,
                 rtol=DEFAULT_RTOL, threads=1):
    """int_T^{T+U} Z^4(phi/2) Z^2 against C0 U ln^5 T, U = T^(u_exponent + 2 eps).

    Also integrates the Zhat^2-weighted form against 2 C0 U ln^4 T, and
    locates the mean-value point with its prediction of |Z(alpha)|.
    """
    start = time.perf_counter()
    if T < 1e4:
        raise WindowError("correlation6 needs T >= 1e4")
    spec = make_window(model, T, epsilon, u_exponent)
    lhs, hat = _sixth_integral(model, spec, rtol, threads)
    ln_t = math.log(spec.T)
    rhs = C0 * spec.U * ln_t ** 5
    mean = lhs.value / spec.U
    mvp = _mean_value_from(model, spec, mean)
    pred = _predict_from(model, spec, mean)
    phi_range = tuple(float(v) for v in phi_prime(2.0 * np.array(spec.image)))
    return CorrelationReport(
        kind="correlation6", spec=spec, lhs=lhs.value, rhs=rhs, ratio=lhs.value / rhs,
        intermediate_hat=hat.value, intermediate_ratio=hat.value / (2.0 * C0 * spec.U * ln_t ** 4),
        intermediate_err=hat.err_est,        phi_prime_range=phi_range, alpha=mvp.alpha, g_alpha=mvp.g_alpha,
        prediction_residual=pred.residual, shift_ratio=pred.shift_ratio,
        geometry=segment_geometry(model, spec.T, spec.U, spec.epsilon),
        quad_err=lhs.err_est, mode=model.mode, tol=rtol,
        wall_time=time.perf_counter() - start)


def correlation4(model, T, epsilon=DEFAULT_EPSILON, u_exponent=FOURTH_EXPONENT,
                 rtol=DEFAULT_RTOL, threads=1):
    """int_T^{T+U} Z^2(phi/2) Z^2 against U ln^2 T, U = T^(u_exponent + 2 eps)."""
    start = time.perf_counter()
    spec = make_window(model, T, epsilon, u_exponent)

    def integrand(x, z, y):
        return hardy_z_nodes(y, threads=threads) ** 2 * z * z

    ln_t = math.log(spec.T)
    rhs = spec.U * ln_t ** 2
    est = quad.integrate_panels(model.window_panel_fn(integrand, threads), spec.T,
                                spec.T + spec.U, tol=rtol * rhs, threads=threads)
    nan = float("nan")
    return CorrelationReport(
        kind="correlation4", spec=spec, lhs=est.value, rhs=rhs, ratio=est.value / rhs,
        intermediate_hat=nan, intermediate_ratio=nan, intermediate_err=nan, phi_prime_range=(nan, nan),
        alpha=nan, g_alpha=nan, prediction_residual=nan, shift_ratio=nan,
        geometry=segment_geometry(model, spec.T, spec.U, spec.epsilon),
        quad_err=est.err_est, mode=model.mode, tol=rtol,
        wall_time=time.perf_counter() - start)
