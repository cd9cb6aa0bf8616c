"""Second and fourth moments of Z: asymptotic main terms and windowed numerics."""

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .number_theory import C0, EULER_C, LN_TWO_PI
from .zeta_engine import hardy_z_grid

SECOND = "second"
FOURTH = "fourth"
DEFAULT_RTOL = 1e-6


@dataclass(frozen=True)
class MomentEstimate:
    kind: str
    T: float
    U: float
    numeric: float
    asymptotic_main: float
    ratio: float
    quad_err: float


def _check_T(T):
    if T < 100:
        raise ValueError(f"asymptotic moments need T >= 100, got {T}")


def second_moment_asymptotic(T):
    """T ln T + (2c - 1 - ln 2 pi) T."""
    _check_T(T)
    return T * math.log(T) + (2.0 * EULER_C - 1.0 - LN_TWO_PI) * T


def windowed_second_asymptotic(T, U):
    """U ln T + (2c - ln 2 pi) U."""
    _check_T(T)
    if not 0 < U <= T:
        raise ValueError("windowed second moment needs 0 < U <= T")
    return U * math.log(T) + (2.0 * EULER_C - LN_TWO_PI) * U


def fourth_moment_leading(T):
    """(1 / 2 pi^2) T ln^4 T; the lower C_1..C_4 terms are not modelled."""
    _check_T(T)
    return C0 * T * math.log(T) ** 4


def z_power(power, threads=1):
    """Vectorised integrand x -> Z(x)^power for sorted node arrays."""

    def f(x):
        z = hardy_z_grid(x.ravel(), threads=threads).reshape(x.shape)
        return z ** power

    return f


def moment_integral(a, b, power, rtol=DEFAULT_RTOL, threads=1):
    """int_a^b Z^power with a tolerance relative to a rough size estimate."""
    # (ln b)^(power/2) undershoots the mean of Z^power, so the tolerance is safe
    size = (b - a) * math.log(b) ** (power / 2)
    return quad.integrate(z_power(power, threads), a, b, tol=rtol * size, threads=threads)


def windowed_numeric_moment(T, U, power, rtol=DEFAULT_RTOL, threads=1):
    """int_T^{T+U} Z^power against its main term (power 2 or 4)."""
    if power not in (2, 4):
        raise ValueError("power must be 2 or 4")
    if not U > 0:
        raise ValueError("empty window: U must be positive")
    est = moment_integral(T, T + U, power, rtol, threads)
    if power == 2:
        kind, main = SECOND, windowed_second_asymptotic(T, U)
    else:
        kind, main = FOURTH, U * C0 * math.log(T) ** 4
    return MomentEstimate(kind=kind, T=float(T), U=float(U), numeric=est.value,
                          asymptotic_main=main, ratio=est.value / main, quad_err=est.err_est)
