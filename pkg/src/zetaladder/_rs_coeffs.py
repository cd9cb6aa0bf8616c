"""Riemann-Siegel remainder coefficients C_0..C_4 as polynomials.

Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) has only removable
singularities on [0, 1], so it is expanded as a power series in
x = p - 1/2 once, at high precision, and every derivative needed by the
C_k is read off that series.  This sidesteps the 0/0 at p = 1/4, 3/4.
"""

from functools import lru_cache

import mpmath
import numpy as np

# Series order in x.  At |x| <= 1/2 the terms are below 1e-20 by degree 60;
# C_4 needs 12 derivatives, hence the margin.
_ORDER = 80
_DEGREE = 60
_DPS = 100


def _cos_series(scale, order):
    # cos(scale * y) as a power series in y
    out = [mpmath.mpf(0)] * (order + 1)
    for k in range(0, order // 2 + 1):
        out[2 * k] = (-1) ** k * scale ** (2 * k) / mpmath.factorial(2 * k)
    return out


def _sin_series(scale, order):
    out = [mpmath.mpf(0)] * (order + 1)
    for k in range(0, (order - 1) // 2 + 1):
        out[2 * k + 1] = (-1) ** k * scale ** (2 * k + 1) / mpmath.factorial(2 * k + 1)
    return out


def _series_div(num, den):
    n = len(num)
    q = [mpmath.mpf(0)] * n
    for k in range(n):
        acc = num[k] - sum(q[j] * den[k - j] for j in range(k))
        q[k] = acc / den[0]
    return q


@lru_cache(maxsize=1)
def psi_series():
    """Taylor coefficients of Psi about p = 1/2, as mpf values."""
    with mpmath.workdps(_DPS):
        two_pi = 2 * mpmath.pi
        # numerator: cos(2 pi (x^2 - 5/16)) = cos(2 pi x^2) cos(5pi/8) + sin(2 pi x^2) sin(5pi/8)
        half = _ORDER // 2
        cy = _cos_series(two_pi, half)
        sy = _sin_series(two_pi, half)
        ca, sa = mpmath.cos(5 * mpmath.pi / 8), mpmath.sin(5 * mpmath.pi / 8)
        num = [mpmath.mpf(0)] * (_ORDER + 1)
        for k in range(half + 1):
            num[2 * k] = cy[k] * ca + sy[k] * sa
        # cos(2 pi p) = -cos(2 pi x)
        den = [-v for v in _cos_series(two_pi, _ORDER)]
        return _series_div(num, den)


def _derivative(coeffs, m):
    out = list(coeffs)
    for _ in range(m):
        out = [k * out[k] for k in range(1, len(out))]
    return out


@lru_cache(maxsize=1)
def correction_polynomials():
    """Coefficient arrays (ascending powers of p - 1/2) for C_0..C_4."""
    with mpmath.workdps(_DPS):
        base = psi_series()
        pi = mpmath.pi
        d = {m: _derivative(base, m) for m in (0, 1, 2, 3, 4, 5, 6, 8, 9, 12)}

        def combo(*terms):
            size = max(len(d[m]) for _, m in terms)
            acc = [mpmath.mpf(0)] * size
            for w, m in terms:
                for k, v in enumerate(d[m]):
                    acc[k] += w * v
            return acc

        polys = [
            combo((1, 0)),
            combo((-1 / (96 * pi**2), 3)),
            combo((1 / (64 * pi**2), 2), (1 / (18432 * pi**4), 6)),
            combo((-1 / (64 * pi**2), 1), (-1 / (3840 * pi**4), 5),
                  (-1 / (5308416 * pi**6), 9)),
            combo((1 / (128 * pi**2), 0), (19 / (24576 * pi**4), 4),
                  (11 / (5898240 * pi**6), 8), (1 / (2038431744 * pi**8), 12)),
        ]
    table = np.zeros((len(polys), _DEGREE + 1))
    for i, p in enumerate(polys):
        table[i] = [float(v) for v in p[: _DEGREE + 1]]
    return table
