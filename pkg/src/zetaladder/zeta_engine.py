"""Hardy Z-function on the critical line.

Fast path: the Riemann-Siegel formula with remainder terms C_0..C_4,
compiled with numba and evaluated over arrays of heights.  Slow path:
an Euler-Maclaurin evaluation of zeta(1/2 + it) in mpmath, used as an
independent oracle and for heights below ``T_MIN``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import gmpy2
import mpmath
import numba
import numpy as np

from ._rs_coeffs import correction_polynomials

T_MIN = 10.0
T_MAX = 1.0e12
ORACLE_DPS = 40
ORACLE_T_MAX = 1.0e6

_TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Height outside the validity range of an evaluator."""


class PrecisionError(ArithmeticError):
    """The oracle could not certify its working precision."""


@dataclass(frozen=True)
class ZSample:
    t: float
    theta: float
    z: float
    abs_zeta: float


def _check_height(t, lo=T_MIN, hi=T_MAX):
    t = np.asarray(t, dtype=np.float64)
    if t.size and (not np.all(np.isfinite(t)) or t.min() < lo or t.max() > hi):
        raise DomainError(f"heights must lie in [{lo}, {hi}]")
    return t


# ---------------------------------------------------------------------------
# theta
# ---------------------------------------------------------------------------

def _theta_longdouble(t):
    t = np.asarray(t, dtype=np.longdouble)
    two_pi = np.longdouble(2) * np.arccos(np.longdouble(-1))
    th = t / 2 * np.log(t / two_pi) - t / 2 - two_pi / 16
    th += 1 / (48 * t) + 7 / (5760 * t**3)
    return th


def rs_theta(t):
    """Riemann-Siegel theta by its asymptotic expansion.

    Accepts a scalar or an array; heights below ``T_MIN`` raise
    :class:`DomainError`.
    """
    arr = _check_height(t)
    out = _theta_longdouble(arr).astype(np.float64)
    return float(out) if np.ndim(t) == 0 else out


def _theta_reduced(t):
    th = _theta_longdouble(t)
    two_pi = np.longdouble(2) * np.arccos(np.longdouble(-1))
    return np.remainder(th, two_pi).astype(np.float64)


# ---------------------------------------------------------------------------
# Riemann-Siegel kernel
# ---------------------------------------------------------------------------

_LOG_TABLE = {"n": 0, "hi": None, "lo": None}


def _log_table(n_max):
    """ln n for n = 0..n_max as (hi, lo) float64 pairs from extended precision."""
    if _LOG_TABLE["n"] < n_max:
        n = max(n_max, 2 * _LOG_TABLE["n"], 1024)
        ln = np.log(np.arange(1, n + 1, dtype=np.longdouble))
        hi = np.concatenate(([0.0], ln.astype(np.float64)))
        lo = np.concatenate(([0.0], (ln - hi[1:].astype(np.longdouble)).astype(np.float64)))
        _LOG_TABLE.update(n=n, hi=hi, lo=lo)
    return _LOG_TABLE["hi"], _LOG_TABLE["lo"]


@numba.njit(cache=True, nogil=True)
def _two_prod(a, b):
    # Dekker product without fma: a*b == p + e exactly
    p = a * b
    split = 134217729.0
    c = split * a
    ah = c - (c - a)
    al = a - ah
    c = split * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@numba.njit(cache=True, nogil=True)
def _remainder(ti, poly):
    a = math.sqrt(ti / (2.0 * math.pi))
    n_terms = int(a)
    x = a - n_terms - 0.5
    rem = 0.0
    scale = 1.0
    inv_a = 1.0 / a
    ncoef = poly.shape[1]
    for k in range(poly.shape[0]):
        c = 0.0
        for j in range(ncoef - 1, -1, -1):
            c = c * x + poly[k, j]
        rem += c * scale
        scale *= inv_a
    sign = 1.0 if (n_terms - 1) % 2 == 0 else -1.0
    return sign * rem / math.sqrt(a)


@numba.njit(cache=True, nogil=True)
def _reduced_phase(c, log_hi_n, log_lo_n):
    # c * ln n reduced to [-pi, pi] with compensated arithmetic
    two_pi_hi = 6.283185307179586
    two_pi_lo = 2.4492935982947064e-16
    p, e = _two_prod(c, log_hi_n)
    e += c * log_lo_n
    k = math.floor(p / two_pi_hi + 0.5)
    q, qe = _two_prod(k, two_pi_hi)
    return (p - q) + (e - qe - k * two_pi_lo)


@numba.njit(cache=True, nogil=True)
def _z_kernel(t, th_red, log_hi, log_lo, rsq, poly, out):
    for i in range(t.shape[0]):
        ti = t[i]
        n_terms = int(math.sqrt(ti / (2.0 * math.pi)))
        th = th_red[i]
        acc = 0.0
        for n in range(1, n_terms + 1):
            # theta and t ln n are both reduced mod 2 pi before the cos
            acc += rsq[n] * math.cos(th - _reduced_phase(ti, log_hi[n], log_lo[n]))
        out[i] = 2.0 * acc + _remainder(ti, poly)


def _z_values(t, th_red):
    n_max = int(math.sqrt(float(t.max()) / _TWO_PI)) + 1 if t.size else 1
    log_hi, log_lo = _log_table(n_max)
    rsq = 1.0 / np.sqrt(np.maximum(np.arange(log_hi.size, dtype=np.float64), 1.0))
    out = np.empty_like(t)
    _z_kernel(t, th_red, log_hi, log_lo, rsq, correction_polynomials(), out)
    return out


def hardy_z_array(t, threads=1, chunk=4096):
    """Vectorised Z(t) via Riemann-Siegel.

    The points are split into fixed chunks that may run on a thread pool;
    every point is computed independently, so the result does not depend
    on ``threads``.
    """
    t = np.ascontiguousarray(_check_height(t).ravel())
    th_red = _theta_reduced(t)
    if threads <= 1 or t.size <= chunk:
        return _z_values(t, th_red)
    _log_table(int(math.sqrt(float(t.max()) / _TWO_PI)) + 1)
    out = np.empty_like(t)
    bounds = [(s, min(s + chunk, t.size)) for s in range(0, t.size, chunk)]

    def work(b):
        s, e = b
        out[s:e] = _z_values(t[s:e], th_red[s:e])

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, bounds))
    return out


@numba.njit(cache=True, nogil=True)
def _z_block_kernel(t, th_red, starts, log_hi, log_lo, rsq, poly, out):
    """Z at sorted nodes, one Taylor expansion of the main sum per block.

    Block b covers t[starts[b]:starts[b+1]].  With c the block centre and
    d = t - c, sum_n n^{-1/2} e^{-it ln n} = sum_k M_k (-i d)^k / k! where
    M_k = sum_n n^{-1/2} e^{-ic ln n} (ln n)^k.
    """
    kmax = 80
    mre = np.empty(kmax)
    mim = np.empty(kmax)
    for b in range(starts.shape[0] - 1):
        lo_i = starts[b]
        hi_i = starts[b + 1]
        c = 0.5 * (t[lo_i] + t[hi_i - 1])
        n0 = int(math.sqrt(t[lo_i] / (2.0 * math.pi)))
        dmax = max(c - t[lo_i], t[hi_i - 1] - c)
        x = dmax * log_hi[n0] if n0 > 1 else dmax
        # Taylor order: x^K / K! below 1e-18 relative to e^x
        n_k = 1
        term = 1.0
        while n_k < kmax and term > 1e-18:
            term *= x / n_k
            n_k += 1
        for k in range(n_k):
            mre[k] = 0.0
            mim[k] = 0.0
        for n in range(1, n0 + 1):
            ph = _reduced_phase(c, log_hi[n], log_lo[n])
            wr = rsq[n] * math.cos(ph)
            wi = -rsq[n] * math.sin(ph)
            ln = log_hi[n]
            for k in range(n_k):
                mre[k] += wr
                mim[k] += wi
                wr *= ln
                wi *= ln
        # fold (-i)^k / k! into the moments
        fact = 1.0
        for k in range(n_k):
            if k > 0:
                fact /= k
            r = mre[k] * fact
            im = mim[k] * fact
            m = k % 4
            if m == 0:
                mre[k], mim[k] = r, im
            elif m == 1:
                mre[k], mim[k] = im, -r
            elif m == 2:
                mre[k], mim[k] = -r, -im
            else:
                mre[k], mim[k] = -im, r
        for i in range(lo_i, hi_i):
            d = t[i] - c
            sr = 0.0
            si = 0.0
            for k in range(n_k - 1, -1, -1):
                sr, si = sr * d + mre[k], si * d + mim[k]
            ni = int(math.sqrt(t[i] / (2.0 * math.pi)))
            for n in range(n0 + 1, ni + 1):
                ph = _reduced_phase(t[i], log_hi[n], log_lo[n])
                sr += rsq[n] * math.cos(ph)
                si -= rsq[n] * math.sin(ph)
            acc = math.cos(th_red[i]) * sr - math.sin(th_red[i]) * si
            out[i] = 2.0 * acc + _remainder(t[i], poly)


def hardy_z_grid(t, threads=1, block_width=1.0, chunk_blocks=256):
    """Z on a sorted, dense array of heights (quadrature nodes).

    Consecutive nodes are grouped into blocks no wider than
    ``block_width`` and the main sum is expanded once per block.  Agrees
    with :func:`hardy_z_array` to about 1e-12.  The blocking depends
    only on ``t`` and ``block_width``, never on ``threads``.
    """
    t = np.ascontiguousarray(_check_height(t).ravel())
    if t.size == 0:
        return t.copy()
    if np.any(np.diff(t) < 0):
        raise ValueError("hardy_z_grid needs nondecreasing heights")
    # greedy blocks: a new block starts once the width would exceed block_width
    edges = np.floor((t - t[0]) / block_width).astype(np.int64)
    starts = np.flatnonzero(np.diff(edges)) + 1
    starts = np.concatenate(([0], starts, [t.size])).astype(np.int64)
    n_max = int(math.sqrt(float(t[-1]) / _TWO_PI)) + 1
    log_hi, log_lo = _log_table(n_max)
    rsq = 1.0 / np.sqrt(np.maximum(np.arange(log_hi.size, dtype=np.float64), 1.0))
    th_red = _theta_reduced(t)
    poly = correction_polynomials()
    out = np.empty_like(t)
    n_blocks = starts.size - 1
    if threads <= 1 or n_blocks <= chunk_blocks:
        _z_block_kernel(t, th_red, starts, log_hi, log_lo, rsq, poly, out)
        return out
    pieces = [starts[i: i + chunk_blocks + 1] for i in range(0, n_blocks, chunk_blocks)]

    def work(st):
        _z_block_kernel(t, th_red, st, log_hi, log_lo, rsq, poly, out)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, pieces))
    return out


def hardy_z_nodes(x, threads=1):
    """Z at an array of any shape and order (sorted internally for the grid path)."""
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    order = np.argsort(flat, kind="stable")
    out = np.empty_like(flat)
    out[order] = hardy_z_grid(flat[order], threads=threads)
    return out.reshape(x.shape)


def hardy_z(t):
    """Z(t) at a single height, packaged as a :class:`ZSample`."""
    t = float(t)
    arr = _check_height(np.array([t]))
    z = float(_z_values(arr, _theta_reduced(arr))[0])
    return ZSample(t=t, theta=rs_theta(t), z=z, abs_zeta=abs(z))


# ---------------------------------------------------------------------------
# Euler-Maclaurin oracle
# ---------------------------------------------------------------------------

def _head_sum(t, n_head, prec):
    """sum_{n < n_head} n^{-1/2 - it}, accumulated in MPFR at ``prec`` bits."""
    with gmpy2.context(gmpy2.get_context(), precision=prec + 32):
        tt = gmpy2.mpfr(mpmath.nstr(t, 60, min_fixed=-1, max_fixed=1))
        re = gmpy2.mpfr(0)
        im = gmpy2.mpfr(0)
        for n in range(1, n_head):
            ln = gmpy2.log(n)
            sn, cs = gmpy2.sin_cos(tt * ln)
            r = gmpy2.rec_sqrt(n)
            re += r * cs
            im -= r * sn
        return mpmath.mpc(mpmath.mpf(str(re)), mpmath.mpf(str(im)))


def em_zeta_half(t, dps=ORACLE_DPS):
    """zeta(1/2 + it) by Euler-Maclaurin summation in mpmath.

    Slow (the head sum has about 0.18 t terms); meant for cross-checks
    and for the low heights the Riemann-Siegel path does not cover.
    Returns an ``mpmath.mpc``.
    """
    t = mpmath.mpf(t)
    if not (0 < abs(t) <= ORACLE_T_MAX):
        raise DomainError(f"oracle height must satisfy 0 < |t| <= {ORACLE_T_MAX:g}")
    return _em_zeta(t, dps)


def _em_zeta(t, dps):
    with mpmath.workdps(dps + 10):
        s = mpmath.mpc(0.5, t)
        target = mpmath.mpf(10) ** (-dps)
        # head length: the tail terms shrink like (|s| / 2 pi N)^2
        n_head = int(1.1 * abs(s) / (2 * mpmath.pi)) + 2 * dps
        head = _head_sum(t, n_head, mpmath.mp.prec)
        big_n = mpmath.mpf(n_head)
        n_pow = mpmath.power(big_n, -s)
        total = head + big_n * n_pow / (s - 1) + n_pow / 2
        # rising factorial s (s+1) ... (s+2k-2) / (2k)! times N^{-s-2k+1}
        fact = s * n_pow / big_n
        inv_n2 = 1 / big_n**2
        prev = None
        for k in range(1, 2000):
            term = mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * fact
            total += term
            mag = abs(term)
            if mag < target * abs(total):
                break
            if prev is not None and mag > prev:
                raise PrecisionError("Euler-Maclaurin tail stopped decreasing")
            prev = mag
            fact *= (s + 2 * k - 1) * (s + 2 * k) * inv_n2
        else:
            raise PrecisionError("Euler-Maclaurin tail did not converge")
    return +total
