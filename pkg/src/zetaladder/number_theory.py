"""Prime counting and the constants the moment formulas are written in."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SIEVE_BUDGET = 10**9
SEGMENT = 1 << 18

EULER_C = 0.57721566490153286
LN_TWO_PI = 1.8378770664093456
C0 = 0.050660591821168886  # 1 / (2 pi^2)


@dataclass(frozen=True)
class ConstantSet:
    euler_c: float
    ln_two_pi: float
    c0: float
    one_minus_c: float


def constants():
    return ConstantSet(euler_c=EULER_C, ln_two_pi=LN_TWO_PI, c0=C0,
                       one_minus_c=1.0 - EULER_C)


@lru_cache(maxsize=8)
def _base_primes(limit):
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p:: p] = False
    return np.flatnonzero(flags)


def _count_segment(lo, hi, primes):
    """Number of primes in [lo, hi)."""
    flags = np.ones(hi - lo, dtype=bool)
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo:: p] = False
    if lo < 2:
        flags[: 2 - lo] = False
    return int(np.count_nonzero(flags))


def prime_pi(x, threads=1):
    """Exact count of primes <= x by a segmented sieve.

    Segments hold ``SEGMENT`` integers.  With ``threads > 1`` they are
    sieved concurrently; counts are integers, so the total is exact in
    any order.
    """
    if x < 0 or x > SIEVE_BUDGET:
        raise ValueError(f"prime_pi: x={x} outside the sieve budget [0, {SIEVE_BUDGET}]")
    n = int(math.floor(x))
    if n < 2:
        return 0
    primes = _base_primes(math.isqrt(n) + 1)
    bounds = [(lo, min(lo + SEGMENT, n + 1)) for lo in range(0, n + 1, SEGMENT)]
    if threads <= 1 or len(bounds) == 1:
        return sum(_count_segment(lo, hi, primes) for lo, hi in bounds)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        counts = list(pool.map(lambda b: _count_segment(b[0], b[1], primes), bounds))
    return sum(counts)


def pnt_defect_reference(t):
    """(1 - c) pi(t), the asymptotic lag of the ladder image."""
    if t < 2:
        raise ValueError("pnt_defect_reference needs t >= 2")
    return constants().one_minus_c * prime_pi(t)
