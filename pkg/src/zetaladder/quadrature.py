"""Fixed-order Gauss-Legendre panel quadrature for Z-type integrands.

Panels are laid out a priori from the mean zero spacing of Z,
2 pi / ln(t / 2 pi), so the same window always gets the same panels.
Each panel is integrated with a 16-point rule and again as two halves;
the difference is the error estimate and the halved value is returned.
Panel sums are reduced pairwise in panel order, so a threaded run gives
bit-identical results to a serial one.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from numpy.polynomial import legendre

GL_ORDER = 16
KAPPA = 0.5
CHUNK_PANELS = 10_000
MAX_DEPTH = 4
ADAPT_ROUNDS = 40

_XI, _W = legendre.leggauss(GL_ORDER)


def _integration_matrix(xi):
    # S[i, j] = int_{-1}^{xi_i} l_j(x) dx for the Lagrange basis l_j on xi
    n = xi.size
    vander = legendre.legvander(xi, n - 1)
    coef = np.linalg.inv(vander)  # column j: Legendre coefficients of l_j
    anti = legendre.legint(coef, lbnd=-1.0)
    return legendre.legval(xi, anti).T


_S = _integration_matrix(_XI)


class QuadratureError(ArithmeticError):
    """Panel refinement did not reach the requested tolerance."""


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    err_est: float
    panels: int
    evals: int


@dataclass(frozen=True)
class CumulativeGrid:
    """Prefix integrals of f on t = a, a + step, ..., b."""

    a: float
    b: float
    step: float
    t: np.ndarray
    prefix: np.ndarray
    err_est: float
    panels: int
    evals: int

    def pairs(self):
        return list(zip(self.t.tolist(), self.prefix.tolist()))


def zero_gap(t):
    """Mean spacing of zeros of Z near height t, floored at 2 pi."""
    t = np.maximum(np.asarray(t, dtype=np.float64), 2.0 * math.pi * math.e)
    return 2.0 * math.pi / np.log(t / (2.0 * math.pi))


def panel_count(a, b, kappa=KAPPA):
    """Number of equal panels on [a, b] so each is <= kappa * zero_gap(b)."""
    width = kappa * float(zero_gap(b))
    return max(1, math.ceil((b - a) / width))


def panel_edges(a, b, n):
    edges = a + (b - a) * (np.arange(n + 1, dtype=np.float64) / n)
    edges[-1] = b
    return edges


def gl_nodes(lo, hi):
    """Nodes of the 16-point rule on each panel, shape (panels, 16)."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid[:, None] + half[:, None] * _XI[None, :]


def gl_panel_sums(lo, hi, values):
    """Per-panel integrals from values at :func:`gl_nodes`.

    ``values`` is (panels, 16) or, for k integrands at once, (panels, 16, k).
    """
    half = 0.5 * (hi - lo)
    sums = np.tensordot(values, _W, axes=([1], [0]))
    return half.reshape(half.shape + (1,) * (sums.ndim - 1)) * sums


def gl_running(lo, hi, values):
    """Integral from each panel's left edge to each of its nodes."""
    return 0.5 * (hi - lo)[:, None] * (values @ _S.T)


@numba.njit(cache=True)
def _pairwise(x):
    n = x.shape[0]
    if n == 0:
        return 0.0
    buf = x.copy()
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n % 2:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]


def pairwise_sum(x):
    """Pairwise (tree) sum in index order; O(log n) rounding growth."""
    return float(_pairwise(np.ascontiguousarray(x, dtype=np.float64)))


@numba.njit(cache=True)
def compensated_cumsum(x):
    """Running sum with Neumaier compensation, out[0] = 0."""
    out = np.empty(x.shape[0] + 1)
    s = 0.0
    comp = 0.0
    out[0] = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
        out[i + 1] = s + comp
    return out


def _panel_block(panel_fn, lo, hi):
    """Full-rule and halved-rule integrals for a contiguous run of panels."""
    full = gl_panel_sums(lo, hi, panel_fn(lo, hi, gl_nodes(lo, hi)))
    mid = 0.5 * (lo + hi)
    # halves interleaved so the half panels stay contiguous and ordered
    hlo = np.empty(2 * lo.size)
    hhi = np.empty(2 * lo.size)
    hlo[0::2], hlo[1::2] = lo, mid
    hhi[0::2], hhi[1::2] = mid, hi
    halves = gl_panel_sums(hlo, hhi, panel_fn(hlo, hhi, gl_nodes(hlo, hhi)))
    split = halves[0::2] + halves[1::2]
    return split, np.abs(split - full)


def _run_panels(panel_fn, lo, hi, threads, chunk, width):
    n = lo.size
    shape = (n,) if width is None else (n, width)
    values = np.empty(shape)
    errors = np.empty(shape)
    runs = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]

    def work(run):
        s, e = run
        values[s:e], errors[s:e] = _panel_block(panel_fn, lo[s:e], hi[s:e])

    if threads <= 1 or len(runs) == 1:
        for run in runs:
            work(run)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, runs))
    return values, errors


def panel_integrals(panel_fn, edges, threads=1, chunk=CHUNK_PANELS, width=None):
    """Halved-rule panel integrals and per-panel error estimates.

    ``panel_fn(lo, hi, x)`` receives a contiguous run of panels (edge
    arrays ``lo``, ``hi`` with ``lo[i+1] == hi[i]``) and their node array
    ``x`` of shape (panels, 16), and returns f at those nodes.  Runs are at
    most ``chunk`` panels long and are fixed by ``edges`` alone.  With
    ``width=k`` the integrand returns k values per node (trailing axis).
    """
    return _run_panels(panel_fn, edges[:-1], edges[1:], threads, chunk, width)


def integrate_panels_multi(panel_fn, a, b, width, tol, kappa=KAPPA, threads=1,
                           max_depth=MAX_DEPTH):
    """Like :func:`integrate_panels` for ``width`` integrands sharing nodes.

    ``tol`` is a scalar or one tolerance per integrand; panels are refined
    until every integrand meets its own.  Returns a list of estimates.
    """
    if not a < b:
        raise ValueError(f"integrate: need a < b, got [{a}, {b}]")
    tol = np.broadcast_to(np.asarray(tol, dtype=np.float64), (width,))
    if not np.all(tol > 0):
        raise ValueError("integrate: tol must be positive")
    n = panel_count(a, b, kappa)
    for _ in range(max_depth + 1):
        values, errors = panel_integrals(panel_fn, panel_edges(a, b, n), threads, width=width)
        errs = [pairwise_sum(errors[:, k]) for k in range(width)]
        if all(e <= t for e, t in zip(errs, tol)):
            return [IntegralEstimate(pairwise_sum(values[:, k]), errs[k], n, 3 * GL_ORDER * n)
                    for k in range(width)]
        n *= 2
    raise QuadratureError(
        f"integrate: error estimates {errs} above tol {list(tol)} after {max_depth} refinements")


def integrate_adaptive(panel_fn, a, b, tol, width=1, kappa=KAPPA, threads=1,
                       max_rounds=ADAPT_ROUNDS):
    """Locally refined panel quadrature for integrands with isolated peaks.

    Starts from the uniform layout of :func:`panel_count` and halves only
    the panels whose error estimate exceeds their length share of ``tol``
    (for any of the ``width`` integrands), until every total meets its
    tolerance.  ``panel_fn`` must accept non-contiguous panel runs.  Split
    decisions depend only on computed values and panels stay in order, so
    the result does not depend on ``threads``.  With ``width=1`` the
    integrand returns plain (panels, 16) arrays.  Returns a list of estimates.
    """
    shape = None if width == 1 else width
    if not a < b:
        raise ValueError(f"integrate: need a < b, got [{a}, {b}]")
    tol = np.broadcast_to(np.asarray(tol, dtype=np.float64), (width,))
    if not np.all(tol > 0):
        raise ValueError("integrate: tol must be positive")
    edges = panel_edges(a, b, panel_count(a, b, kappa))
    lo, hi = edges[:-1], edges[1:]
    values, errors = _run_panels(panel_fn, lo, hi, threads, CHUNK_PANELS, shape)
    values, errors = values.reshape(lo.size, width), errors.reshape(lo.size, width)
    evals = 3 * GL_ORDER * lo.size
    for _ in range(max_rounds + 1):
        errs = [pairwise_sum(errors[:, k]) for k in range(width)]
        if all(e <= t for e, t in zip(errs, tol)):
            return [IntegralEstimate(pairwise_sum(values[:, k]), errs[k], lo.size, evals)
                    for k in range(width)]
        share = (hi - lo) / (b - a)
        split = np.any(errors / tol > share[:, None], axis=1)
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.column_stack([lo[split], mid]).ravel()
        new_hi = np.column_stack([mid, hi[split]]).ravel()
        v, e = _run_panels(panel_fn, new_lo, new_hi, threads, CHUNK_PANELS, shape)
        evals += 3 * GL_ORDER * new_lo.size
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        order = np.argsort(lo, kind="stable")
        lo = lo[order]
        hi = np.concatenate([hi[keep], new_hi])[order]
        values = np.concatenate([values[keep], v.reshape(-1, width)])[order]
        errors = np.concatenate([errors[keep], e.reshape(-1, width)])[order]
    raise QuadratureError(
        f"integrate: error estimates {errs} above tol {list(tol)} after {max_rounds} rounds")


def integrate_panels(panel_fn, a, b, tol=1e-10, kappa=KAPPA, threads=1,
                     max_depth=MAX_DEPTH):
    """Integrate a panel-aware integrand over [a, b]; see :func:`panel_integrals`."""
    if not a < b:
        raise ValueError(f"integrate: need a < b, got [{a}, {b}]")
    if not tol > 0:
        raise ValueError("integrate: tol must be positive")
    n = panel_count(a, b, kappa)
    for _ in range(max_depth + 1):
        values, errors = panel_integrals(panel_fn, panel_edges(a, b, n), threads)
        err = pairwise_sum(errors)
        if err <= tol:
            return IntegralEstimate(pairwise_sum(values), err, n, 3 * GL_ORDER * n)
        n *= 2
    raise QuadratureError(
        f"integrate: error estimate {err:.3g} above tol {tol:.3g} after {max_depth} refinements")


def integrate(f, a, b, tol=1e-10, kappa=KAPPA, threads=1, max_depth=MAX_DEPTH):
    """Integrate a vectorised f over [a, b].

    f is called on 2-D node arrays (panels x 16), sorted in row-major
    order.  The returned ``err_est`` is the summed |full - halved|
    difference over panels.

    >>> round(integrate(lambda x: np.ones_like(x), 0.0, 5.0).value, 12)
    5.0
    """
    return integrate_panels(lambda lo, hi, x: f(x), a, b, tol, kappa, threads, max_depth)


def cumulative_grid(f, a, b, step, kappa=KAPPA, threads=1, chunk=CHUNK_PANELS):
    """Prefix integrals of f at a, a + step, ..., b.

    Each step is split into equal panels no wider than kappa * zero_gap;
    the final node is b even when (b - a) / step is not an integer.
    """
    if not a < b:
        raise ValueError(f"cumulative_grid: need a < b, got [{a}, {b}]")
    if not 0 < step <= 1:
        raise ValueError("cumulative_grid: step must lie in (0, 1]")
    n_steps = math.ceil((b - a) / step - 1e-9)
    t = a + step * np.arange(n_steps + 1, dtype=np.float64)
    t[-1] = b
    # panels per step, held constant over runs of steps
    pieces = []
    counts = np.empty(n_steps, dtype=np.int64)
    for s in range(0, n_steps, chunk):
        e = min(s + chunk, n_steps)
        m = max(1, math.ceil(step / (kappa * float(zero_gap(t[e])))))
        lo_c, hi_c = t[s:e], t[s + 1: e + 1]
        frac = np.arange(m, dtype=np.float64) / m
        pieces.append((lo_c[:, None] + (hi_c - lo_c)[:, None] * frac[None, :]).ravel())
        counts[s:e] = m
    edges = np.append(np.concatenate(pieces), t[-1])
    vals, errs = panel_integrals(lambda lo, hi, x: f(x), edges, threads, chunk)
    first = np.concatenate(([0], np.cumsum(counts)[:-1]))
    cell_vals = np.add.reduceat(vals, first)
    total_err = pairwise_sum(errs)
    total_panels = vals.size
    prefix = compensated_cumsum(cell_vals)
    return CumulativeGrid(a=float(a), b=float(b), step=float(step), t=t, prefix=prefix,
                          err_est=total_err, panels=total_panels,
                          evals=3 * GL_ORDER * total_panels)
