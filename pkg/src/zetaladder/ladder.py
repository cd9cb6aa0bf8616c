"""A concrete Jacob's ladder phi(t).

phi(t) / 2 is defined as the inverse image of the Hardy-Littlewood
integral hl(t) = int_0^t Z^2 under

    F(y) = y ln y + (c - ln 2 pi) y.

Differentiating F(phi/2) = hl(t) gives Z^2(t) = Phi'(phi(t)) dphi/dt with
Phi'(x) = (ln(x/2) + 1 + c - ln 2 pi) / 2, so Zhat^2 = Z^2 / Phi'(phi) is
exactly dphi/dt and the substitution identity holds with no error term.

hl is tabulated once on a fixed grid (``numeric_hl``) or replaced by its
two main terms (``analytic_hl``).
"""

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np

from . import quadrature as quad
from .number_theory import EULER_C, LN_TWO_PI, pnt_defect_reference
from .zeta_engine import _em_zeta, hardy_z_grid, hardy_z_nodes

NUMERIC = "numeric_hl"
ANALYTIC = "analytic_hl"
MODES = (NUMERIC, ANALYTIC)

T_HEAD = 10.0
GRID_STEP = 0.25
T_PHI_MIN = 100.0
CACHE_ENV = "ZLL_CACHE_DIR"
CACHE_MAGIC = "zeta-ladder-cache v1"

# F(y) = y ln y + K y
_K = EULER_C - LN_TWO_PI


class LadderError(RuntimeError):
    """The ladder cannot be evaluated (range, inversion or cache problem)."""


@lru_cache(maxsize=4)
def head_constant(t_head=T_HEAD, dps=20):
    """int_0^{t_head} |zeta(1/2 + it)|^2 dt with the Euler-Maclaurin oracle."""
    with mpmath.workdps(dps):
        f = lambda t: abs(_em_zeta(t, dps + 5)) ** 2
        pts = mpmath.linspace(0, t_head, int(math.ceil(t_head)) + 1)
        return float(mpmath.quad(f, pts))


def hl_analytic(t):
    """T ln T + (2c - 1 - ln 2 pi) T."""
    t = np.asarray(t, dtype=np.float64)
    return t * np.log(t) + (2.0 * EULER_C - 1.0 - LN_TWO_PI) * t


def big_f(y):
    y = np.asarray(y, dtype=np.float64)
    return y * np.log(y) + _K * y


def big_f_prime(y):
    return np.log(y) + 1.0 + _K


def phi_prime(x):
    """Phi'(x) = (ln(x/2) + 1 + c - ln 2 pi) / 2."""
    return 0.5 * big_f_prime(np.asarray(x, dtype=np.float64) / 2.0)


def invert_f(h, seed=None, rtol=1e-15, max_iter=100):
    """Solve F(y) = h for y >= 2, vectorised.

    Newton steps from ``seed``, kept inside a shrinking bracket [lo, hi]
    and replaced by bisection whenever they leave it.  F is increasing
    and convex for y >= 2, so the bracket always holds the root.
    """
    h = np.asarray(h, dtype=np.float64)
    scalar = h.ndim == 0
    h = np.atleast_1d(h)
    lo = np.full(h.shape, 2.0)
    if np.any(big_f(lo) > h):
        raise LadderError("invert_f: value below F(2); hl grid is not monotone or t too small")
    hi = np.maximum(h, 10.0)
    if np.any(big_f(hi) < h):
        raise LadderError("invert_f: no upper bracket")
    y = np.clip(np.atleast_1d(seed).astype(np.float64), lo, hi) if seed is not None else 0.5 * (lo + hi)
    for _ in range(max_iter):
        r = big_f(y) - h
        lo = np.where(r <= 0, y, lo)
        hi = np.where(r >= 0, y, hi)
        step = r / big_f_prime(y)
        y_new = y - step
        bad = (y_new <= lo) | (y_new >= hi)
        y_new = np.where(bad, 0.5 * (lo + hi), y_new)
        done = np.abs(y_new - y) <= rtol * y
        y = y_new
        if np.all(done | (hi - lo <= 4 * np.spacing(hi))):
            break
    else:
        raise LadderError("invert_f: Newton-bisection did not converge")
    return float(y[0]) if scalar else y


def defect_seed(t):
    t = np.asarray(t, dtype=np.float64)
    return t - (1.0 - EULER_C) * t / np.log(t)


def _z_sq(x):
    z = hardy_z_nodes(x)
    return z * z


@dataclass(frozen=True)
class LadderPoint:
    t: float
    phi: float
    phi_half: float
    z_hat_sq: float
    defect: float


@dataclass(frozen=True)
class LadderModel:
    """Immutable ladder; in numeric mode ``grid`` tabulates int_{t_head}^t Z^2."""

    mode: str
    t_head: float
    head_constant: float
    step: float
    t_max: float
    grid: quad.CumulativeGrid = None

    # -- Hardy-Littlewood integral -------------------------------------------

    def hl(self, t):
        """int_0^t Z^2 (numeric) or its two main terms (analytic)."""
        arr = np.asarray(t, dtype=np.float64)
        if self.mode == ANALYTIC:
            if np.any(arr < T_PHI_MIN):
                raise LadderError(f"analytic hl needs t >= {T_PHI_MIN}")
            out = hl_analytic(arr)
        else:
            out = self._hl_numeric(np.atleast_1d(arr)).reshape(arr.shape)
        return float(out) if np.ndim(t) == 0 else out

    def _hl_numeric(self, t):
        if np.any(t < self.t_head) or np.any(t > self.t_max):
            raise LadderError(f"t outside ladder grid [{self.t_head}, {self.t_max}]")
        nodes = self.grid.t
        i = np.clip(np.searchsorted(nodes, t, side="right") - 1, 0, nodes.size - 1)
        base = self.head_constant + self.grid.prefix[i]
        left = nodes[i]
        out = base.copy()
        need = t > left
        if np.any(need):
            lo, hi = left[need], t[need]
            m = max(1, math.ceil(self.step / (quad.KAPPA * float(quad.zero_gap(hi.max())))))
            frac = np.arange(m + 1) / m
            edges = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
            plo, phi = edges[:, :-1].ravel(), edges[:, 1:].ravel()
            sums = quad.gl_panel_sums(plo, phi, _z_sq(quad.gl_nodes(plo, phi)))
            out[need] += sums.reshape(-1, m).sum(axis=1)
        return out

    # -- phi and friends -----------------------------------------------------

    def phi_half(self, t, hl_values=None):
        """phi(t) / 2, vectorised; ``hl_values`` skips the hl lookup."""
        arr = np.asarray(t, dtype=np.float64)
        if np.any(arr < T_PHI_MIN):
            raise LadderError(f"phi is only constructed for t >= {T_PHI_MIN}")
        h = self.hl(arr) if hl_values is None else hl_values
        return invert_f(h, seed=defect_seed(arr))

    def point(self, t):
        t = float(t)
        ph = self.phi_half(t)
        z = float(hardy_z_nodes(np.array([t]))[0])
        phi = 2.0 * ph
        return LadderPoint(t=t, phi=phi, phi_half=phi / 2.0,
                           z_hat_sq=z * z / float(phi_prime(phi)), defect=t - phi / 2.0)

    def covers(self, a, b):
        if self.mode == ANALYTIC:
            return a >= T_PHI_MIN
        return T_PHI_MIN <= a and b <= self.t_max

    # -- window integrands ---------------------------------------------------

    def window_panel_fn(self, integrand, threads=1):
        """Panel function for :func:`quadrature.integrate_panels`.

        ``integrand(x, z, phi_half)`` gets the nodes, Z at the nodes and
        phi/2 at the nodes.  In numeric mode hl at the nodes is carried
        forward from hl at the first panel edge with the 16-point spectral
        integration matrix, reusing the Z values already computed.  Runs
        with gaps restart from the hl table after each gap.
        """

        def fn(lo, hi, x):
            z = hardy_z_grid(x.ravel(), threads=threads).reshape(x.shape)
            if self.mode == NUMERIC:
                z2 = z * z
                sums = quad.gl_panel_sums(lo, hi, z2)
                # a run may have gaps (locally refined panels); hl restarts
                # from the table at the first panel after each gap
                first = np.concatenate(([0], np.flatnonzero(lo[1:] != hi[:-1]) + 1))
                seg = np.zeros(lo.size, dtype=np.int64)
                seg[first[1:]] = 1
                seg = np.cumsum(seg)
                run = quad.compensated_cumsum(sums)
                starts = (self.hl(lo[first]) - run[first])[seg] + run[:-1]
                h = starts[:, None] + quad.gl_running(lo, hi, z2)
            else:
                h = hl_analytic(x)
            y = invert_f(h, seed=defect_seed(x))
            return integrand(x, z, y)

        return fn

    # -- persistence ---------------------------------------------------------

    def header(self):
        return (f"# {CACHE_MAGIC} mode={self.mode} t_head={self.t_head!r} "
                f"head_constant={self.head_constant:.17g} step={self.step!r} "
                f"t_max={self.t_max!r}")

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w") as fh:
            fh.write(self.header() + "\n")
            if self.grid is not None:
                np.savetxt(fh, np.column_stack([self.grid.t, self.grid.prefix]),
                           fmt="%.17g", delimiter=",")
        os.replace(tmp, path)
        return path


def parse_header(line):
    if not line.startswith("# " + CACHE_MAGIC):
        raise LadderError("not a ladder cache file")
    fields = dict(tok.split("=", 1) for tok in line[2 + len(CACHE_MAGIC):].split())
    return {
        "mode": fields["mode"],
        "t_head": float(fields["t_head"]),
        "head_constant": float(fields["head_constant"]),
        "step": float(fields["step"]),
        "t_max": float(fields["t_max"]),
    }


def load_model(path):
    """Read a cache file written by :meth:`LadderModel.save`."""
    with open(path) as fh:
        meta = parse_header(fh.readline().rstrip("\n"))
        grid = None
        if meta["mode"] == NUMERIC:
            data = np.loadtxt(fh, delimiter=",", dtype=np.float64, ndmin=2)
            t, prefix = np.ascontiguousarray(data[:, 0]), np.ascontiguousarray(data[:, 1])
            if t.size < 2 or np.any(np.diff(t) <= 0):
                raise LadderError(f"{path}: cache nodes are not strictly increasing")
            grid = quad.CumulativeGrid(a=float(t[0]), b=float(t[-1]), step=meta["step"],
                                       t=t, prefix=prefix, err_est=float("nan"),
                                       panels=0, evals=0)
    return LadderModel(grid=grid, **meta)


def cache_dir():
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "zetaladder"


def cache_path(mode, t_max, t_head=T_HEAD, step=GRID_STEP, directory=None):
    directory = Path(directory) if directory is not None else cache_dir()
    return directory / f"ladder-{mode}-h{t_head:g}-s{step:g}-T{t_max:.17g}.txt"


def build_ladder(t_max, mode=NUMERIC, step=GRID_STEP, t_head=T_HEAD, threads=1,
                 cache=True, directory=None):
    """Construct (or load from cache) a ladder valid on [t_head, t_max].

    A cache file is reused only when mode, t_head, step and t_max all
    match its header; anything else is rebuilt and overwritten.
    """
    if mode not in MODES:
        raise ValueError(f"unknown ladder mode {mode!r}")
    t_max = float(t_max)
    if mode == ANALYTIC:
        return LadderModel(mode=mode, t_head=t_head, head_constant=float(hl_analytic(t_head)),
                           step=step, t_max=t_max)
    path = cache_path(mode, t_max, t_head, step, directory) if cache else None
    if path is not None and path.exists():
        try:
            model = load_model(path)
            key = (model.mode, model.t_head, model.step, model.t_max)
            if key == (mode, t_head, step, t_max):
                return model
        except (LadderError, ValueError, KeyError):
            pass
    grid = quad.cumulative_grid(_z_sq, t_head, t_max, step, threads=threads)
    model = LadderModel(mode=mode, t_head=t_head, head_constant=head_constant(t_head),
                        step=step, t_max=t_max, grid=grid)
    if path is not None:
        model.save(path)
    return model


# -- operations -----------------------------------------------------------------

def hl_integral(model, T):
    return model.hl(T)


def ladder_phi(model, t):
    """:class:`LadderPoint` at height t (t >= 100)."""
    return model.point(t)


def ladder_defect(model, t):
    """t - phi(t)/2 against its asymptotic size (1 - c) pi(t)."""
    defect = float(t) - model.phi_half(float(t))
    reference = pnt_defect_reference(t)
    return {"defect": defect, "reference": reference, "ratio": defect / reference}


def ladder_slope(model, T, U):
    """(phi(T+U) - phi(T)) / (2U)."""
    if not 0 < U < T:
        raise LadderError("ladder_slope needs 0 < U < T")
    if not model.covers(T, T + U):
        raise LadderError("ladder_slope: window outside ladder range")
    a, b = model.phi_half(np.array([T, T + U]))
    return (2.0 * b - 2.0 * a) / (2.0 * U)
