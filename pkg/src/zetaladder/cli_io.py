"""Command-line front end: configs, experiment dispatch and report files.

Reports are JSON objects (see ``REPORT_SCHEMA``) or two-column CSV
(``field,value`` with dotted field names, in the JSON key order).
Floats are written so they parse back to the same double; NaN becomes
``null`` in JSON and an empty cell in CSV.

Exit codes: 0 success, 1 error, 2 a result outside its band.
"""

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import correlation as corr
from . import ladder as lad
from .moments import windowed_numeric_moment
from .zeta_engine import ORACLE_T_MAX, em_zeta_half, hardy_z

EXPERIMENTS = ("zcheck", "ladder", "transform", "second_moment", "fourth_moment",
               "correlation6", "correlation4", "predict", "geometry", "all")
FORMATS = ("json", "csv")
PLOT_COLUMNS = ("T", "U", "lhs", "rhs", "ratio", "quad_err")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BAND = 2

# acceptance bands per experiment: name -> (lo, hi) applied to a result field
BANDS = {
    "zcheck": {"abs_diff": (0.0, 1e-6)},
    "ladder": {"defect_ratio": (0.8, 1.25)},
    "transform": {"const_one.rel_diff": (0.0, 1e-9), "linear.rel_diff": (0.0, 1e-6),
                  "abs_z_4.rel_diff": (0.0, 1e-4)},
    "second_moment": {"ratio": (0.95, 1.05)},
    "fourth_moment": {"ratio": (0.6, 1.6)},
    "correlation6": {"ratio": (0.5, 2.0)},
    "correlation4": {"ratio": (0.4, 2.5)},
    "predict": {"residual": (-0.35, 0.45), "shift_ratio": (0.8, 1.25)},
    "geometry": {"rho_margin": (0.0, math.inf)},
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["experiment", "status", "config", "U", "mode", "tol", "results", "bands",
                 "error", "wall_time"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "status": {"enum": ["ok", "band_failure", "error"]},
        "config": {"type": "object"},
        "U": {"type": ["number", "null"]},
        "mode": {"enum": list(lad.MODES)},
        "tol": {"type": "number"},
        "results": {"type": "object"},
        "bands": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["lo", "hi", "value", "passed"],
            },
        },
        "error": {"type": ["string", "null"]},
        "wall_time": {"type": "number"},
    },
}


class ConfigError(ValueError):
    """Bad flag or config-file entry; the message names the offender."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    T: float
    epsilon: float = corr.DEFAULT_EPSILON
    u_exponent: float = None
    mode: str = lad.NUMERIC
    tol: float = 1e-6
    threads: int = 1
    cache_path: str = None
    out_path: str = "report.json"
    format: str = "json"
    U: float = None

    @property
    def resolved_u_exponent(self):
        if self.u_exponent is not None:
            return self.u_exponent
        return corr.FOURTH_EXPONENT if self.experiment == "correlation4" else corr.SIXTH_EXPONENT

    @property
    def resolved_U(self):
        """Window length used by this experiment, or None for point checks."""
        if self.experiment in ("zcheck", "ladder", "all"):
            return None
        if self.U is not None:
            return self.U
        u = self.resolved_u_exponent
        if self.experiment in ("second_moment", "fourth_moment"):
            return self.T ** u
        if self.experiment == "geometry":
            return corr.geometry_window(self.T, self.epsilon, u)
        return corr.window_length(self.T, self.epsilon, u)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_FLAGS = {"experiment": "--experiment", "T": "--t", "epsilon": "--epsilon",
          "u_exponent": "--u-exponent", "mode": "--mode", "tol": "--tol",
          "threads": "--threads", "cache_path": "--cache-path", "out_path": "--out",
          "format": "--format", "U": "--u"}
_CASTS = {"T": float, "epsilon": float, "u_exponent": float, "tol": float, "threads": int,
          "U": float}


def _parser():
    p = argparse.ArgumentParser(prog="zetaladder",
                                description="Run one Z-function / ladder experiment.")
    p.add_argument("--config", help="key=value file; flags given here override it")
    for name, flag in _FLAGS.items():
        p.add_argument(flag, dest=name, default=None)
    return p


def _cast(name, raw):
    if raw is None or name not in _CASTS:
        return raw
    try:
        return _CASTS[name](raw)
    except ValueError:
        raise ConfigError(f"{_FLAGS[name]}: cannot read {raw!r} as {_CASTS[name].__name__}")


def read_config_file(path):
    """Parse a key=value file into a dict of raw strings (# comments allowed)."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val
    return values


def write_config_file(config, path):
    lines = [f"{k}={_fmt_value(v)}" for k, v in dataclasses.asdict(config).items()
             if v is not None]
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt_value(v):
    return repr(v) if isinstance(v, float) else str(v)


def validate(config):
    c = config
    if c.experiment not in EXPERIMENTS:
        raise ConfigError(f"--experiment: unknown experiment {c.experiment!r}")
    if not c.T >= 100:
        raise ConfigError(f"--t: T must be >= 100, got {c.T}")
    if not 0 < c.epsilon <= 0.05:
        raise ConfigError(f"--epsilon: must lie in (0, 0.05], got {c.epsilon}")
    if c.u_exponent is not None and not 0 < c.u_exponent < 1:
        raise ConfigError(f"--u-exponent: must lie in (0, 1), got {c.u_exponent}")
    if c.U is not None and not 0 < c.U < c.T:
        raise ConfigError(f"--u: window length must lie in (0, T), got {c.U}")
    if not c.tol > 0:
        raise ConfigError(f"--tol: must be positive, got {c.tol}")
    if c.threads < 1:
        raise ConfigError(f"--threads: must be >= 1, got {c.threads}")
    if c.mode not in lad.MODES:
        raise ConfigError(f"--mode: expected one of {lad.MODES}, got {c.mode!r}")
    if c.format not in FORMATS:
        raise ConfigError(f"--format: expected one of {FORMATS}, got {c.format!r}")
    return c


def parse_config(argv):
    """Build a validated :class:`ExperimentConfig` from flags and/or a file."""
    args = vars(_parser().parse_args(argv))
    raw = read_config_file(args.pop("config")) if args.get("config") else {}
    raw.update({k: v for k, v in args.items() if v is not None})
    missing = [_FLAGS[k] for k in ("experiment", "T") if k not in raw]
    if missing:
        raise ConfigError(f"missing required {', '.join(missing)}")
    return validate(ExperimentConfig(**{k: _cast(k, v) for k, v in raw.items()}))


# -- serialisation -------------------------------------------------------------------

def to_plain(obj):
    """Dataclasses, tuples and numpy scalars to JSON-ready values; NaN -> None."""
    if dataclasses.is_dataclass(obj):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else x
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def format_report(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "value"])
    for k, v in _flatten(report):
        w.writerow([k, _cell(v)])
    return buf.getvalue()


def emit_plot_data(reports, path=None):
    """Columnar ``T,U,lhs,rhs,ratio,quad_err`` text, one row per report, sorted by T.

    Accepts :class:`CorrelationReport` objects or their plain dicts; all
    must come from the same experiment.
    """
    rows, kinds = [], set()
    for r in reports:
        d = to_plain(r) if dataclasses.is_dataclass(r) else r
        kinds.add(d["kind"])
        T = d["spec"]["T"] if "spec" in d else d["T"]
        U = d["spec"]["U"] if "spec" in d else d["U"]
        rows.append((T, U, d["lhs"], d["rhs"], d["ratio"], d["quad_err"]))
    if len(kinds) > 1:
        raise ValueError(f"emit_plot_data: mixed experiments {sorted(kinds)}")
    rows.sort(key=lambda row: row[0])
    text = ",".join(PLOT_COLUMNS) + "\n"
    text += "".join(",".join(format(float(x), ".17g") for x in row) + "\n" for row in rows)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_plot_data(text):
    lines = text.strip().splitlines()
    if lines[0] != ",".join(PLOT_COLUMNS):
        raise ValueError("not a plot-data file")
    return [dict(zip(PLOT_COLUMNS, map(float, ln.split(",")))) for ln in lines[1:]]


# -- experiments ---------------------------------------------------------------------

def ladder_extent(t):
    """Round t up to a multiple of 5 * 10^(k-1) (k = floor(log10 t)) so caches are shared."""
    q = 5.0 * 10.0 ** (math.floor(math.log10(t)) - 1)
    return math.ceil(t / q) * q


def _ladder(config, t_top):
    if config.mode == lad.ANALYTIC:
        return lad.build_ladder(t_top, mode=lad.ANALYTIC)
    return lad.build_ladder(ladder_extent(t_top), threads=config.threads,
                            directory=config.cache_path)


def _zcheck(c):
    s = hardy_z(c.T)
    if c.T > ORACLE_T_MAX:
        raise ValueError(f"zcheck: oracle limited to T <= {ORACLE_T_MAX:g}")
    oracle = float(abs(em_zeta_half(c.T)))
    return {"t": s.t, "z": s.z, "theta": s.theta, "oracle_abs_zeta": oracle,
            "abs_diff": abs(s.abs_zeta - oracle)}


def _ladder_exp(c):
    model = _ladder(c, c.T)
    p = lad.ladder_phi(model, c.T)
    d = lad.ladder_defect(model, c.T)
    return {**to_plain(p), "defect_reference": d["reference"], "defect_ratio": d["ratio"]}


def _transform(c):
    U = c.resolved_U
    model = _ladder(c, c.T + U)
    return {kind: corr.transform_identity_check(model, kind, c.T, U, threads=c.threads)
            for kind in corr.TRANSFORM_KINDS}


def _moment(power):
    def run(c):
        return to_plain(windowed_numeric_moment(c.T, c.resolved_U, power, rtol=c.tol,
                                                threads=c.threads))

    return run


def _correlation(fn):
    def run(c):
        model = _ladder(c, c.T + c.resolved_U)
        return to_plain(fn(model, c.T, c.epsilon, c.resolved_u_exponent, rtol=c.tol,
                           threads=c.threads))

    return run


def _predict(c):
    U = c.resolved_U
    model = _ladder(c, c.T + U)
    return to_plain(corr.prediction_check(model, c.T, U, rtol=c.tol, threads=c.threads))


def _geometry(c):
    U = c.resolved_U
    raw_U = corr.window_length(c.T, c.epsilon, c.resolved_u_exponent)
    model = _ladder(c, c.T + max(U, raw_U))
    g = to_plain(corr.segment_geometry(model, c.T, U, c.epsilon))
    g["rho_margin"] = g["rho"] - g["rho_lower_bound"] if g["disjoint"] else -math.inf
    g["full_window"] = to_plain(corr.segment_geometry(model, c.T, raw_U, c.epsilon))
    return g


RUNNERS = {
    "zcheck": _zcheck,
    "ladder": _ladder_exp,
    "transform": _transform,
    "second_moment": _moment(2),
    "fourth_moment": _moment(4),
    "correlation6": _correlation(corr.correlation6),
    "correlation4": _correlation(corr.correlation4),
    "predict": _predict,
    "geometry": _geometry,
}


def _lookup(results, dotted):
    for part in dotted.split("."):
        results = results[part]
    return results


def check_bands(experiment, results):
    out = {}
    for name, (lo, hi) in BANDS[experiment].items():
        v = _lookup(results, name)
        ok = v is not None and lo <= v <= hi
        out[name] = {"lo": lo, "hi": hi if math.isfinite(hi) else None, "value": v,
                     "passed": ok}
    return out


def _run_one(config):
    start = time.perf_counter()
    error = None
    results, bands = {}, {}
    try:
        results = to_plain(RUNNERS[config.experiment](config))
        bands = check_bands(config.experiment, results)
    except Exception as exc:  # serialised into the report, exit 1
        error = f"{type(exc).__name__}: {exc}"
    if error is not None:
        status = "error"
    elif all(b["passed"] for b in bands.values()):
        status = "ok"
    else:
        status = "band_failure"
    return {"experiment": config.experiment, "status": status,
            "config": to_plain(config), "U": config.resolved_U, "mode": config.mode,
            "tol": config.tol, "results": results, "bands": bands, "error": error,
            "wall_time": time.perf_counter() - start}


def _fix_infinite(obj):
    if isinstance(obj, dict):
        return {k: _fix_infinite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_fix_infinite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def run_experiment(config):
    """Run, write the report to ``config.out_path`` and return the exit status."""
    validate(config)
    if config.experiment == "all":
        parts = [_run_one(dataclasses.replace(config, experiment=name))
                 for name in EXPERIMENTS if name != "all"]
        statuses = {p["status"] for p in parts}
        report = {"experiment": "all",
                  "status": "error" if "error" in statuses else
                  ("band_failure" if "band_failure" in statuses else "ok"),
                  "config": to_plain(config), "U": None, "mode": config.mode,
                  "tol": config.tol, "results": {p["experiment"]: p for p in parts},
                  "bands": {f"{p['experiment']}.{k}": b for p in parts
                            for k, b in p["bands"].items()},
                  "error": None if "error" not in statuses else "see results",
                  "wall_time": sum(p["wall_time"] for p in parts)}
    else:
        report = _run_one(config)
    report = _fix_infinite(report)
    Path(config.out_path).write_text(format_report(report, config.format))
    return {"ok": EXIT_OK, "band_failure": EXIT_BAND, "error": EXIT_ERROR}[report["status"]]


def main(argv=None):
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"zetaladder: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # argparse usage errors and --help
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    U = config.resolved_U
    echo = f"experiment={config.experiment} T={config.T!r}"
    if U is not None:
        echo += f" U={U!r}"
    print(echo + f" mode={config.mode} tol={config.tol!r}")
    status = run_experiment(config)
    print(f"status={status} report={config.out_path}")
    return status
