"""Batch command-line front end.

Every run is described by a JSON config file validated against a per-command
schema (unknown keys are rejected).  Results are written as CSV (17
significant digits, CRLF line ends) or as a JSON report carrying
``schema_version`` and the fully resolved config.

Exit codes: 0 success, 2 configuration/domain error, 3 numerical failure.
Errors and warnings go to stderr as one JSON object per line.

Usage::

    udw evolve --config run.json --output trajectory.csv
    udw sweep --config sweep.json --threads 4
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np

from . import __version__, gzk, landauer, observables
from .coefficients import coefficient_grid, default_window
from .correlators import BathParams, DetectorParams, spectral_sum
from .errors import DomainError, NumericalError, UdwError
from .evolution import STEP_LIMIT, evolve
from .serialization import SCHEMA_VERSION, dumps_report, format_csv
from .switching import (SwitchingProfile, heating_profile, read_profile_csv, time_scale,
                        window_diagnostics)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

logger = logging.getLogger("udw")


class ConfigError(Exception):
    """Invalid configuration (exit code 2)."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


# ----------------------------------------------------------------------------
# Schemas
# ----------------------------------------------------------------------------

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_PROB = {"type": "number", "minimum": 0, "maximum": 1}
_NUM = {"type": "number"}


def _obj(properties: dict, required=()) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": properties,
            "required": list(required)}


_BETA = {"oneOf": [_POS, {"type": "string", "enum": ["inf"]}]}
_DETECTOR = _obj({"omega": _POS, "gbar": _NONNEG, "tau_s": _POS})
_BATH = _obj({"beta": _BETA})
_PROFILE_KINDS = ["gaussian", "lorentz", "exponential", "tanh_window", "tanh_switch_off", "constant_on",
                  "tabulated"]
_PROFILE = _obj({"kind": {"enum": _PROFILE_KINDS},
                 "params": _obj({"tau0": _POS, "tau_bar": _NUM, "tau1": _NUM, "tau2": _NUM, "lam": _POS,
                                 "path": {"type": "string"}})}, required=["kind"])
_GRID = _obj({"t0": _NUM, "t1": _NUM, "n": {"type": "integer", "minimum": 2}}, required=["t0", "t1", "n"])
_OUTPUT = _obj({"format": {"enum": ["csv", "json"]}, "path": {"type": "string"}})

SCHEMAS = {
    "evolve": _obj({"detector": _DETECTOR, "bath": _BATH, "profile": _PROFILE, "grid": _GRID,
                    "p_initial": _PROB, "output": _OUTPUT}, required=["profile"]),
    "profiles": _obj({"profile": _PROFILE, "output": _OUTPUT}, required=["profile"]),
    "thermometry": _obj({"detector": _DETECTOR, "bath": _BATH, "profile": _PROFILE,
                         "points_per_width": {"type": "integer", "minimum": 4}, "output": _OUTPUT},
                        required=["bath", "profile"]),
    "switchoff": _obj({"detector": _DETECTOR, "bath": _BATH,
                       "switchoff": _obj({"lam": _POS, "p_initial": _PROB}, required=["lam"]),
                       "output": _OUTPUT}, required=["switchoff"]),
    "landauer": _obj({"points": {"type": "array",
                                 "items": _obj({"beta": _POS, "omega": _POS, "p_initial": _PROB,
                                                "p_final": _PROB}, required=["beta", "omega"])},
                      "output": _OUTPUT}, required=["points"]),
    "gzk": _obj({"scenario": _obj({"mass_MeV": _POS, "energy_eV": _POS, "temperature_K": _POS,
                                   "levels": {"type": "array", "minItems": 1,
                                              "items": _obj({"gbar": _NONNEG, "omega_MeV": _POS},
                                                            required=["gbar", "omega_MeV"])},
                                   "length_Mpc": _POS, "time_s": _POS}),
                 "p_target": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                 "output": _OUTPUT}),
    "heating": _obj({"heating": _obj({"bar_beta": _POS, "omega_max": _POS,
                                      "n_omega": {"type": "integer", "minimum": 16},
                                      "tau_max": _POS, "n_tau": {"type": "integer", "minimum": 8}},
                                     required=["bar_beta"]),
                     "output": _OUTPUT}, required=["heating"]),
}
SWEEP_TARGETS = ["evolve", "profiles", "thermometry", "switchoff", "landauer", "gzk"]
SCHEMAS["sweep"] = _obj({"sweep": _obj({"target": {"enum": SWEEP_TARGETS},
                                        "parameter": {"type": "string", "minLength": 1},
                                        "values": {"type": "array"},
                                        "base": {"type": "object"}},
                                       required=["target", "parameter", "values"]),
                         "output": _OUTPUT}, required=["sweep"])

DEFAULTS = {
    "detector": {"omega": 1.0, "gbar": 1.0, "tau_s": 0.1},
    "bath": {"beta": "inf"},
    "gzk": {"mass_MeV": 938.3, "temperature_K": 3.0, "levels": [{"gbar": 1.0, "omega_MeV": 145.0}]},
}
DEFAULT_FORMAT = {"evolve": "csv", "sweep": "csv", "landauer": "csv", "heating": "csv",
                  "profiles": "json", "thermometry": "json", "switchoff": "json", "gzk": "json"}


def validate(command: str, config) -> None:
    """Validate ``config`` against the schema of ``command``; raises :class:`ConfigError`."""
    try:
        jsonschema.validate(config, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(exc.message, where) from None


# ----------------------------------------------------------------------------
# Config -> domain objects
# ----------------------------------------------------------------------------


def _detector(cfg: dict) -> DetectorParams:
    d = {**DEFAULTS["detector"], **cfg.get("detector", {})}
    cfg["detector"] = d
    return DetectorParams(d["omega"], d["gbar"], d["tau_s"])


def _bath(cfg: dict) -> BathParams:
    b = {**DEFAULTS["bath"], **cfg.get("bath", {})}
    cfg["bath"] = b
    return BathParams(math.inf if b["beta"] == "inf" else b["beta"])


def _need(params: dict, kind: str, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise ConfigError(f"profile kind '{kind}' needs params {missing}", "profile/params")


def build_profile(block: dict) -> SwitchingProfile:
    """Construct a profile from its config block."""
    kind = block["kind"]
    p = block.get("params", {})
    tau_bar = p.get("tau_bar", 0.0)
    if kind in ("gaussian", "lorentz", "exponential"):
        _need(p, kind, "tau0")
        return getattr(SwitchingProfile, kind)(p["tau0"], tau_bar)
    if kind == "tanh_window":
        _need(p, kind, "tau1", "tau2", "lam")
        return SwitchingProfile.tanh_window(p["tau1"], p["tau2"], p["lam"])
    if kind == "tanh_switch_off":
        _need(p, kind, "lam")
        return SwitchingProfile.tanh_switch_off(p["lam"], tau_bar)
    if kind == "tabulated":
        _need(p, kind, "path")
        try:
            return read_profile_csv(p["path"])
        except OSError as exc:
            raise ConfigError(f"cannot read profile table: {exc}", "profile/params/path") from None
    return SwitchingProfile.constant_on()


def _auto_grid(profile, bath, det) -> tuple[float, float, int]:
    t0, t1 = default_window(profile)
    n0 = max(201, int(math.ceil((t1 - t0) / (time_scale(profile) / 20.0))) + 1)
    peak = det.gbar * float(spectral_sum(det.omega, bath))
    n = max(n0, int(math.ceil((t1 - t0) * peak / (0.5 * STEP_LIMIT))) + 1)
    return t0, t1, n


def run_evolve(cfg: dict) -> dict:
    det, bath = _detector(cfg), _bath(cfg)
    profile = build_profile(cfg["profile"])
    if "grid" in cfg:
        g = cfg["grid"]
        t0, t1, n = g["t0"], g["t1"], g["n"]
    else:
        t0, t1, n = _auto_grid(profile, bath, det)
        cfg["grid"] = {"t0": t0, "t1": t1, "n": n}
    cfg.setdefault("p_initial", 0.0)
    grid = coefficient_grid(profile, bath, det, t0, t1, n)
    traj = evolve(grid, cfg["p_initial"], det)
    return {"trajectory": traj,
            "summary": {"p_final": traj.p_final, "memory_final": float(traj.memory[-1]),
                        "beta_star_final": float(traj.beta_star[-1]), "clamp_events": traj.clamp_events}}


def run_profiles(cfg: dict) -> dict:
    diag = window_diagnostics(build_profile(cfg["profile"]))
    return {"summary": diag.to_dict()}


def run_thermometry(cfg: dict) -> dict:
    det, bath = _detector(cfg), _bath(cfg)
    cfg.setdefault("points_per_width", 40)
    rep = observables.thermometry(build_profile(cfg["profile"]), bath, det,
                                  points_per_width=cfg["points_per_width"])
    return {"summary": rep.to_dict()}


def run_switchoff(cfg: dict) -> dict:
    det, bath = _detector(cfg), _bath(cfg)
    block = cfg["switchoff"]
    rep = observables.switch_off_shift(block["lam"], bath, det, block.get("p_initial"))
    block.setdefault("p_initial", rep.p_initial)
    return {"summary": rep.to_dict()}


LANDAUER_COLUMNS = ["beta", "omega", "p_initial", "p_final", "beta0", "beta_star", "bound", "beta_bar_star",
                    "p_crit", "p_crit_exact", "tau_eff_crit"]


def run_landauer(cfg: dict) -> dict:
    rows = []
    for point in cfg["points"]:
        rep = landauer.landauer_report(point["beta"], point["omega"], point.get("p_initial", 0.0),
                                       point.get("p_final"))
        point.setdefault("p_initial", 0.0)
        point.setdefault("p_final", landauer.occupation(rep.beta_star, rep.omega))
        d = rep.to_dict()
        d.update(p_initial=point["p_initial"], p_final=point["p_final"])
        rows.append(d)
    summary = rows[0] if len(rows) == 1 else {}
    return {"rows": rows, "columns": LANDAUER_COLUMNS, "summary": summary}


def run_gzk(cfg: dict) -> dict:
    s = {**DEFAULTS["gzk"], **cfg.get("scenario", {})}
    if "length_Mpc" in s and "time_s" in s:
        raise ConfigError("give either length_Mpc or time_s", "scenario")
    levels = tuple(gzk.ResonanceLevel(lv["gbar"], lv["omega_MeV"] * gzk.MEV) for lv in s["levels"])
    mass = s["mass_MeV"] * gzk.MEV
    e_thr = min(lv.omega_n for lv in levels)
    e_crit = gzk.critical_energy(mass, e_thr, s["temperature_K"])
    s.setdefault("energy_eV", e_crit)
    cfg["scenario"] = s
    cfg.setdefault("p_target", 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        sc = gzk.GzkScenario(mass, s["energy_eV"], s["temperature_K"], levels, s.get("time_s"),
                             s.get("length_Mpc"))
    summary = {"gamma": sc.gamma, "gamma_crit": gzk.critical_gamma(e_thr, s["temperature_K"]),
               "e_crit_eV": e_crit, "rate_per_s": gzk.rate(sc),
               "horizon_Mpc": gzk.horizon_length(sc, cfg["p_target"]),
               "probability": gzk.excitation_probability(sc) if ("time_s" in s or "length_Mpc" in s)
               else None}
    return {"summary": summary}


def run_heating(cfg: dict) -> dict:
    h = cfg["heating"]
    bb = h["bar_beta"]
    h.setdefault("omega_max", 60.0 / bb)
    h.setdefault("n_omega", 6001)
    w = np.linspace(-h["omega_max"], h["omega_max"], h["n_omega"])
    tau_grid = None
    if "tau_max" in h or "n_tau" in h:
        h.setdefault("tau_max", 20.0 * bb)
        h.setdefault("n_tau", 2 * int(math.ceil(h["tau_max"] / (bb / 40))) + 1)
        tau_grid = np.linspace(-h["tau_max"], h["tau_max"], h["n_tau"])
    res = heating_profile(bb, w, tau_grid)
    prof = res.profile
    return {"rows": [{"tau": t, "chi": c} for t, c in zip(prof.table_tau, prof.table_chi)],
            "columns": ["tau", "chi"], "summary": res.to_dict()}


RUNNERS = {"evolve": run_evolve, "profiles": run_profiles, "thermometry": run_thermometry,
           "switchoff": run_switchoff, "landauer": run_landauer, "gzk": run_gzk, "heating": run_heating}

SWEEP_COLUMNS = {
    "evolve": ["p_final", "memory_final", "beta_star_final"],
    "profiles": ["tau_m", "tau_eff", "ratio"],
    "thermometry": ["xi_exact", "xi_expansion", "t_star", "kappa", "entropy_shift", "tau_eff"],
    "switchoff": ["i_beta", "i_p", "zeta_r", "bracket", "delta_p", "asymptotic_rhs", "p_final"],
    "landauer": ["bound", "beta_bar_star", "p_crit", "p_crit_exact", "tau_eff_crit"],
    "gzk": ["gamma", "e_crit_eV", "rate_per_s", "horizon_Mpc", "probability"],
}


# ----------------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------------


def set_path(cfg: dict, path: str, value) -> None:
    """Set a dotted path (integer segments index lists), creating objects as needed."""
    parts = path.split(".")
    node = cfg
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise ConfigError(f"bad list index '{part}' in sweep parameter '{path}'", "sweep/parameter")
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif isinstance(node, dict):
            if last:
                node[part] = value
            else:
                node = node.setdefault(part, {})
        else:
            raise ConfigError(f"sweep parameter '{path}' does not address an object", "sweep/parameter")


def _error_text(exc: BaseException) -> str:
    where = ""
    if isinstance(exc, UdwError) and exc.module:
        where = f" [{exc.module}.{exc.op}]"
    return f"{type(exc).__name__}{where}: {exc}"


def _sweep_row(target: str, base: dict, parameter: str, value) -> list:
    columns = SWEEP_COLUMNS[target]
    cfg = copy.deepcopy(base)
    try:
        set_path(cfg, parameter, value)
        validate(target, cfg)
        result = RUNNERS[target](cfg)
        summary = result["summary"]
        return [value] + [summary.get(c) for c in columns] + [""]
    except (ConfigError, UdwError, ValueError, ArithmeticError, OSError) as exc:
        return [value] + [None] * len(columns) + [_error_text(exc)]


def run_sweep(cfg: dict, threads: int = 1) -> dict:
    block = cfg["sweep"]
    target = block["target"]
    base = block.setdefault("base", {})
    base.pop("output", None)
    columns = [block["parameter"]] + SWEEP_COLUMNS[target] + ["error"]
    values = block["values"]
    # warning filters are process-global, so rows run with warnings silenced;
    # failures are reported per row in the error column instead
    with warnings.catch_warnings(), ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        warnings.simplefilter("ignore")
        rows = list(pool.map(lambda v: _sweep_row(target, base, block["parameter"], v), values))
    return {"rows": [dict(zip(columns, r)) for r in rows], "columns": columns, "summary": {}}


# ----------------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------------


def render(command: str, cfg: dict, result: dict, fmt: str) -> str:
    """Render a command result as CSV or JSON text."""
    if fmt == "json":
        payload = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
                   "config": cfg, "result": result.get("summary", {})}
        if "rows" in result:
            payload["columns"] = result["columns"]
            payload["rows"] = [[row.get(c) for c in result["columns"]] for row in result["rows"]]
        if "trajectory" in result:
            traj = result["trajectory"]
            payload["trajectory"] = {"t": traj.t_grid, "chi": traj.chi, "c_plus": traj.c_plus,
                                     "c_minus": traj.c_minus, "p": traj.p, "memory": traj.memory,
                                     "beta_star": traj.beta_star}
        return dumps_report(payload)
    if "trajectory" in result:
        return result["trajectory"].to_csv()
    if "rows" in result:
        cols = result["columns"]
        return format_csv(cols, ([row.get(c) for c in cols] for row in result["rows"]))
    summary = result["summary"]
    cols = sorted(summary)
    return format_csv(cols, [[summary[c] for c in cols]])


# ----------------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------------


def _emit(obj: dict) -> None:
    sys.stderr.write(json.dumps(obj, sort_keys=True, default=str) + "\n")


class _JsonLogHandler(logging.Handler):
    def emit(self, record):
        _emit({"level": record.levelname.lower(), "logger": record.name, "message": record.getMessage()})


def _show_warning(message, category, filename, lineno, file=None, line=None):
    _emit({"level": "warning", "category": category.__name__, "message": str(message)})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udw", description="Finite-time detector laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ["evolve", "sweep", "profiles", "thermometry", "switchoff", "landauer", "gzk", "heating"]:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", required=True, help="JSON config file ('-' for stdin)")
        p.add_argument("--output", help="output file (overrides output.path; default stdout)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sweeps (default $UDW_THREADS or 1)")
        p.add_argument("--quiet", action="store_true", help="suppress warnings and log messages")
    return parser


def _threads(arg) -> int:
    if arg is not None:
        value = arg
    else:
        env = os.environ.get("UDW_THREADS", "1")
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"UDW_THREADS must be an integer, got {env!r}", "UDW_THREADS") from None
    if value < 1:
        raise ConfigError("thread count must be >= 1", "threads")
    return value


def _load_config(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "--config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "--config") from None


def execute(command: str, config: dict, threads: int = 1) -> tuple[dict, dict]:
    """Validate and run ``command``; returns ``(resolved_config, result)``."""
    validate(command, config)
    cfg = copy.deepcopy(config)
    if command == "sweep":
        result = run_sweep(cfg, threads)
    else:
        result = RUNNERS[command](cfg)
    return cfg, result


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    root = logging.getLogger("udw")
    handler = _JsonLogHandler()
    root.handlers = [handler]
    root.propagate = False
    root.setLevel(logging.ERROR if args.quiet else logging.WARNING)
    old_show = warnings.showwarning
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if args.quiet else "default")
            warnings.showwarning = _show_warning
            threads = _threads(args.threads)
            config = _load_config(args.config)
            cfg, result = execute(args.command, config, threads)
            out = cfg.get("output", {})
            fmt = out.get("format", DEFAULT_FORMAT[args.command])
            out.setdefault("format", fmt)
            text = render(args.command, cfg, result, fmt)
            path = args.output or out.get("path")
            if path:
                try:
                    with open(path, "w", newline="") as fh:
                        fh.write(text)
                except OSError as exc:
                    raise ConfigError(f"cannot write output: {exc}", "--output") from None
            else:
                sys.stdout.write(text)
        return EXIT_OK
    except ConfigError as exc:
        _emit({"level": "error", "error": "ConfigError", "message": str(exc), "path": exc.path,
               "exit_code": EXIT_CONFIG})
        return EXIT_CONFIG
    except DomainError as exc:
        _emit({"level": "error", "error": type(exc).__name__, "message": str(exc), "module": exc.module,
               "op": exc.op, "exit_code": EXIT_CONFIG})
        return EXIT_CONFIG
    except NumericalError as exc:
        _emit({"level": "error", "error": type(exc).__name__, "message": str(exc), "module": exc.module,
               "op": exc.op, "exit_code": EXIT_NUMERIC})
        return EXIT_NUMERIC
    except (ArithmeticError, FloatingPointError, ValueError) as exc:
        _emit({"level": "error", "error": type(exc).__name__, "message": str(exc), "exit_code": EXIT_NUMERIC})
        return EXIT_NUMERIC
    finally:
        warnings.showwarning = old_show


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
