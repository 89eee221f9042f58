"""
Command-line front end.

Every subcommand writes one JSON document (and, where the result is a
table, a CSV file).  Without ``--out`` the JSON goes to stdout.  Exit codes:
0 all requested checks pass, 1 a check failed, 2 invalid configuration,
3 numerical failure, 4 some sweep rows failed.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    """Invalid command-line or config-file settings."""


# -- serialisation -----------------------------------------------------------------

def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits,
    non-finite values as ``null``."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {to_json(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_csv(rows: list) -> str:
    if not rows:
        return ""
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(keys)
    for r in rows:
        cells = []
        for k in keys:
            v = r.get(k)
            if v is None:
                cells.append("")
            elif isinstance(v, (bool, np.bool_)):
                cells.append("true" if v else "false")
            elif isinstance(v, (float, np.floating)):
                cells.append("" if not math.isfinite(float(v)) else format(float(v), ".17g"))
            else:
                cells.append(str(v))
        w.writerow(cells)
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- configuration ---------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    model_kind: str = "delta-nls"
    p: Optional[float] = None
    gamma: Optional[float] = None
    omega: Optional[float] = None
    omega_range: Optional[str] = None
    n_points: Optional[int] = None
    sector: Optional[str] = None
    integrator: dict = field(default_factory=dict)
    out: Optional[str] = None
    fmt: Optional[str] = None
    seed: int = 0
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        from .core import DomainError, ModelSpec

        if self.fmt not in (None, "json", "csv", "both"):
            raise ConfigError(f"--format must be json, csv or both, got {self.fmt!r}")
        if self.jobs < 1:
            raise ConfigError(f"--jobs must be at least 1, got {self.jobs}")
        if self.n_points is not None and self.n_points < 5:
            raise ConfigError(f"--n-points must be at least 5, got {self.n_points}")
        if self.model_kind not in ("delta-nls", "system-nls", "linear-interval"):
            raise ConfigError(f"unknown model kind {self.model_kind!r}")
        if self.p is not None and self.model_kind == "delta-nls" and not self.p > 1:
            raise ConfigError(f"delta-nls needs p > 1, got p={self.p}")
        if self.omega is not None and self.gamma is not None and self.model_kind != "linear-interval":
            try:
                ModelSpec(self.model_kind, 2.0 if self.p is None else self.p, self.gamma, self.omega)
            except DomainError as exc:
                raise ConfigError(str(exc)) from exc

    def as_dict(self) -> dict:
        return asdict(self)


# integrator keys accepted from flags and the [integrator] config section
_INTEGRATOR_KEYS = ("dt", "t_end", "scheme", "fp_tol", "fp_max_iter", "diag_stride", "tube_radius",
                    "post_exit", "conservation_tol", "boundary_tol")


def _coerce(value: str):
    text = value.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    return text.strip('"').strip("'")


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` sections; every key lands in one namespace,
    section names are only for grouping."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            # keys above the first section header are allowed
            parser.read_string("[top]\n" + fh.read(), source=path)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            out[key.replace("-", "_")] = _coerce(value)
    return out


def _default_jobs() -> int:
    raw = os.environ.get("NLS_STABILITY_JOBS")
    if raw is None or raw == "":
        return 1
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"NLS_STABILITY_JOBS must be an integer, got {raw!r}") from exc


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def parse_omega_range(text: str) -> np.ndarray:
    """``start:stop:count`` as an evenly spaced grid including both ends."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"--omega-range must be start:stop:count, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad --omega-range {text!r}") from exc
    if n < 1:
        raise ConfigError("--omega-range count must be positive")
    return np.linspace(a, b, n)


# -- subcommands -----------------------------------------------------------------

@dataclass
class Outcome:
    doc: dict
    rows: Optional[list] = None
    code: int = EXIT_OK


def _get(cfg: RunConfig, name: str, default):
    v = getattr(cfg, name)
    return default if v is None else v


def cmd_profile(cfg: RunConfig) -> Outcome:
    from .delta import default_grid, profile

    p, g, w = _get(cfg, "p", 3.0), _get(cfg, "gamma", 1.0), _get(cfg, "omega", -1.0)
    grid = default_grid(w, _get(cfg, "n_points", 2001))
    prof = profile(p, g, w, grid)
    if _get(cfg, "sector", "full") == "even":
        prof = prof.sector("even")
    m = prof.model
    doc = {"p": p, "gamma": g, "omega": w, "b_omega": prof.b_omega,
           "residual": prof.residual, "charge": m.charge(prof.field),
           "energy": m.energy(prof.field), "grid": prof.grid.kind,
           "n_points": prof.grid.n_points, "x": prof.grid.x, "phi": prof.field}
    rows = [{"x": x, "phi": v} for x, v in zip(prof.grid.x, prof.field)]
    return Outcome(doc, rows)


def _dcurve_row(args) -> dict:
    from .dcurve import d_derivatives

    p, g, w, n = args
    try:
        return d_derivatives(p, g, w, n_points=n).as_dict()
    except Exception as exc:  # reported per row, the sweep continues
        return {"omega": w, "error": f"{type(exc).__name__}: {exc}"}


def cmd_dcurve(cfg: RunConfig) -> Outcome:
    from .acceptance import criterion3_omegas

    p, g = _get(cfg, "p", 4.0), _get(cfg, "gamma", 1.0)
    omegas = (parse_omega_range(cfg.omega_range) if cfg.omega_range
              else criterion3_omegas(g))
    n = _get(cfg, "n_points", 4001)
    tasks = [(p, g, float(w), n) for w in omegas]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_dcurve_row, tasks))
    else:
        rows = [_dcurve_row(t) for t in tasks]
    prev = None
    for r in rows:
        if "error" in r:
            r["d2_sign"] = None
            r["sign_change"] = False
            continue
        s = int(np.sign(r["d2_identity"]))
        r["d2_sign"] = s
        r["sign_change"] = bool(prev is not None and s != prev)
        prev = s
    failed = [r for r in rows if "error" in r]
    doc = {"p": p, "gamma": g, "n_points": n, "rows": rows,
           "sign_change_rows": [r["omega"] for r in rows if r.get("sign_change")],
           "failed_rows": failed}
    return Outcome(doc, rows, EXIT_PARTIAL if failed else EXIT_OK)


def cmd_critical_omega(cfg: RunConfig) -> Outcome:
    from .dcurve import find_omega_star

    res = find_omega_star(_get(cfg, "p", 4.0), _get(cfg, "gamma", 1.0),
                          n_points=_get(cfg, "n_points", 4001))
    return Outcome(res.as_dict())


def cmd_spectrum(cfg: RunConfig) -> Outcome:
    from .delta import default_grid, profile
    from .spectral import delta_sector_operator, spectrum

    p, g, w = _get(cfg, "p", 3.0), _get(cfg, "gamma", 1.0), _get(cfg, "omega", -1.0)
    which = cfg.extra.get("operator", "L")
    if which not in ("L", "M"):
        raise ConfigError("--operator must be L or M")
    sector = _get(cfg, "sector", "even")
    if sector not in ("even", "odd", "full"):
        raise ConfigError("--sector must be even, odd or full")
    grid = default_grid(w, _get(cfg, "n_points", 2001))
    prof = profile(p, g, w, grid)
    if sector == "full":
        m = prof.model
        op = m.operator_L(w, prof.field) if which == "L" else m.operator_M(w, prof.field)
    else:
        m, op = delta_sector_operator(p, g, w, prof.field, grid, sector, which)
    rep = spectrum(op, m.mass, sector, int(cfg.extra.get("k", 4)))
    doc = {"p": p, "gamma": g, "omega": w, "operator": which, **rep.as_dict()}
    rows = [{"index": i, "eigenvalue": v} for i, v in enumerate(rep.eigenvalues)]
    return Outcome(doc, rows)


PIPELINES = ("negative-slope", "odd-mode", "critical-slope")


def cmd_conditions(cfg: RunConfig) -> Outcome:
    from . import spectral

    name = cfg.extra.get("pipeline", "negative-slope")
    fns = {"negative-slope": spectral.negative_slope_pipeline,
           "odd-mode": spectral.odd_mode_pipeline,
           "critical-slope": spectral.critical_slope_pipeline}
    if name not in fns:
        raise ConfigError(f"--pipeline must be one of {PIPELINES}")
    kwargs = {k: getattr(cfg, k) for k in ("p", "gamma", "omega", "n_points")
              if getattr(cfg, k) is not None}
    res = fns[name](**kwargs)
    rows = [{"condition": r.condition, "holds": r.holds,
             **{k: float(v) for k, v in r.scalars.items()}} for r in res.reports]
    return Outcome(res.as_dict(), rows, EXIT_OK if res.all_pass else EXIT_CHECK)


def _scenario(cfg: RunConfig):
    from . import scenarios

    amp = float(cfg.extra.get("amplitude", 1e-3))
    setting = cfg.extra.get("setting")
    if setting == "stability":
        return scenarios.stability_scenario(_get(cfg, "n_points", 2001), amp)
    if setting in scenarios.INSTABILITY_SETTINGS:
        return scenarios.instability_scenario(setting, _get(cfg, "n_points", 2001), amp)
    if setting is not None:
        raise ConfigError(f"unknown --setting {setting!r}")
    if cfg.model_kind == "system-nls":
        return scenarios.semitrivial_scenario(_get(cfg, "gamma", 0.5), _get(cfg, "omega", -1.0),
                                              _get(cfg, "n_points", 1000), amp)
    if cfg.model_kind == "linear-interval":
        from .linear import BOUND_MODE, OMEGA, LinearInterval, default_grid, sine_mode

        m = LinearInterval(default_grid(_get(cfg, "n_points", 127)))
        phi = sine_mode(BOUND_MODE, m.grid.x).astype(complex)
        d = scenarios.random_direction(m, cfg.seed, envelope=False)
        u0 = scenarios.perturb(m, OMEGA, phi, d, amp)
        return scenarios.Scenario("linear", m, OMEGA, phi, None, u0, amp, {})
    direction = cfg.extra.get("direction", "psi")
    p, g, w = _get(cfg, "p", 2.0), _get(cfg, "gamma", 1.0), _get(cfg, "omega", -2.0)
    sector = _get(cfg, "sector", "full" if direction == "chi1" else "even")
    model, phi, d, psi = scenarios.delta_direction(direction, p, g, w, _get(cfg, "n_points", 2001),
                                                   sector, cfg.seed)
    u0 = scenarios.perturb(model, w, phi, d, amp, bool(cfg.extra.get("charge_preserving", False)))
    return scenarios.Scenario(f"delta-{direction}", model, w, phi, psi, u0, amp, {})


def cmd_simulate(cfg: RunConfig) -> Outcome:
    from .dynamics import IntegratorConfig, evolve

    sc = _scenario(cfg)
    opts = dict(cfg.integrator)
    if cfg.extra.get("setting") in PIPELINES:
        # the witness runs stop at tube exit; what follows may be collapse
        opts.setdefault("post_exit", 0.0)
    if cfg.model_kind == "linear-interval":
        # the interval ends are physical walls, not a truncation
        opts.setdefault("boundary_tol", None)
    try:
        icfg = IntegratorConfig(**opts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    _, diag = evolve(sc.model, sc.u0, icfg, sc.omega, sc.phi, sc.psi)
    doc = {"scenario": sc.name, "omega": sc.omega, "amplitude": sc.amplitude,
           "integrator": asdict(icfg), **diag.summary()}
    return Outcome(doc, diag.rows(), EXIT_OK if diag.valid else EXIT_CHECK)


def cmd_system(cfg: RunConfig) -> Outcome:
    from . import acceptance
    from .system import classify_La, coefficients, ground_state, operators_RI
    from .system import check_instability_conditions, semitrivial_degeneracy

    w = _get(cfg, "omega", -1.0)
    dim = int(cfg.extra.get("dimension", 1))
    n = _get(cfg, "n_points", 1000)
    gammas = _float_list(cfg.extra.get("gammas", "0.25,0.5,0.75"))
    bad = [g for g in gammas if not 0.0 < g < 1.0]
    if bad:
        raise ConfigError(f"--gammas must lie in (0, 1), got {bad}")
    ok1, d1, _ = acceptance.coefficient_identities()
    ok2, d2, _ = acceptance.regime_bounds()
    ground = ground_state(w, dim, n_points=n)
    la = [classify_La(w, dim, a, ground=ground) for a in (0.5, 1.0, 1.5, 2.0)]
    per_gamma, rows, ok = [], [], ok1 and ok2 and all(r.holds for r in la)
    for g in gammas:
        c = coefficients(g)
        ri = operators_RI(g, w, dim, n_points=n)
        reps = check_instability_conditions(g, w, dim, n_points=n)
        good = max(ri.residual_R, ri.residual_I) < 1e-10 and all(r.holds for r in reps)
        ok = ok and good
        per_gamma.append({**c.as_dict(), "a_real": c.a_real, "a_imag": c.a_imag,
                          "residual_R": ri.residual_R, "residual_I": ri.residual_I,
                          "conditions": [r.as_dict() for r in reps]})
        rows.append({**c.as_dict(), "a_real": c.a_real, "a_imag": c.a_imag,
                     "residual_R": ri.residual_R, "residual_I": ri.residual_I,
                     "all_conditions": all(r.holds for r in reps)})
    degenerate = semitrivial_degeneracy(w, dim, n_points=n)
    ok = ok and all(r.holds for r in degenerate)
    doc = {"omega": w, "dimension": dim, "coefficient_identities": d1, "regime_bounds": d2,
           "La": [r.as_dict() for r in la], "bound_states": per_gamma,
           "gamma_1_semitrivial": [r.as_dict() for r in degenerate], "all_pass": bool(ok)}
    return Outcome(doc, rows, EXIT_OK if ok else EXIT_CHECK)


def cmd_linear_demo(cfg: RunConfig) -> Outcome:
    from .linear import check_counterexample, perturbation_study

    n_max = int(cfg.extra.get("n_max", 64))
    reps = check_counterexample(n_max)
    size = float(cfg.extra.get("amplitude", 1e-2))
    study = perturbation_study(int(cfg.extra.get("trials", 50)), size,
                               float(cfg.integrator.get("t_end", 100.0)), n_max=n_max, seed=cfg.seed)
    by = {r.condition: r.holds for r in reps}
    ok = (by["A1"] and by["A2a"] and not by["A3"] and by["A3+Jpsi"] and by["grid_consistency"]
          and study["max_tube_distance"] < 3 * size)
    rows = [{"condition": r.condition, "holds": r.holds,
             **{k: float(v) for k, v in r.scalars.items()}} for r in reps]
    doc = {"reports": [r.as_dict() for r in reps], "perturbation_study": study,
           "all_pass": bool(ok)}
    return Outcome(doc, rows, EXIT_OK if ok else EXIT_CHECK)


def cmd_verify_all(cfg: RunConfig) -> Outcome:
    from .acceptance import run_all

    only = cfg.extra.get("only")
    numbers = None if not only else [int(v) for v in _float_list(only)]
    results = run_all(numbers, report=lambda line: print(line, file=sys.stderr, flush=True))
    ok = all(r.ok for r in results)
    rows = [{"criterion": r.number, "title": r.title, "passed": r.ok,
             "runtime": r.runtime, "budget": r.budget} for r in results]
    doc = {"criteria": [r.as_dict() for r in results], "all_pass": bool(ok)}
    return Outcome(doc, rows, EXIT_OK if ok else EXIT_CHECK)


COMMANDS = {
    "profile": cmd_profile,
    "dcurve": cmd_dcurve,
    "critical-omega": cmd_critical_omega,
    "spectrum": cmd_spectrum,
    "conditions": cmd_conditions,
    "simulate": cmd_simulate,
    "system": cmd_system,
    "linear-demo": cmd_linear_demo,
    "verify-all": cmd_verify_all,
}


# -- argument parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file; flags override it")
    common.add_argument("--out", help="output directory (default: JSON to stdout)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "both"))
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes (default $NLS_STABILITY_JOBS or 1)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--p", type=float)
    model.add_argument("--gamma", type=float)
    model.add_argument("--omega", type=float)
    model.add_argument("--n-points", type=int)

    integ = argparse.ArgumentParser(add_help=False)
    integ.add_argument("--dt", type=float)
    integ.add_argument("--scheme", choices=("crank-nicolson-fixed-point", "strang-splitting"))
    integ.add_argument("--t-end", type=float)
    integ.add_argument("--fp-tol", type=float)
    integ.add_argument("--fp-max-iter", type=int)
    integ.add_argument("--diag-stride", type=int)
    integ.add_argument("--tube-radius", type=float)
    integ.add_argument("--post-exit", type=float)
    integ.add_argument("--boundary-tol", type=float)

    parser = argparse.ArgumentParser(prog="nls-stability", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("profile", parents=[common, model], help="bound state samples").add_argument(
        "--sector", choices=("full", "even"))
    d = sub.add_parser("dcurve", parents=[common, model], help="d and its derivatives over omega")
    d.add_argument("--omega-range", help="start:stop:count")
    sub.add_parser("critical-omega", parents=[common, model], help="zero of d''")
    s = sub.add_parser("spectrum", parents=[common, model], help="lowest eigenvalues of L or M")
    s.add_argument("--operator", choices=("L", "M"))
    s.add_argument("--sector", choices=("even", "odd", "full"))
    s.add_argument("--k", type=int)
    c = sub.add_parser("conditions", parents=[common, model], help="condition pipelines")
    c.add_argument("--pipeline", choices=PIPELINES)
    m = sub.add_parser("simulate", parents=[common, model, integ], help="time evolution")
    m.add_argument("--model", dest="model_kind", choices=("delta-nls", "system-nls", "linear-interval"))
    m.add_argument("--setting", choices=("stability",) + PIPELINES)
    m.add_argument("--direction", choices=("psi", "chi1", "phi-prime", "random"))
    m.add_argument("--amplitude", type=float)
    m.add_argument("--sector", choices=("even", "full"))
    m.add_argument("--charge-preserving", action="store_true", default=None)
    y = sub.add_parser("system", parents=[common, model], help="two-component model suite")
    y.add_argument("--dimension", type=int, choices=(1, 2, 3))
    y.add_argument("--gammas", help="comma-separated coupling values in (0, 1)")
    ld = sub.add_parser("linear-demo", parents=[common, integ], help="exact linear counterexample")
    ld.add_argument("--n-max", type=int)
    ld.add_argument("--trials", type=int)
    ld.add_argument("--amplitude", type=float)
    v = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    return parser


_FIELDS = ("p", "gamma", "omega", "omega_range", "n_points", "sector", "out", "fmt", "seed",
           "jobs", "model_kind")


def make_config(args: argparse.Namespace) -> RunConfig:
    values = dict(vars(args))
    if values.get("config"):
        for k, v in read_config_file(values["config"]).items():
            if values.get(k) is None:
                values[k] = v
    cfg = RunConfig(values["command"])
    for k in _FIELDS:
        if values.get(k) is not None:
            setattr(cfg, k, values[k])
    if values.get("jobs") is None:
        cfg.jobs = _default_jobs()
    for k in _INTEGRATOR_KEYS:
        if values.get(k) is not None:
            cfg.integrator[k] = values[k]
    skip = set(_FIELDS) | set(_INTEGRATOR_KEYS) | {"command", "config"}
    cfg.extra = {k: v for k, v in values.items() if k not in skip and v is not None}
    try:
        cfg.n_points = None if cfg.n_points is None else int(cfg.n_points)
        cfg.seed = int(cfg.seed)
        cfg.jobs = int(cfg.jobs)
        for k in ("p", "gamma", "omega"):
            if getattr(cfg, k) is not None:
                setattr(cfg, k, float(getattr(cfg, k)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    _apply_defaults(cfg)
    cfg.validate()
    return cfg


_PIPELINE_POINTS = {"negative-slope": (6.0, 1.0, -2.0), "odd-mode": (2.0, 1.0, -2.0),
                    "critical-slope": (4.0, 1.0, None)}


def _apply_defaults(cfg: RunConfig) -> None:
    """Fill model parameters that the chosen command would otherwise default,
    so that they are validated up front and echoed in the output."""
    if cfg.command in ("profile", "spectrum"):
        point = (3.0, 1.0, -1.0)
    elif cfg.command in ("dcurve", "critical-omega"):
        point = (4.0, 1.0, None)
    elif cfg.command == "conditions":
        name = cfg.extra.get("pipeline", "negative-slope")
        if name not in _PIPELINE_POINTS:
            raise ConfigError(f"--pipeline must be one of {PIPELINES}")
        cfg.extra["pipeline"] = name
        point = _PIPELINE_POINTS[name]
    elif cfg.command == "simulate" and cfg.extra.get("setting") is None:
        if cfg.model_kind == "delta-nls":
            point = (2.0, 1.0, -2.0)
        elif cfg.model_kind == "system-nls":
            point = (None, 0.5, -1.0)
        else:
            return
    else:
        return
    for name, value in zip(("p", "gamma", "omega"), point):
        if getattr(cfg, name) is None and value is not None:
            setattr(cfg, name, value)


def _numerical_errors() -> tuple:
    from .core import DomainError, GridMismatchError
    from .dcurve import NotFoundError
    from .dynamics import BlowUpError, BoundaryError, InsufficientDataError, IntegratorError
    from .lyapunov import AlignmentSingularError, TubeExitError
    from .spectral import ConstraintError
    from .system import ShootingError

    return (DomainError, GridMismatchError, NotFoundError, BlowUpError, BoundaryError,
            InsufficientDataError, IntegratorError, AlignmentSingularError, TubeExitError,
            ConstraintError, ShootingError, np.linalg.LinAlgError, FloatingPointError,
            ArithmeticError, RuntimeError)


def emit(cfg: RunConfig, out: Outcome) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command,
           "config": cfg.as_dict(), "exit_code": out.code, **out.doc}
    text = to_json(doc) + "\n"
    stem = cfg.command.replace("-", "_")
    if cfg.out is None:
        if cfg.fmt == "csv" and out.rows is not None:
            sys.stdout.write(to_csv(out.rows))
        else:
            sys.stdout.write(text)
        return
    fmt = cfg.fmt or "both"
    if fmt in ("json", "both") or out.rows is None:
        write_atomic(os.path.join(cfg.out, stem + ".json"), text)
    if fmt in ("csv", "both") and out.rows is not None:
        write_atomic(os.path.join(cfg.out, stem + ".csv"), to_csv(out.rows))


def _attach_negative_values(argv):
    """Glue ``--flag -1`` into ``--flag=-1`` for options taking numbers or
    ranges, which argparse would otherwise read as a new option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _NEGATIVE_OK:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}" if nxt.startswith("-") else tok)
                if not nxt.startswith("-"):
                    out.append(nxt)
        else:
            out.append(tok)
    return out


_NEGATIVE_OK = ("--omega", "--omega-range", "--gamma")


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = make_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _numerical_errors() as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit(cfg, out)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
