"""Command-line front end: ``cp2w eval|verify|scan|optimize``.

Configuration is a flat ``key = value`` text file (``--config``) overridden
by ``key=value`` arguments on the command line; see README for the keys.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration,
3 numerical failure, 4 optimiser did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError, ImmersionError, NumericalDegeneracyError
from .invariants import INTEGER_VALUED, build_grid, default_grid, invariant_report
from .optimize import DEFAULT_STARTS, minimise_flat_torus
from .suites import SUITES, ZOO, Check, Context, close, label, run_suite
from .zoo import FAMILIES, FamilySpec, make_surface

CONFIG_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_NOCONV = 0, 1, 2, 3, 4

ALIASES = {
    "line": "complex_line",
    "cp1": "complex_line",
    "phi": "phi_ab",
    "rp2": "totally_geodesic_rp2",
    "torus": "flat_torus",
    "flat-torus": "flat_torus",
    "complex-line": "complex_line",
}
FAMILY_PARAMS = {
    "whitney": ("t",),
    "phi_ab": ("a", "b"),
    "psi": ("a", "b"),
    "flat_torus": ("r1", "r2", "r3"),
}
COMPLEX_PARAMS = ("a", "b")
KNOWN_KEYS = {
    "version",
    "surface",
    "t",
    "a",
    "b",
    "r1",
    "r2",
    "r3",
    "grid",
    "format",
    "out",
    "seed",
    "suite",
    "samples",
    "param",
    "values",
    "start",
    "maxiter",
    "simplex_size",
    "xatol",
    "fatol",
}
INVARIANT_KEYS = ("area", "W", "Wplus", "Wminus", "degree_d", "chi", "chi_perp", "adjunction")
EXPECTED_KEYS = {"Wminus": "Wminus", "Wplus": "Wplus", "W": "W", "area": "area", "degree_d": "degree", "chi": "chi", "chi_perp": "chi_perp"}


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    surface: Optional[FamilySpec] = None
    grid: Optional[tuple] = None
    fmt: str = "text"
    out: Optional[str] = None
    seed: int = 0
    suite: str = "all"
    samples: int = 6
    param: Optional[str] = None
    values: list = field(default_factory=list)
    starts: tuple = DEFAULT_STARTS
    maxiter: int = 400
    simplex_size: float = 0.5
    xatol: float = 1e-10
    fatol: float = 1e-13


def parse_kv_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value, got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"config line {n}: empty key")
        out[k] = v
    return out


def parse_overrides(tokens) -> dict:
    out = {}
    for tok in tokens:
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k.strip()] = v.strip()
        else:
            # a bare word names the surface (``cp2w eval whitney t=1``)
            out["surface"] = tok
    return out


def parse_complex(v: str) -> complex:
    try:
        return complex(v.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse complex number {v!r}") from None


def parse_float(k: str, v: str) -> float:
    try:
        x = float(v)
    except ValueError:
        raise ConfigError(f"{k}: cannot parse number {v!r}") from None
    if not np.isfinite(x):
        raise ConfigError(f"{k}: must be finite")
    return x


def parse_int(k: str, v: str) -> int:
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"{k}: expected an integer, got {v!r}") from None


def parse_grid(v: str) -> tuple:
    parts = v.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"grid must look like NxM, got {v!r}")
    n, m = (parse_int("grid", p) for p in parts)
    if n < 8 or m < 8:
        raise ConfigError("grid resolutions must be at least 8")
    return n, m


def family_name(v: str) -> str:
    name = ALIASES.get(v.lower(), v.lower())
    if name not in FAMILIES:
        raise ConfigError(f"unknown surface {v!r}; expected one of {', '.join(FAMILIES)}")
    return name


def surface_spec(kv: dict) -> Optional[FamilySpec]:
    if "surface" not in kv:
        return None
    fam = family_name(kv["surface"])
    params = {}
    for k in FAMILY_PARAMS.get(fam, ()):
        if k in kv:
            params[k] = parse_complex(kv[k]) if k in COMPLEX_PARAMS else parse_float(k, kv[k])
    return FamilySpec(fam, params)


def parse_values(v: str, param: Optional[str]) -> list:
    """Comma list, or ``start:stop:count`` for real parameters."""
    if ":" in v and param not in COMPLEX_PARAMS:
        parts = v.split(":")
        if len(parts) != 3:
            raise ConfigError("range values must be start:stop:count")
        lo, hi = parse_float("values", parts[0]), parse_float("values", parts[1])
        n = parse_int("values", parts[2])
        if n < 1:
            raise ConfigError("range count must be >= 1")
        return [float(x) for x in np.linspace(lo, hi, n)]
    items = [s for s in v.split(",") if s.strip()]
    if not items:
        raise ConfigError("empty value list")
    if param in COMPLEX_PARAMS:
        return [parse_complex(s) for s in items]
    return [parse_float("values", s) for s in items]


def parse_starts(v: str) -> tuple:
    starts = []
    for group in v.split(";"):
        w = [parse_float("start", s) for s in group.split(",")]
        if len(w) != 3 or min(w) <= 0:
            raise ConfigError("each start needs three positive weights, e.g. start=0.5,0.3,0.2")
        starts.append(tuple(w))
    return tuple(starts)


def build_config(kv: dict) -> RunConfig:
    unknown = set(kv) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "version" in kv and parse_int("version", kv["version"]) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {kv['version']} (expected {CONFIG_VERSION})")
    cfg = RunConfig(surface=surface_spec(kv))
    if "grid" in kv:
        cfg.grid = parse_grid(kv["grid"])
    if "format" in kv:
        if kv["format"] not in ("json", "csv", "text"):
            raise ConfigError("format must be json, csv or text")
        cfg.fmt = kv["format"]
    cfg.out = kv.get("out") or None
    if "seed" in kv:
        cfg.seed = parse_int("seed", kv["seed"])
    if "suite" in kv:
        if kv["suite"] not in (*SUITES, "all"):
            raise ConfigError(f"suite must be one of {', '.join(SUITES)}, all")
        cfg.suite = kv["suite"]
    if "samples" in kv:
        cfg.samples = parse_int("samples", kv["samples"])
        if cfg.samples < 1:
            raise ConfigError("samples must be >= 1")
    if "param" in kv:
        cfg.param = kv["param"]
    if "values" in kv:
        cfg.values = parse_values(kv["values"], cfg.param)
    if "start" in kv:
        cfg.starts = parse_starts(kv["start"])
    if "maxiter" in kv:
        cfg.maxiter = parse_int("maxiter", kv["maxiter"])
    for k in ("simplex_size", "xatol", "fatol"):
        if k in kv:
            val = parse_float(k, kv[k])
            if not val > 0:
                raise ConfigError(f"{k} must be positive")
            setattr(cfg, k, val)
    if cfg.maxiter < 1:
        raise ConfigError("maxiter must be >= 1")
    return cfg


def load_config(path: Optional[str], tokens, flags: dict) -> RunConfig:
    kv = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                kv.update(parse_kv_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    kv.update(parse_overrides(tokens))
    kv.update({k: v for k, v in flags.items() if v is not None})
    return build_config(kv)


# --------------------------------------------------------------------------
# reports


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _grid_for(spec: FamilySpec, cfg: RunConfig):
    im = make_surface(spec)
    grid = build_grid(im.domain, *cfg.grid) if cfg.grid else default_grid(im)
    return im, grid


def eval_report(spec: FamilySpec, cfg: RunConfig) -> dict:
    im, grid = _grid_for(spec, cfg)
    rep = invariant_report(im, grid)
    meta = im.metadata
    inv = {}
    checks = []
    for name in INVARIANT_KEYS:
        entry = {"value": getattr(rep, name), "error": rep.errors.get(name)}
        if name in INTEGER_VALUED:
            entry["snapped"] = rep.snapped(name)
        key = EXPECTED_KEYS.get(name)
        if key and isinstance(meta.get(key), tuple):
            val, cite = meta[key]
            entry["expected"], entry["citation"] = val, cite
            tol = max(10 * (rep.errors.get(name) or 0.0), 1e-8)
            checks.append(close(f"expected:{name}", label(spec), entry["value"], val, tol, rel=True, basis=cite))
        inv[name] = entry
    for name in ("theta_bound", "min_abs_H", "max_abs_H", "max_abs_C", "min_C", "max_C", "max_sigma_plus_sq", "max_sigma_minus_sq"):
        inv[name] = {"value": getattr(rep, name), "error": rep.errors.get(name)}
    return {
        "surface": spec.family,
        "params": spec.params,
        "grid": list(grid.resolution),
        "seed": cfg.seed,
        "invariants": inv,
        "checks": [c.as_dict() for c in checks],
    }


def _table(rows: list, cols: list) -> str:
    cells = [[_cell(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, complex):
        return f"{v.real:g}{v.imag:+g}i"
    return str(v)


def _csv(rows: list, cols: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: _cell(r.get(c)) if r.get(c) is not None else "" for c in cols})
    return buf.getvalue()


CHECK_COLS = ["id", "surface", "basis", "computed", "expected", "tol", "status"]


def render_eval(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(doc), indent=2)
    rows = [{"name": k, **v} for k, v in doc["invariants"].items()]
    cols = ["name", "value", "error", "expected", "citation"]
    if fmt == "csv":
        return _csv(rows, cols)
    head = f"surface {doc['surface']} {_cell_params(doc['params'])} grid {doc['grid'][0]}x{doc['grid'][1]}"
    return head + "\n" + _table(rows, cols)


def _cell_params(params: dict) -> str:
    return " ".join(f"{k}={_cell(v)}" for k, v in params.items())


def render_checks(checks: list, fmt: str, extra: dict) -> str:
    rows = [c.as_dict() for c in checks]
    if fmt == "json":
        return json.dumps(_jsonable({**extra, "checks": rows}), indent=2)
    if fmt == "csv":
        return _csv(rows, CHECK_COLS)
    n_fail = sum(not c.passed for c in checks)
    return _table(rows, CHECK_COLS) + f"\n{len(checks) - n_fail} passed, {n_fail} failed"


def emit(text: str, cfg: RunConfig):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text + ("" if text.endswith("\n") else "\n"))
    else:
        print(text.rstrip("\n"))


# --------------------------------------------------------------------------
# commands


def cmd_eval(cfg: RunConfig) -> int:
    if cfg.surface is None:
        raise ConfigError("eval needs surface=<family>")
    emit(render_eval(eval_report(cfg.surface, cfg), cfg.fmt), cfg)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    zoo = (cfg.surface,) if cfg.surface is not None else ZOO
    ctx = Context(zoo=zoo, seed=cfg.seed, grid=cfg.grid, samples=cfg.samples)
    checks = run_suite(cfg.suite, ctx)
    extra = {"suite": cfg.suite, "seed": cfg.seed, "surfaces": [label(s) for s in zoo], "grid": cfg.grid}
    emit(render_checks(checks, cfg.fmt, extra), cfg)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def _scan_specs(cfg: RunConfig) -> list:
    if cfg.surface is None or cfg.param is None or not cfg.values:
        raise ConfigError("scan needs surface=<family>, param=<name> and values=<list>")
    fam, base = cfg.surface.family, dict(cfg.surface.params)
    specs = []
    for v in cfg.values:
        p = dict(base)
        if fam == "flat_torus" and cfg.param == "r1_sq":
            # scan along r1 with r2 = r3
            if not 0 < v < 1:
                raise ConfigError("r1_sq values must lie in (0, 1)")
            rest = np.sqrt((1 - v) / 2)
            p.update(r1=np.sqrt(v), r2=rest, r3=rest)
        elif cfg.param in FAMILY_PARAMS.get(fam, ()):
            p[cfg.param] = v
        else:
            raise ConfigError(f"{fam} has no scan parameter {cfg.param!r}")
        specs.append((v, p))
    return specs


def cmd_scan(cfg: RunConfig) -> int:
    rows = []
    for v, params in _scan_specs(cfg):
        row = {cfg.param: v}
        try:
            spec = FamilySpec(cfg.surface.family, params)
            im, grid = _grid_for(spec, cfg)
            rep = invariant_report(im, grid)
            row.update({k: getattr(rep, k) for k in INVARIANT_KEYS})
            row["Wminus_error"] = rep.errors.get("Wminus")
            row["status"] = "ok"
        except (ConfigError, DomainError, ImmersionError, NumericalDegeneracyError) as exc:
            # a failing row is recorded and the scan continues
            row["status"] = f"error: {exc}"
        rows.append(row)
    cols = [cfg.param, *INVARIANT_KEYS, "Wminus_error", "status"]
    if cfg.fmt == "json":
        doc = {"surface": cfg.surface.family, "params": cfg.surface.params, "param": cfg.param, "grid": cfg.grid, "rows": rows}
        emit(json.dumps(_jsonable(doc), indent=2), cfg)
    elif cfg.fmt == "csv":
        emit(_csv(rows, cols), cfg)
    else:
        emit(_table(rows, cols), cfg)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    if cfg.surface is not None and cfg.surface.family != "flat_torus":
        raise ConfigError("optimize works on the flat_torus family only")
    runs = [
        minimise_flat_torus(s, maxiter=cfg.maxiter, simplex_size=cfg.simplex_size, xatol=cfg.xatol, fatol=cfg.fatol) for s in cfg.starts
    ]
    best = min(runs, key=lambda r: r.value)
    if cfg.fmt == "json":
        doc = {"family": "flat_torus", "best": best.as_dict(), "runs": [r.as_dict() for r in runs]}
        emit(json.dumps(_jsonable(doc), indent=2), cfg)
    else:
        rows = [
            {
                "start": ",".join(f"{x:.4g}" for x in r.start),
                "r1_sq": r.weights[0],
                "r2_sq": r.weights[1],
                "r3_sq": r.weights[2],
                "min_Wminus": r.value,
                "improvement": r.start_value - r.value,
                "iterations": r.iterations,
                "converged": r.converged,
            }
            for r in runs
        ]
        cols = list(rows[0])
        emit(_csv(rows, cols) if cfg.fmt == "csv" else _table(rows, cols), cfg)
    if not all(r.converged for r in runs):
        print("optimizer did not converge; reporting best-so-far", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "scan": cmd_scan, "optimize": cmd_optimize}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cp2w", description="Willmore functionals of surfaces in CP^2.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("eval", "invariants of one surface"),
        ("verify", "run verification suites over the surface zoo"),
        ("scan", "invariants along a parameter grid"),
        ("optimize", "minimise W- over the flat tori"),
    ):
        p = sub.add_parser(name, help=helptext)
        if name == "verify":
            p.add_argument("suite", nargs="?", choices=(*SUITES, "all"), default=None)
        p.add_argument("overrides", nargs="*", help="key=value settings (a bare word names the surface)")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--format", choices=("json", "csv", "text"), default=None)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid", help="quadrature resolution NxM")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    flags = {
        "format": args.format,
        "out": args.out,
        "seed": None if args.seed is None else str(args.seed),
        "grid": args.grid,
        "suite": getattr(args, "suite", None),
    }
    try:
        cfg = load_config(args.config, args.overrides, flags)
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ImmersionError, NumericalDegeneracyError, DomainError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
