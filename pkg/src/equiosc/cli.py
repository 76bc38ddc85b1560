"""Command-line front end: problem files, solver runs and reproduction reports.

Exit codes: 0 success, 1 a reproduction or property check failed, 2 usage or
input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys
from dataclasses import fields as dc_fields
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy

from . import __version__
from .fields import (
    Piece,
    PieceKind,
    PiecewiseField,
    example71_field,
    harmonic_step_field,
    tilde_field,
    zero_field,
)
from .kernels import Kernel, SmoothMode, log_sine, smooth, zero_kernel
from .sumtrans import Problem

SCHEMA_VERSION = 1
_TOP_KEYS = {"schema_version", "kernel", "nu", "field", "n", "config"}
_KERNELS = {"log_sine": log_sine, "zero": zero_kernel}


class SchemaError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


def _require_keys(d: Any, allowed: set[str], required: set[str], path: str) -> dict:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise SchemaError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")
    missing = sorted(required - set(d))
    if missing:
        raise SchemaError(f"{path}.{missing[0]}" if path else missing[0], "missing field")
    return d


def _real(v: Any, path: str, allow_neg_inf: bool = False) -> float:
    if allow_neg_inf and v == "-inf":
        return -math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(path, f"expected a number, got {v!r}")
    return float(v)


def parse_kernel(doc: Any, path: str = "kernel") -> Kernel:
    if isinstance(doc, str):
        if doc not in _KERNELS:
            raise SchemaError(path, f"unknown kernel {doc!r}")
        return _KERNELS[doc]()
    d = _require_keys(doc, {"name", "base", "eta", "mode"}, {"name"}, path)
    name = d["name"]
    if name in _KERNELS:
        if len(d) > 1:
            raise SchemaError(path, f"kernel {name!r} takes no parameters")
        return _KERNELS[name]()
    if name != "smoothed":
        raise SchemaError(f"{path}.name", f"unknown kernel {name!r}")
    _require_keys(d, {"name", "base", "eta", "mode"}, {"name", "base", "eta"}, path)
    try:
        return smooth(parse_kernel(d["base"], f"{path}.base"), _real(d["eta"], f"{path}.eta"),
                      SmoothMode(d.get("mode", "upper")))
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(path, str(exc)) from None


def parse_field(doc: Any, path: str = "field") -> PiecewiseField:
    try:
        if isinstance(doc, str):
            named = {"example71": example71_field, "zero": zero_field}
            if doc not in named:
                raise SchemaError(path, f"unknown field {doc!r}")
            return named[doc]()
        if not isinstance(doc, dict):
            raise SchemaError(path, "expected a name or an object")
        if "name" in doc:
            name = doc["name"]
            if name == "tilde":
                _require_keys(doc, {"name", "alpha"}, {"name", "alpha"}, path)
                return tilde_field(_real(doc["alpha"], f"{path}.alpha"))
            if name == "harmonic":
                _require_keys(doc, {"name", "lmax"}, {"name", "lmax"}, path)
                lmax = doc["lmax"]
                if isinstance(lmax, bool) or not isinstance(lmax, int):
                    raise SchemaError(f"{path}.lmax", "expected an integer")
                return harmonic_step_field(lmax)
            if name in ("example71", "zero"):
                _require_keys(doc, {"name"}, {"name"}, path)
                return parse_field(name, path)
            raise SchemaError(f"{path}.name", f"unknown field {name!r}")
        _require_keys(doc, {"pieces", "overrides"}, {"pieces"}, path)
        raw = doc["pieces"]
        if not isinstance(raw, list):
            raise SchemaError(f"{path}.pieces", "expected a list")
        pieces = []
        for i, pc in enumerate(raw):
            pp = f"{path}.pieces[{i}]"
            _require_keys(pc, {"start", "end", "kind", "value", "slope"}, {"start", "end", "kind"}, pp)
            try:
                kind = PieceKind(pc["kind"])
            except ValueError:
                raise SchemaError(f"{pp}.kind", f"unknown piece kind {pc['kind']!r}") from None
            pieces.append(Piece(_real(pc["start"], f"{pp}.start"), _real(pc["end"], f"{pp}.end"), kind,
                                _real(pc.get("value", 0.0), f"{pp}.value"),
                                _real(pc.get("slope", 0.0), f"{pp}.slope")))
        ov = []
        for i, item in enumerate(doc.get("overrides", [])):
            op = f"{path}.overrides[{i}]"
            if not (isinstance(item, list) and len(item) == 2):
                raise SchemaError(op, "expected [t, value]")
            ov.append((_real(item[0], op), _real(item[1], op, allow_neg_inf=True)))
        return PiecewiseField(tuple(pieces), tuple(ov))
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def parse_config(doc: Any, path: str = "config"):
    from .solvers import SolveConfig

    names = {f.name for f in dc_fields(SolveConfig)}
    d = _require_keys(doc, names, set(), path)
    kw = dict(d)
    if "eta_schedule" in kw:
        kw["eta_schedule"] = tuple(kw["eta_schedule"])
    try:
        return SolveConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, str(exc)) from None


def parse_problem_dict(d: Any):
    """Validated ``(Problem, SolveConfig)`` from a decoded problem file."""
    from .solvers import SolveConfig

    d = _require_keys(d, _TOP_KEYS, {"schema_version", "kernel", "nu", "field"}, "")
    if d["schema_version"] != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported version {d['schema_version']!r}")
    nu = d["nu"]
    if not isinstance(nu, list) or not nu:
        raise SchemaError("nu", "expected a nonempty list")
    nu = tuple(_real(v, f"nu[{i}]") for i, v in enumerate(nu))
    if not all(v > 0 for v in nu):
        raise SchemaError("nu", "nu must be positive")
    if "n" in d and d["n"] != len(nu):
        raise SchemaError("n", f"n={d['n']!r} does not match len(nu)={len(nu)}")
    kernel = parse_kernel(d["kernel"])
    field = parse_field(d["field"])
    try:
        p = Problem(kernel, nu, field)
    except ValueError as exc:
        raise SchemaError("", str(exc)) from None
    cfg = parse_config(d["config"]) if "config" in d else SolveConfig()
    return p, cfg


def resolve_problem_path(path: str) -> str:
    """Read a problem file, falling back to the bundled fixtures by file name."""
    fp = Path(path)
    if fp.exists():
        return fp.read_text()
    bundled = resources.files("equiosc") / "data" / fp.name
    if bundled.is_file():
        return bundled.read_text()
    raise FileNotFoundError(f"problem file not found: {path}")


def parse_problem(path: str):
    try:
        d = json.loads(resolve_problem_path(path))
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    return parse_problem_dict(d)


# -- output ----------------------------------------------------------------

def header(command: str, cfg, extra: dict | None = None) -> dict:
    h = {
        "tool": "equiosc",
        "command": command,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "versions": {
            "equiosc": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    if extra:
        h.update(extra)
    return h


def _dump(obj: Any, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    _write(text, out)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[list[Any]], head: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    w.writerows(rows)
    return buf.getvalue()


# -- commands --------------------------------------------------------------

def _load(args):
    p, cfg = parse_problem(args.problem)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.tol is not None:
        over["tol_value"] = args.tol
    return p, replace(cfg, **over) if over else cfg


def cmd_solve(args, parser) -> int:
    from .solvers import solve_equioscillation, solve_maximin, solve_minimax

    mode = getattr(args, "mode", "equi")
    if mode == "equi" and args.anchor is None:
        parser.error("--anchor is required for equioscillation solves")
    p, cfg = _load(args)
    if mode == "minimax":
        r = solve_minimax(p, cfg)
    elif mode == "maximin":
        r = solve_maximin(p, cfg)
    else:
        r = solve_equioscillation(p, args.anchor, cfg)
    _dump({"header": header("solve", cfg, {"mode": mode, "problem": args.problem, "anchor": args.anchor}),
           "result": r.to_dict()}, args.out)
    return 0


def cmd_trace(args, parser) -> int:
    from .solvers import trace_mu

    if args.grid < 1:
        parser.error("--grid must be positive")
    p, cfg = _load(args)
    pts = trace_mu(p, [i / args.grid for i in range(args.grid)], cfg)
    head = ["a", "mu"] + [f"y_{j + 1}" for j in range(p.n)]
    rows = [[repr(tp.anchor), repr(tp.value)] + ([repr(v) for v in tp.nodes] if tp.ok else [""] * p.n)
            for tp in pts]
    _write(_csv(rows, head), args.out)
    return 0


def cmd_oracle(args, parser) -> int:
    from .solvers import brute_force

    p, cfg = _load(args)
    try:
        o = brute_force(p, args.grid)
    except ValueError as exc:
        parser.error(str(exc))
    _dump({"header": header("oracle", cfg, {"problem": args.problem, "grid": args.grid}),
           "result": o.to_dict()}, args.out)
    return 0


def cmd_reproduce(args, parser) -> int:
    from .examples import reproduce_example54, reproduce_example71, reproduce_example72
    from .solvers import SolveConfig

    cfg = SolveConfig(seed=args.seed if args.seed is not None else 0)
    if args.example == "example71":
        rep = reproduce_example71(cfg, oracle_grid=args.grid)
        if args.csv:
            rows = [[repr(r[k]) for k in ("x", "z", "y1", "y2", "lambda", "m1", "m2")] for r in rep.data["sweep"]]
            Path(args.csv).write_text(_csv(rows, ["x", "z", "y1", "y2", "lambda", "m1", "m2"]))
    elif args.example == "example72":
        alpha = args.alpha if args.alpha is not None else 4.0 * math.pi + 1.0
        try:
            rep = reproduce_example72(alpha, cfg)
        except ValueError as exc:
            parser.error(str(exc))
    else:
        try:
            rep = reproduce_example54(args.lmax)
        except ValueError as exc:
            parser.error(str(exc))
    _dump({"header": header("reproduce", cfg, {"example": args.example}), "report": rep.to_dict()}, args.out)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_perturb(args, parser) -> int:
    from .fields import example71_field, zero_field
    from .perturb import random_trials, random_widening_trials
    from .solvers import SolveConfig

    seed = args.seed if args.seed is not None else 0
    if args.problem:
        problems = [_load(args)[0]]
    else:
        problems = [Problem(log_sine(), (1.0,) * n, f) for n in (2, 3, 4, 5)
                    for f in (zero_field(), example71_field())]
    s = random_trials(problems, args.trials, seed)
    wd = random_widening_trials(problems[0].kernel, args.trials, seed=seed) if problems[0].kernel.periodic else None
    ok = s.ok and (wd is None or wd.ok)
    _dump({"header": header("check-perturbation", SolveConfig(seed=seed), {"trials": args.trials}),
           "perturbation": s.to_dict(), "widening": wd.to_dict() if wd else None, "ok": ok}, args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equiosc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, problem_required=True):
        sp.add_argument("--problem", required=problem_required, help="problem JSON (or a bundled name)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out")

    sp = sub.add_parser("solve", help="minimax, maximin or anchored solve")
    common(sp)
    sp.add_argument("--mode", choices=["minimax", "maximin", "equi"], default="minimax")
    sp.add_argument("--anchor", type=float)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("equi", help="anchored equioscillation solve")
    common(sp)
    sp.add_argument("--anchor", type=float)
    sp.set_defaults(func=cmd_solve, mode="equi")

    sp = sub.add_parser("trace-mu", help="CSV of the equioscillation value over anchors")
    common(sp)
    sp.add_argument("--grid", type=int, default=64)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("oracle", help="brute-force grid search")
    common(sp)
    sp.add_argument("--grid", type=int, default=128)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("reproduce", help="reproduction report for a worked example")
    sp.add_argument("example", choices=["example71", "example72", "example54"])
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--lmax", type=int, default=100)
    sp.add_argument("--grid", type=int, default=512, help="oracle grid for example71 (0 skips)")
    sp.add_argument("--csv", help="write the lambda sweep here (example71)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("check-perturbation", help="random perturbation and widening trials")
    common(sp, problem_required=False)
    sp.add_argument("--trials", type=int, default=1000)
    sp.set_defaults(func=cmd_perturb)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
