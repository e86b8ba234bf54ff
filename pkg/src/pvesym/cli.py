"""Command-line interface: ``pvesym <command> ...``; every command prints JSON."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import expr as E
from .classify import SubalgebraError, canonicalize_1d, canonicalize_2d
from .liealg import (AlgebraElement, adjoint_expm, adjoint_ode, adjoint_series, bracket,
                     sym2_basis)
from .parser import ParseError, parse
from .pde import PVEParams, beta_transform, check_residual, transform_solution
from .reduction import build_case

SCHEMA_VERSION = 1


class CLIError(Exception):
    pass


def _emit(payload: dict, args) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True, default=_default)
    if getattr(args, "out", None) and args.command != "simulate":
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
    print(text)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _element(spec: str) -> AlgebraElement:
    try:
        return AlgebraElement.parse(spec)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc


def _vector_field_text(el: AlgebraElement) -> str:
    total = None
    for c, b in zip(el.coords, sym2_basis()):
        if c == 0:
            continue
        term = b.scale(E.as_expr(E.to_fraction(c)))
        total = term if total is None else total + term
    return "0" if total is None else str(total)


def cmd_bracket(args) -> int:
    u, w = _element(args.u), _element(args.w)
    b = bracket(u, w)
    _emit({"command": "bracket", "u": str(u), "w": str(w), "bracket": str(b),
           "coords": [str(c) for c in b.coords], "vector_field": _vector_field_text(b)}, args)
    return 0


def cmd_adjoint(args) -> int:
    v, w = _element(args.v), _element(args.w)
    eps = float(args.eps)
    series = adjoint_series(v, w, eps, order=args.order)
    ode = adjoint_ode(v, w, eps)
    expm = adjoint_expm(v, w, eps)
    _emit({"command": "adjoint", "v": str(v), "w": str(w), "eps": eps,
           "result": series.array.tolist(), "text": str(AlgebraElement(tuple(series.array.tolist()))),
           "ode_max_diff": float(np.max(np.abs(series.array - ode.array))),
           "expm_max_diff": float(np.max(np.abs(series.array - expm.array)))}, args)
    return 0


def cmd_classify(args) -> int:
    elements = [_element(s) for s in args.elements]
    if len(elements) != args.dim:
        raise CLIError(f"--dim {args.dim} needs {args.dim} element(s), got {len(elements)}")
    try:
        form = canonicalize_1d(elements[0]) if args.dim == 1 else canonicalize_2d(elements)
    except SubalgebraError as exc:
        raise CLIError(f"not closed: {exc}") from exc
    _emit({"command": "classify", **form.to_json()}, args)
    return 0


def cmd_reduce(args) -> int:
    params = {}
    for name in ("a", "c", "eps"):
        val = getattr(args, name)
        if val is not None:
            params[name] = parse(val)
    if args.F_set:
        params["F"] = parse(str(args.F))
    case = build_case(args.case, params, variant=args.variant)
    _emit({"command": "reduce", **case.to_json()}, args)
    return 0


def cmd_transform(args) -> int:
    params = PVEParams(args.F, args.beta)
    try:
        T = beta_transform(params)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    psi = parse(args.psi)
    out = transform_solution(psi, T, args.direction)
    source = PVEParams(args.F, 0.0) if args.direction == "inverse" else params
    target = params if args.direction == "inverse" else PVEParams(args.F, 0.0)
    rep_in = check_residual(psi, source, seed=args.seed)
    rep_out = check_residual(out, target, seed=args.seed)
    _emit({"command": "transform", "direction": args.direction, "psi": str(psi), "result": str(out),
           "transformation": T.to_json(), "input_residual": rep_in.to_json(),
           "output_residual": rep_out.to_json()}, args)
    return 0


def cmd_verify(args) -> int:
    from .suites import SUITES, suite_optimal_system

    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        if name == "optimal-system":
            reports.append(suite_optimal_system(trials=args.trials, seed=args.seed))
        else:
            reports.append(SUITES[name]())
    passed = all(r["passed"] for r in reports)
    failures = [{"suite": r["suite"], "check": c["name"]} for r in reports for c in r["checks"]
                if not c["passed"] and not c.get("advisory")]
    _emit({"command": "verify", "passed": passed, "failures": failures, "reports": reports}, args)
    return 0 if passed else 1


def load_config(path: str) -> dict:
    """Plain ``key = value`` lines (``#`` comments) or a JSON object."""
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith("{"):
        return json.loads(stripped)
    cfg = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k] = v
    return cfg


def cmd_simulate(args) -> int:
    from . import solver as S

    cfg_map = load_config(args.config) if args.config else {}
    for item in args.set or []:
        if "=" not in item:
            raise CLIError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg_map[k.strip()] = v.strip()
    init = str(cfg_map.pop("init", "stationary"))
    seed = int(cfg_map.pop("seed", args.seed))
    if args.F_set:
        cfg_map["F"] = args.F
    if args.beta_set:
        cfg_map["beta"] = args.beta
    try:
        cfg = S.SolverConfig.from_mapping(cfg_map)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid solver configuration: {exc}") from exc
    grid = cfg.grid
    if init == "stationary":
        psi0 = S.sample_expr("sin(x)*sin(y)", grid)
    elif init == "random":
        psi0 = S.random_smooth_field(grid, seed=seed)
    else:
        psi0 = S.sample_expr(parse(init), grid)
    out = Path(args.out or "simulate_out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        final, rows = S.integrate(psi0, cfg)
    except S.SolverBlowUp as exc:
        _emit({"command": "simulate", "passed": False, "error": str(exc), "t_fail": exc.t}, args)
        return 1
    except S.SingularOperatorError as exc:
        raise CLIError(str(exc)) from exc
    S.write_csv(psi0, out / "initial.csv")
    S.write_csv(final, out / "final.csv")
    S.write_raw(final, out / "final.f64")
    S.write_diagnostics(rows, out / "diagnostics.csv")
    summary = {"command": "simulate", "config": cfg.to_json(), "init": init, "seed": seed,
               "steps": S.n_steps(cfg), "t_final": final.t,
               "max_abs_change": float(np.max(np.abs(final.data - psi0.data))),
               "energy_drift": abs(rows[-1]["energy"] / rows[0]["energy"] - 1) if rows[0]["energy"] else 0.0,
               "enstrophy_drift": (abs(rows[-1]["enstrophy"] / rows[0]["enstrophy"] - 1)
                                   if rows[0]["enstrophy"] else 0.0),
               "outputs": sorted(p.name for p in out.iterdir())}
    if init not in ("stationary", "random"):
        exact = S.sample_expr(parse(init), grid, final.t)
        summary["max_error_vs_init_expression"] = float(np.max(np.abs(final.data - exact.data)))
    (out / "summary.json").write_text(json.dumps({"schema_version": SCHEMA_VERSION, **summary},
                                                 indent=2, sort_keys=True) + "\n")
    print(json.dumps({"schema_version": SCHEMA_VERSION, **summary}, indent=2, sort_keys=True))
    return 0


class _Flag(argparse.Action):
    """Store a float and remember that the flag was given."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, float(values))
        setattr(namespace, f"{self.dest}_set", True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--F", type=float, default=1.0, action=_Flag, help="parameter F (default 1)")
    common.add_argument("--beta", type=float, default=0.0, action=_Flag, help="parameter beta (default 0)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--out", default=None, help="output file (directory for simulate)")

    p = argparse.ArgumentParser(prog="pvesym", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bracket", parents=[common], help="Lie bracket of two elements")
    s.add_argument("u")
    s.add_argument("w")
    s.set_defaults(func=cmd_bracket)

    s = sub.add_parser("adjoint", parents=[common], help="Ad(exp(eps v)) w")
    s.add_argument("v")
    s.add_argument("w")
    s.add_argument("--eps", required=True)
    s.add_argument("--order", type=int, default=40)
    s.set_defaults(func=cmd_adjoint)

    s = sub.add_parser("classify", parents=[common], help="canonical form in the optimal system")
    s.add_argument("--dim", type=int, choices=(1, 2), required=True)
    s.add_argument("elements", nargs="+")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("reduce", parents=[common], help="invariant reduction for a class")
    s.add_argument("--case", type=int, choices=range(1, 8), required=True)
    s.add_argument("--variant", choices=("default", "printed"), default="default")
    s.add_argument("--a")
    s.add_argument("--c")
    s.add_argument("--eps")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("--suite", choices=("algebra", "optimal-system", "reductions", "solutions",
                                       "symmetries", "all"), required=True)
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", parents=[common], help="pseudo-spectral integration")
    s.add_argument("--config", help="key=value or JSON file")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("transform", parents=[common], help="apply the beta transformation to a solution")
    s.add_argument("psi")
    s.add_argument("--direction", choices=("forward", "inverse"), default="inverse")
    s.set_defaults(func=cmd_transform)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for flag in ("F_set", "beta_set"):
        if not hasattr(args, flag):
            setattr(args, flag, False)
    try:
        return args.func(args)
    except (CLIError, ParseError) as exc:
        print(json.dumps({"schema_version": SCHEMA_VERSION, "command": args.command, "error": str(exc)},
                         indent=2, sort_keys=True))
        return 2


if __name__ == "__main__":
    sys.exit(main())
