"""Command-line interface.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
Every subcommand accepts ``--config FILE`` (a JSON object keyed by option
names, e.g. ``{"mu": 0.01, "flavor": "numeric"}``); explicit flags win.
"""

from __future__ import annotations

import argparse
import functools
import json
import math
import sys
import time
from typing import Optional, Sequence

from . import kernels
from .critical_mass import critical_mass_report
from .dynamics import integrate
from .equilibria import DEFAULT_SCAN, compare_equilibria
from .errors import DomainError, NumericalError
from .model import (
    distances,
    jacobi_constant,
    k_from_densities,
    make_params,
    omega,
    omega_gradient,
    omega_hessian,
)
from .stability import FLAVORS, NUMERIC, assess
from .sweep import SweepSpec, parse_range, records_to_csv, records_to_json, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _clean(obj):
    """Replace non-finite floats with ``None`` so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {key: _clean(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(value) for value in obj]
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if value is None:
        return "-"
    return str(value)


def _table(rows) -> str:
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {_fmt(value)}" for name, value in rows)


def _add_params(p: argparse.ArgumentParser, with_mu: bool = True) -> None:
    if with_mu:
        p.add_argument("--mu", type=float, default=None, help="mass ratio m2/(m1+m2)")
    p.add_argument("--a1", type=float, default=0.0, help="oblateness coefficient (default 0)")
    p.add_argument("--k", type=float, default=None, help="buoyancy parameter (default 0)")
    p.add_argument("--rho1", type=float, default=None, help="fluid density (with --rho3)")
    p.add_argument("--rho3", type=float, default=None, help="body density (with --rho1)")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")
    p.add_argument("--config", default=None, help="JSON file with option defaults")


@functools.lru_cache(maxsize=1)
def _cached_parser() -> tuple[_Parser, dict[str, _Parser]]:
    return build_parser()


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="robe3bp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    subs = {}

    p = sub.add_parser("eval", help="potential, derivatives and Jacobi constant at a state")
    _add_params(p)
    for name in ("x", "y", "z", "vx", "vy", "vz"):
        p.add_argument(f"--{name}", type=float, default=0.0)
    _common(p)
    subs["eval"] = p

    p = sub.add_parser("equilibria", help="collinear equilibrium points")
    _add_params(p)
    p.add_argument("--x-min", type=float, default=DEFAULT_SCAN[0])
    p.add_argument("--x-max", type=float, default=DEFAULT_SCAN[1])
    p.add_argument("--samples", type=int, default=DEFAULT_SCAN[2])
    _common(p)
    subs["equilibria"] = p

    p = sub.add_parser("stability", help="linear stability of the equilibrium")
    _add_params(p)
    p.add_argument("--flavor", choices=FLAVORS, default=NUMERIC)
    _common(p)
    subs["stability"] = p

    p = sub.add_parser("critical-mass", help="critical mass ratio")
    _add_params(p, with_mu=False)
    p.add_argument("--method", choices=("paper", "exact", "numeric", "all"), default="paper")
    p.add_argument("--mu-lo", type=float, default=1e-4)
    p.add_argument("--mu-hi", type=float, default=0.999)
    _common(p)
    subs["critical-mass"] = p

    p = sub.add_parser("integrate", help="integrate the equations of motion")
    _add_params(p)
    for name in ("x", "y", "z", "vx", "vy", "vz"):
        p.add_argument(f"--{name}", type=float, default=0.0)
    p.add_argument("--t-final", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--stride", type=float, default=None, help="dense-output sample spacing")
    p.add_argument("--output", default=None, help="write samples to this file")
    _common(p)
    subs["integrate"] = p

    p = sub.add_parser("sweep", help="stability map over a (mu, a1, k) grid")
    p.add_argument("--mu-range", default=None, help="start:stop:count")
    p.add_argument("--a1-range", default="0:0:1")
    p.add_argument("--k-range", default="0:0:1")
    p.add_argument("--flavor", choices=FLAVORS, default=NUMERIC)
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None, help="write the map to this file")
    _common(p)
    subs["sweep"] = p
    return parser, subs


def _load_config(path: str, sub: _Parser) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read config file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"config file {path!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DomainError(f"config file {path!r} must hold a JSON object")
    known = {action.dest for action in sub._actions}
    config = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest == "format":
            dest = "output_format"
        if dest not in known or dest in ("help", "config"):
            raise DomainError(f"config file {path!r}: unknown option {key!r}")
        config[dest] = value
    return config


def _params(args, need_mu: bool = True):
    k = args.k
    if args.rho1 is not None or args.rho3 is not None:
        if args.rho1 is None or args.rho3 is None:
            raise DomainError("--rho1 and --rho3 must be given together")
        if k is not None:
            raise DomainError("give either --k or --rho1/--rho3, not both")
        k = k_from_densities(args.rho1, args.rho3)
    k = 0.0 if k is None else k
    mu = getattr(args, "mu", None)
    if need_mu and mu is None:
        raise DomainError("--mu is required")
    return make_params(0.0 if mu is None else mu, args.a1, k)


def _params_dict(params) -> dict:
    return {"mu": params.mu, "a1": params.a1, "k": params.k, "n_sq": params.n_sq}


def cmd_eval(args, out) -> int:
    params = _params(args)
    pos = (args.x, args.y, args.z)
    state = (*pos, args.vx, args.vy, args.vz)
    r1, r2 = distances(pos, params)
    result = {
        "params": _params_dict(params),
        "state": list(state),
        "r1": r1,
        "r2": r2,
        "omega": omega(pos, params),
        "gradient": omega_gradient(pos, params).tolist(),
        "hessian": omega_hessian(pos, params).tolist(),
        "jacobi": jacobi_constant(state, params),
    }
    if args.json:
        print(_dump_json(result), file=out)
    else:
        print(_table([(key, result[key]) for key in
                      ("r1", "r2", "omega", "gradient", "hessian", "jacobi")]), file=out)
    return EXIT_OK


def cmd_equilibria(args, out) -> int:
    params = _params(args)
    cmp = compare_equilibria(params, x_min=args.x_min, x_max=args.x_max, samples=args.samples)
    result = {
        "params": _params_dict(params),
        "numeric": [p.to_dict() for p in cmp["numeric"]],
        "paper_formula": cmp["paper"].to_dict(),
        "divergence": cmp["divergence"],
    }
    if args.json:
        print(_dump_json(result), file=out)
    else:
        rows = [(f"numeric[{i}].x", p.x) for i, p in enumerate(cmp["numeric"])]
        rows += [(f"numeric[{i}].residual", p.residual) for i, p in enumerate(cmp["numeric"])]
        rows += [("paper_formula.x", cmp["paper"].x),
                 ("paper_formula.residual", cmp["paper"].residual),
                 ("divergence", cmp["divergence"])]
        print(_table(rows), file=out)
    return EXIT_OK


def stability_payload(params, flavor: str) -> dict:
    eq, report = assess(params, flavor)
    return {"params": _params_dict(params), "equilibrium": eq.to_dict(), "report": report.to_dict()}


def cmd_stability(args, out) -> int:
    params = _params(args)
    payload = stability_payload(params, args.flavor)
    if args.json:
        print(_dump_json(payload), file=out)
    else:
        rep = payload["report"]
        rows = [
            ("flavor", rep["flavor"]),
            ("x_eq", payload["equilibrium"]["x"]),
            ("A", rep["linearization"]["a_coef"]),
            ("B", rep["linearization"]["b_coef"]),
            ("p", rep["p"]),
            ("q", rep["q"]),
            ("D", rep["discriminant"]),
        ]
        rows += [(f"lambda[{i}]", complex(*z)) for i, z in enumerate(rep["planar_roots"])]
        rows += [
            ("lambda_z^2", rep["vertical_root_sq"]),
            ("verdict_planar", rep["verdict_planar"]),
            ("verdict_vertical", rep["verdict_vertical"]),
            ("max_re_lambda", rep["max_re_lambda"]),
        ]
        print(_table(rows), file=out)
    return EXIT_OK


def cmd_critical_mass(args, out) -> int:
    params = _params(args, need_mu=False)
    report = critical_mass_report(params.a1, params.k, args.method, args.mu_lo, args.mu_hi)
    data = report.to_dict()
    if args.json:
        print(_dump_json(data), file=out)
    else:
        print(_table(list(data.items())), file=out)
    return EXIT_OK


def cmd_integrate(args, out) -> int:
    params = _params(args)
    state0 = (args.x, args.y, args.z, args.vx, args.vy, args.vz)
    start = time.perf_counter()
    traj = integrate(state0, params, args.t_final, args.tol, args.stride)
    elapsed = time.perf_counter() - start
    print(f"backend={kernels.BACKEND} steps={traj.n_accept} rejected={traj.n_reject} "
          f"elapsed={elapsed:.3f}s", file=sys.stderr)
    jac = traj.jacobi()
    if args.json:
        text = _dump_json({
            "params": _params_dict(params),
            "tol": traj.tol,
            "terminated": traj.terminated,
            "jacobi_initial": traj.jacobi_initial,
            "jacobi_drift": traj.jacobi_drift(),
            "times": traj.times.tolist(),
            "states": traj.states.tolist(),
        })
    else:
        lines = ["t,x,y,z,vx,vy,vz,jacobi"]
        for t, s, c in zip(traj.times, traj.states, jac):
            lines.append(",".join(f"{v:.17g}" for v in (t, *s, c)))
        text = "\n".join(lines)
    _emit(text, args.output, out)
    if traj.terminated:
        print("integration stopped near the point mass (r2 < 1e-6)", file=sys.stderr)
    return EXIT_OK


def _emit(text: str, path: Optional[str], out) -> None:
    if path is None:
        print(text, file=out)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise DomainError(f"cannot write {path!r}: {exc.strerror}") from None


def cmd_sweep(args, out) -> int:
    if args.mu_range is None:
        raise DomainError("--mu-range is required")
    fmt = args.output_format or ("json" if args.json else "csv")
    spec = SweepSpec(
        mu_range=parse_range(args.mu_range),
        a1_range=parse_range(args.a1_range),
        k_range=parse_range(args.k_range),
        flavor=args.flavor,
        output_format=fmt,
    )
    start = time.perf_counter()
    records = run_sweep(spec, workers=args.workers)
    print(f"cells={len(records)} flavor={spec.flavor} workers={args.workers} "
          f"elapsed={time.perf_counter() - start:.3f}s", file=sys.stderr)
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records, spec)
    _emit(text.rstrip("\n"), args.output, out)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "critical-mass": cmd_critical_mass,
    "integrate": cmd_integrate,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, _ = _cached_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            # fresh parser so config defaults never leak into later calls
            parser, subs = build_parser()
            subs[args.command].set_defaults(**_load_config(args.config, subs[args.command]))
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"robe3bp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"robe3bp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
