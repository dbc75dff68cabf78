"""Command-line front end: verify | singular | maslov | integrate.

Configuration comes from an optional JSON file plus flag overrides; all
outputs are UTF-8 JSON or CSV.  Exit codes: 0 success, 1 check or
computation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import numpy as np

from .lax import PhasePoint
from .dynamics import integrate_flow, trajectory_to_csv
from .singularity import (
    ConvergenceError,
    PairTarget,
    StratumCollapseError,
    all_pair_targets,
    find_singular,
    omega_point,
    perturbed_seed,
)
from .maslov import (
    ClosedCurve,
    LagrangianFrameError,
    RegularityError,
    TransportError,
    check_holonomy_theorem,
)
from .reporting import float_str
from .verify import RunConfig, run_suite

__all__ = ["main", "cmd_verify", "cmd_singular", "cmd_maslov", "cmd_integrate"]


class ConfigError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON in {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _build_config(args) -> RunConfig:
    data = _load_json(args.config) if args.config else {}
    if args.n is not None:
        data["n_values"] = args.n
    if args.seed is not None:
        data["seed"] = args.seed
    if args.points is not None:
        data["num_points"] = args.points
    if args.suite is not None:
        data["suite"] = args.suite
    if args.out is not None:
        data["out"] = args.out
    for name in ("degeneracy", "rank", "bracket"):
        value = getattr(args, f"tol_{name}", None)
        if value is not None:
            data[f"{name}_tol"] = value
    if getattr(args, "tol_ode", None) is not None:
        data["ode_rtol"] = args.tol_ode
    try:
        return RunConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}") from exc


def cmd_verify(args) -> int:
    config = _build_config(args)
    report = run_suite(config)
    for line in report.summary_lines():
        print(line)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(include_timing=not args.no_timing))
        print(f"report written to {config.out}")
    if report.inconclusive:
        print(f"warning: {len(report.inconclusive)} inconclusive checks")
    return 1 if report.failures else 0


def cmd_singular(args) -> int:
    n = args.n[0] if isinstance(args.n, list) else args.n
    if args.targets == "all":
        targets = all_pair_targets(n)
    else:
        try:
            targets = [PairTarget.parse(tok) for tok in args.targets.split(",") if tok]
            for t in targets:
                t.positions(n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if not targets:
        raise ConfigError("no targets given")
    om = omega_point(n, p0=args.p0)
    results = []
    for group in ([targets] if args.joint else [[t] for t in targets]):
        rest = [t for t in all_pair_targets(n) if t not in group]
        seed = perturbed_seed(om, rest, eps=args.eps) if rest else om.z
        try:
            sp = find_singular(seed, group)
        except (ConvergenceError, StratumCollapseError) as exc:
            print(f"error: target {[t.label for t in group]}: {exc}", file=sys.stderr)
            return 1
        results.append(sp.to_json_dict())
    payload = json.dumps({"n": n, "points": results}, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
        print(f"{len(results)} singular points written to {args.out}")
    else:
        print(payload)
    return 0


def _curve_from_spec(spec: dict) -> ClosedCurve:
    kind = spec.get("type")
    if kind == "samples":
        pts = [PhasePoint(np.asarray(p["q"], float), np.asarray(p["p"], float))
               for p in spec["points"]]
        return ClosedCurve.from_samples(pts)
    if kind == "circle":
        center = PhasePoint(
            np.asarray(spec["center"]["q"], float), np.asarray(spec["center"]["p"], float)
        )
        target = PairTarget.parse(spec["pair"])
        return ClosedCurve.around_pair(
            center,
            target,
            radius=float(spec.get("radius", 1e-2)),
            initial_samples=int(spec.get("samples", 256)),
            orientation=int(spec.get("orientation", 1)),
        )
    raise ConfigError(f"unknown curve type {kind!r}; expected 'samples' or 'circle'")


def cmd_maslov(args) -> int:
    spec = _load_json(args.curve)
    try:
        curve = _curve_from_spec(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad curve spec: {exc}") from exc
    try:
        rep = check_holonomy_theorem(curve)
        trace = None
        if args.trace_csv:
            from .maslov import maslov_index

            trace = maslov_index(curve).winding_trace
    except (RegularityError, TransportError, LagrangianFrameError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {
        "mu": rep.mu,
        "theorem_lhs": rep.lhs,
        "gamma": [int(g) for g in rep.holonomy.gamma],
        "gammabar": [int(g) for g in rep.holonomy.gammabar],
        "even_product": rep.holonomy.even_product,
        "odd_product": rep.holonomy.odd_product,
        "agree": rep.agree,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"result written to {args.out}")
    else:
        print(text)
    if args.trace_csv and trace is not None:
        with open(args.trace_csv, "w", encoding="utf-8") as fh:
            fh.write("t,winding_argument\n")
            for t, phi in trace:
                fh.write(f"{float_str(t)},{float_str(phi)}\n")
        print(f"winding trace written to {args.trace_csv}")
    return 0 if rep.agree else 1


def cmd_integrate(args) -> int:
    q = np.asarray(args.q, float)
    p = np.asarray(args.p, float)
    if q.size != p.size:
        raise ConfigError("q and p must have equal length")
    z0 = PhasePoint(q, p)
    c = np.asarray(args.c, float)
    if c.size != q.size:
        raise ConfigError("coefficient vector must have length n")
    t_eval = np.linspace(0.0, args.t_final, args.samples)
    traj = integrate_flow(z0, c, args.t_final, t_eval=t_eval,
                          rtol=args.rtol, method=args.method, dt=args.dt)
    trajectory_to_csv(traj, args.out)
    print(f"trajectory with {traj.times.size} samples written to {args.out}")
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="todalax",
        description="Verification suite for the periodic Toda chain's Lax structure, "
        "singular strata and Maslov indices.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--n", type=_parse_int_list, help="comma-separated chain sizes")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--points", type=int, help="random samples per check")
    common.add_argument("--suite", choices=["full", "quick"], help="suite size")
    common.add_argument("--out", help="output path")
    common.add_argument("--tol.degeneracy", dest="tol_degeneracy", type=float,
                        help="eigenvalue degeneracy tolerance")
    common.add_argument("--tol.rank", dest="tol_rank", type=float,
                        help="relative rank-decision tolerance")
    common.add_argument("--tol.bracket", dest="tol_bracket", type=float,
                        help="bracket zero-pattern tolerance")
    common.add_argument("--tol.ode", dest="tol_ode", type=float,
                        help="relative integrator tolerance")

    pv = sub.add_parser("verify", parents=[common], help="run the verification suite")
    pv.add_argument("--no-timing", action="store_true", help="omit wall times from the report")
    pv.set_defaults(fn=cmd_verify)

    ps = sub.add_parser("singular", parents=[common], help="locate singular points")
    ps.add_argument("--targets", default="all",
                    help="comma-separated pair labels like even:1,odd:2, or 'all'")
    ps.add_argument("--joint", action="store_true",
                    help="drive all listed pairs degenerate at one point")
    ps.add_argument("--eps", type=float, default=1e-2, help="seed perturbation size")
    ps.add_argument("--p0", type=float, default=0.0, help="common momentum of the seed equilibrium")
    ps.set_defaults(fn=cmd_singular)

    pm = sub.add_parser("maslov", parents=[common], help="holonomies and Maslov index of a loop")
    pm.add_argument("curve", help="JSON curve specification file")
    pm.add_argument("--trace-csv", help="write the winding trace as CSV")
    pm.set_defaults(fn=cmd_maslov)

    pi = sub.add_parser("integrate", parents=[common], help="integrate a trace flow")
    pi.add_argument("--q", type=_parse_float_list, required=True, help="initial positions")
    pi.add_argument("--p", type=_parse_float_list, required=True, help="initial momenta")
    pi.add_argument("--c", type=_parse_float_list, required=True,
                    help="coefficients of the flow combination")
    pi.add_argument("--t-final", type=float, default=50.0)
    pi.add_argument("--samples", type=int, default=101)
    pi.add_argument("--rtol", type=float, default=1e-10)
    pi.add_argument("--method", choices=["rk45", "verlet"], default="rk45")
    pi.add_argument("--dt", type=float, default=1e-3, help="leapfrog step size")
    pi.set_defaults(fn=cmd_integrate)
    return ap


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    if args.command == "singular" and (args.n is None or len(args.n) != 1):
        print("error: singular requires exactly one --n value", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
