"""Command-line interface.

Subcommands: gen, bounds, exact, guarantee, validate, bench, compare-schemes.
Exit codes: 0 on success, 2 for invalid input, 3 when an internal solver
invariant fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation

from . import bench
from .approx import build_segments
from .exact import m_star, solve_exact
from .guarantees import (guarantee_gap_dro, guarantee_gap_normal,
                         min_segments_dro, min_segments_normal_order,
                         monte_carlo_feasibility)
from .instances import FAMILIES, GeneratorSpec, generate
from .model import (OmegaSpec, apply_omega_spec, instance_from_json,
                    instance_to_json)
from .rkpm import (DEFAULT_SCALE_FACTOR, SolverInvariantError, lower_bound,
                   upper_bound)

AMBIGUITIES = ("normal", "chebyshev", "delage-ye", "support")


def _parse_int_list(text: str) -> list[int]:
    """Comma list and/or a:b ranges, e.g. '5,10' or '0:10' (end exclusive)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":", 1)
            out.extend(range(int(lo), int(hi)))
        elif part:
            out.append(int(part))
    return out


def _parse_decimal_list(text: str) -> list[Decimal]:
    return [Decimal(part.strip()) for part in text.split(",") if part.strip()]


def _add_generator_args(parser, required=False):
    parser.add_argument("--family", choices=FAMILIES, required=required)
    parser.add_argument("--n", type=int, required=required)
    parser.add_argument("--seed", type=int, default=0)


def _add_solver_args(parser):
    parser.add_argument("--instance", help="instance JSON file (overrides generator flags)")
    parser.add_argument("--rho", type=Decimal)
    parser.add_argument("--ambiguity", choices=AMBIGUITIES, default="chebyshev")
    parser.add_argument("--gamma1", type=Decimal, help="delage-ye mean-shift budget")
    parser.add_argument("--gamma2", type=Decimal, help="delage-ye covariance factor")
    parser.add_argument("--support-lower", help="comma list of interval lower bounds")
    parser.add_argument("--support-upper", help="comma list of interval upper bounds")
    parser.add_argument("--support-form", choices=("squares", "hoeffding"),
                        default="squares")
    parser.add_argument("--omega", type=Decimal, help="explicit safety factor")
    parser.add_argument("--scale-factor", type=int, default=DEFAULT_SCALE_FACTOR)
    parser.add_argument("--threads", type=int, default=1)


def _add_output_args(parser):
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def _load_instance(args):
    if args.instance:
        with open(args.instance) as fh:
            return instance_from_json(fh.read())
    if args.family is None or args.n is None:
        raise ValueError("either --instance or --family/--n must be given")
    return generate(GeneratorSpec(family=args.family, n=args.n, seed=args.seed))


def _resolve_instance_omega(args, inst):
    """Priority: --omega, then --rho with --ambiguity, then the stamped value."""
    if args.omega is not None:
        return inst, args.omega
    if args.rho is not None:
        if args.ambiguity == "delage-ye":
            if args.gamma1 is None or args.gamma2 is None:
                raise ValueError("delage-ye ambiguity requires --gamma1 and --gamma2")
            spec = OmegaSpec.delage_ye(args.rho, args.gamma1, args.gamma2)
        elif args.ambiguity == "support":
            if not args.support_lower or not args.support_upper:
                raise ValueError("support ambiguity requires --support-lower/--support-upper")
            spec = OmegaSpec.support_interval(
                args.rho, _parse_decimal_list(args.support_lower),
                _parse_decimal_list(args.support_upper), form=args.support_form)
        else:
            spec = OmegaSpec(kind=args.ambiguity, rho=args.rho)
        return apply_omega_spec(inst, spec)
    if inst.omega is not None:
        return inst, inst.omega
    raise ValueError("no safety factor: give --omega, or --rho with --ambiguity")


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gen(args):
    spec = GeneratorSpec(family=args.family, n=args.n, seed=args.seed,
                         rho=args.rho,
                         omega_kind=args.ambiguity if args.rho is not None else None)
    _emit(instance_to_json(generate(spec)), args.out)
    return 0


def _cmd_bounds(args):
    inst = _load_instance(args)
    inst, omega = _resolve_instance_omega(args, inst)
    table = build_segments(inst, omega, args.m)
    row = {"n": inst.n, "m": args.m, "omega": str(omega)}
    if args.delta in ("upper", "both"):
        ub = upper_bound(inst, omega, args.m, table=table,
                         scale_factor=args.scale_factor, threads=args.threads)
        row.update(ub=ub.objective, ub_time_ms=round(ub.wall_time * 1000, 3),
                   ub_solution="".join(map(str, ub.solution)))
    if args.delta in ("lower", "both"):
        lb = lower_bound(inst, omega, args.m, table=table,
                         scale_factor=args.scale_factor, threads=args.threads)
        row.update(lb=lb.objective, lb_time_ms=round(lb.wall_time * 1000, 3),
                   lb_solution="".join(map(str, lb.solution)))
    if "ub" in row and "lb" in row and row["lb"] > 0:
        row["gap_pct"] = (row["ub"] - row["lb"]) / row["lb"] * 100
    if args.format == "csv":
        fields = list(row)
        _emit(bench.rows_to_csv([row], fields), args.out)
    else:
        _emit(json.dumps(row, indent=2) + "\n", args.out)
    return 0


def _cmd_exact(args):
    inst = _load_instance(args)
    inst, omega = _resolve_instance_omega(args, inst)
    res = solve_exact(inst, omega, scale_factor=args.scale_factor,
                      threads=args.threads)
    row = {
        "n": inst.n, "omega": str(omega), "objective": res.objective,
        "iterations": res.iterations, "m_final": res.m,
        "knap_solves": res.subproblems_solved,
        "time_ms": round(res.wall_time * 1000, 3),
        "m_star": m_star(inst, omega),
        "solution": "".join(map(str, res.solution)),
        "objective_history": list(res.objective_history),
    }
    if args.format == "csv":
        flat = {k: v for k, v in row.items() if k != "objective_history"}
        _emit(bench.rows_to_csv([flat], list(flat)), args.out)
    else:
        _emit(json.dumps(row, indent=2) + "\n", args.out)
    return 0


def _cmd_guarantee(args):
    rho = float(args.rho)
    row = {"n": args.n, "rho": rho}
    if args.m is not None:
        row["gap_normal"] = guarantee_gap_normal(args.n, args.m, rho)
        row["gap_dro"] = guarantee_gap_dro(args.n, args.m, rho)
    if args.target_gap is not None:
        row["min_segments_dro"] = min_segments_dro(args.n, args.rho, args.target_gap)
        row["min_segments_normal"] = min_segments_normal_order(
            args.n, args.rho, float(args.target_gap))
    if args.m is None and args.target_gap is None:
        raise ValueError("give --m for gap values and/or --target-gap for segment counts")
    _emit(json.dumps(row, indent=2) + "\n", args.out)
    return 0


def _cmd_validate(args):
    inst = _load_instance(args)
    inst, omega = _resolve_instance_omega(args, inst)
    lb = lower_bound(inst, omega, args.m, scale_factor=args.scale_factor,
                     threads=args.threads)
    rate = monte_carlo_feasibility(lb.solution, inst, samples=args.samples,
                                   seed=args.mc_seed)
    row = {
        "n": inst.n, "m": args.m, "omega": str(omega),
        "objective": lb.objective,
        "solution": "".join(map(str, lb.solution)),
        "samples": args.samples, "mc_seed": args.mc_seed,
        "satisfaction_rate": rate,
    }
    if args.rho is not None:
        row["rho"] = float(args.rho)
    _emit(json.dumps(row, indent=2) + "\n", args.out)
    return 0


def _cmd_bench(args):
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    sizes = _parse_int_list(args.sizes)
    rhos = _parse_decimal_list(args.rhos)
    seeds = _parse_int_list(args.seeds)
    if args.mode == "bounds":
        m_grid = _parse_int_list(args.m_grid) if args.m_grid else []
        rows = bench.run_bounds_bench(families, sizes, rhos, m_grid, seeds,
                                      ambiguity=args.ambiguity,
                                      scale_factor=args.scale_factor,
                                      threads=args.threads)
        text = bench.write_report(rows, bench.BOUNDS_FIELDS, args.format,
                                  summary=bench.summarize_bounds(rows))
    else:
        rows = bench.run_exact_bench(families, sizes, rhos, seeds,
                                     ambiguity=args.ambiguity,
                                     scale_factor=args.scale_factor,
                                     threads=args.threads)
        text = bench.write_report(rows, bench.EXACT_FIELDS, args.format,
                                  summary=bench.summarize_exact(rows))
    _emit(text, args.out)
    return 0


def _cmd_compare_schemes(args):
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    rows = bench.run_scheme_comparison(
        families, _parse_int_list(args.sizes), _parse_decimal_list(args.rhos),
        _parse_int_list(args.seeds),
        m_horizontal=_parse_int_list(args.m_horizontal),
        m_vertical=_parse_int_list(args.m_vertical),
        ambiguity=args.ambiguity, scale_factor=args.scale_factor,
        threads=args.threads)
    _emit(bench.write_report(rows, bench.SCHEME_FIELDS, args.format), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sockp",
        description="Bounds and exact solutions for SOC-constrained binary knapsacks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance as JSON")
    _add_generator_args(p, required=True)
    p.add_argument("--rho", type=Decimal, help="stamp a safety factor for this level")
    p.add_argument("--ambiguity", choices=("normal", "chebyshev"), default="chebyshev")
    p.add_argument("--out")

    p = sub.add_parser("bounds", help="upper/lower bounds at a fixed segment count")
    _add_generator_args(p)
    _add_solver_args(p)
    _add_output_args(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--delta", choices=("upper", "lower", "both"), default="both")

    p = sub.add_parser("exact", help="solve to optimality by doubling segments")
    _add_generator_args(p)
    _add_solver_args(p)
    _add_output_args(p)

    p = sub.add_parser("guarantee", help="closed-form probability guarantees")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=Decimal, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--target-gap", type=Decimal)
    p.add_argument("--out")

    p = sub.add_parser("validate", help="Monte-Carlo check of a lower-bound solution")
    _add_generator_args(p)
    _add_solver_args(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mc-seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("bench", help="seeded benchmark sweeps")
    p.add_argument("--mode", choices=("bounds", "exact"), default="bounds")
    p.add_argument("--families", default="SC")
    p.add_argument("--sizes", default="100")
    p.add_argument("--rhos", default="0.95")
    p.add_argument("--seeds", default="0:10")
    p.add_argument("--m-grid", help="segment grid for bounds mode, e.g. 5,10,20")
    p.add_argument("--ambiguity", choices=("normal", "chebyshev"), default="chebyshev")
    p.add_argument("--scale-factor", type=int, default=DEFAULT_SCALE_FACTOR)
    p.add_argument("--threads", type=int, default=1)
    _add_output_args(p)

    p = sub.add_parser("compare-schemes",
                       help="horizontal vs vertical upper bounds on shared instances")
    p.add_argument("--families", default="SC")
    p.add_argument("--sizes", default="400")
    p.add_argument("--rhos", default="0.95")
    p.add_argument("--seeds", default="0:5")
    p.add_argument("--m-horizontal", default="10")
    p.add_argument("--m-vertical", default="100")
    p.add_argument("--ambiguity", choices=("normal", "chebyshev"), default="chebyshev")
    p.add_argument("--scale-factor", type=int, default=DEFAULT_SCALE_FACTOR)
    p.add_argument("--threads", type=int, default=1)
    _add_output_args(p)

    return parser


_HANDLERS = {
    "gen": _cmd_gen,
    "bounds": _cmd_bounds,
    "exact": _cmd_exact,
    "guarantee": _cmd_guarantee,
    "validate": _cmd_validate,
    "bench": _cmd_bench,
    "compare-schemes": _cmd_compare_schemes,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except SolverInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, InvalidOperation, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
