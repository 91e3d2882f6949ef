"""Command-line front door: generate, run, check, baseline, experiment."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .barrier import run as run_formation
from .baseline import plan_linear_barrier
from .coverage import strong_barrier_covered
from .errors import ChainBarrierError
from .harness import (
    ExperimentSpec,
    aggregate_summary,
    default_spec,
    read_rows_csv,
    run_experiment,
    write_rows_csv,
)
from .model import (
    AlgoConfig,
    BeltRegion,
    read_deployment,
    uniform_random_deployment,
    write_deployment,
    deployment_to_json,
)
from .svgframes import emit_svg_frames


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="force scale")
    p.add_argument("--beta", type=float, help="flatten-force fraction")
    p.add_argument("--tau", type=float, help="step duration (s)")
    p.add_argument("--mobility", type=float, help="displacement per unit force per second")
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--seed", type=int, help="run RNG seed (graph selection)")


def _config_overrides(args) -> dict:
    over = {}
    for name in ("alpha", "beta", "tau", "mobility", "max_iterations"):
        value = getattr(args, name, None)
        if value is not None:
            over[name] = value
    if getattr(args, "seed", None) is not None:
        over["rng_seed"] = args.seed
    return over


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainbarrier",
        description="Chain-based barrier formation for mobile sensors: simulate, verify, compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a uniform random deployment file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--length", type=float, default=50.0)
    g.add_argument("--width", type=float, default=8.0)
    g.add_argument("--rs", type=float, default=0.5)
    g.add_argument("--out", type=Path, help="output file (default stdout)")

    r = sub.add_parser("run", help="run the chain formation on a deployment file")
    r.add_argument("--deployment", type=Path, required=True)
    r.add_argument("--out", type=Path, help="result JSON file (default stdout summary)")
    r.add_argument("--frames-dir", type=Path, help="emit SVG frames here")
    r.add_argument("--frame-every", type=int, default=200, help="record a frame every k iterations")
    _add_config_flags(r)

    c = sub.add_parser("check", help="coverage report for a deployment file")
    c.add_argument("--deployment", type=Path, required=True)
    c.add_argument("--tol", type=float, help="adjacency tolerance (default 1e-6*rs)")

    b = sub.add_parser("baseline", help="plan the linear-barrier baseline")
    b.add_argument("--deployment", type=Path, required=True)
    b.add_argument("--objective", choices=("min_avg", "min_max"), default="min_avg")
    b.add_argument("--out", type=Path, help="plan JSON file (default stdout)")

    e = sub.add_parser("experiment", help="run a batch and write CSV plus figures")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", type=Path, help="experiment spec JSON file")
    src.add_argument("--default", action="store_true", help="use the built-in desk-scale sweep")
    e.add_argument("--trials", type=int, help="override trial count")
    e.add_argument("--full", action="store_true", help="run the full 100-trial protocol")
    e.add_argument("--out-csv", type=Path, required=True)
    e.add_argument("--plots-dir", type=Path, help="figure directory (default: next to the CSV)")
    e.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    e.add_argument("--verbose-columns", action="store_true",
                   help="add deployment hash and error columns")
    e.add_argument("--no-wall-time", action="store_true",
                   help="write wall_time_s as 0 for byte-stable reruns")
    _add_config_flags(e)

    return parser


def _cmd_generate(args) -> int:
    dep = uniform_random_deployment(args.seed, args.n, BeltRegion(args.length, args.width), args.rs)
    if args.out:
        write_deployment(dep, args.out)
        print(f"wrote {args.out} ({dep.n} sensors)")
    else:
        sys.stdout.write(deployment_to_json(dep))
    return 0


def _cmd_run(args) -> int:
    dep = read_deployment(args.deployment)
    overrides = _config_overrides(args)
    if args.frames_dir is not None:
        overrides["frame_every"] = args.frame_every
    cfg = AlgoConfig.defaults(dep.rs, **overrides)
    result = run_formation(dep, cfg)
    doc = {
        "barrier_formed": result.barrier_formed,
        "iterations": result.iterations_used,
        "avg_displacement": result.avg_displacement,
        "max_displacement": result.max_displacement,
        "final_positions": {str(i): list(p) for i, p in sorted(result.final_positions.items())},
    }
    if args.out:
        args.out.write_text(json.dumps(doc, indent=2) + "\n")
    else:
        print(json.dumps({k: doc[k] for k in
                          ("barrier_formed", "iterations", "avg_displacement", "max_displacement")}))
    if args.frames_dir is not None:
        paths = emit_svg_frames(result, dep, args.frames_dir)
        print(f"wrote {len(paths)} frames to {args.frames_dir}")
    if args.out:
        print(f"barrier formed in {result.iterations_used} iterations; "
              f"avg {result.avg_displacement:.4g} m, max {result.max_displacement:.4g} m")
    return 0


def _cmd_check(args) -> int:
    dep = read_deployment(args.deployment)
    report = strong_barrier_covered(dep.initial_positions(), dep.rs, dep.belt, tol=args.tol)
    print(f"covered: {'true' if report.covered else 'false'}")
    if report.covered:
        print("witness: " + " ".join(str(i) for i in report.witness))
    else:
        print(f"gap_x: {report.gap_x:.6g}")
    return 0


def _cmd_baseline(args) -> int:
    dep = read_deployment(args.deployment)
    plan, result = plan_linear_barrier(dep, args.objective)
    doc = {
        "objective": plan.objective,
        "barrier_y": plan.barrier_y,
        "slots": list(plan.slots),
        "assignment": {str(k): v for k, v in sorted(plan.assignment.items())},
        "cost": plan.cost,
        "avg_displacement": result.avg_displacement,
        "max_displacement": result.max_displacement,
        "covered": result.barrier_formed,
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        args.out.write_text(text)
        print(f"baseline avg {result.avg_displacement:.4g} m, max {result.max_displacement:.4g} m")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_experiment(args) -> int:
    if args.spec:
        spec = ExperimentSpec.from_json(args.spec.read_text())
    else:
        spec = default_spec()
    if args.full:
        spec = dataclasses.replace(spec, trials=100)
    if args.trials is not None:
        spec = dataclasses.replace(spec, trials=args.trials)
    rows = run_experiment(
        spec,
        config_overrides=_config_overrides(args),
        measure_time=not args.no_wall_time,
    )
    args.out_csv.parent.mkdir(parents=True, exist_ok=True)
    write_rows_csv(rows, args.out_csv, verbose=args.verbose_columns)
    # Summary is computed from the file just written, so re-deriving it from
    # the CSV reproduces it exactly.
    summary = aggregate_summary(read_rows_csv(args.out_csv))
    print(f"wrote {args.out_csv} ({len(rows)} rows)")
    for (alg, n), stat in summary.items():
        print(f"{alg} n={n}: mean avg {stat.mean_avg:.6g} m, mean max {stat.mean_max:.6g} m "
              f"({stat.successes} ok, {stat.failures} failed)")
    if not args.no_plots:
        from .plots import displacement_figures

        plots_dir = args.plots_dir if args.plots_dir else args.out_csv.parent
        for p in displacement_figures(rows, plots_dir):
            print(f"wrote {p}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "run": _cmd_run,
    "check": _cmd_check,
    "baseline": _cmd_baseline,
    "experiment": _cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ChainBarrierError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "OSError", "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
