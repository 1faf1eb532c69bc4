"""Command-line interface.

Subcommands cover the full pipeline: ``generate`` an instance file,
``solve-centralized`` / ``solve-game`` it, ``round`` a continuous
solution, and run the ``scenario``, ``scalability`` and ``sensitivity``
campaigns.  Failures exit nonzero with a one-line JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .centralized import (
    CentralizedReport,
    ClassAllocation,
    ContinuousAllocation,
    solve_reduced,
)
from .errors import InvalidParameterError, MrcapError
from .game import EquilibriumResult, LoopConfig, run_best_reply
from .generator import (
    CapacityRule,
    GeneratorConfig,
    apply_penalties,
    calibrate_penalties,
    generate,
)
from .io import load_instance, save_instance
from .model import ProblemInstance, validate_instance
from .rounding import check_integer_feasibility, round_solution


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _per_class_rows(allocation: ContinuousAllocation) -> list[dict]:
    return [
        {"id": c.id, "r": c.r, "psi": c.psi, "sM": c.sM, "sR": c.sR}
        for c in allocation.per_class
    ]


def _centralized_doc(report: CentralizedReport) -> dict:
    return {
        "objective": report.allocation.objective,
        "energyCost": report.allocation.energy_cost,
        "penaltyCost": report.allocation.penalty_cost,
        "capacityDual": report.capacity_dual,
        "kktResidual": report.kkt,
        "feasible": report.feasible,
        "bisectionIterations": report.bisection_iterations,
        "perClass": _per_class_rows(report.allocation),
    }


def _game_doc(result: EquilibriumResult) -> dict:
    doc = {
        "distributedCost": result.distributed_cost_value,
        "energyCost": result.allocation.energy_cost,
        "penaltyCost": result.allocation.penalty_cost,
        "price": result.price,
        "iterations": result.iterations,
        "converged": result.converged,
        "epsilonTrace": list(result.epsilon_trace),
        "perClass": _per_class_rows(result.allocation),
    }
    for row, bid in zip(doc["perClass"], result.bids):
        row["bid"] = bid
    return doc


def _load_allocation(path: str, instance: ProblemInstance) -> ContinuousAllocation:
    doc = json.loads(Path(path).read_text())
    try:
        rows = {rec["id"]: rec for rec in doc["perClass"]}
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"malformed allocation document: {exc}") from exc
    per_class = []
    for planned in instance.classes:
        cid = planned.spec.id
        if cid not in rows:
            raise InvalidParameterError(f"allocation is missing class {cid}")
        rec = rows[cid]
        per_class.append(
            ClassAllocation(
                id=cid,
                r=float(rec["r"]),
                psi=float(rec.get("psi", 0.0)),
                sM=float(rec["sM"]),
                sR=float(rec["sR"]),
            )
        )
    # cost split is irrelevant for rounding; zeros keep the type honest
    return ContinuousAllocation(
        per_class=tuple(per_class), energy_cost=0.0, penalty_cost=0.0
    )


def _require_valid(instance: ProblemInstance) -> None:
    report = validate_instance(instance)
    if not report.ok:
        details = "; ".join(
            f"{i.class_id or 'cluster'}: {i.message}" for i in report.issues
        )
        if not report.capacity_feasible:
            details = (
                f"minimum demand {report.required_minimum:.6g} VMs exceeds "
                f"capacity {report.capacity:.6g}"
                + (f"; {details}" if details else "")
            )
        raise InvalidParameterError(f"invalid instance: {details}")


def _loop_config(args: argparse.Namespace) -> LoopConfig:
    return LoopConfig(
        epsilon_bar=args.epsilon, lam=args.lam, max_iterations=args.max_iter
    )


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text}")


def _campaign_capacity(args: argparse.Namespace) -> experiments.CampaignCapacity:
    if args.spare_fraction is not None:
        return experiments.CampaignCapacity(spare_fraction=args.spare_fraction)
    return experiments.CampaignCapacity(multiple=args.capacity_multiple)


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.capacity is not None:
        rule = CapacityRule(multiple=None, explicit=args.capacity)
    else:
        rule = CapacityRule(multiple=args.capacity_multiple)
    instance = generate(GeneratorConfig(n=args.n, seed=args.seed, capacity=rule))
    if args.calibrate_penalties:
        instance = apply_penalties(instance, calibrate_penalties(instance))
    save_instance(instance, args.out)
    return 0


def _cmd_solve_centralized(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    _require_valid(instance)
    report = solve_reduced(instance)
    _write_json(_centralized_doc(report), args.out)
    return 0


def _cmd_solve_game(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    _require_valid(instance)
    result = run_best_reply(instance, _loop_config(args))
    _write_json(_game_doc(result), args.out)
    if args.trace:
        experiments.write_trace_csv(result, args.trace)
    return 0


def _cmd_round(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    continuous = _load_allocation(args.allocation, instance)
    integer = round_solution(continuous, instance)
    audit = check_integer_feasibility(integer, instance)
    doc = {
        "perClass": [
            {
                "id": row.id,
                "r": row.r,
                "sM": row.sM,
                "sR": row.sR,
                "h": row.h,
                "deadlineSlack": slack,
            }
            for row, slack in zip(integer.per_class, audit.deadline_slack)
        ],
        "counters": {
            "rDecrements": integer.r_decrements,
            "slotIterations": {
                row.id: row.slot_iterations for row in integer.per_class
            },
        },
        "violations": list(audit.violations),
        "belowMinimum": list(audit.below_minimum),
    }
    _write_json(doc, args.out)
    return 0


def _cmd_scenario(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    _require_valid(instance)
    loop = _loop_config(args)
    if args.kind == "capacity":
        rows = experiments.run_decreasing_capacity(instance, step=args.step, loop=loop)
    else:
        rows = experiments.run_decreasing_deadlines(instance, step=args.step, loop=loop)
    experiments.write_scenario_csv(rows, args.out)
    if args.xy_dir:
        experiments.write_xy_series(rows, args.xy_dir)
    return 0


def _cmd_scalability(args: argparse.Namespace) -> int:
    runs, aggregates = experiments.run_scalability(
        seeds=args.seeds,
        n_values=args.n_list or experiments.DEFAULT_N_VALUES,
        epsilon_bar=args.epsilon,
        lam=args.lam,
        capacity=_campaign_capacity(args),
        per_message_seconds=args.per_message,
    )
    experiments.write_aggregate_csv(aggregates, args.out)
    if args.runs_out:
        experiments.write_runs_csv(runs, args.runs_out)
    if args.timings_out:
        experiments.write_timings_csv(aggregates, args.timings_out)
    return 0


def _cmd_sensitivity(args: argparse.Namespace) -> int:
    runs, aggregates = experiments.run_sensitivity(
        seeds=args.seeds,
        n_values=args.n_list or experiments.DEFAULT_N_VALUES,
        epsilon_bars=args.epsilons,
        lam=args.lam,
        capacity=_campaign_capacity(args),
    )
    experiments.write_aggregate_csv(aggregates, args.out)
    if args.runs_out:
        experiments.write_runs_csv(runs, args.runs_out)
    return 0


def _add_loop_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, default=0.03,
                        help="stopping tolerance on the summed relative change")
    parser.add_argument("--lambda", dest="lam", type=float, default=0.05,
                        help="bid increment as a fraction of the bid ceiling")
    parser.add_argument("--max-iter", type=int, default=1000)


def _add_campaign_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seeds", type=_int_list, required=True,
                        help="comma-separated seed list, e.g. 0,1,2")
    parser.add_argument("--n-list", type=_int_list, default=None,
                        help="class counts to run (default 20..500 step 20)")
    parser.add_argument("--capacity-multiple", type=float, default=0.9,
                        help="cluster size as a multiple of sum(rUp)")
    parser.add_argument("--spare-fraction", type=float, default=None,
                        help="cluster size as sum(rLow) + fraction of the spare band")
    parser.add_argument("--runs-out", default=None, help="also write per-run rows")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrcap",
        description="Admission control and capacity allocation for "
        "multi-class MapReduce clusters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a seeded random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--capacity-multiple", type=float, default=1.1)
    p.add_argument("--capacity", type=float, default=None,
                   help="explicit VM capacity (overrides the multiple)")
    p.add_argument("--calibrate-penalties", action="store_true",
                   help="replace drawn penalties with 100x the average job cost")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve-centralized", help="solve the pooled plan exactly")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve_centralized)

    p = sub.add_parser("solve-game", help="run the price negotiation to equilibrium")
    p.add_argument("--instance", required=True)
    _add_loop_flags(p)
    p.add_argument("--trace", default=None, help="write a per-iteration CSV here")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_solve_game)

    p = sub.add_parser("round", help="round a continuous solution to integers")
    p.add_argument("--instance", required=True)
    p.add_argument("--allocation", required=True,
                   help="JSON produced by solve-centralized or solve-game")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_round)

    p = sub.add_parser("scenario", help="capacity or deadline sweep")
    p.add_argument("kind", choices=("capacity", "deadline"))
    p.add_argument("--instance", required=True)
    p.add_argument("--step", type=float, default=0.05)
    _add_loop_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--xy-dir", default=None, help="also write plot-ready xy files")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("scalability", help="cost and timing vs class count")
    _add_campaign_flags(p)
    p.add_argument("--epsilon", type=float, default=0.03)
    p.add_argument("--lambda", dest="lam", type=float, default=0.05)
    p.add_argument("--per-message", type=float, default=0.0,
                   help="measured per-iteration network delay in seconds")
    p.add_argument("--timings-out", default=None,
                   help="write wall-clock columns to this separate CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scalability)

    p = sub.add_parser("sensitivity", help="repeat scaling across tolerances")
    _add_campaign_flags(p)
    p.add_argument("--epsilons", type=lambda s: [float(x) for x in s.split(",")],
                   default=list(experiments.DEFAULT_EPSILONS))
    p.add_argument("--lambda", dest="lam", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sensitivity)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MrcapError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
