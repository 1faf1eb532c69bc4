"""Experiment campaigns: capacity/deadline sweeps, scaling, sensitivity.

Campaigns are deterministic given their seed lists; anything wall-clock
dependent (solver timings and the distributed-time estimate derived from
them) is kept out of the main CSVs and written to a separate timing file
so reruns of the same seeds produce byte-identical result files.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .centralized import ContinuousAllocation, solve_reduced
from .errors import DeadlineInfeasibleError, InfeasibleError, InvalidParameterError
from .game import EquilibriumResult, LoopConfig, estimate_distributed_time, run_best_reply
from .generator import GeneratorConfig, generate
from .model import ProblemInstance
from .rounding import round_solution

DEFAULT_N_VALUES = tuple(range(20, 501, 20))
DEFAULT_EPSILONS = (0.01, 0.03, 0.05, 0.10)


@dataclass(frozen=True)
class ScenarioRow:
    """One sweep step: the swept value, both costs and their gap."""

    sweep_value: float
    cost_centralized: float | None
    cost_distributed: float | None
    penalty_total: float | None
    iterations: int | None
    feasible: bool
    chi: float | None


@dataclass(frozen=True)
class QualityRun:
    """One (N, seed) cell of a scaling or sensitivity campaign."""

    n: int
    seed: int
    epsilon_bar: float
    cost_centralized: float
    cost_distributed: float
    chi: float
    iterations: int
    converged: bool
    centralized_seconds: float
    game_serial_seconds: float
    distributed_estimate_seconds: float


@dataclass(frozen=True)
class QualityAggregate:
    """Per-(N, epsilon) averages over seeds."""

    n: int
    epsilon_bar: float
    mean_cost_centralized: float
    mean_cost_distributed: float
    mean_chi: float
    max_chi: float
    mean_iterations: float
    all_converged: bool
    mean_centralized_seconds: float
    mean_game_serial_seconds: float
    mean_distributed_estimate_seconds: float


@dataclass(frozen=True)
class CampaignCapacity:
    """Capacity rule for generated campaign instances: a multiple of the
    full-concurrency demand sum(rUp), or a fraction of the spare band
    between sum(rLow) and sum(rUp)."""

    multiple: float | None = None
    spare_fraction: float | None = None

    def __post_init__(self) -> None:
        if (self.multiple is None) == (self.spare_fraction is None):
            raise InvalidParameterError(
                "set exactly one of multiple and spare_fraction"
            )

    def capacity(self, instance: ProblemInstance) -> float:
        if self.multiple is not None:
            return self.multiple * instance.r_up_total
        lo, up = instance.r_low_total, instance.r_up_total
        return lo + self.spare_fraction * (up - lo)


def chi_gap(cost_distributed: float, cost_centralized: float) -> float:
    """Relative cost gap (distributed - centralized) / centralized."""
    return (cost_distributed - cost_centralized) / cost_centralized


def report_shares(allocation: ContinuousAllocation) -> tuple[float, ...]:
    """Fraction of the allocated pool each class holds; sums to one."""
    total = sum(row.r for row in allocation.per_class)
    if total <= 0:
        raise InvalidParameterError("no VMs allocated, shares undefined")
    return tuple(row.r / total for row in allocation.per_class)


def _solve_both(
    instance: ProblemInstance, loop: LoopConfig
) -> tuple[float, float, float, int, EquilibriumResult]:
    report = solve_reduced(instance)
    equilibrium = run_best_reply(instance, loop)
    round_solution(report.allocation, instance)
    round_solution(equilibrium.allocation, instance)
    cc = report.allocation.objective
    cd = equilibrium.distributed_cost_value
    return cc, cd, report.allocation.penalty_cost, equilibrium.iterations, equilibrium


def run_decreasing_capacity(
    instance: ProblemInstance,
    step: float = 0.05,
    loop: LoopConfig | None = None,
) -> list[ScenarioRow]:
    """Sweep capacity down from 1.1x the full-concurrency demand.

    Each step solves both ways and rounds both solutions; the sweep
    walks through the penalty region and stops after the first step
    whose capacity falls below the aggregate minimum (emitted with
    ``feasible=False``).
    """
    if step <= 0:
        raise InvalidParameterError("step must be positive")
    loop = loop or LoopConfig()
    r_opt = instance.r_up_total
    rows: list[ScenarioRow] = []
    k = 0
    while True:
        R = (1.1 - k * step) * r_opt
        if R <= 0:
            break
        swept = instance.with_capacity(R)
        if not swept.feasible:
            rows.append(
                ScenarioRow(
                    sweep_value=R,
                    cost_centralized=None,
                    cost_distributed=None,
                    penalty_total=None,
                    iterations=None,
                    feasible=False,
                    chi=None,
                )
            )
            break
        cc, cd, penalty, iters, _ = _solve_both(swept, loop)
        rows.append(
            ScenarioRow(
                sweep_value=R,
                cost_centralized=cc,
                cost_distributed=cd,
                penalty_total=penalty,
                iterations=iters,
                feasible=True,
                chi=chi_gap(cd, cc),
            )
        )
        k += 1
    return rows


def run_decreasing_deadlines(
    instance: ProblemInstance,
    step: float = 0.05,
    loop: LoopConfig | None = None,
) -> list[ScenarioRow]:
    """Tighten all deadlines by a decreasing factor at fixed capacity.

    Capacity is pinned to 1.1x the demand at the original deadlines;
    every step re-derives the per-class constants (K, and with it the
    resource bounds and per-VM penalty, all grow as deadlines shrink).
    Stops after the first factor that leaves a class unable to finish on
    time or pushes the aggregate minimum past the capacity.
    """
    if step <= 0:
        raise InvalidParameterError("step must be positive")
    loop = loop or LoopConfig()
    R = 1.1 * instance.r_up_total
    base = instance.with_capacity(R)
    rows: list[ScenarioRow] = []
    k = 0
    while True:
        factor = 1.0 - k * step
        if factor <= 0:
            break
        try:
            swept = ProblemInstance.from_specs(
                base.cluster,
                [replace(c.spec, D=factor * c.spec.D) for c in base.classes],
            )
            swept.require_feasible()
        except (DeadlineInfeasibleError, InfeasibleError):
            rows.append(
                ScenarioRow(
                    sweep_value=factor,
                    cost_centralized=None,
                    cost_distributed=None,
                    penalty_total=None,
                    iterations=None,
                    feasible=False,
                    chi=None,
                )
            )
            break
        cc, cd, penalty, iters, _ = _solve_both(swept, loop)
        rows.append(
            ScenarioRow(
                sweep_value=factor,
                cost_centralized=cc,
                cost_distributed=cd,
                penalty_total=penalty,
                iterations=iters,
                feasible=True,
                chi=chi_gap(cd, cc),
            )
        )
        k += 1
    return rows


def run_quality_campaign(
    n_values: Sequence[int],
    seeds: Sequence[int],
    epsilon_bars: Sequence[float] = (0.03,),
    lam: float = 0.05,
    max_iterations: int = 1000,
    capacity: CampaignCapacity | None = None,
    per_message_seconds: float = 0.0,
) -> tuple[list[QualityRun], list[QualityAggregate]]:
    """Solve generated instances both ways over an (N, seed, eps) grid.

    The same (N, seed) instance is reused for every tolerance so the
    sensitivity series are directly comparable.
    """
    capacity = capacity or CampaignCapacity(multiple=0.9)
    runs: list[QualityRun] = []
    aggregates: list[QualityAggregate] = []
    for n in n_values:
        instances = []
        for seed in seeds:
            inst = generate(GeneratorConfig(n=n, seed=seed))
            instances.append((seed, inst.with_capacity(capacity.capacity(inst))))
        for eps in epsilon_bars:
            loop = LoopConfig(epsilon_bar=eps, lam=lam, max_iterations=max_iterations)
            cell: list[QualityRun] = []
            for seed, inst in instances:
                t0 = time.perf_counter()
                report = solve_reduced(inst)
                t1 = time.perf_counter()
                eq = run_best_reply(inst, loop)
                cc = report.allocation.objective
                cd = eq.distributed_cost_value
                cell.append(
                    QualityRun(
                        n=n,
                        seed=seed,
                        epsilon_bar=eps,
                        cost_centralized=cc,
                        cost_distributed=cd,
                        chi=chi_gap(cd, cc),
                        iterations=eq.iterations,
                        converged=eq.converged,
                        centralized_seconds=t1 - t0,
                        game_serial_seconds=eq.serial_seconds,
                        distributed_estimate_seconds=estimate_distributed_time(
                            eq.serial_seconds, n, eq.iterations, per_message_seconds
                        ),
                    )
                )
            runs.extend(cell)
            m = len(cell)
            aggregates.append(
                QualityAggregate(
                    n=n,
                    epsilon_bar=eps,
                    mean_cost_centralized=sum(r.cost_centralized for r in cell) / m,
                    mean_cost_distributed=sum(r.cost_distributed for r in cell) / m,
                    mean_chi=sum(r.chi for r in cell) / m,
                    max_chi=max(r.chi for r in cell),
                    mean_iterations=sum(r.iterations for r in cell) / m,
                    all_converged=all(r.converged for r in cell),
                    mean_centralized_seconds=sum(r.centralized_seconds for r in cell) / m,
                    mean_game_serial_seconds=sum(r.game_serial_seconds for r in cell) / m,
                    mean_distributed_estimate_seconds=sum(
                        r.distributed_estimate_seconds for r in cell
                    )
                    / m,
                )
            )
    return runs, aggregates


def run_scalability(
    seeds: Sequence[int],
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    epsilon_bar: float = 0.03,
    lam: float = 0.05,
    capacity: CampaignCapacity | None = None,
    per_message_seconds: float = 0.0,
) -> tuple[list[QualityRun], list[QualityAggregate]]:
    """Scaling campaign at a single tolerance."""
    return run_quality_campaign(
        n_values,
        seeds,
        epsilon_bars=(epsilon_bar,),
        lam=lam,
        capacity=capacity,
        per_message_seconds=per_message_seconds,
    )


def run_sensitivity(
    seeds: Sequence[int],
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    epsilon_bars: Sequence[float] = DEFAULT_EPSILONS,
    lam: float = 0.05,
    capacity: CampaignCapacity | None = None,
) -> tuple[list[QualityRun], list[QualityAggregate]]:
    """Repeat the scaling campaign across stopping tolerances."""
    return run_quality_campaign(
        n_values, seeds, epsilon_bars=epsilon_bars, lam=lam, capacity=capacity
    )


# ---------------------------------------------------------------------------
# CSV emission


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    timestamp: bool = True,
) -> None:
    lines = []
    if timestamp:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat()}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


SCENARIO_COLUMNS = (
    "sweepValue",
    "costCentralized",
    "costDistributed",
    "penaltyTotal",
    "iterations",
    "feasible",
    "chi",
)


def write_scenario_csv(rows: Sequence[ScenarioRow], path: str | Path) -> None:
    _write_csv(
        path,
        SCENARIO_COLUMNS,
        (
            (
                r.sweep_value,
                r.cost_centralized,
                r.cost_distributed,
                r.penalty_total,
                r.iterations,
                r.feasible,
                r.chi,
            )
            for r in rows
        ),
    )


def write_aggregate_csv(aggregates: Sequence[QualityAggregate], path: str | Path) -> None:
    _write_csv(
        path,
        (
            "n",
            "epsilonBar",
            "meanCostCentralized",
            "meanCostDistributed",
            "meanChi",
            "maxChi",
            "meanIterations",
            "allConverged",
        ),
        (
            (
                a.n,
                a.epsilon_bar,
                a.mean_cost_centralized,
                a.mean_cost_distributed,
                a.mean_chi,
                a.max_chi,
                a.mean_iterations,
                a.all_converged,
            )
            for a in aggregates
        ),
    )


def write_runs_csv(runs: Sequence[QualityRun], path: str | Path) -> None:
    _write_csv(
        path,
        (
            "n",
            "seed",
            "epsilonBar",
            "costCentralized",
            "costDistributed",
            "chi",
            "iterations",
            "converged",
        ),
        (
            (
                r.n,
                r.seed,
                r.epsilon_bar,
                r.cost_centralized,
                r.cost_distributed,
                r.chi,
                r.iterations,
                r.converged,
            )
            for r in runs
        ),
    )


def write_timings_csv(aggregates: Sequence[QualityAggregate], path: str | Path) -> None:
    """Wall-clock columns live here, away from the deterministic files."""
    _write_csv(
        path,
        (
            "n",
            "epsilonBar",
            "meanCentralizedSeconds",
            "meanGameSerialSeconds",
            "meanDistributedEstimateSeconds",
        ),
        (
            (
                a.n,
                a.epsilon_bar,
                a.mean_centralized_seconds,
                a.mean_game_serial_seconds,
                a.mean_distributed_estimate_seconds,
            )
            for a in aggregates
        ),
    )


def write_trace_csv(result: EquilibriumResult, path: str | Path) -> None:
    _write_csv(
        path,
        ("iteration", "epsilon", "price", "totalAllocated", "numRejectingClasses"),
        (
            (t.iteration, t.epsilon, t.price, t.total_allocated, t.num_rejecting)
            for t in result.trace
        ),
    )


def write_xy_series(
    rows: Sequence[ScenarioRow], directory: str | Path
) -> list[Path]:
    """Plot-ready two-column files, one per cost series."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, pick in (
        ("costCentralized", lambda r: r.cost_centralized),
        ("costDistributed", lambda r: r.cost_distributed),
        ("penaltyTotal", lambda r: r.penalty_total),
    ):
        path = directory / f"{name}.xy"
        lines = [
            f"{_fmt(r.sweep_value)} {_fmt(pick(r))}"
            for r in rows
            if pick(r) is not None
        ]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
