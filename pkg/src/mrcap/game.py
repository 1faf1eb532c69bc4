"""Iterated negotiation between the resource manager and class managers.

Each round the resource manager reprices and reallocates against the
current bids, every class manager best-responds to its assignment in
parallel, and managers still rejecting jobs raise their bids.  The loop
stops when the summed relative change of the allocations falls below the
tolerance.  Bids are non-decreasing and capped, and the manager's solve
is deterministic for fixed bids, so the loop always reaches a fixed
point; the iteration cap is a safety net, not the expected exit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from .centralized import ContinuousAllocation, build_allocation
from .class_manager import respond, update_bid
from .errors import InvalidParameterError
from .model import ProblemInstance
from .resource_manager import solve_rm


@dataclass(frozen=True)
class LoopConfig:
    """Stopping tolerance, bid increment fraction and iteration cap."""

    epsilon_bar: float = 0.03
    lam: float = 0.05
    max_iterations: int = 1000

    def __post_init__(self) -> None:
        if self.epsilon_bar <= 0:
            raise InvalidParameterError("epsilon_bar must be positive")
        if not 0.0 < self.lam < 1.0:
            raise InvalidParameterError("lam must be in (0,1)")
        if self.max_iterations < 1:
            raise InvalidParameterError("max_iterations must be at least 1")


@dataclass(frozen=True)
class IterationTrace:
    """One row of the per-iteration trace."""

    iteration: int
    epsilon: float
    price: float
    total_allocated: float
    num_rejecting: int


@dataclass(frozen=True)
class EquilibriumResult:
    """Converged allocation plus the negotiation trail."""

    allocation: ContinuousAllocation
    bids: tuple[float, ...]
    price: float
    iterations: int
    epsilon_trace: tuple[float, ...]
    converged: bool
    distributed_cost_value: float
    trace: tuple[IterationTrace, ...]
    serial_seconds: float


def convergence_metric(r: Sequence[float], r_old: Sequence[float]) -> float:
    """Sum of per-class relative allocation changes."""
    return sum(abs(a - b) / b for a, b in zip(r, r_old))


def distributed_cost(result: EquilibriumResult, instance: ProblemInstance) -> float:
    """Total cost of an equilibrium: penalties plus energy at unit cost.

    This is the same expression the centralized objective evaluates, so
    the two approaches are directly comparable.
    """
    return _allocation_cost(result.allocation, instance)


def _allocation_cost(allocation: ContinuousAllocation, instance: ProblemInstance) -> float:
    rho_bar = instance.cluster.rhoBar
    total = 0.0
    for planned, row in zip(instance.classes, allocation.per_class):
        d = planned.derived
        total += d.alpha * (row.psi - d.psiLow) + rho_bar * row.r
    return total


def estimate_distributed_time(
    serial_seconds: float, n: int, iterations: int, per_message_seconds: float = 0.0
) -> float:
    """Estimated wall time of a truly distributed run.

    The serial time divides by the number of managers (their responses
    run concurrently) and each iteration pays one message round trip.
    No default network figure is assumed; pass a measured value.
    """
    if n < 1:
        raise InvalidParameterError("need at least one class manager")
    return serial_seconds / n + iterations * per_message_seconds


def run_best_reply(
    instance: ProblemInstance, config: LoopConfig | None = None
) -> EquilibriumResult:
    """Run the negotiation to a fixed point.

    Starts from the guaranteed minima with every bid at the unit cost,
    and alternates manager solves with parallel class responses until
    the relative-change metric drops below ``epsilon_bar``.  Raises
    ``InfeasibleError`` before the first iteration when the minima do
    not fit the cluster.
    """
    if config is None:
        config = LoopConfig()
    instance.require_feasible()
    started = time.perf_counter()

    rho_bar = instance.cluster.rhoBar
    classes = instance.classes
    r = [c.derived.rLow for c in classes]
    bids = [rho_bar] * instance.n
    price = rho_bar
    eps_trace: list[float] = []
    trace: list[IterationTrace] = []
    converged = False
    iterations = 0

    for iteration in range(1, config.max_iterations + 1):
        iterations = iteration
        r_old = r
        rm = solve_rm(instance, bids)
        price = rm.rho
        r = list(rm.r)

        rejecting = 0
        for i, planned in enumerate(classes):
            state = respond(
                planned.derived, planned.spec.id, r[i], bids[i], planned.spec.rhoUp
            )
            if state.rejecting:
                rejecting += 1
                bids[i] = update_bid(state, price, config.lam)

        epsilon = convergence_metric(r, r_old)
        eps_trace.append(epsilon)
        trace.append(
            IterationTrace(
                iteration=iteration,
                epsilon=epsilon,
                price=price,
                total_allocated=sum(r),
                num_rejecting=rejecting,
            )
        )
        if epsilon < config.epsilon_bar:
            converged = True
            break

    allocation = build_allocation(instance, r)
    return EquilibriumResult(
        allocation=allocation,
        bids=tuple(bids),
        price=price,
        iterations=iterations,
        epsilon_trace=tuple(eps_trace),
        converged=converged,
        distributed_cost_value=_allocation_cost(allocation, instance),
        trace=tuple(trace),
        serial_seconds=time.perf_counter() - started,
    )
