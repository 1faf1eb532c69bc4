"""Price setting and VM allocation against the received bids.

The resource manager maximises virtual revenue minus shortfall penalties

    sum_i (rho - rhoBar)*r_i  -  sum_i p_i*(rUp_i - r_i)

over the posted price ``rho``, eligibility flags and allocations.  A
class is eligible for more than its guaranteed minimum exactly when its
bid matches or beats the posted price (big-M constraints with M equal to
the global price cap).  For a fixed price the objective is linear in r
with positive coefficients ``rho - rhoBar + p_i``, so the allocation is
a continuous knapsack solved greedily in decreasing ``p_i``; and for a
fixed eligibility set the objective increases with the price, so the
optimal price sits on a bid value or on one of the interval ends.  The
solver therefore enumerates the candidate prices {rhoBar} + bids +
{price cap} exactly.

``brute_force_rm`` is the verification oracle: it enumerates all 2^N
eligibility patterns and searches the price range of each, so it never
relies on the candidate-price argument above.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidBidError, InvalidParameterError
from .model import ProblemInstance

#: relative slack accepted when validating bids against their bounds
_BID_TOL = 1e-9


@dataclass(frozen=True)
class RmSolution:
    """Posted price, eligibility flags, allocations and objective value."""

    r: tuple[float, ...]
    y: tuple[bool, ...]
    rho: float
    objective: float


def price_cap(instance: ProblemInstance) -> float:
    """Largest price the manager may post: the highest bid ceiling."""
    return max(c.spec.rhoUp for c in instance.classes)


def rm_objective(solution: RmSolution, instance: ProblemInstance) -> float:
    """Evaluate the revenue-minus-shortfall objective of a solution."""
    rho_bar = instance.cluster.rhoBar
    total = 0.0
    for planned, ri in zip(instance.classes, solution.r):
        total += (solution.rho - rho_bar) * ri
        total -= planned.derived.p * (planned.derived.rUp - ri)
    return total


def _check_bids(instance: ProblemInstance, bids: Sequence[float]) -> None:
    if len(bids) != instance.n:
        raise InvalidParameterError(
            f"expected {instance.n} bids, got {len(bids)}"
        )
    rho_bar = instance.cluster.rhoBar
    for planned, b in zip(instance.classes, bids):
        up = planned.spec.rhoUp
        if b < rho_bar * (1.0 - _BID_TOL) or b > up * (1.0 + _BID_TOL):
            raise InvalidBidError(
                f"class {planned.spec.id}: bid {b} outside [{rho_bar}, {up}]"
            )


def solve_rm(instance: ProblemInstance, bids: Sequence[float]) -> RmSolution:
    """Globally optimal price and allocation for the given bids.

    Ties are broken toward eligibility (a bid equal to the price still
    buys extra capacity), toward the lower of equally good prices, and
    inside the greedy toward earlier classes; this keeps repeated solves
    with the same bids bit-identical, which the negotiation loop's
    convergence test relies on.
    """
    instance.require_feasible()
    _check_bids(instance, bids)

    rho_bar = instance.cluster.rhoBar
    R = instance.cluster.R
    bids_arr = np.asarray(bids, dtype=float)
    d = [c.derived for c in instance.classes]
    r_low = np.array([x.rLow for x in d])
    r_up = np.array([x.rUp for x in d])
    p = np.array([x.p for x in d])
    ids = np.array([c.spec.id for c in instance.classes])
    spare = R - float(r_low.sum())

    # fill order: decreasing p, ties broken by class id
    order = np.lexsort((ids, -p))
    headroom = (r_up - r_low)[order]

    rho_hat = price_cap(instance)
    candidates = np.unique(np.concatenate((bids_arr, [rho_bar, rho_hat])))
    candidates = candidates[(candidates >= rho_bar) & (candidates <= rho_hat)]

    best: tuple[float, np.ndarray, np.ndarray, float] | None = None
    for rho in candidates:
        eligible = bids_arr >= rho
        cap = np.where(eligible[order], headroom, 0.0)
        used_before = np.cumsum(cap) - cap
        give = np.clip(spare - used_before, 0.0, cap)
        r = r_low.copy()
        r[order] += give
        # a fully served class lands exactly on its upper bound
        full = (cap > 0.0) & (give >= cap)
        r[order[full]] = r_up[order[full]]
        objective = float(((rho - rho_bar) * r - p * (r_up - r)).sum())
        if best is None or objective > best[3]:
            best = (float(rho), r, eligible, objective)

    assert best is not None
    rho, r, eligible, objective = best
    return RmSolution(
        r=tuple(float(x) for x in r),
        y=tuple(bool(x) for x in eligible),
        rho=rho,
        objective=objective,
    )


def brute_force_rm(
    instance: ProblemInstance,
    bids: Sequence[float],
    price_grid_step: float | None = None,
) -> RmSolution:
    """Exhaustive reference solution for small instances (N <= 12).

    Every eligibility pattern is enumerated; for each one the compatible
    price interval is derived from the big-M constraints and searched
    over its ends, the bids inside it and a uniform safety grid of step
    ``price_grid_step`` (defaulting to 1/16 of the price range).  The
    allocation for a fixed pattern and price is the greedy fill, which
    is exact for a linear objective over a box plus one capacity bound.
    """
    instance.require_feasible()
    _check_bids(instance, bids)
    n = instance.n
    if n > 12:
        raise InvalidParameterError("brute force is limited to 12 classes")

    rho_bar = instance.cluster.rhoBar
    rho_hat = price_cap(instance)
    if price_grid_step is None:
        price_grid_step = max((rho_hat - rho_bar) / 16.0, 1e-9)
    R = instance.cluster.R
    d = [c.derived for c in instance.classes]

    ids = [c.spec.id for c in instance.classes]

    def fill(caps: list[float]) -> list[float]:
        r = [x.rLow for x in d]
        spare = R - sum(r)
        for i in sorted(range(n), key=lambda i: (-d[i].p, ids[i])):
            headroom = caps[i] - r[i]
            give = min(spare, headroom)
            if give > 0:
                r[i] = caps[i] if give >= headroom else r[i] + give
                spare -= give
        return r

    best: RmSolution | None = None
    for pattern in itertools.product((False, True), repeat=n):
        lo = rho_bar
        hi = rho_hat
        for i, flag in enumerate(pattern):
            if flag:
                hi = min(hi, bids[i])
            else:
                lo = max(lo, bids[i])
        if lo > hi:
            continue
        prices = {lo, hi}
        prices.update(b for b in bids if lo <= b <= hi)
        steps = int(math.floor((hi - lo) / price_grid_step))
        prices.update(lo + k * price_grid_step for k in range(1, steps + 1))
        caps = [d[i].rUp if pattern[i] else d[i].rLow for i in range(n)]
        r = fill(caps)
        for rho in sorted(prices):
            objective = sum(
                (rho - rho_bar) * r[i] - d[i].p * (d[i].rUp - r[i]) for i in range(n)
            )
            if (
                best is None
                or objective > best.objective
                or (objective == best.objective and rho < best.rho)
            ):
                best = RmSolution(
                    r=tuple(r), y=tuple(pattern), rho=float(rho), objective=objective
                )
    assert best is not None
    return best
