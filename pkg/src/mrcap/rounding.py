"""Integer repair of a continuous allocation.

VM counts and slot counts are rounded up, then capacity is restored by a
single sweep that walks the classes in increasing penalty slope (cheap
classes give up a VM first) and the per-class slot budget by dropping
Reduce, then Map slots until one VM's worth of containers fits again.
The sweep touches every class at most once and each slot loop runs at
most min(cM, cR) + 1 times; both counters are recorded so callers can
assert the bounds.  Only the deadline estimate may be degraded by the
repair; the slack it leaves per class is reported, not enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .centralized import ContinuousAllocation
from .errors import InvalidParameterError
from .model import ProblemInstance

#: relative slack accepted on the capacity precondition (solver outputs
#: can overshoot the knapsack by their own tolerance)
_CAPACITY_SLACK = 1e-9


@dataclass(frozen=True)
class IntegerClassAllocation:
    """Integral decision for one class, plus its repair counters."""

    id: str
    r: int
    sM: int
    sR: int
    h: int
    slot_iterations: int
    r_decremented: bool


@dataclass(frozen=True)
class IntegerAllocation:
    per_class: tuple[IntegerClassAllocation, ...]
    r_decrements: int

    @property
    def total_r(self) -> int:
        return sum(c.r for c in self.per_class)


@dataclass(frozen=True)
class IntegerFeasibilityReport:
    """Constraint audit of an integer allocation.

    ``deadline_slack`` is predicted time minus deadline per class
    (positive means the estimate overshoots; +inf when jobs are admitted
    but a slot pool rounded to zero).  ``below_minimum`` lists classes
    whose VM count dropped under the guaranteed minimum; both are
    reported, not failed, because the rounding stage only promises the
    capacity and container constraints.
    """

    violations: tuple[str, ...]
    deadline_slack: tuple[float, ...]
    below_minimum: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def round_solution(
    continuous: ContinuousAllocation, instance: ProblemInstance
) -> IntegerAllocation:
    """Round a continuous plan to integers.

    The input must respect the capacity knapsack; class order inside the
    capacity sweep is increasing ``alpha`` with ties broken by id.  The
    reported concurrency is floor(r/K) clamped to [0, Hup]; it is an
    operator-facing summary, not part of the repaired constraints.
    """
    if len(continuous.per_class) != instance.n:
        raise InvalidParameterError(
            f"allocation has {len(continuous.per_class)} classes, "
            f"instance has {instance.n}"
        )
    R = instance.cluster.R
    hat_r = [row.r for row in continuous.per_class]
    if sum(hat_r) > R * (1.0 + _CAPACITY_SLACK):
        raise InvalidParameterError(
            f"continuous allocation uses {sum(hat_r):.6g} VMs, capacity is {R:.6g}"
        )

    n = instance.n
    r = [math.ceil(x) for x in hat_r]
    decremented = [False] * n
    sweep = sorted(range(n), key=lambda i: (instance.classes[i].derived.alpha,
                                            instance.classes[i].spec.id))
    total = sum(r)
    for j in sweep:
        if total > R:
            r[j] -= 1
            total -= 1
            decremented[j] = True

    rows = []
    for i, planned in enumerate(instance.classes):
        spec, d = planned.spec, planned.derived
        sM = math.ceil(continuous.per_class[i].sM)
        sR = math.ceil(continuous.per_class[i].sR)
        iterations = 0
        while sM / spec.cM + sR / spec.cR > r[i]:
            iterations += 1
            sR -= 1
            if sM / spec.cM + sR / spec.cR > r[i]:
                sM -= 1
        h = min(max(math.floor(r[i] / d.K), 0), spec.Hup)
        rows.append(
            IntegerClassAllocation(
                id=spec.id,
                r=r[i],
                sM=sM,
                sR=sR,
                h=h,
                slot_iterations=iterations,
                r_decremented=decremented[i],
            )
        )
    return IntegerAllocation(per_class=tuple(rows), r_decrements=sum(decremented))


def check_integer_feasibility(
    alloc: IntegerAllocation, instance: ProblemInstance
) -> IntegerFeasibilityReport:
    """Audit capacity, container budgets, integrality and deadlines."""
    violations: list[str] = []
    slack: list[float] = []
    below: list[str] = []

    total = sum(c.r for c in alloc.per_class)
    if total > instance.cluster.R:
        violations.append(
            f"total VMs {total} exceed capacity {instance.cluster.R:.6g}"
        )
    for planned, row in zip(instance.classes, alloc.per_class):
        spec, d = planned.spec, planned.derived
        for name, value in (("r", row.r), ("sM", row.sM), ("sR", row.sR), ("h", row.h)):
            if not isinstance(value, int):
                violations.append(f"class {spec.id}: {name}={value!r} is not integral")
            elif value < 0:
                violations.append(f"class {spec.id}: {name}={value} is negative")
        if row.sM / spec.cM + row.sR / spec.cR > row.r:
            violations.append(
                f"class {spec.id}: slots {row.sM}/{row.sR} do not fit {row.r} VMs"
            )
        if row.r < d.rLow:
            below.append(spec.id)
        if row.h == 0:
            slack.append(spec.C - spec.D)
        elif row.sM <= 0 or row.sR <= 0:
            slack.append(math.inf)
        else:
            predicted = spec.A * row.h / row.sM + spec.B * row.h / row.sR + spec.C
            slack.append(predicted - spec.D)
    return IntegerFeasibilityReport(
        violations=tuple(violations),
        deadline_slack=tuple(slack),
        below_minimum=tuple(below),
    )
