"""Exact solver for the reduced centralized allocation problem.

After eliminating concurrency and slot variables through their closed
forms (psi = K/r, sM = xiM*r, sR = xiR*r), the hourly plan reduces to

    minimize   sum_i rhoBar*r_i + sum_i (alpha_i*K_i/r_i - beta_i)
    subject to sum_i r_i <= R,   rLow_i <= r_i <= rUp_i.

This is separable and convex with a single coupling constraint, so it is
solved exactly by bisecting on the capacity multiplier ``a``: per-class
stationarity gives r_i(a) = clamp(sqrt(alpha_i*K_i/(rhoBar+a)), rLow_i,
rUp_i), and ``a`` is raised until the allocations fit the cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .model import DerivedClassParams, ProblemInstance

#: relative tolerance on the capacity equation sum r(a) = R
CAPACITY_TOL = 1e-9
#: bisection iteration cap; the best iterate is reported if it is hit
MAX_BISECTION = 200


@dataclass(frozen=True)
class ClassAllocation:
    """Continuous decision for one class: VMs, reciprocal concurrency,
    and Map/Reduce slot counts."""

    id: str
    r: float
    psi: float
    sM: float
    sR: float


@dataclass(frozen=True)
class ContinuousAllocation:
    """A full continuous plan plus its cost split.

    ``penalty_cost`` is accumulated as ``alpha*(psi - psiLow)`` per
    class, which equals ``alpha*psi - beta`` because the penalty line is
    calibrated to vanish at maximum concurrency; the difference form is
    exactly zero there instead of collecting rounding dust.
    """

    per_class: tuple[ClassAllocation, ...]
    energy_cost: float
    penalty_cost: float

    @property
    def objective(self) -> float:
        return self.energy_cost + self.penalty_cost

    @property
    def total_r(self) -> float:
        return sum(c.r for c in self.per_class)


@dataclass(frozen=True)
class CentralizedReport:
    allocation: ContinuousAllocation
    capacity_dual: float
    kkt: float
    feasible: bool
    bisection_iterations: int


def expand_solution(r: float, params: DerivedClassParams) -> tuple[float, float, float]:
    """Recover (psi, sM, sR) from a VM count via the closed forms.

    psi is K/r; when ``r`` sits exactly on a box edge the matching
    concurrency bound is returned instead of K/r so that the penalty
    vanishes identically at full concurrency rather than leaving
    last-bit rounding dust.
    """
    if r <= 0:
        raise InvalidParameterError(f"VM count must be positive, got {r}")
    if r == params.rUp:
        psi = params.psiLow
    elif r == params.rLow:
        psi = params.psiUp
    else:
        psi = params.K / r
    return psi, params.xiM * r, params.xiR * r


def build_allocation(
    instance: ProblemInstance, r: Sequence[float]
) -> ContinuousAllocation:
    """Assemble a ContinuousAllocation from per-class VM counts."""
    rows = []
    penalty = 0.0
    energy = 0.0
    for planned, ri in zip(instance.classes, r):
        d = planned.derived
        psi, sM, sR = expand_solution(ri, d)
        rows.append(ClassAllocation(id=planned.spec.id, r=ri, psi=psi, sM=sM, sR=sR))
        penalty += d.alpha * (psi - d.psiLow)
        energy += instance.cluster.rhoBar * ri
    return ContinuousAllocation(
        per_class=tuple(rows), energy_cost=energy, penalty_cost=penalty
    )


def _arrays(instance: ProblemInstance):
    d = [c.derived for c in instance.classes]
    return (
        np.array([x.rLow for x in d]),
        np.array([x.rUp for x in d]),
        np.array([x.alpha * x.K for x in d]),
    )


def solve_reduced(instance: ProblemInstance) -> CentralizedReport:
    """Solve the reduced plan to optimality.

    Raises ``InfeasibleError`` when the guaranteed minima do not fit.
    The capacity multiplier is bisected until |sum r(a) - R| falls below
    ``CAPACITY_TOL * R`` (zero iterations when capacity is abundant).
    """
    instance.require_feasible()
    R = instance.cluster.R
    rho = instance.cluster.rhoBar
    r_low, r_up, weight = _arrays(instance)

    def r_of(a: float) -> np.ndarray:
        return np.clip(np.sqrt(weight / (rho + a)), r_low, r_up)

    iterations = 0
    if math.isclose(r_low.sum(), R, rel_tol=1e-12) or r_low.sum() >= R:
        # no spare capacity at all: everything pinned at the minimum
        r = r_low.copy()
        grad_low = weight / r_low**2 - rho
        a = max(0.0, float(grad_low.max()))
    elif r_of(0.0).sum() <= R:
        a = 0.0
        r = r_of(a)
    else:
        a_hi = 1.0
        while r_of(a_hi).sum() > R:
            a_hi *= 2.0
        a_lo = 0.0
        a = a_hi
        for _ in range(MAX_BISECTION):
            iterations += 1
            a = 0.5 * (a_lo + a_hi)
            total = r_of(a).sum()
            if abs(total - R) <= CAPACITY_TOL * R:
                break
            if total > R:
                a_lo = a
            else:
                a_hi = a
        r = r_of(a)

    allocation = build_allocation(instance, r.tolist())
    return CentralizedReport(
        allocation=allocation,
        capacity_dual=a,
        kkt=_kkt_of(r, a, instance),
        feasible=True,
        bisection_iterations=iterations,
    )


def kkt_residual(report: CentralizedReport, instance: ProblemInstance) -> float:
    """Normalised optimality error of a report for its instance.

    Combines, all dimensionless:

    * stationarity |rhoBar + a - alpha*K/r^2| / (rhoBar + a) where the
      box is inactive, and its one-sided version at an active bound,
    * primal violations of the box and capacity constraints,
    * the complementarity product a * |sum r - R| / ((rhoBar + a) * R).
    """
    r = np.array([c.r for c in report.allocation.per_class])
    return _kkt_of(r, report.capacity_dual, instance)


def _kkt_of(r: np.ndarray, a: float, instance: ProblemInstance) -> float:
    rho = instance.cluster.rhoBar
    R = instance.cluster.R
    r_low, r_up, weight = _arrays(instance)
    if a < 0:
        return math.inf

    scale = rho + a
    grad = rho + a - weight / r**2
    at_low = np.isclose(r, r_low, rtol=1e-12, atol=0.0)
    at_up = np.isclose(r, r_up, rtol=1e-12, atol=0.0)
    interior = ~(at_low | at_up)

    worst = 0.0
    if interior.any():
        worst = float(np.abs(grad[interior]).max()) / scale
    if at_up.any():
        # at the upper bound the multiplier absorbs a negative gradient only
        worst = max(worst, float(np.maximum(grad[at_up], 0.0).max()) / scale)
    if at_low.any():
        worst = max(worst, float(np.maximum(-grad[at_low], 0.0).max()) / scale)

    total = float(r.sum())
    worst = max(worst, max(0.0, total - R) / R)
    worst = max(worst, float((np.maximum(r_low - r, 0.0) / r_low).max()))
    worst = max(worst, float((np.maximum(r - r_up, 0.0) / r_up).max()))
    worst = max(worst, a * abs(total - R) / (scale * R))
    return worst
