"""Domain model: job classes, cluster, derived constants, makespan predictor.

Conventions used throughout the package:

* money is a real number of euro cents,
* times are in seconds,
* the planning horizon is one hour, so a VM-hour price multiplies a VM
  count with no extra time factor,
* capacity and slot counts are real-valued until the rounding stage.

For every job class the makespan of ``h`` concurrent jobs running on
``sM`` Map and ``sR`` Reduce slots is estimated as

    T = A*h/sM + B*h/sR + C

and the soft deadline ``D`` enters all constraints through the negative
constant ``E = C - D``.  From (A, B, cM, cR, E) we precompute the slot
ratios ``xiM``, ``xiR``, the per-job VM requirement ``K`` and the penalty
line ``alpha*psi - beta`` in the reciprocal concurrency ``psi = 1/h``,
calibrated to vanish at maximum concurrency and to charge ``m`` for each
of the ``Hup - Hlow`` rejections at minimum concurrency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import DeadlineInfeasibleError, InfeasibleError, InvalidParameterError

#: default relative tolerance for floating-point identity checks
REL_TOL = 1e-9


@dataclass(frozen=True)
class JobClassSpec:
    """Static description of one application class.

    ``A``, ``B``, ``C`` are the makespan coefficients (seconds), ``D`` the
    deadline, ``cM``/``cR`` the Map/Reduce slots one VM can host, ``Hup``
    and ``Hlow`` the SLA concurrency bounds, ``m`` the penalty per
    rejected job and ``rhoUp`` the ceiling for the bids this class may
    place.  ``raw_profile`` carries task-level log measurements as inert
    metadata; nothing in this package interprets it.
    """

    id: str
    A: float
    B: float
    C: float
    D: float
    cM: int
    cR: int
    Hup: int
    Hlow: int
    m: float
    rhoUp: float
    raw_profile: Mapping[str, float] | None = field(default=None, compare=False)

    @property
    def E(self) -> float:
        return self.C - self.D


@dataclass(frozen=True)
class DerivedClassParams:
    """Closed-form constants computed once per class.

    ``xiM*r`` and ``xiR*r`` are the slot counts that saturate one VM's
    container budget, ``K`` is the number of VMs needed to finish a
    single job exactly on time, so ``rUp = K*Hup`` and ``rLow = K*Hlow``
    bracket the useful allocations.  ``alpha``/``beta`` define the
    penalty line in ``psi = 1/h`` and ``p = m/K`` is the same penalty
    normalised per missing VM.
    """

    E: float
    psiLow: float
    psiUp: float
    xiM: float
    xiR: float
    K: float
    rUp: float
    rLow: float
    alpha: float
    beta: float
    p: float


@dataclass(frozen=True)
class EnergyInputs:
    """Inputs of the unit-cost formula: PUE, energy and server cost per
    core-hour (euro cents), virtual cores per VM and virtual-to-physical
    core density."""

    PUE: float
    energyCost: float
    serverCost: float
    v: float
    d: float


@dataclass(frozen=True)
class ClusterSpec:
    """Cluster capacity ``R`` (VMs) and the hourly unit cost ``rhoBar``
    of keeping one VM on (euro cents per VM-hour)."""

    R: float
    rhoBar: float
    energy: EnergyInputs | None = None

    @classmethod
    def from_energy(cls, R: float, energy: EnergyInputs) -> "ClusterSpec":
        rho = compute_unit_cost(
            energy.PUE, energy.energyCost, energy.serverCost, energy.v, energy.d
        )
        return cls(R=R, rhoBar=rho, energy=energy)


@dataclass(frozen=True)
class PlannedClass:
    """A job class together with its derived constants."""

    spec: JobClassSpec
    derived: DerivedClassParams


@dataclass(frozen=True)
class ProblemInstance:
    """A cluster plus the classes competing for it."""

    cluster: ClusterSpec
    classes: tuple[PlannedClass, ...]
    provenance: Mapping | None = field(default=None, compare=False)

    @classmethod
    def from_specs(
        cls,
        cluster: ClusterSpec,
        specs: Iterable[JobClassSpec],
        provenance: Mapping | None = None,
    ) -> "ProblemInstance":
        planned = tuple(
            PlannedClass(spec=s, derived=derive_class_params(s, cluster.rhoBar))
            for s in specs
        )
        return cls(cluster=cluster, classes=planned, provenance=provenance)

    @property
    def n(self) -> int:
        return len(self.classes)

    @property
    def r_low_total(self) -> float:
        return sum(c.derived.rLow for c in self.classes)

    @property
    def r_up_total(self) -> float:
        return sum(c.derived.rUp for c in self.classes)

    @property
    def feasible(self) -> bool:
        """Whether the guaranteed minimum allocations fit in the cluster."""
        return self.r_low_total <= self.cluster.R

    def with_capacity(self, R: float) -> "ProblemInstance":
        return replace(self, cluster=replace(self.cluster, R=R))

    def require_feasible(self) -> None:
        if not self.feasible:
            raise InfeasibleError(
                f"aggregate minimum demand {self.r_low_total:.6g} VMs exceeds "
                f"capacity {self.cluster.R:.6g}"
            )


def compute_unit_cost(
    pue: float, energy_cost: float, server_cost: float, v: float, d: float
) -> float:
    """Hourly cost of one VM: (PUE*energyCost + serverCost) * v / d.

    ``energy_cost`` may be zero (free energy is meaningful); the other
    inputs must be positive.
    """
    if pue <= 0 or server_cost <= 0 or v <= 0 or d <= 0:
        raise InvalidParameterError("unit-cost inputs must be positive")
    if energy_cost < 0:
        raise InvalidParameterError("energy cost cannot be negative")
    return (pue * energy_cost + server_cost) * v / d


def derive_class_params(spec: JobClassSpec, rho_bar: float) -> DerivedClassParams:
    """Compute the per-class constants from a spec.

    Raises ``DeadlineInfeasibleError`` when ``C >= D`` (the class cannot
    finish on time regardless of resources) and
    ``InvalidParameterError`` on any other violated precondition,
    including a bid ceiling below the cluster unit cost, which would make
    the bidding interval empty.
    """
    if spec.A <= 0 or spec.B <= 0:
        raise InvalidParameterError(f"class {spec.id}: A and B must be positive")
    if spec.C < 0 or spec.D <= 0:
        raise InvalidParameterError(f"class {spec.id}: need C >= 0 and D > 0")
    if spec.cM < 1 or spec.cR < 1:
        raise InvalidParameterError(f"class {spec.id}: slot counts must be >= 1")
    if not (1 <= spec.Hlow <= spec.Hup):
        raise InvalidParameterError(
            f"class {spec.id}: concurrency bounds need 1 <= Hlow <= Hup"
        )
    if spec.m <= 0:
        raise InvalidParameterError(f"class {spec.id}: penalty m must be positive")
    if spec.rhoUp < rho_bar:
        raise InvalidParameterError(
            f"class {spec.id}: bid ceiling {spec.rhoUp} below unit cost {rho_bar}"
        )
    if spec.E >= 0:
        raise DeadlineInfeasibleError(
            f"class {spec.id}: constant term C={spec.C} meets or exceeds "
            f"deadline D={spec.D}; jobs cannot complete on time"
        )
    return derive_class_params_unchecked(spec)


def predicted_time(
    A: float, B: float, C: float, h: float, sM: float, sR: float
) -> float:
    """Makespan estimate A*h/sM + B*h/sR + C for ``h`` concurrent jobs."""
    if sM <= 0 or sR <= 0:
        raise InvalidParameterError("slot counts must be positive")
    if h < 0:
        raise InvalidParameterError("concurrency cannot be negative")
    return A * h / sM + B * h / sR + C


@dataclass(frozen=True)
class ClassIssue:
    """One violated precondition, attached to a class or the cluster."""

    class_id: str
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Report-valued validation: never raises, lists everything wrong."""

    issues: tuple[ClassIssue, ...]
    deadline_infeasible: tuple[str, ...]
    underbidders: tuple[str, ...]
    capacity: float
    required_minimum: float
    capacity_feasible: bool

    @property
    def ok(self) -> bool:
        return not self.issues and self.capacity_feasible


def validate_specs(
    cluster: ClusterSpec, specs: Sequence[JobClassSpec]
) -> ValidationReport:
    """Check every class and cluster precondition, reporting violations.

    Unlike :func:`derive_class_params` this never raises; classes whose
    deadline is unreachable (E >= 0) or whose bid ceiling sits below the
    unit cost are listed, and global feasibility compares the sum of
    minimum requirements of the derivable classes against capacity.
    """
    issues: list[ClassIssue] = []
    deadline_bad: list[str] = []
    underbid: list[str] = []

    def note(cid: str, code: str, msg: str) -> None:
        issues.append(ClassIssue(class_id=cid, code=code, message=msg))

    if cluster.R < 1:
        note("", "cluster", f"capacity R={cluster.R} must be at least 1 VM")
    if cluster.rhoBar <= 0:
        note("", "cluster", f"unit cost rhoBar={cluster.rhoBar} must be positive")
    if cluster.energy is not None:
        expected = compute_unit_cost(
            cluster.energy.PUE,
            cluster.energy.energyCost,
            cluster.energy.serverCost,
            cluster.energy.v,
            cluster.energy.d,
        )
        if not math.isclose(cluster.rhoBar, expected, rel_tol=REL_TOL):
            note(
                "",
                "cluster",
                f"rhoBar={cluster.rhoBar} disagrees with energy inputs "
                f"(expected {expected})",
            )

    required = 0.0
    for s in specs:
        if s.A <= 0 or s.B <= 0 or s.C < 0 or s.D <= 0:
            note(s.id, "coefficients", "need A > 0, B > 0, C >= 0, D > 0")
            continue
        if s.cM < 1 or s.cR < 1:
            note(s.id, "slots", "need cM >= 1 and cR >= 1")
            continue
        if not (1 <= s.Hlow <= s.Hup):
            note(s.id, "concurrency", "need 1 <= Hlow <= Hup")
            continue
        if s.m <= 0:
            note(s.id, "penalty", "need m > 0")
            continue
        if s.E >= 0:
            deadline_bad.append(s.id)
            note(
                s.id,
                "deadline",
                f"C={s.C} meets or exceeds D={s.D}: class cannot finish on time",
            )
            continue
        if s.rhoUp < cluster.rhoBar:
            underbid.append(s.id)
            note(
                s.id,
                "bid",
                f"bid ceiling rhoUp={s.rhoUp} is below unit cost {cluster.rhoBar}",
            )
        required += derive_class_params_unchecked(s).rLow

    return ValidationReport(
        issues=tuple(issues),
        deadline_infeasible=tuple(deadline_bad),
        underbidders=tuple(underbid),
        capacity=cluster.R,
        required_minimum=required,
        capacity_feasible=required <= cluster.R,
    )


def derive_class_params_unchecked(spec: JobClassSpec) -> DerivedClassParams:
    """Derivation for callers that already checked the preconditions."""
    E = spec.C - spec.D
    xiM = spec.cM / (1.0 + math.sqrt(spec.B * spec.cM / (spec.A * spec.cR)))
    xiR = spec.cR / (1.0 + math.sqrt(spec.A * spec.cR / (spec.B * spec.cM)))
    K = (math.sqrt(spec.A / spec.cM) + math.sqrt(spec.B / spec.cR)) ** 2 / (-E)
    return DerivedClassParams(
        E=E,
        psiLow=1.0 / spec.Hup,
        psiUp=1.0 / spec.Hlow,
        xiM=xiM,
        xiR=xiR,
        K=K,
        rUp=K * spec.Hup,
        rLow=K * spec.Hlow,
        alpha=spec.m * spec.Hup * spec.Hlow,
        beta=spec.m * spec.Hlow,
        p=spec.m / K,
    )


def validate_instance(instance: ProblemInstance) -> ValidationReport:
    """Validate a built instance (see :func:`validate_specs`)."""
    return validate_specs(instance.cluster, [c.spec for c in instance.classes])
