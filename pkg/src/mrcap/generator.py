"""Seeded random instance generation.

Every class draws from its own PCG64 substream (spawn key = class index
+ 1; the cluster uses spawn key 0), so growing an instance never
perturbs the classes already drawn and generation parallelises without
losing determinism.  Draw ranges default to measured production
profiles; the minimum concurrency is fixed at floor(0.8 * Hup), and the
inert raw-profile averages carry the same 0.8 ratio to their maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .centralized import solve_reduced
from .errors import InfeasibleError, InvalidParameterError
from .model import (
    ClusterSpec,
    EnergyInputs,
    JobClassSpec,
    ProblemInstance,
)

GENERATOR_VERSION = "1"
_RNG_NOTE = "numpy PCG64; SeedSequence(seed, spawn_key=(0,)) for the cluster, (i+1,) for class i"


@dataclass(frozen=True)
class ParameterRanges:
    """Uniform draw ranges; integer parameters draw inclusive ends."""

    rhoUp: tuple[float, float] = (5.0, 20.0)
    Hup: tuple[int, int] = (5, 20)
    cM: tuple[int, int] = (1, 4)
    cR: tuple[int, int] = (1, 4)
    m: tuple[float, float] = (15000.0, 30000.0)
    D: tuple[float, float] = (900.0, 1500.0)
    A: tuple[float, float] = (656.0, 107488.0)
    B: tuple[float, float] = (1854.0, 11430.0)
    C: tuple[float, float] = (132.0, 720.0)
    PUE: tuple[float, float] = (1.2, 2.2)
    energyCost: tuple[float, float] = (0.06009, 0.06690)
    serverCost: tuple[float, float] = (2.0615, 2.0615)
    v: tuple[float, float] = (2.0, 2.0)
    d: tuple[int, int] = (3, 5)
    # inert log-profile metadata
    nM: tuple[int, int] = (70, 1120)
    nR: tuple[int, int] = (64, 64)
    Mmax: tuple[float, float] = (16.0, 120.0)
    Rmax: tuple[float, float] = (15.0, 75.0)
    Sh1max: tuple[float, float] = (10.0, 30.0)
    ShTypMax: tuple[float, float] = (30.0, 150.0)

    def validate(self) -> None:
        for name, pair in self.__dict__.items():
            lo, hi = pair
            if lo > hi:
                raise InvalidParameterError(f"range {name} has low > high")

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class CapacityRule:
    """Cluster sizing: an explicit VM count, or a multiple of the
    aggregate full-concurrency requirement sum(rUp)."""

    multiple: float | None = 1.1
    explicit: float | None = None

    def __post_init__(self) -> None:
        if (self.multiple is None) == (self.explicit is None):
            raise InvalidParameterError(
                "set exactly one of multiple and explicit capacity"
            )

    def capacity(self, r_up_total: float) -> float:
        if self.explicit is not None:
            return self.explicit
        return self.multiple * r_up_total

    def to_dict(self) -> dict:
        if self.explicit is not None:
            return {"explicit": self.explicit}
        return {"multiple": self.multiple}


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    seed: int
    ranges: ParameterRanges = field(default_factory=ParameterRanges)
    capacity: CapacityRule = field(default_factory=CapacityRule)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParameterError("need at least one class")
        self.ranges.validate()


def _class_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index + 1,)))


def _cluster_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def _draw_class(rng: np.random.Generator, ranges: ParameterRanges, cid: str) -> JobClassSpec:
    # fixed draw order; reordering would silently change every seed
    rho_up = rng.uniform(*ranges.rhoUp)
    h_up = int(rng.integers(ranges.Hup[0], ranges.Hup[1], endpoint=True))
    c_m = int(rng.integers(ranges.cM[0], ranges.cM[1], endpoint=True))
    c_r = int(rng.integers(ranges.cR[0], ranges.cR[1], endpoint=True))
    m = rng.uniform(*ranges.m)
    D = rng.uniform(*ranges.D)
    A = rng.uniform(*ranges.A)
    B = rng.uniform(*ranges.B)
    C = rng.uniform(*ranges.C)
    profile = {
        "nM": int(rng.integers(ranges.nM[0], ranges.nM[1], endpoint=True)),
        "nR": int(rng.integers(ranges.nR[0], ranges.nR[1], endpoint=True)),
        "Mmax": rng.uniform(*ranges.Mmax),
        "Rmax": rng.uniform(*ranges.Rmax),
        "Sh1max": rng.uniform(*ranges.Sh1max),
        "ShTypMax": rng.uniform(*ranges.ShTypMax),
    }
    profile["Mavg"] = 0.8 * profile["Mmax"]
    profile["Ravg"] = 0.8 * profile["Rmax"]
    profile["ShTypAvg"] = 0.8 * profile["ShTypMax"]
    return JobClassSpec(
        id=cid,
        A=A,
        B=B,
        C=C,
        D=D,
        cM=c_m,
        cR=c_r,
        Hup=h_up,
        Hlow=math.floor(0.8 * h_up),
        m=m,
        rhoUp=rho_up,
        raw_profile=profile,
    )


def _id_width(n: int) -> int:
    return max(3, len(str(n - 1)))


def generate(config: GeneratorConfig) -> ProblemInstance:
    """Draw a full instance; identical configs give identical instances."""
    width = _id_width(config.n)
    specs = [
        _draw_class(_class_rng(config.seed, i), config.ranges, f"c{i:0{width}d}")
        for i in range(config.n)
    ]

    crng = _cluster_rng(config.seed)
    energy = EnergyInputs(
        PUE=crng.uniform(*config.ranges.PUE),
        energyCost=crng.uniform(*config.ranges.energyCost),
        serverCost=crng.uniform(*config.ranges.serverCost),
        v=crng.uniform(*config.ranges.v),
        d=int(crng.integers(config.ranges.d[0], config.ranges.d[1], endpoint=True)),
    )
    cluster = ClusterSpec.from_energy(R=1.0, energy=energy)
    instance = ProblemInstance.from_specs(cluster, specs)
    R = config.capacity.capacity(instance.r_up_total)

    provenance = {
        "seed": config.seed,
        "generatorVersion": GENERATOR_VERSION,
        "rng": _RNG_NOTE,
        "ranges": config.ranges.to_dict(),
        "capacityRule": config.capacity.to_dict(),
    }
    return ProblemInstance.from_specs(
        replace(cluster, R=R), specs, provenance=provenance
    )


def shrink(instance: ProblemInstance, n_prime: int) -> ProblemInstance:
    """Keep the first ``n_prime`` classes, rescaling capacity by the
    instance's own sizing rule (an explicit capacity is kept as is)."""
    if n_prime > instance.n or n_prime < 1:
        raise InvalidParameterError(
            f"cannot shrink {instance.n} classes to {n_prime}"
        )
    kept = instance.classes[:n_prime]
    rule = CapacityRule(multiple=1.1)
    if instance.provenance and "capacityRule" in instance.provenance:
        raw = instance.provenance["capacityRule"]
        rule = CapacityRule(
            multiple=raw.get("multiple"), explicit=raw.get("explicit")
        )
    if rule.explicit is not None:
        R = instance.cluster.R
    else:
        R = rule.multiple * sum(c.derived.rUp for c in kept)
    provenance = dict(instance.provenance or {})
    provenance["shrunkTo"] = n_prime
    return ProblemInstance(
        cluster=replace(instance.cluster, R=R),
        classes=kept,
        provenance=provenance,
    )


def calibrate_penalties(instance: ProblemInstance) -> tuple[float, ...]:
    """Per-class rejection penalties worth 100 average job costs.

    The average job cost comes from solving the plan with the
    concurrency boxes collapsed to their maximum, so rejection is
    impossible and every class runs at full concurrency; each class then
    costs rhoBar * r / Hup per job.  Requires capacity for the full
    solve (sum rUp <= R).
    """
    if instance.r_up_total > instance.cluster.R:
        raise InfeasibleError(
            "penalty calibration needs capacity for full concurrency "
            f"({instance.r_up_total:.6g} VMs > {instance.cluster.R:.6g})"
        )
    forced = ProblemInstance.from_specs(
        instance.cluster,
        [replace(c.spec, Hlow=c.spec.Hup) for c in instance.classes],
    )
    report = solve_reduced(forced)
    rho_bar = instance.cluster.rhoBar
    return tuple(
        100.0 * rho_bar * row.r / planned.spec.Hup
        for planned, row in zip(instance.classes, report.allocation.per_class)
    )


def apply_penalties(
    instance: ProblemInstance, penalties: Sequence[float]
) -> ProblemInstance:
    """Rebuild an instance with new per-class rejection penalties."""
    if len(penalties) != instance.n:
        raise InvalidParameterError(
            f"expected {instance.n} penalties, got {len(penalties)}"
        )
    specs = [
        replace(c.spec, m=float(m)) for c, m in zip(instance.classes, penalties)
    ]
    return ProblemInstance.from_specs(
        instance.cluster, specs, provenance=instance.provenance
    )
