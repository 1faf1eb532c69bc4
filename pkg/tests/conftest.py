from __future__ import annotations

from mrcap.model import ClusterSpec, JobClassSpec, ProblemInstance


def make_spec(
    id: str = "c0",
    A: float = 1000.0,
    B: float = 500.0,
    C: float = 50.0,
    D: float = 150.0,
    cM: int = 2,
    cR: int = 2,
    Hup: int = 10,
    Hlow: int = 8,
    m: float = 20000.0,
    rhoUp: float = 20.0,
) -> JobClassSpec:
    """A valid class with E=-100, K=14.571, rLow=116.57, rUp=145.71."""
    return JobClassSpec(
        id=id, A=A, B=B, C=C, D=D, cM=cM, cR=cR, Hup=Hup, Hlow=Hlow, m=m, rhoUp=rhoUp
    )


def make_instance(specs, R: float, rhoBar: float = 1.0) -> ProblemInstance:
    return ProblemInstance.from_specs(ClusterSpec(R=R, rhoBar=rhoBar), specs)


def unit_k_spec(
    id: str,
    K: float,
    Hup: int = 2,
    Hlow: int = 1,
    m: float = 4000.0,
    rhoUp: float = 10.0,
) -> JobClassSpec:
    """A class with cM=cR=1, A=B=1 and the requested K = 4/(D-C)."""
    return JobClassSpec(
        id=id,
        A=1.0,
        B=1.0,
        C=0.0,
        D=4.0 / K,
        cM=1,
        cR=1,
        Hup=Hup,
        Hlow=Hlow,
        m=m,
        rhoUp=rhoUp,
    )
