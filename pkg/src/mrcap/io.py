"""Instance file reading and writing.

The on-disk format is JSON with two top-level shapes for the cluster:
either ``{"R": ..., "rhoBar": ...}`` or ``{"R": ..., "energy": {"PUE",
"energyCost", "serverCost", "v", "d"}}``, plus ``"classes"``, an array of
``{"id", "A", "B", "C", "D", "cM", "cR", "Hup", "Hlow", "m", "rhoUp"}``
records (optionally carrying ``"raw_profile"``).  Derived constants are
always recomputed on load, never read from the file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .errors import InvalidParameterError
from .model import ClusterSpec, EnergyInputs, JobClassSpec, ProblemInstance

_CLASS_FIELDS = ("id", "A", "B", "C", "D", "cM", "cR", "Hup", "Hlow", "m", "rhoUp")


def instance_to_dict(instance: ProblemInstance) -> dict:
    cluster: dict[str, Any] = {"R": instance.cluster.R}
    if instance.cluster.energy is not None:
        e = instance.cluster.energy
        cluster["energy"] = {
            "PUE": e.PUE,
            "energyCost": e.energyCost,
            "serverCost": e.serverCost,
            "v": e.v,
            "d": e.d,
        }
    else:
        cluster["rhoBar"] = instance.cluster.rhoBar
    classes = []
    for c in instance.classes:
        s = c.spec
        rec: dict[str, Any] = {
            "id": s.id,
            "A": s.A,
            "B": s.B,
            "C": s.C,
            "D": s.D,
            "cM": s.cM,
            "cR": s.cR,
            "Hup": s.Hup,
            "Hlow": s.Hlow,
            "m": s.m,
            "rhoUp": s.rhoUp,
        }
        if s.raw_profile is not None:
            rec["raw_profile"] = dict(s.raw_profile)
        classes.append(rec)
    doc: dict[str, Any] = {"cluster": cluster, "classes": classes}
    if instance.provenance is not None:
        doc["provenance"] = dict(instance.provenance)
    return doc


def instance_from_dict(doc: Mapping) -> ProblemInstance:
    try:
        cdoc = doc["cluster"]
        R = float(cdoc["R"])
        if "energy" in cdoc:
            e = cdoc["energy"]
            energy = EnergyInputs(
                PUE=float(e["PUE"]),
                energyCost=float(e["energyCost"]),
                serverCost=float(e["serverCost"]),
                v=float(e["v"]),
                d=float(e["d"]),
            )
            cluster = ClusterSpec.from_energy(R, energy)
        else:
            cluster = ClusterSpec(R=R, rhoBar=float(cdoc["rhoBar"]))
        specs = []
        for rec in doc["classes"]:
            missing = [k for k in _CLASS_FIELDS if k not in rec]
            if missing:
                raise InvalidParameterError(
                    f"class record missing fields: {', '.join(missing)}"
                )
            specs.append(
                JobClassSpec(
                    id=str(rec["id"]),
                    A=float(rec["A"]),
                    B=float(rec["B"]),
                    C=float(rec["C"]),
                    D=float(rec["D"]),
                    cM=int(rec["cM"]),
                    cR=int(rec["cR"]),
                    Hup=int(rec["Hup"]),
                    Hlow=int(rec["Hlow"]),
                    m=float(rec["m"]),
                    rhoUp=float(rec["rhoUp"]),
                    raw_profile=rec.get("raw_profile"),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"malformed instance document: {exc}") from exc
    return ProblemInstance.from_specs(cluster, specs, provenance=doc.get("provenance"))


def save_instance(instance: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n")


def load_instance(path: str | Path) -> ProblemInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))
