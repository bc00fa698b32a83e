"""
Stage checkpoints: the HamPoly records of every stage part plus a header
{"s", "remainder_ledger", "max_bound_ratio"}, one JSON file per stage.
"""
import json
import logging
import os
from typing import Any, Dict, Optional

from hamiltonian.serialization import poly_from_records, poly_to_records
from lattice.geometry import BoxSpec
from media.sampling import FrequencyMap
from normal_form.engine import BnfStage

logger = logging.getLogger(__name__)


def checkpoint_path(directory: str, s: int) -> str:
    return os.path.join(directory, f"stage_{s:02d}.json")


def stage_to_dict(stage: BnfStage, provenance: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    document = dict(provenance or {})
    document.update({
        "stage": {
            "s": stage.s,
            "remainder_ledger": stage.remainder_ledger,
            "max_bound_ratio": stage.max_bound_ratio,
        },
        "history": list(stage.history),
        "omega": {"eps": stage.omega.eps, "values": stage.omega.omega.tolist()},
        "D": poly_to_records(stage.D),
        "J4": poly_to_records(stage.J4),
        "Z": poly_to_records(stage.Z),
        "R": poly_to_records(stage.R),
        "generators": [poly_to_records(F) for F in stage.generators],
    })
    return document


def stage_from_dict(document: Dict[str, Any], box: BoxSpec) -> BnfStage:
    header = document["stage"]
    omega = FrequencyMap(box, document["omega"]["values"], document["omega"]["eps"])
    return BnfStage(
        s=int(header["s"]),
        D=poly_from_records(document["D"]),
        J4=poly_from_records(document["J4"]),
        Z=poly_from_records(document["Z"]),
        R=poly_from_records(document["R"]),
        omega=omega,
        generators=tuple(poly_from_records(records) for records in document["generators"]),
        remainder_ledger=float(header["remainder_ledger"]),
        max_bound_ratio=float(header["max_bound_ratio"]),
        history=tuple(document["history"]),
    )


def save_stage(stage: BnfStage, directory: str, provenance: Optional[Dict[str, Any]] = None) -> str:
    os.makedirs(directory, exist_ok=True)
    path = checkpoint_path(directory, stage.s)
    with open(path, 'w') as f:
        json.dump(stage_to_dict(stage, provenance), f, indent=1)
    logger.info(f"Checkpoint written: {path}")
    return path


def load_stage(path: str, box: BoxSpec) -> BnfStage:
    with open(path, 'r') as f:
        document = json.load(f)
    stage = stage_from_dict(document, box)
    logger.info(f"Loaded stage {stage.s} from {path}")
    return stage
