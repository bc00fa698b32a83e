import json
import logging
import math
import os
from typing import Any, Dict

import numpy as np

from config.config import RunConfig

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(config: RunConfig, filename: str, payload: Dict[str, Any]) -> str:
    """Write payload under the run's output directory with the provenance header first"""
    directory = config.resolved_output_dir()
    os.makedirs(directory, exist_ok=True)
    document = config.provenance()
    document.update(payload)
    path = os.path.join(directory, filename)
    with open(path, 'w') as f:
        json.dump(to_jsonable(document), f, indent=2, allow_nan=False)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def write_csv(config: RunConfig, filename: str, frame) -> str:
    """pandas DataFrame to CSV under the output directory"""
    directory = config.resolved_output_dir()
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, filename)
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {path}")
    return path
