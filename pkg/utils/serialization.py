# JSON serialization of results, states and channels

import json
import logging
import math
import os
from typing import Any, Dict

import numpy as np

from src.states import DensityMatrix, Register

from .exceptions import ParseFailure, WriteFailure

logger = logging.getLogger(__name__)


def jsonable(value: Any) -> Any:
    """
    Convert results into plain JSON values

    numpy scalars and arrays become Python numbers and lists, complex numbers
    [re, im] pairs, non-finite floats the strings "nan", "inf" and "-inf".
    Objects with an as_dict method are converted through it.

    Args:
        value: Any nesting of dicts, sequences, numbers and result objects

    Returns:
        Any: A value json.dump accepts without allow_nan
    """
    if hasattr(value, "as_dict"):
        return jsonable(value.as_dict())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(float(value.real)), jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def write_json(path: str, payload: Any) -> str:
    """Write payload with sorted keys; raises WriteFailure"""
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w") as f:
            json.dump(jsonable(payload), f, indent=2, sort_keys=True, allow_nan=False)
            f.write("\n")
    except (OSError, TypeError, ValueError) as e:
        raise WriteFailure(f"could not write {path}: {e}")
    logger.debug("wrote %s", path)
    return path


def read_json(path: str) -> Any:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseFailure(f"could not read {path}: {e}")


def matrix_to_dict(M: np.ndarray) -> Dict[str, Any]:
    M = np.asarray(M, dtype=complex)
    return {"shape": list(M.shape), "real": M.real.tolist(), "imag": M.imag.tolist()}


def matrix_from_dict(data: Dict[str, Any]) -> np.ndarray:
    try:
        M = np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float)
        return M.reshape(tuple(data["shape"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseFailure(f"malformed matrix record: {e}")


def state_to_dict(rho) -> Dict[str, Any]:
    """Register layout, matrix and provenance of a DensityMatrix"""
    register = rho.register
    return {
        "site_dims": list(register.site_dims),
        "labels": list(register.labels),
        "coords": [list(c) for c in register.coords],
        "matrix": matrix_to_dict(rho.matrix),
        "provenance": rho.provenance,
    }


def state_from_dict(data: Dict[str, Any]) -> DensityMatrix:
    try:
        register = Register(tuple(data["site_dims"]), coords=tuple(tuple(c) for c in data["coords"]),
                            labels=tuple(data["labels"]))
        return DensityMatrix(register, matrix_from_dict(data["matrix"]), data.get("provenance", ""))
    except KeyError as e:
        raise ParseFailure(f"state record misses {e}")


def channel_to_dict(channel) -> Dict[str, Any]:
    """Regions (by label) and Kraus operators of a ChannelMap"""
    return {
        "input": list(channel.input_region.sites),
        "output": list(channel.output_region.sites),
        "support": list(channel.support.sites),
        "kraus": [matrix_to_dict(K) for K in channel.kraus_ops],
    }
