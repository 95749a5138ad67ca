import math
import zlib
from typing import Any

import cloudpickle
import numpy as np

SCHEMA_VERSION = 1


def compress(object):
    serialized_data = cloudpickle.dumps(object)
    compressed_data = zlib.compress(serialized_data)
    return compressed_data


def decompress(compressed_data):
    serialized_data = zlib.decompress(compressed_data)
    object = cloudpickle.loads(serialized_data)
    return object


def round_significant(value: float, digits: int = 12) -> float:
    """ Round a float to a fixed number of significant digits

    Reports are written with this rounding so that two runs of the same command
    produce byte-identical files.
    """
    if value is None or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def to_report_value(obj: Any, digits: int = 12) -> Any:
    """ Recursively convert numpy scalars, arrays and tuples into JSON friendly
    values, rounding every float to `digits` significant digits.

    Args:
        - obj: Any
            the object to convert
        - digits: int (default: 12)
            significant digits kept for floats

    Returns:
        - the converted object
    """
    if isinstance(obj, dict):
        return {str(k): to_report_value(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_report_value(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_report_value(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return str(value)
        return round_significant(value, digits)
    return obj
