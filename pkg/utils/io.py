"""
CSV and JSON artifacts. Floats are written with 17 significant digits so a
run can be reproduced byte for byte.
"""
import json
import math
from pathlib import Path

import numpy as np

from utils.space import GridFunction, midpoints

FLOAT_FORMAT = "%.17g"


def _grid_rows(times, block):
    """(t, xi, value) rows, t outer"""
    nt1, n = block.shape
    return np.column_stack(
        [np.repeat(times, n), np.tile(midpoints(n), nt1), block.reshape(-1)]
    )


def write_trajectory_csv(path, trajectory, column="z"):
    np.savetxt(
        path,
        _grid_rows(trajectory.times, trajectory.states),
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header=f"t,xi,{column}",
        comments="",
    )


def write_control_csv(path, control):
    np.savetxt(
        path,
        _grid_rows(control.grid.times, control.inputs),
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header="t,xi,u",
        comments="",
    )


def write_grid_function_csv(path, x):
    np.savetxt(
        path,
        np.column_stack([x.midpoints, x.values]),
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header="xi,value",
        comments="",
    )


def read_grid_function_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return GridFunction(data[:, 1])


def json_ready(obj):
    """Plain Python containers with non-finite floats spelled out"""
    if isinstance(obj, dict):
        return {str(key): json_ready(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, data):
    Path(path).write_text(json.dumps(json_ready(data), indent=2, sort_keys=True) + "\n")
