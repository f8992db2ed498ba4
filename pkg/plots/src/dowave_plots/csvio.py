"""Loading helpers for the solver's CSV contracts."""

from __future__ import annotations

import numpy as np


class MissingColumnError(KeyError):
    """The CSV lacks a column the figure needs."""


def load_columns(path: str) -> dict:
    """Read a headed CSV into {column name: 1-D float array}."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names is None:
        raise ValueError(f"{path} has no header row")
    return {name: np.atleast_1d(data[name]).astype(float) for name in data.dtype.names}


def field_grid(columns: dict, value_column: str):
    """Pivot a row-major field table into (x, y, values) grid arrays."""
    if value_column not in columns:
        raise MissingColumnError(f"column {value_column!r} not present (have: {sorted(columns)})")
    x = np.unique(columns["x"])
    y = np.unique(columns["y"])
    values = columns[value_column]
    if values.size != x.size * y.size:
        raise ValueError(f"{values.size} rows do not fill a {x.size} x {y.size} grid")
    return x, y, values.reshape(x.size, y.size)
