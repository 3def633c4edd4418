"""
Field file format.

Layout (little-endian):
    header  <4i3d : magic, nx, ny, nz, dx, dy, dz
    payload <f8   : nx*ny*nz values, x fastest, then y, then z

The CSV export is for inspection only: one row per cell with its (i, j, k)
index, cell-centre coordinates and one column per per-cell array.
"""

import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from ..utils.artifacts import write_csv
from ..utils.errors import HdaError, ShapeMismatch
from .hyperparams import GridSpec

FIELD_MAGIC = 0x4B474F4C  # "LOGK"
_HEADER = struct.Struct("<4i3d")


def write_field(path: Union[str, Path], grid: GridSpec, values: np.ndarray) -> Path:
    """
    Write one per-cell array in the binary field format.

    Args:
        path: Destination file.
        grid: Grid the values live on.
        values: Flat array of ``grid.n_cells`` values.

    Returns:
        Path: The written path.
    """
    values = np.asarray(values, dtype="<f8").ravel()
    if values.size != grid.n_cells:
        raise ValueError(f"expected {grid.n_cells} values, got {values.size}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fp:
        fp.write(_HEADER.pack(FIELD_MAGIC, grid.nx, grid.ny, grid.nz, grid.dx, grid.dy, grid.dz))
        fp.write(values.tobytes())
    return path


def read_field(path: Union[str, Path]) -> Tuple[GridSpec, np.ndarray]:
    """
    Read a binary field file.

    Returns:
        Tuple[GridSpec, np.ndarray]: Grid and flat values.
    """
    with open(path, "rb") as fp:
        raw = fp.read()
    magic, nx, ny, nz, dx, dy, dz = _HEADER.unpack_from(raw, 0)
    if magic != FIELD_MAGIC:
        raise HdaError(f"{path} is not a field file (magic {magic:#x})")
    grid = GridSpec(nx=nx, ny=ny, nz=nz, dx=dx, dy=dy, dz=dz)
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if values.size != grid.n_cells:
        raise HdaError(f"{path} holds {values.size} values for a {grid.n_cells}-cell grid")
    return grid, values.astype(float)


def field_frame(grid: GridSpec, **columns: np.ndarray) -> pd.DataFrame:
    """
    Per-cell table in flat (x-fastest) order.

    Args:
        grid: Grid the arrays live on.
        **columns: Named flat arrays of ``grid.n_cells`` values.

    Returns:
        pd.DataFrame: Columns i, j, k, x, y, z followed by ``columns``.
    """
    ijk = grid.cell_coordinates()
    frame = pd.DataFrame({
        "i": ijk[:, 0].astype(int),
        "j": ijk[:, 1].astype(int),
        "k": ijk[:, 2].astype(int),
        "x": (ijk[:, 0] + 0.5) * grid.dx,
        "y": (ijk[:, 1] + 0.5) * grid.dy,
        "z": (ijk[:, 2] + 0.5) * grid.dz,
    })
    for name, values in columns.items():
        values = np.asarray(values, dtype=float).ravel()
        if values.size != grid.n_cells:
            raise ShapeMismatch(f"column {name!r} has {values.size} values for a {grid.n_cells}-cell grid")
        frame[name] = values
    return frame


def write_field_csv(path: Union[str, Path], grid: GridSpec, values: np.ndarray, name: str = "value") -> Path:
    """Write one per-cell array as an inspection CSV (see ``field_frame``)."""
    return write_csv(path, field_frame(grid, **{name: values}))


def read_field_csv(path: Union[str, Path], name: str = "value") -> np.ndarray:
    """Read a column of an inspection CSV back into flat x-fastest order."""
    frame = pd.read_csv(path).sort_values(["k", "j", "i"], kind="stable")
    return frame[name].to_numpy(dtype=float)
