"""
Relative pressure and saturation errors between two forward runs.
"""

from typing import Iterable, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.errors import DegenerateRange, ShapeMismatch
from .simulator import SimOutput

SATURATION_EPSILON = 0.025


def _check_pair(coarse: SimOutput, fine: SimOutput) -> None:
    if coarse.grid != fine.grid:
        raise ShapeMismatch(f"grids differ: {coarse.grid} vs {fine.grid}")
    if tuple(coarse.times) != tuple(fine.times):
        raise ShapeMismatch("report times differ")


def self_convergence_errors(
    coarse: SimOutput,
    fine: SimOutput,
    per_time: bool = False,
    epsilon: float = SATURATION_EPSILON,
) -> Union[Tuple[float, float], Tuple[np.ndarray, np.ndarray]]:
    """
    Range-normalized pressure error and epsilon-regularized saturation error.

    ``fine`` is the reference. The pressure error at each report time is the
    cell-mean of |p_coarse - p_fine| divided by the reference pressure range at
    that time; the saturation error is the cell-mean of
    |S_coarse - S_fine| / (S_fine + epsilon).

    Args:
        coarse: Run being assessed.
        fine: Reference run on the same grid and report times.
        per_time: Return per-report-time errors instead of their averages.
        epsilon: Saturation regularizer.

    Returns:
        (delta_p, delta_S) as floats, or as arrays over report times.

    Raises:
        ShapeMismatch: If grids or report times differ.
        DegenerateRange: If the reference pressure range is zero at a report time.
    """
    _check_pair(coarse, fine)
    p_ref = np.asarray(fine.pressure)
    p_range = p_ref.max(axis=1) - p_ref.min(axis=1)
    flat = np.flatnonzero(p_range <= 0.0)
    if flat.size:
        times = [fine.times[i] for i in flat]
        raise DegenerateRange(f"reference pressure range is zero at report times {times}")

    dp = np.abs(np.asarray(coarse.pressure) - p_ref) / p_range[:, None]
    s_ref = np.asarray(fine.saturation)
    ds = np.abs(np.asarray(coarse.saturation) - s_ref) / (s_ref + epsilon)

    delta_p = dp.mean(axis=1)
    delta_s = ds.mean(axis=1)
    if per_time:
        return delta_p, delta_s
    return float(delta_p.mean()), float(delta_s.mean())


def convergence_error_table(
    pairs: Iterable[Tuple[SimOutput, SimOutput]],
    probs: Sequence[float] = (0.1, 0.5, 0.9),
) -> pd.DataFrame:
    """
    Percentiles of the relative errors across a batch of realizations.

    Args:
        pairs: (coarse, fine) runs, one pair per realization.
        probs: Percentile levels.

    Returns:
        pd.DataFrame: One row per quantity ("pressure", "saturation") with a
        column per percentile (``p10``, ``p50``, ...) plus ``n``.
    """
    errors = np.array([self_convergence_errors(c, f) for c, f in pairs], dtype=float)
    if errors.size == 0:
        raise ShapeMismatch("no run pairs given")
    rows = []
    for col, name in enumerate(("pressure", "saturation")):
        row = {"quantity": name, "n": errors.shape[0]}
        for p, value in zip(probs, np.quantile(errors[:, col], probs)):
            row[f"p{int(round(p * 100))}"] = float(value)
        rows.append(row)
    return pd.DataFrame(rows)
