"""
Tabular records shared by every run directory.

All samplers write hyperparameter samples in one schema so external tools
can draw pairwise plots and the diagnostics can compare any two runs.
"""

from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..diagnostics.divergence import SampleSet
from ..diagnostics.summaries import percentile_frame
from ..forward.observation import DataVector
from ..geomodel.hyperparams import PARAMETER_NAMES, HyperParams
from ..inference.rejection import RsResult
from ..inference.smc_abc import Population

POSTERIOR_COLUMNS: Tuple[str, ...] = (
    "iteration", "particle", "run", *PARAMETER_NAMES, "weight", "distance", "seed", "representative",
)
OBSERVATION_COLUMNS: Tuple[str, ...] = ("index", "channel", "layer", "time", "true", "observed")


def format_seed(seed: Sequence[int]) -> str:
    return "-".join(str(int(s)) for s in seed)


def hyper_rows(
    hypers: Sequence[HyperParams],
    iteration: int = 0,
    run: int = 0,
    weights: Optional[Sequence[float]] = None,
    distances: Optional[Sequence[float]] = None,
    seeds: Optional[Sequence[Sequence[int]]] = None,
    representative: Optional[Sequence[bool]] = None,
) -> pd.DataFrame:
    """Hyperparameter samples in the shared posterior schema."""
    n = len(hypers)
    weights = np.full(n, 1.0 / n) if weights is None and n else weights
    rows = []
    for i, h in enumerate(hypers):
        row = {"iteration": iteration, "particle": i, "run": run}
        row.update(h.to_dict())
        row["weight"] = float(weights[i])
        row["distance"] = float(distances[i]) if distances is not None else np.nan
        row["seed"] = format_seed(seeds[i]) if seeds is not None else ""
        row["representative"] = int(bool(representative[i])) if representative is not None else 0
        rows.append(row)
    return pd.DataFrame(rows, columns=list(POSTERIOR_COLUMNS))


def population_frame(pop: Population) -> pd.DataFrame:
    return hyper_rows(
        pop.hypers(),
        iteration=pop.t,
        run=pop.n_runs,
        weights=pop.weights,
        distances=pop.distances,
        seeds=[p.seed for p in pop.particles],
    )


def populations_frame(pops: Iterable[Population]) -> pd.DataFrame:
    frames = [population_frame(p) for p in pops]
    if not frames:
        return pd.DataFrame(columns=list(POSTERIOR_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def rs_frame(result: RsResult, until: Optional[int] = None) -> pd.DataFrame:
    """Accepted RS samples (optionally only those within the first ``until`` runs)."""
    samples = result.accepted if until is None else result.accepted_until(until)
    frame = hyper_rows(
        [s.h for s in samples],
        seeds=[s.seed for s in samples],
    )
    frame["run"] = [s.run for s in samples]
    return frame


def snapshot_frame(snapshots: Sequence[Tuple[int, pd.DataFrame]]) -> pd.DataFrame:
    """Stack (run_count, samples) snapshots into one table with a run_count column."""
    frames = []
    for count, frame in snapshots:
        tagged = frame.copy()
        tagged.insert(0, "run_count", int(count))
        frames.append(tagged)
    if not frames:
        return pd.DataFrame(columns=["run_count", *POSTERIOR_COLUMNS])
    return pd.concat(frames, ignore_index=True)


def sample_set(frame: pd.DataFrame, names: Sequence[str]) -> SampleSet:
    return SampleSet.from_frame(frame, names, weight_column="weight")


def observations_frame(d_true: DataVector, d_obs: DataVector) -> pd.DataFrame:
    d_true.require_same_layout(d_obs)
    return pd.DataFrame({
        "index": np.arange(len(d_obs)),
        "channel": list(d_obs.channels),
        "layer": list(d_obs.layers),
        "time": list(d_obs.times),
        "true": d_true.values,
        "observed": d_obs.values,
    }, columns=list(OBSERVATION_COLUMNS))


def read_observations(path: Union[str, Path], column: str = "observed") -> DataVector:
    frame = pd.read_csv(path)
    return DataVector(
        values=frame[column].to_numpy(dtype=float),
        channels=tuple(frame["channel"]),
        times=tuple(frame["time"]),
        layers=tuple(frame["layer"]),
    )


def envelope_frame(name: str, times: Sequence[float], series: np.ndarray) -> pd.DataFrame:
    """
    P10/P50/P90 monitoring-well envelopes.

    Args:
        name: Ensemble label ("prior", "posterior").
        times: Report times.
        series: (n_members, 2, n_times) pressure and saturation series.
    """
    frames: List[pd.DataFrame] = []
    for c, channel in enumerate(("pressure", "saturation")):
        frame = percentile_frame(times, series[:, c, :])
        frame.insert(0, "channel", channel)
        frame.insert(0, "ensemble", name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
