"""
Twin-experiment orchestration.

Coordinates synthetic-truth generation, sampler runs and diagnostics, and
persists every artifact with a checksum manifest and a run ledger.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config.experiment import ExperimentConfig, parse_config
from ..config.settings import settings
from ..diagnostics.divergence import (
    SampleSet,
    convergence_curve,
    curve_frame,
    marginal_js,
    prior_edges,
)
from ..diagnostics.summaries import field_posterior_stats, series_percentiles
from ..forward.model import hyper_from_augmented
from ..forward.observation import DataVector, add_noise, observe
from ..forward.simulator import simulate
from ..geomodel.field import FieldRealization, generate_field
from ..geomodel.field_io import field_frame, read_field, write_field, write_field_csv
from ..geomodel.hyperparams import HyperParams, sample_prior
from ..inference.esmda import EnsembleState, esmda_run
from ..inference.evaluator import Evaluator, task_rng, task_seed
from ..inference.hierarchical import hierarchical_run, modified_esmda_run
from ..inference.rejection import rejection_sampling
from ..inference.smc_abc import smc_abc
from ..utils.artifacts import hash_file, read_json, write_csv, write_json, write_manifest
from ..utils.errors import BudgetExhausted, NumericalError, TruthMismatch, UsageError
from ..utils.logger import setup_logger
from . import records

logger = setup_logger(__name__)

METHODS: Tuple[str, ...] = ("rs", "smcabc", "esmda", "hierarchical", "modified-esmda")

TRUTH_FILE = "truth.json"
OBSERVATIONS_FILE = "observations.csv"
CONFIG_FILE = "config.json"
SERIES_COLUMNS: Tuple[str, ...] = ("method", "ensemble", "channel", "time", "p10", "p50", "p90")


@dataclass(frozen=True)
class TruthBundle:
    """Synthetic truth read back from disk."""

    directory: Path
    h_true: HyperParams
    d_obs: DataVector
    truth_id: str


@dataclass(frozen=True)
class RunSummary:
    """Outcome of one ``run`` command."""

    directory: Path
    method: str
    forward_runs: int
    forecast_runs: int
    budget_exhausted: bool


class ExperimentRunner:
    """
    Main twin-experiment orchestrator.

    Owns the worker pool for forward evaluations and writes all artifacts of
    a command under one output directory.
    """

    def __init__(self, config: ExperimentConfig, workers: Optional[int] = None):
        """
        Initialize ExperimentRunner.

        Args:
            config: Validated experiment configuration.
            workers: Forward-evaluation pool size. If None, uses settings.
        """
        self.config = config
        self.workers = workers or settings.WORKERS
        self.model = config.forward_model()
        logger.info(
            f"Initialized experiment {config.name!r}: {config.sim.grid.n_cells} cells, "
            f"seed {config.seed}, {self.workers} worker(s)"
        )

    # ------------------------------------------------------------------
    # gen-truth
    # ------------------------------------------------------------------
    def gen_truth(self, out_dir: Union[str, Path]) -> TruthBundle:
        """
        Generate and persist the synthetic truth.

        Draws (or reads) the true hyperparameters, generates the true field,
        simulates it, extracts the observations and adds measurement noise.

        Args:
            out_dir: Truth bundle directory.

        Returns:
            TruthBundle: The bundle as written.
        """
        cfg = self.config
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        h_true = cfg.truth.resolve(cfg.prior, task_rng(cfg.seed, "truth.hyper"))
        field = generate_field(h_true, cfg.sim.grid, task_rng(cfg.seed, "truth.field"), cfg.variogram)
        out = simulate(field, cfg.sim)
        d_true = observe(out, cfg.schedule)
        d_obs = add_noise(d_true, cfg.noise, task_rng(cfg.seed, "truth.noise"))
        logger.info(
            f"Truth ({cfg.truth.mode}): mu={h_true.mu_logk:.3f}, sigma={h_true.sigma_logk:.3f}, "
            f"log10_ar={h_true.log10_ar:.3f}; {len(d_obs)} observations"
        )

        write_field(out_dir / "truth_field.bin", cfg.sim.grid, field.log_k)
        write_field_csv(out_dir / "truth_field.csv", cfg.sim.grid, field.log_k, name="log_k")
        write_csv(out_dir / "true_series.csv", pd.DataFrame({
            "time": list(out.times),
            "pressure": out.monitor_pressure,
            "saturation": out.monitor_saturation,
        }))
        write_csv(out_dir / OBSERVATIONS_FILE, records.observations_frame(d_true, d_obs))
        write_json(out_dir / CONFIG_FILE, cfg.raw)
        truth_id = hash_file(out_dir / OBSERVATIONS_FILE)
        write_json(out_dir / TRUTH_FILE, {
            "name": cfg.name,
            "seed": cfg.seed,
            "mode": cfg.truth.mode,
            "h_true": h_true.to_dict(),
            "truth_id": truth_id,
            "streams": ["truth.hyper", "truth.field", "truth.noise"],
        })
        write_manifest(out_dir, {"command": "gen-truth", "truth_id": truth_id})
        return TruthBundle(directory=out_dir, h_true=h_true, d_obs=d_obs, truth_id=truth_id)

    @staticmethod
    def load_truth(truth_dir: Union[str, Path]) -> TruthBundle:
        """
        Read a truth bundle.

        Raises:
            UsageError: If the directory is not a truth bundle.
        """
        truth_dir = Path(truth_dir)
        if not (truth_dir / TRUTH_FILE).exists() or not (truth_dir / OBSERVATIONS_FILE).exists():
            raise UsageError(f"{truth_dir} is not a truth bundle (run gen-truth first)")
        meta = read_json(truth_dir / TRUTH_FILE)
        return TruthBundle(
            directory=truth_dir,
            h_true=HyperParams.from_dict(meta["h_true"]),
            d_obs=records.read_observations(truth_dir / OBSERVATIONS_FILE),
            truth_id=meta["truth_id"],
        )

    # ------------------------------------------------------------------
    # run
    # ------------------------------------------------------------------
    def run(
        self,
        method: str,
        truth_dir: Union[str, Path],
        out_dir: Union[str, Path],
        strict: bool = False,
    ) -> RunSummary:
        """
        Execute one sampler against a truth bundle.

        Args:
            method: One of ``METHODS``.
            truth_dir: Truth bundle directory.
            out_dir: Run directory.
            strict: Raise BudgetExhausted instead of returning partial results.

        Returns:
            RunSummary: Run directory and forward-run accounting.
        """
        if method not in METHODS:
            raise UsageError(f"unknown method {method!r}, expected one of {', '.join(METHODS)}")
        truth = self.load_truth(truth_dir)
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        evaluator = Evaluator(workers=self.workers)

        handler = {
            "rs": self._run_rs,
            "smcabc": self._run_smcabc,
            "esmda": self._run_esmda,
            "hierarchical": self._run_hierarchical,
            "modified-esmda": self._run_modified_esmda,
        }[method]
        logger.info(f"Running {method} against truth {truth.truth_id[:12]}")
        try:
            ledger = handler(truth, out_dir, evaluator)
        except NumericalError as err:
            self._write_partial(out_dir, method, truth, evaluator, err)
            raise

        ledger.update({
            "method": method,
            "seed": self.config.seed,
            "truth_id": truth.truth_id,
            "simulate_calls": evaluator.n_runs,
        })
        ledger.setdefault("forecast_runs", 0)
        ledger.setdefault("budget_exhausted", False)
        write_json(out_dir / CONFIG_FILE, self.config.raw)
        write_json(out_dir / settings.LEDGER_NAME, ledger)
        write_manifest(out_dir, {"command": "run", "method": method, "truth_id": truth.truth_id})

        summary = RunSummary(
            directory=out_dir,
            method=method,
            forward_runs=int(ledger["forward_runs"]),
            forecast_runs=int(ledger["forecast_runs"]),
            budget_exhausted=bool(ledger["budget_exhausted"]),
        )
        logger.info(
            f"{method} finished: {summary.forward_runs} forward runs, "
            f"{summary.forecast_runs} forecast runs"
        )
        if strict and summary.budget_exhausted:
            raise BudgetExhausted(f"{method} exhausted its budget after {summary.forward_runs} runs")
        return summary

    def _write_partial(
        self, out_dir: Path, method: str, truth: TruthBundle, evaluator: Evaluator, err: NumericalError,
    ) -> None:
        """Persist the last good ensemble and counters of an aborted run."""
        report = {
            "method": method,
            "seed": self.config.seed,
            "truth_id": truth.truth_id,
            "error": type(err).__name__,
            "message": str(err),
            "simulate_calls": evaluator.n_runs,
            "completed_steps": err.completed_steps,
            "esmda_runs": err.n_runs,
            "mismatch": list(err.mismatch),
        }
        state = err.partial_state
        if state is not None:
            n_cells = self.config.sim.grid.n_cells
            if state.dim >= n_cells:
                self._write_members(out_dir / "partial", state.members[:, :n_cells])
            report["partial_members"] = state.size
        write_json(out_dir / "partial.json", report)
        write_manifest(out_dir, {"command": "run", "method": method, "truth_id": truth.truth_id, "aborted": True})
        logger.error(f"{method} aborted ({type(err).__name__}); partial state written to {out_dir}")

    def _r_diag(self, truth: TruthBundle) -> np.ndarray:
        return self.config.noise.r_diag(truth.d_obs)

    def _run_rs(self, truth: TruthBundle, out_dir: Path, evaluator: Evaluator) -> Dict:
        cfg = self.config
        result = rejection_sampling(
            cfg.prior, self.model, truth.d_obs, self._r_diag(truth), cfg.rejection, cfg.seed, evaluator,
        )
        write_csv(out_dir / "posterior.csv", records.rs_frame(result))
        snapshots = [(count, records.rs_frame(result, until=count)) for count, _ in result.snapshots]
        if not snapshots or snapshots[-1][0] != result.n_runs:
            snapshots.append((result.n_runs, records.rs_frame(result)))
        write_csv(out_dir / "snapshots.csv", records.snapshot_frame(snapshots))
        return {
            "forward_runs": result.n_runs,
            "budget_exhausted": False,
            "rejection": {
                "budget": cfg.rejection.budget,
                "pilot_runs": result.n_pilot,
                "log_bound": result.log_bound,
                "accepted": len(result.accepted),
                "acceptance_rate": result.acceptance_rate,
                "bound_violations": result.bound_violations,
                "snapshots": [{"run_count": c, "accepted": a} for c, a in result.snapshots],
            },
        }

    def _smc(self, truth: TruthBundle, out_dir: Path, evaluator: Evaluator):
        cfg = self.config
        result = smc_abc(cfg.prior, self.model, truth.d_obs, cfg.noise, cfg.smc, cfg.seed, evaluator)
        write_csv(out_dir / "populations.csv", records.populations_frame(result.populations))
        if result.final is not None:
            write_csv(out_dir / "posterior.csv", records.population_frame(result.final))
        snapshots = [(p.n_runs, records.population_frame(p)) for p in result.populations]
        write_csv(out_dir / "snapshots.csv", records.snapshot_frame(snapshots))
        ledger = {
            "forward_runs": result.n_runs,
            "budget_exhausted": result.budget_exhausted,
            "smc_abc": {
                "n_particles": cfg.smc.n_particles,
                "stop_reason": result.stop_reason,
                "iterations": [
                    {
                        "t": p.t,
                        "epsilon": p.epsilon,
                        "next_epsilon": p.next_epsilon,
                        "accept_rate": p.accept_rate,
                        "n_evaluated": p.n_evaluated,
                        "n_runs": p.n_runs,
                        "ess": p.effective_size(),
                    }
                    for p in result.populations
                ],
                "runs_in_unfinished_iteration": result.n_runs - (result.final.n_runs if result.final else 0),
            },
        }
        return result, ledger

    def _run_smcabc(self, truth: TruthBundle, out_dir: Path, evaluator: Evaluator) -> Dict:
        _, ledger = self._smc(truth, out_dir, evaluator)
        return ledger

    def _run_hierarchical(self, truth: TruthBundle, out_dir: Path, evaluator: Evaluator) -> Dict:
        cfg = self.config
        smc_result, ledger = self._smc(truth, out_dir, evaluator)
        if smc_result.final is None:
            logger.warning("No completed SMC-ABC iteration; skipping the ESMDA stage")
            return ledger

        result = hierarchical_run(
            smc_result.final, self.model, truth.d_obs, self._r_diag(truth), cfg.esmda, cfg.hierarchical,
            cfg.seed, names=cfg.prior.active, smc_runs=smc_result.n_runs, evaluator=evaluator,
        )
        write_csv(out_dir / "representatives.csv", records.hyper_rows(
            result.representatives, iteration=smc_result.final.t, run=result.total_runs,
            representative=[True] * len(result.representatives),
        ))
        for r, post in enumerate(result.posteriors):
            self._write_members(out_dir / "ensembles" / f"rep_{r:02d}", post.state.members)

        posterior_states = [(m, post.hyper) for post in result.posteriors for m in post.state.members]
        forecast = self._forecast_and_maps(out_dir, posterior_states, evaluator, truth)
        ledger["forward_runs"] = result.total_runs
        ledger["forecast_runs"] = forecast
        ledger["hierarchical"] = {
            "n_rep": len(result.representatives),
            "n_ensemble": cfg.esmda.n_ensemble,
            "alphas": list(cfg.esmda.alphas),
            "smc_runs": result.smc_runs,
            "esmda_runs": result.esmda_runs,
            "total_runs": result.total_runs,
            "n_realizations": result.n_realizations,
            "mismatch": [post.result.mismatch for post in result.posteriors],
        }
        return ledger

    def _run_esmda(self, truth: TruthBundle, out_dir: Path, evaluator: Evaluator) -> Dict:
        cfg = self.config
        h = cfg.prior.midpoint()
        fields = [self.model.realize(h, task_seed(cfg.seed, "esmda.member", i)) for i in range(cfg.esmda.n_ensemble)]
        initial = EnsembleState(members=np.vstack([f.log_k for f in fields]), hyper=h)
        result = esmda_run(
            initial, self.model.state_forward(h), truth.d_obs, cfg.esmda, cfg.seed,
            evaluator=evaluator, r_diag=self._r_diag(truth),
        )
        members = result.state.members
        hypers = [h.with_values(("mu_logk", "sigma_logk"), (float(np.mean(m)), float(np.std(m)))) for m in members]
        write_csv(out_dir / "posterior.csv", records.hyper_rows(hypers, run=result.n_runs))
        write_csv(out_dir / "snapshots.csv", records.snapshot_frame([(result.n_runs, records.hyper_rows(hypers, run=result.n_runs))]))
        self._write_members(out_dir / "ensembles" / "esmda", members)
        forecast = self._forecast_and_maps(out_dir, [(m, h) for m in members], evaluator, truth)
        return {
            "forward_runs": result.n_runs,
            "forecast_runs": forecast,
            "esmda": {
                "n_ensemble": cfg.esmda.n_ensemble,
                "alphas": list(cfg.esmda.alphas),
                "hyper": h.to_dict(),
                "mismatch": result.mismatch,
            },
        }

    def _run_modified_esmda(self, truth: TruthBundle, out_dir: Path, evaluator: Evaluator) -> Dict:
        cfg = self.config
        result = modified_esmda_run(
            cfg.prior, self.model, truth.d_obs, self._r_diag(truth), cfg.modified_esmda, cfg.seed, evaluator,
        )
        frame = records.hyper_rows(result.posterior_hypers, run=result.n_runs)
        write_csv(out_dir / "posterior.csv", frame)
        write_csv(out_dir / "prior.csv", records.hyper_rows(result.prior_hypers))
        write_csv(out_dir / "snapshots.csv", records.snapshot_frame([(result.n_runs, frame)]))
        members = result.esmda.state.members
        self._write_members(out_dir / "ensembles" / "modified", members[:, :-1])
        base = cfg.prior.midpoint()
        states = [(m[:-1], hyper_from_augmented(m, base)) for m in members]
        forecast = self._forecast_and_maps(out_dir, states, evaluator, truth)
        return {
            "forward_runs": result.n_runs,
            "forecast_runs": forecast,
            "modified_esmda": {
                "n_ensemble": cfg.modified_esmda.n_ensemble,
                "alphas": list(cfg.modified_esmda.alphas),
                "state_dim": int(members.shape[1]),
                "mismatch": result.esmda.mismatch,
            },
        }

    def _write_members(self, directory: Path, members: np.ndarray) -> None:
        grid = self.config.sim.grid
        for i, m in enumerate(members):
            write_field(directory / f"member_{i:04d}.bin", grid, m)

    def _prior_fields(self) -> List[FieldRealization]:
        cfg = self.config
        fields = []
        for i in range(cfg.forecast_members):
            h = sample_prior(cfg.prior, task_rng(cfg.seed, "forecast.prior", i))
            fields.append(self.model.realize(h, task_seed(cfg.seed, "forecast.field", i)))
        return fields

    def _forecast_and_maps(
        self,
        out_dir: Path,
        posterior: Sequence[Tuple[np.ndarray, HyperParams]],
        evaluator: Evaluator,
        truth: TruthBundle,
    ) -> int:
        """
        Prior/posterior monitoring-well envelopes and posterior field maps.

        Returns:
            int: Forecast runs spent (outside the assimilation budget).
        """
        start = evaluator.n_runs
        times = self.config.sim.report_times
        prior = self._prior_fields()
        prior_series = np.stack(evaluator.map(self.model.forecast_state, [(f.log_k, f.hyper) for f in prior]))
        post_series = np.stack(evaluator.map(self.model.forecast_state, list(posterior)))
        envelopes = pd.concat([
            records.envelope_frame("prior", times, prior_series),
            records.envelope_frame("posterior", times, post_series),
        ], ignore_index=True)
        write_csv(out_dir / "envelopes.csv", envelopes)

        self._log_coverage(truth, post_series)

        grid = self.config.sim.grid
        stats = field_posterior_stats([np.vstack([m for m, _ in posterior])], prior=np.vstack([f.log_k for f in prior]))
        write_field(out_dir / "maps" / "posterior_mean.bin", grid, stats.mean)
        write_field(out_dir / "maps" / "posterior_variance.bin", grid, stats.variance)
        write_field(out_dir / "maps" / "variance_reduction.bin", grid, stats.reduction)
        write_csv(out_dir / "maps" / "field_stats.csv", field_frame(
            grid, mean=stats.mean, variance=stats.variance, reduction=stats.reduction,
        ))
        return evaluator.n_runs - start

    def _log_coverage(self, truth: TruthBundle, post_series: np.ndarray) -> None:
        """Log how many observed monitor pressures fall inside the posterior P10-P90 band."""
        d = truth.d_obs
        times = [float(t) for t in self.config.sim.report_times]
        keep = d.mask("pressure") & (np.asarray(d.layers) == self.config.sim.monitor_layer)
        if not np.any(keep):
            return
        idx = [times.index(t) for t, k in zip(d.times, keep) if k]
        bands = series_percentiles(post_series[:, 0, :])
        observed = d.values[keep]
        inside = int(np.sum((observed >= bands[0, idx]) & (observed <= bands[2, idx])))
        logger.info(f"Posterior P10-P90 pressure band brackets {inside}/{len(idx)} observations")

    # ------------------------------------------------------------------
    # diag
    # ------------------------------------------------------------------
    @staticmethod
    def diag(
        run_dirs: Sequence[Union[str, Path]],
        reference_dir: Optional[Union[str, Path]],
        out_dir: Union[str, Path],
        bins: Optional[int] = None,
    ) -> Path:
        """
        Compare run directories against a reference run.

        Writes ``convergence.csv`` (method, parameter, run_count, js),
        ``final_js.csv``, ``hyper_percentiles.csv``, ``series_percentiles.csv``
        (P10/P50/P90 monitoring-well series per run) and, for runs that saved
        field members, ``maps/<run>/`` with posterior mean, variance and
        variance-reduction maps.

        Args:
            run_dirs: Run directories to assess.
            reference_dir: Reference run (typically a large rejection-sampling run).
            out_dir: Diagnostics directory.
            bins: Histogram bins (defaults to the reference configuration).

        Returns:
            Path: The diagnostics directory.

        Raises:
            UsageError: If the reference is missing.
            TruthMismatch: If the runs were produced from different truth bundles.
        """
        if reference_dir is None:
            raise UsageError("diag needs --reference")
        reference_dir = Path(reference_dir)
        if not (reference_dir / settings.LEDGER_NAME).exists():
            raise UsageError(f"reference {reference_dir} is not a run directory")
        run_dirs = [Path(d) for d in run_dirs]
        for d in run_dirs:
            if not (d / settings.LEDGER_NAME).exists():
                raise UsageError(f"{d} is not a run directory")

        ref_ledger = read_json(reference_dir / settings.LEDGER_NAME)
        for d in run_dirs:
            ledger = read_json(d / settings.LEDGER_NAME)
            if ledger["truth_id"] != ref_ledger["truth_id"]:
                raise TruthMismatch(f"{d} and {reference_dir} were produced from different truth bundles")

        config = parse_config(read_json(reference_dir / CONFIG_FILE))
        names = config.prior.active
        edges = prior_edges(config.prior, bins or config.bins)
        reference = records.sample_set(pd.read_csv(reference_dir / "posterior.csv"), names)

        out_dir = Path(out_dir)
        curves, finals, percentiles, envelopes = [], [], [], []
        for d in run_dirs:
            ledger = read_json(d / settings.LEDGER_NAME)
            label = f"{ledger['method']}:{d.name}"
            if (d / "envelopes.csv").exists():
                frame = pd.read_csv(d / "envelopes.csv")
                frame.insert(0, "method", label)
                envelopes.append(frame)
            _diag_field_maps(d, label, out_dir / "maps" / d.name)
            snaps = pd.read_csv(d / "snapshots.csv")
            snapshots = [
                (int(count), records.sample_set(group, names))
                for count, group in snaps.groupby("run_count", sort=True)
            ]
            curves.append(curve_frame(convergence_curve(snapshots, reference, edges), method=label))

            posterior_file = d / "posterior.csv"
            if not posterior_file.exists():
                logger.warning(f"{d} has no posterior (no completed iteration); skipping final JS")
                continue
            samples = records.sample_set(pd.read_csv(posterior_file), names)
            if len(samples) == 0:
                logger.warning(f"{d} accepted no samples; skipping final JS")
                continue
            for name, js in marginal_js(samples, reference, edges).items():
                finals.append({"method": label, "parameter": name, "run_count": ledger["forward_runs"], "js": js})
            percentiles.extend(_hyper_percentiles(label, samples))

        write_csv(out_dir / "convergence.csv", pd.concat(curves, ignore_index=True))
        write_csv(out_dir / "final_js.csv", pd.DataFrame(finals, columns=["method", "parameter", "run_count", "js"]))
        write_csv(out_dir / "hyper_percentiles.csv", pd.DataFrame(percentiles))
        write_csv(out_dir / "series_percentiles.csv", (
            pd.concat(envelopes, ignore_index=True) if envelopes else pd.DataFrame(columns=list(SERIES_COLUMNS))
        ))
        write_manifest(out_dir, {"command": "diag", "truth_id": ref_ledger["truth_id"]})
        logger.info(f"Diagnostics for {len(run_dirs)} run(s) written to {out_dir}")
        return out_dir


def _diag_field_maps(run_dir: Path, label: str, maps_dir: Path) -> bool:
    """
    Recompute cell-wise posterior maps from a run's saved field members.

    The prior ensemble for the variance-reduction map is regenerated from
    the run's configuration with the same seeds the run used. Runs without
    field members (rs, smcabc) are skipped.

    Returns:
        bool: True when maps were written.
    """
    files = sorted((run_dir / "ensembles").glob("*/member_*.bin"))
    if len(files) < 2:
        logger.debug(f"{label}: no field ensemble to summarize")
        return False
    members = np.vstack([read_field(f)[1] for f in files])
    runner = ExperimentRunner(parse_config(read_json(run_dir / CONFIG_FILE)), workers=1)
    grid = runner.config.sim.grid
    prior = np.vstack([f.log_k for f in runner._prior_fields()])
    stats = field_posterior_stats([members], prior=prior)
    write_field(maps_dir / "posterior_mean.bin", grid, stats.mean)
    write_field(maps_dir / "posterior_variance.bin", grid, stats.variance)
    write_field(maps_dir / "variance_reduction.bin", grid, stats.reduction)
    write_csv(maps_dir / "field_stats.csv", field_frame(
        grid, mean=stats.mean, variance=stats.variance, reduction=stats.reduction,
    ))
    logger.info(f"{label}: field maps from {len(files)} members written to {maps_dir}")
    return True


def _hyper_percentiles(label: str, samples: SampleSet) -> List[Dict]:
    """Weighted P10/P50/P90 of each hyperparameter marginal."""
    rows = []
    w = samples.weights if samples.weights is not None else np.ones(len(samples))
    for name in samples.names:
        x = samples.column(name)
        order = np.argsort(x, kind="stable")
        cdf = np.cumsum(w[order]) / np.sum(w)
        row = {"method": label, "parameter": name}
        for p in (0.1, 0.5, 0.9):
            row[f"p{int(p * 100)}"] = float(x[order][min(np.searchsorted(cdf, p), len(x) - 1)])
        rows.append(row)
    return rows
