"""
Desk-scale forward model: single-phase slightly-compressible Darcy flow with
passive tracer transport.

Pressure is advanced implicitly on a 7-point finite-volume stencil with
harmonic-mean transmissibilities; the injected-fluid fraction ("saturation")
is advected explicitly with first-order upwinding and CFL-limited
sub-steps. Outer faces are no-flow; boundary cells carry a pore-volume
multiplier that stands in for a large surrounding aquifer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from ..geomodel.field import FieldRealization
from ..geomodel.hyperparams import GridSpec
from ..utils.errors import CflViolation, ConfigError, ShapeMismatch, SolverDiverged
from ..utils.logger import setup_logger
from .observation import PRESSURE

logger = setup_logger(__name__)

MD_TO_M2 = 9.869233e-16
SECONDS_PER_YEAR = 365.25 * 86400.0
SECONDS_PER_DAY = 86400.0
PA_PER_MPA = 1.0e6

_RESTARTS = 3

DEFAULT_REPORT_TIMES: Tuple[float, ...] = (1.0, 4.0, 7.0, 10.0, 13.0, 16.0, 20.0, 23.0, 26.0, 30.0)


@dataclass(frozen=True)
class SimConfig:
    """
    Forward-model configuration.

    Attributes:
        grid: Simulation grid.
        injector: (i, j) column of the fully penetrating injector.
        monitor: (i, j) column of the monitoring well.
        monitor_layer: Layer read for monitor series (0 is the top layer).
        injection_rate: Injected volume rate (m^3/day).
        viscosity: Fluid viscosity (Pa s).
        compressibility: Total compressibility (1/Pa).
        initial_pressure: Initial pressure (MPa).
        report_times: Strictly increasing report times (years).
        inner_steps: Implicit pressure steps per report interval.
        boundary_pv_multiplier: Pore-volume multiplier on outer cells.
        solver_tol: Relative residual tolerance of the pressure solve.
        solver_maxiter_factor: Iteration cap as a multiple of the cell count.
        cfl: Target Courant number for tracer sub-steps.
        substep_limiter: When False, a CFL violation raises instead of sub-stepping.
    """

    grid: GridSpec = field(default_factory=lambda: GridSpec(16, 16, 4, 100.0, 100.0, 10.0))
    injector: Tuple[int, int] = (8, 8)
    monitor: Tuple[int, int] = (10, 9)
    monitor_layer: int = 0
    injection_rate: float = 500.0
    viscosity: float = 1.0e-3
    compressibility: float = 1.0e-9
    initial_pressure: float = 15.5
    report_times: Tuple[float, ...] = DEFAULT_REPORT_TIMES
    inner_steps: int = 2
    boundary_pv_multiplier: float = 1.0e3
    solver_tol: float = 1.0e-8
    solver_maxiter_factor: int = 10
    cfl: float = 0.9
    substep_limiter: bool = True

    def __post_init__(self):
        object.__setattr__(self, "report_times", tuple(float(t) for t in self.report_times))
        object.__setattr__(self, "injector", tuple(int(v) for v in self.injector))
        object.__setattr__(self, "monitor", tuple(int(v) for v in self.monitor))
        g = self.grid
        for name, (i, j) in (("injector", self.injector), ("monitor", self.monitor)):
            if not (0 <= i < g.nx and 0 <= j < g.ny):
                raise ConfigError(f"simulation.{name}", f"column {(i, j)} outside {g.nx}x{g.ny} grid")
        if not 0 <= self.monitor_layer < g.nz:
            raise ConfigError("simulation.monitor_layer", f"layer {self.monitor_layer} outside [0, {g.nz})")
        times = np.asarray(self.report_times)
        if times.size == 0 or times[0] <= 0 or np.any(np.diff(times) <= 0):
            raise ConfigError("simulation.report_times", "must be positive and strictly increasing")
        if self.injection_rate < 0:
            raise ConfigError("simulation.injection_rate", f"must be >= 0, got {self.injection_rate}")
        if self.viscosity <= 0 or self.compressibility <= 0:
            raise ConfigError("simulation", "viscosity and compressibility must be > 0")
        if self.inner_steps < 1:
            raise ConfigError("simulation.inner_steps", f"must be >= 1, got {self.inner_steps}")
        if self.boundary_pv_multiplier < 1:
            raise ConfigError("simulation.boundary_pv_multiplier", "must be >= 1")
        if not 0 < self.cfl <= 1:
            raise ConfigError("simulation.cfl", f"must lie in (0, 1], got {self.cfl}")

    def refined(self, factor: int = 2) -> "SimConfig":
        """Same configuration with ``factor`` times more inner steps."""
        return replace(self, inner_steps=self.inner_steps * factor)


@dataclass(frozen=True)
class SimOutput:
    """
    Pressure and saturation at every report time.

    Attributes:
        grid: Simulation grid.
        times: Report times (years).
        pressure: (n_times, n_cells) pressure (MPa).
        saturation: (n_times, n_cells) injected-fluid fraction.
        monitor_pressure: Monitor-cell pressure series (MPa).
        monitor_saturation: Monitor-cell saturation series.
        monitor: (i, j) monitor column.
        monitor_layer: Layer of the monitor series.
        injected_volume: Cumulative injected volume at report times (m^3).
        stored_volume: Tracer volume held in the grid at report times (m^3).
        max_residual: Largest relative residual over all pressure solves.
    """

    grid: GridSpec
    times: Tuple[float, ...]
    pressure: np.ndarray
    saturation: np.ndarray
    monitor_pressure: np.ndarray
    monitor_saturation: np.ndarray
    monitor: Tuple[int, int]
    monitor_layer: int
    injected_volume: np.ndarray
    stored_volume: np.ndarray
    max_residual: float = 0.0

    def monitor_series(self, channel: str, layer: Optional[int] = None) -> np.ndarray:
        """Series of one channel in the monitor column at ``layer``."""
        layer = self.monitor_layer if layer is None else layer
        idx = self.grid.index(self.monitor[0], self.monitor[1], layer)
        source = self.pressure if channel == PRESSURE else self.saturation
        return source[:, idx]


@lru_cache(maxsize=16)
def _faces(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Interior faces of the grid.

    Returns:
        (a, b, geom, vertical): cell pairs, area/distance factor per face and
        a mask of vertical faces.
    """
    idx = np.arange(grid.n_cells).reshape(grid.shape)
    a_parts, b_parts, geom_parts, vert_parts = [], [], [], []
    for axis, geom in ((2, grid.dy * grid.dz / grid.dx),
                       (1, grid.dx * grid.dz / grid.dy),
                       (0, grid.dx * grid.dy / grid.dz)):
        if idx.shape[axis] < 2:
            continue
        lo = np.take(idx, np.arange(idx.shape[axis] - 1), axis=axis).ravel()
        hi = np.take(idx, np.arange(1, idx.shape[axis]), axis=axis).ravel()
        a_parts.append(lo)
        b_parts.append(hi)
        geom_parts.append(np.full(lo.size, geom))
        vert_parts.append(np.full(lo.size, axis == 0))
    if not a_parts:
        empty = np.empty(0, dtype=int)
        return empty, empty, np.empty(0), np.empty(0, dtype=bool)
    return (np.concatenate(a_parts), np.concatenate(b_parts),
            np.concatenate(geom_parts), np.concatenate(vert_parts))


@lru_cache(maxsize=16)
def _boundary_mask(grid: GridSpec) -> np.ndarray:
    """Cells on the lateral outer ring of every layer."""
    i = np.arange(grid.nx)
    j = np.arange(grid.ny)
    ring = (i[None, :] == 0) | (i[None, :] == grid.nx - 1) | (j[:, None] == 0) | (j[:, None] == grid.ny - 1)
    return np.broadcast_to(ring, grid.shape).ravel().copy()


def _harmonic(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return 2.0 * x * y / (x + y)


def _transmissibilities(m: FieldRealization, cfg: SimConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b, geom, vertical = _faces(cfg.grid)
    k_h = np.exp(m.log_k) * MD_TO_M2
    k_v = k_h * m.hyper.anisotropy_ratio
    k_face = np.where(vertical, _harmonic(k_v[a], k_v[b]), _harmonic(k_h[a], k_h[b]))
    return a, b, geom * k_face / cfg.viscosity


def _laplacian(a: np.ndarray, b: np.ndarray, trans: np.ndarray, n: int) -> sparse.csr_matrix:
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([b, a, a, b])
    data = np.concatenate([-trans, -trans, trans, trans])
    return sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def _injection(m: FieldRealization, cfg: SimConfig) -> np.ndarray:
    """Source term (m^3/s) split over the injector column by layer permeability."""
    grid = cfg.grid
    q = np.zeros(grid.n_cells)
    if cfg.injection_rate == 0:
        return q
    column = np.array([grid.index(cfg.injector[0], cfg.injector[1], k) for k in range(grid.nz)])
    k_layer = np.exp(m.log_k[column])
    q[column] = cfg.injection_rate / SECONDS_PER_DAY * k_layer / k_layer.sum()
    return q


def _solve_pressure(A: sparse.csr_matrix, rhs: np.ndarray, inv_diag: sparse.dia_matrix, cfg: SimConfig) -> Tuple[np.ndarray, float]:
    """Solve A dp = rhs with Jacobi-preconditioned CG; returns (dp, relative residual)."""
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros_like(rhs), 0.0
    maxiter = cfg.solver_maxiter_factor * rhs.size
    dp, info = cg(A, rhs, rtol=cfg.solver_tol, atol=0.0, maxiter=maxiter, M=inv_diag)
    residual = float(np.linalg.norm(rhs - A @ dp)) / bnorm
    # CG stops on its recursive residual; restart from dp if the true one drifted above tol.
    for _ in range(_RESTARTS):
        if info != 0 or residual <= cfg.solver_tol:
            break
        dp, info = cg(A, rhs, x0=dp, rtol=cfg.solver_tol, atol=0.0, maxiter=maxiter, M=inv_diag)
        residual = float(np.linalg.norm(rhs - A @ dp)) / bnorm
    if info != 0 or residual > cfg.solver_tol:
        raise SolverDiverged(
            f"pressure solve stopped after {maxiter} iterations with relative residual {residual:.3e}"
        )
    return dp, residual


def _advect(
    sat: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    flux: np.ndarray,
    q: np.ndarray,
    pv_old: np.ndarray,
    pv_new: np.ndarray,
    dt: float,
    cfg: SimConfig,
) -> Tuple[np.ndarray, int]:
    """
    Upwind tracer update over one pressure step.

    The update is written relative to the receiving cell's own value, so each
    sub-step is a convex combination of upstream values and the injected
    fraction whenever the Courant number is at most one. Pore volume is
    interpolated linearly across sub-steps to match the pressure-step storage
    change exactly, which keeps the tracer volume balance exact.

    Sub-step counts are powers of two so runs with refined pressure steps share
    the same tracer clock.
    """
    n = sat.size
    forward = flux >= 0.0
    up = np.where(forward, a, b)
    down = np.where(forward, b, a)
    rate = np.abs(flux)
    inflow = np.bincount(down, weights=rate, minlength=n) + q
    courant = float(np.max(dt * inflow / np.minimum(pv_old, pv_new))) if n else 0.0
    if not cfg.substep_limiter:
        if courant > 1.0:
            raise CflViolation(f"tracer Courant number {courant:.3f} exceeds 1 with sub-stepping disabled")
        n_sub = 1
    elif courant <= cfg.cfl:
        n_sub = 1
    else:
        n_sub = int(2 ** int(np.ceil(np.log2(courant / cfg.cfl))))

    dts = dt / n_sub
    for s in range(1, n_sub + 1):
        pv_s = pv_old + (s / n_sub) * (pv_new - pv_old)
        gain = np.bincount(down, weights=rate * (sat[up] - sat[down]), minlength=n) + q * (1.0 - sat)
        sat = sat + dts * gain / pv_s
    return sat, n_sub


def simulate(m: FieldRealization, cfg: SimConfig) -> SimOutput:
    """
    Run the forward model on one log-permeability realization.

    Args:
        m: Field realization on ``cfg.grid``.
        cfg: Simulation configuration.

    Returns:
        SimOutput: Pressure and saturation at every report time.

    Raises:
        ShapeMismatch: If the field grid differs from the configured grid.
        SolverDiverged: If a pressure solve misses its tolerance.
        CflViolation: If sub-stepping is disabled and the Courant limit is exceeded.
    """
    grid = cfg.grid
    if m.grid != grid:
        raise ShapeMismatch(f"field grid {m.grid} differs from simulation grid {grid}")
    n = grid.n_cells

    a, b, trans = _transmissibilities(m, cfg)
    lap = _laplacian(a, b, trans, n)
    q = _injection(m, cfg)

    pv = np.full(n, m.hyper.porosity * grid.cell_volume)
    pv[_boundary_mask(grid)] *= cfg.boundary_pv_multiplier
    storage = pv * cfg.compressibility

    p = np.full(n, cfg.initial_pressure * PA_PER_MPA)
    sat = np.zeros(n)
    pv_eff = pv.copy()

    n_times = len(cfg.report_times)
    pressure = np.empty((n_times, n))
    saturation = np.empty((n_times, n))
    injected = np.empty(n_times)
    stored = np.empty(n_times)
    max_residual = 0.0
    total_substeps = 0

    t_prev = 0.0
    for r, t_report in enumerate(cfg.report_times):
        dt = (t_report - t_prev) * SECONDS_PER_YEAR / cfg.inner_steps
        A = (lap + sparse.diags(storage / dt)).tocsr()
        inv_diag = sparse.diags(1.0 / A.diagonal())
        for _ in range(cfg.inner_steps):
            dp, residual = _solve_pressure(A, q - lap @ p, inv_diag, cfg)
            max_residual = max(max_residual, residual)
            p_new = p + dp
            flux = trans * (p_new[a] - p_new[b])
            pv_new = pv_eff + storage * dp
            sat, n_sub = _advect(sat, a, b, flux, q, pv_eff, pv_new, dt, cfg)
            total_substeps += n_sub
            p, pv_eff = p_new, pv_new
        pressure[r] = p / PA_PER_MPA
        saturation[r] = sat
        injected[r] = q.sum() * t_report * SECONDS_PER_YEAR
        stored[r] = float(np.dot(pv_eff, sat))
        t_prev = t_report

    logger.debug(
        f"Simulated {n} cells over {n_times} reports: {total_substeps} tracer sub-steps, "
        f"max residual {max_residual:.2e}"
    )

    monitor_idx = grid.index(cfg.monitor[0], cfg.monitor[1], cfg.monitor_layer)
    return SimOutput(
        grid=grid,
        times=cfg.report_times,
        pressure=pressure,
        saturation=saturation,
        monitor_pressure=pressure[:, monitor_idx].copy(),
        monitor_saturation=saturation[:, monitor_idx].copy(),
        monitor=cfg.monitor,
        monitor_layer=cfg.monitor_layer,
        injected_volume=injected,
        stored_volume=stored,
        max_residual=max_residual,
    )
