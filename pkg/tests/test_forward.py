from dataclasses import replace

import numpy as np
import pytest

from src.forward.accuracy import convergence_error_table, self_convergence_errors
from src.forward.model import ForwardModel, hyper_from_augmented
from src.forward.observation import ObservationSchedule
from src.forward.simulator import SECONDS_PER_YEAR, SimConfig, SimOutput, simulate
from src.geomodel.field import FieldRealization, generate_field
from src.geomodel.hyperparams import GridSpec, HyperParams
from src.utils.errors import CflViolation, ConfigError, DegenerateRange, ShapeMismatch


def homogeneous(grid, log_k=3.3, log10_ar=-0.5):
    h = HyperParams(mu_logk=log_k, sigma_logk=0.0, log10_ar=log10_ar, corr_len_h=8.0, porosity=0.2)
    return FieldRealization(grid=grid, log_k=np.full(grid.n_cells, log_k), hyper=h)


@pytest.fixture
def field(hyper, tiny_grid):
    return generate_field(hyper, tiny_grid, np.random.default_rng(1))


def test_zero_rate_stays_at_equilibrium(tiny_sim, tiny_grid):
    cfg = replace(tiny_sim, injection_rate=0.0)
    out = simulate(homogeneous(tiny_grid), cfg)
    np.testing.assert_allclose(out.pressure, cfg.initial_pressure, rtol=0, atol=1e-9)
    assert np.all(out.saturation == 0.0)


def test_tracer_volume_is_conserved(tiny_sim, field):
    out = simulate(field, tiny_sim)
    expected = tiny_sim.injection_rate / 86400.0 * np.asarray(tiny_sim.report_times) * SECONDS_PER_YEAR
    np.testing.assert_allclose(out.injected_volume, expected, rtol=1e-12)
    np.testing.assert_allclose(out.stored_volume, out.injected_volume, rtol=1e-6)


def test_saturation_stays_in_unit_interval(tiny_sim, field):
    cfg = replace(tiny_sim, injection_rate=5000.0)
    out = simulate(field, cfg)
    assert out.saturation.min() >= 0.0
    assert out.saturation.max() <= 1.0 + 1e-12


def test_residual_below_tolerance(tiny_sim, field):
    out = simulate(field, tiny_sim)
    assert out.max_residual <= tiny_sim.solver_tol


def test_quarter_symmetry_on_homogeneous_grid():
    grid = GridSpec(9, 9, 1, 100.0, 100.0, 10.0)
    cfg = SimConfig(grid=grid, injector=(4, 4), monitor=(5, 4), report_times=(1.0, 2.0, 3.0))
    out = simulate(homogeneous(grid), cfg)
    for series, atol in ((out.pressure, 1e-6), (out.saturation, 1e-9)):
        maps = series.reshape(len(cfg.report_times), 9, 9)
        np.testing.assert_allclose(maps, maps[:, ::-1, :], atol=atol)
        np.testing.assert_allclose(maps, maps[:, :, ::-1], atol=atol)
        np.testing.assert_allclose(maps, np.transpose(maps, (0, 2, 1)), atol=atol)


def test_injector_pressure_is_non_decreasing(tiny_sim, field):
    out = simulate(field, tiny_sim)
    inj = tiny_sim.grid.index(tiny_sim.injector[0], tiny_sim.injector[1], 0)
    series = out.pressure[:, inj]
    assert np.all(np.diff(series) >= -1e-6)
    assert series[0] > tiny_sim.initial_pressure


def test_saturation_decays_away_from_injector(tiny_sim, tiny_grid):
    out = simulate(homogeneous(tiny_grid), tiny_sim)
    near = tiny_grid.index(3, 3, 0)
    far = tiny_grid.index(0, 0, 0)
    assert out.saturation[-1, near] > out.saturation[-1, far]


def test_higher_permeability_lowers_monitor_overpressure(tiny_sim, tiny_grid):
    low = simulate(homogeneous(tiny_grid, log_k=3.0), tiny_sim)
    high = simulate(homogeneous(tiny_grid, log_k=3.0 + np.log(10.0)), tiny_sim)
    rise_low = low.monitor_pressure - tiny_sim.initial_pressure
    rise_high = high.monitor_pressure - tiny_sim.initial_pressure
    assert np.all(rise_high <= rise_low + 1e-9)


def test_simulation_is_deterministic(tiny_sim, field):
    a = simulate(field, tiny_sim)
    b = simulate(field, tiny_sim)
    np.testing.assert_array_equal(a.pressure, b.pressure)
    np.testing.assert_array_equal(a.saturation, b.saturation)


def test_grid_mismatch_is_rejected(tiny_sim):
    other = GridSpec(5, 5, 2, 100.0, 100.0, 10.0)
    with pytest.raises(ShapeMismatch):
        simulate(homogeneous(other), tiny_sim)


def test_cfl_violation_without_substepping(tiny_sim, tiny_grid):
    cfg = replace(tiny_sim, injection_rate=5000.0, substep_limiter=False)
    with pytest.raises(CflViolation):
        simulate(homogeneous(tiny_grid), cfg)


@pytest.mark.parametrize("overrides, path", [
    ({"injector": (9, 0)}, "simulation.injector"),
    ({"monitor_layer": 5}, "simulation.monitor_layer"),
    ({"report_times": (2.0, 1.0)}, "simulation.report_times"),
    ({"inner_steps": 0}, "simulation.inner_steps"),
    ({"cfl": 1.5}, "simulation.cfl"),
])
def test_sim_config_validation(tiny_grid, overrides, path):
    with pytest.raises(ConfigError, match=path):
        SimConfig(grid=tiny_grid, injector=(3, 3), monitor=(4, 3), **overrides)


def test_monitor_series_reads_configured_layer(tiny_sim, field):
    out = simulate(field, tiny_sim)
    np.testing.assert_array_equal(out.monitor_series("pressure"), out.monitor_pressure)
    lower = out.monitor_series("saturation", layer=1)
    np.testing.assert_array_equal(lower, out.saturation[:, tiny_sim.grid.index(4, 3, 1)])


def test_self_convergence_of_identical_runs_is_zero(tiny_sim, field):
    out = simulate(field, tiny_sim)
    dp, ds = self_convergence_errors(out, out)
    assert dp == 0.0
    assert ds == 0.0


def test_self_convergence_shrinks_under_refinement(tiny_sim, field):
    base = replace(tiny_sim, inner_steps=1)
    runs = [simulate(field, base.refined(f)) for f in (1, 2, 4)]
    coarse_dp, _ = self_convergence_errors(runs[0], runs[1])
    fine_dp, _ = self_convergence_errors(runs[1], runs[2])
    assert fine_dp < coarse_dp


def test_self_convergence_per_time(tiny_sim, field):
    coarse = simulate(field, tiny_sim)
    fine = simulate(field, tiny_sim.refined())
    dp, ds = self_convergence_errors(coarse, fine, per_time=True)
    assert dp.shape == (len(tiny_sim.report_times),)
    assert ds.shape == (len(tiny_sim.report_times),)
    assert np.all(dp >= 0)


def _flat_output(grid, times, pressure):
    n = grid.n_cells
    p = np.full((len(times), n), pressure)
    s = np.zeros((len(times), n))
    return SimOutput(
        grid=grid, times=times, pressure=p, saturation=s, monitor_pressure=p[:, 0],
        monitor_saturation=s[:, 0], monitor=(0, 0), monitor_layer=0,
        injected_volume=np.zeros(len(times)), stored_volume=np.zeros(len(times)),
    )


def test_degenerate_pressure_range(tiny_grid):
    flat = _flat_output(tiny_grid, (1.0, 2.0), 15.5)
    with pytest.raises(DegenerateRange):
        self_convergence_errors(flat, flat)


def test_saturation_error_uses_epsilon_floor(tiny_grid):
    fine = _flat_output(tiny_grid, (1.0,), 15.5)
    fine.pressure[0, 0] = 16.5
    coarse = _flat_output(tiny_grid, (1.0,), 15.5)
    coarse.pressure[0, 0] = 16.5
    coarse.saturation[0, :] = 0.025
    dp, ds = self_convergence_errors(coarse, fine)
    assert dp == 0.0
    assert ds == pytest.approx(1.0)


def test_convergence_error_table(tiny_sim, hyper):
    pairs = []
    for seed in range(3):
        m = generate_field(hyper, tiny_sim.grid, np.random.default_rng(seed))
        pairs.append((simulate(m, tiny_sim), simulate(m, tiny_sim.refined())))
    table = convergence_error_table(pairs)
    assert list(table["quantity"]) == ["pressure", "saturation"]
    assert set(table.columns) >= {"n", "p10", "p50", "p90"}
    assert (table["p10"] <= table["p90"]).all()
    assert (table["n"] == 3).all()


def test_forward_model_is_deterministic_per_seed(tiny_sim, hyper):
    model = ForwardModel(sim=tiny_sim, schedule=ObservationSchedule(indices=(0, 2)))
    a = model(hyper, (1, 2, 3))
    b = model(hyper, (1, 2, 3))
    c = model(hyper, (1, 2, 4))
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert len(a) == 4


def test_forecast_state_shape(tiny_sim, hyper):
    model = ForwardModel(sim=tiny_sim)
    m = model.realize(hyper, (5,))
    series = model.forecast_state(m.log_k, hyper)
    assert series.shape == (2, len(tiny_sim.report_times))
    np.testing.assert_array_equal(series[0], model.run_output(m).monitor_pressure)


def test_state_forward_matches_field_run(tiny_sim, hyper):
    model = ForwardModel(sim=tiny_sim, schedule=ObservationSchedule(indices=(0, 1)))
    m = model.realize(hyper, (9,))
    np.testing.assert_array_equal(model.state_forward(hyper)(m.log_k).values, model.run_field(m).values)


def test_augmented_state_hyperparameters(hyper):
    state = np.array([1.0, 2.0, 3.0, 4.0, -1.25])
    h = hyper_from_augmented(state, hyper)
    assert h.mu_logk == pytest.approx(2.5)
    assert h.sigma_logk == pytest.approx(np.std([1.0, 2.0, 3.0, 4.0]))
    assert h.log10_ar == -1.25
    assert h.porosity == hyper.porosity
