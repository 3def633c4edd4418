import numpy as np
import pandas as pd
import pytest

from src.diagnostics.divergence import (
    MarginalDensity,
    SampleSet,
    convergence_curve,
    curve_frame,
    histogram_density,
    js_divergence,
    marginal_js,
    prior_edges,
)
from src.diagnostics.summaries import field_posterior_stats, percentile_frame, series_percentiles
from src.geomodel.hyperparams import HyperPrior
from src.utils.errors import DivergenceOutOfBounds, EdgeMismatch, EmptyEnsemble, EmptySampleSet, InsufficientMembers

EDGES = np.linspace(0.0, 1.0, 5)


def test_histogram_is_normalized():
    x = np.random.default_rng(0).uniform(size=1000)
    p = histogram_density(x, EDGES)
    assert p.probs.sum() == pytest.approx(1.0)
    assert p.clipped_mass == 0.0


def test_histogram_uses_weights():
    p = histogram_density([0.1, 0.9], EDGES, weights=[3.0, 1.0])
    np.testing.assert_allclose(p.probs, [0.75, 0.0, 0.0, 0.25])


def test_upper_edge_lands_in_last_bin():
    p = histogram_density([1.0], EDGES)
    np.testing.assert_allclose(p.probs, [0.0, 0.0, 0.0, 1.0])
    assert p.clipped_mass == 0.0


def test_outside_samples_are_clipped_and_reported():
    p = histogram_density([-0.5, 0.5, 2.0, 0.6], EDGES)
    np.testing.assert_allclose(p.probs, [0.25, 0.0, 0.5, 0.25])
    assert p.clipped_mass == pytest.approx(0.5)


def test_empty_samples():
    with pytest.raises(EmptySampleSet):
        histogram_density([], EDGES)
    with pytest.raises(EmptySampleSet):
        histogram_density([0.5], EDGES, weights=[0.0])


def test_js_of_identical_densities_is_zero():
    p = histogram_density(np.random.default_rng(1).uniform(size=300), EDGES)
    assert js_divergence(p, p) == 0.0


def test_js_of_disjoint_densities_is_ln2():
    p = MarginalDensity(EDGES, [1.0, 0.0, 0.0, 0.0])
    q = MarginalDensity(EDGES, [0.0, 0.0, 0.5, 0.5])
    assert js_divergence(p, q) == pytest.approx(np.log(2.0))


def test_js_is_symmetric_and_bounded():
    rng = np.random.default_rng(2)
    p = histogram_density(rng.beta(2, 5, size=500), EDGES)
    q = histogram_density(rng.beta(5, 2, size=500), EDGES)
    assert js_divergence(p, q) == pytest.approx(js_divergence(q, p))
    assert 0.0 < js_divergence(p, q) < np.log(2.0)


def test_js_outside_its_bounds_is_an_error():
    # Unnormalized inputs push the value to 2 ln 2.
    p = MarginalDensity(EDGES, [2.0, 0.0, 0.0, 0.0])
    q = MarginalDensity(EDGES, [0.0, 0.0, 0.0, 2.0])
    with pytest.raises(DivergenceOutOfBounds):
        js_divergence(p, q)


def test_js_needs_shared_edges():
    p = MarginalDensity(EDGES, [0.25] * 4)
    q = MarginalDensity(np.linspace(0.0, 2.0, 5), [0.25] * 4)
    with pytest.raises(EdgeMismatch):
        js_divergence(p, q)


def test_marginal_density_validation():
    with pytest.raises(ValueError):
        MarginalDensity([0.0, 0.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        MarginalDensity(EDGES, [0.5, 0.5])


def test_prior_edges_cover_the_active_box():
    edges = prior_edges(HyperPrior(), bins=20)
    assert set(edges) == {"mu_logk", "sigma_logk", "log10_ar"}
    assert edges["mu_logk"][0] == 2.5
    assert edges["mu_logk"][-1] == 4.5
    assert edges["log10_ar"].size == 21


def test_sample_set_from_frame():
    frame = pd.DataFrame({"mu_logk": [3.0, 3.5], "log10_ar": [-1.0, -0.5], "weight": [0.2, 0.8]})
    s = SampleSet.from_frame(frame, ("mu_logk", "log10_ar"))
    assert len(s) == 2
    np.testing.assert_array_equal(s.column("log10_ar"), [-1.0, -0.5])
    np.testing.assert_array_equal(s.weights, [0.2, 0.8])
    assert SampleSet.from_frame(frame, ("mu_logk",), weight_column=None).weights is None


def test_convergence_curve_against_itself_is_zero():
    rng = np.random.default_rng(3)
    ref = SampleSet(("mu_logk",), rng.uniform(2.5, 4.5, size=200))
    edges = {"mu_logk": np.linspace(2.5, 4.5, 11)}
    curve = convergence_curve([(100, ref), (200, ref)], ref, edges)
    assert [c for c, _ in curve] == [100, 200]
    assert all(v["mu_logk"] == 0.0 for _, v in curve)
    frame = curve_frame(curve, method="rs")
    assert list(frame.columns) == ["method", "parameter", "run_count", "js"]
    assert len(frame) == 2


def test_convergence_curve_needs_ordered_counts():
    ref = SampleSet(("mu_logk",), [3.0, 3.5])
    with pytest.raises(ValueError, match="non-decreasing"):
        convergence_curve([(200, ref), (100, ref)], ref, {"mu_logk": np.linspace(2.5, 4.5, 3)})


def test_marginal_js_shrinks_with_more_samples():
    rng = np.random.default_rng(4)
    ref = SampleSet(("mu_logk",), rng.normal(3.3, 0.3, size=20000))
    edges = {"mu_logk": np.linspace(2.5, 4.5, 21)}
    small = SampleSet(("mu_logk",), rng.normal(3.3, 0.3, size=50))
    large = SampleSet(("mu_logk",), rng.normal(3.3, 0.3, size=5000))
    assert marginal_js(large, ref, edges)["mu_logk"] < marginal_js(small, ref, edges)["mu_logk"]


def test_series_percentiles_interpolate_linearly():
    series = np.arange(11, dtype=float)[:, None] * np.ones((1, 3))
    bands = series_percentiles(series)
    np.testing.assert_allclose(bands, [[1.0] * 3, [5.0] * 3, [9.0] * 3])
    assert np.all(bands[0] <= bands[1]) and np.all(bands[1] <= bands[2])


def test_series_percentiles_need_members():
    with pytest.raises(EmptyEnsemble):
        series_percentiles(np.empty((0, 4)))


def test_percentile_frame_columns():
    frame = percentile_frame([1.0, 2.0], np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert list(frame.columns) == ["time", "p10", "p50", "p90"]
    np.testing.assert_allclose(frame["p50"], [2.0, 3.0])


def test_field_stats_pool_ensembles():
    a = np.array([[1.0, 2.0], [3.0, 2.0]])
    b = np.array([[5.0, 2.0]])
    prior = np.array([[0.0, 1.0], [6.0, 1.0], [3.0, 1.0]])
    stats = field_posterior_stats([a, b], prior)
    np.testing.assert_allclose(stats.mean, [3.0, 2.0])
    np.testing.assert_allclose(stats.variance, [4.0, 0.0])
    # prior variance 9 in the first cell, 0 in the second
    np.testing.assert_allclose(stats.reduction, [1.0 - 4.0 / 9.0, 0.0])


def test_field_stats_need_two_members():
    with pytest.raises(InsufficientMembers):
        field_posterior_stats([np.ones((1, 3))])
    with pytest.raises(InsufficientMembers):
        field_posterior_stats([np.ones((3, 3))], prior=np.ones((1, 3)))
