import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdvbbm import diagnostics as dg
from kdvbbm.model import ModelParams, analytic_datum, random_ensemble
from kdvbbm.solver import SolverConfig, evolve
from kdvbbm.spectral import SpectralField, make_grid

P = ModelParams(gamma1=1.0, delta1=1.0)


def test_cosh_product_examples():
    r = dg.verify_cosh_product_bound(2, np.array([1.0]))
    assert r.max_ratio == pytest.approx(abs(1 - np.cosh(2) / np.cosh(1) ** 2) / 8, rel=1e-12)
    assert r.max_ratio == pytest.approx(0.0725, abs=1e-4)
    zero = dg.verify_cosh_product_bound(2, np.array([0.0]))
    assert zero.max_ratio == 0 and zero.violations == 0


def test_cosh_product_rejects_bad_input():
    with pytest.raises(ValueError):
        dg.verify_cosh_product_bound(4, np.array([1.0]))
    with pytest.raises(ValueError):
        dg.verify_cosh_product_bound(2, np.array([301.0]))


def test_cosh_product_log_space_at_large_arguments():
    r = dg.verify_cosh_product_bound(3, np.array([-300.0, 150.0, 300.0]))
    assert np.isfinite(r.max_ratio) and r.violations == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=2, max_size=3))
def test_cosh_product_property(xis):
    xs = [np.array([x]) for x in xis]
    lhs = dg.cosh_product_defect(xs)[0]
    rhs = dg.cosh_product_bound(xs)[0]
    assert lhs <= rhs * (1 + 1e-12) + (0 if rhs > 0 else 1e-300) or (rhs == 0 and lhs == 0)


def test_cosh_difference_examples():
    r = dg.verify_cosh_difference_bound((np.array([0.0]), np.array([1.0])))
    assert r.max_ratio == pytest.approx((np.cosh(1) - 1) / (0.5 * (np.cosh(1) + 1)), rel=1e-12)
    assert r.max_ratio == pytest.approx(0.427, abs=1e-3)
    same = dg.verify_cosh_difference_bound((np.array([3.0, -2.0]), np.array([3.0, 2.0])))
    assert same.max_ratio == 0 and same.violations == 0


@settings(max_examples=300, deadline=None)
@given(st.floats(-300, 300), st.floats(-300, 300))
def test_cosh_difference_property(a, b):
    r = dg.verify_cosh_difference_bound((np.array([a]), np.array([b])))
    assert r.violations == 0


def test_weight_bounds_examples():
    reps = dg.verify_weight_bounds(np.array([1.0]), np.array([1.0]))
    names = {r.name: r for r in reps}
    assert names["cosh_weight_sigma2"].max_ratio == pytest.approx(1 - 1 / np.cosh(1), rel=1e-12)
    zero = dg.verify_weight_bounds(np.array([0.0]), np.array([-3.0, 0.0, 5.0]))
    assert all(r.violations == 0 for r in zero)
    big = dg.verify_weight_bounds(np.array([10.0]), np.array([100.0]))
    assert all(np.isfinite(r.max_ratio) and r.violations == 0 for r in big)


def test_ratio_and_fit_report_invariants():
    with pytest.raises(ValueError):
        dg.RatioReport("x", 0.1, "", 0)
    with pytest.raises(dg.InsufficientDataError):
        dg.FitReport(1.0, 0.0, 1.0, [(0, 0), (1, 1)])
    fit = dg.linear_fit([0, 1, 2, 3], [1, 3, 5, 7])
    assert fit.slope == pytest.approx(2) and fit.r_squared == pytest.approx(1)


def _synthetic(grid, fn):
    xi = grid.wavenumbers
    return SpectralField(grid, fn(np.abs(xi)).astype(complex))


def test_radius_estimator_synthetic_exponential():
    g = make_grid(512, 64.0)
    f = _synthetic(g, lambda a: np.exp(-0.5 * a) / (1 + a * a))
    s, fit = dg.estimate_radius(f)
    assert s == pytest.approx(0.5, abs=0.01)
    assert fit.extra["exponential_tail"]
    s2, _ = dg.estimate_radius(f * 1e3)
    assert s2 == pytest.approx(s, rel=1e-10)


def test_radius_estimator_flags_gaussian_tail():
    g = make_grid(512, 64.0)
    s, fit = dg.estimate_radius(_synthetic(g, lambda a: np.exp(-a * a)))
    assert not fit.extra["exponential_tail"]


def test_radius_estimator_grid_refinement():
    f1 = analytic_datum(make_grid(512, 64.0))
    f2 = dg.refine_field(f1, make_grid(1024, 64.0))
    # the datum itself resampled on the finer grid
    f3 = analytic_datum(make_grid(1024, 64.0))
    s1, _ = dg.estimate_radius(f1)
    assert dg.estimate_radius(f2)[0] == pytest.approx(s1, rel=1e-12)
    assert dg.estimate_radius(f3)[0] == pytest.approx(s1, rel=0.02)


def test_radius_estimator_insufficient_band():
    g = make_grid(32, 8.0)
    with pytest.raises(dg.InsufficientDataError):
        dg.estimate_radius(SpectralField.zeros(g))


def test_decay_fit_cases():
    t = np.geomspace(1, 100, 20)
    fit = dg.decay_fit(t, t**-0.5)
    assert fit.extra["alpha"] == pytest.approx(0.5, abs=0.02)
    const = dg.decay_fit(t, np.full_like(t, 0.3))
    assert const.extra["alpha"] == pytest.approx(0.0, abs=1e-12)
    assert const.extra["lower_bound_holds"]
    with pytest.raises(dg.InsufficientDataError):
        dg.decay_fit(t[:4], t[:4])
    with pytest.raises(dg.InsufficientDataError):
        dg.decay_fit(np.linspace(1, 5, 10), np.ones(10))


def test_key_lemma_ratio_small_ensemble():
    g = make_grid(64, 16.0)
    reps = dg.key_lemma_ratio(1, np.geomspace(1e-3, 1e-1, 5), P, g, count=6)
    assert [r.name for r in reps] == ["total", "I1", "I2", "I3"]
    assert all(np.isfinite(r.max_ratio) and r.parameters["sigma_spread"] < 10 for r in reps)
    assert 1.5 < reps[0].parameters["small_sigma_slope_min"] <= reps[0].parameters["small_sigma_slope_max"] < 2.5


def test_key_lemma_ratio_threads_agree():
    g = make_grid(64, 16.0)
    a = dg.key_lemma_ratio(2, [0.01, 0.03, 0.1], P, g, count=5, threads=1)
    b = dg.key_lemma_ratio(2, [0.01, 0.03, 0.1], P, g, count=5, threads=3)
    assert [r.max_ratio for r in a] == [r.max_ratio for r in b]


def test_nonlinear_ratio_zero_and_scaling():
    g = make_grid(64, 16.0)
    assert dg.nonlinear_ratio(SpectralField.zeros(g), 0.1, P) == 0.0
    fields = random_ensemble(g, 3, 0)
    r = dg.nonlinear_scaling_sweep(fields, np.geomspace(1e-2, 1e2, 5), 0.1, P)
    assert np.isfinite(r.max_ratio) and r.parameters["spread"] < 100


def test_nonlinear_estimate_refinement():
    g = make_grid(64, 16.0)
    r = dg.nonlinear_estimate_ratio(0, [0.0, 0.05, 0.1], P, g, count=4)
    assert r.parameters["refinement_change"] < 0.1
    assert np.isfinite(r.parameters["calibration_c_sigma0"])


def test_refine_field_preserves_samples():
    g = make_grid(32, 10.0)
    f = SpectralField.from_samples(np.random.default_rng(0).standard_normal(32), g)
    fine = dg.refine_field(f, make_grid(64, 10.0))
    assert np.allclose(fine.samples()[::2], f.samples(), atol=1e-13)


def test_energy_derivative_trivial_sigma_zero():
    g = make_grid(128, 32.0)
    tr = evolve(analytic_datum(g), SolverConfig(dt=0.01, t_end=0.5, observer_stride=5), P, [])
    r = dg.energy_derivative_check(tr, 0.0, P)
    assert r.parameters["residual_dt"] <= 1e-10 and not r.parameters["resolution_insufficient"]


def test_energy_derivative_convergence_short_run():
    g = make_grid(128, 32.0)
    tr = evolve(analytic_datum(g), SolverConfig(dt=1e-3, t_end=1.0, observer_stride=20), P, [])
    r = dg.energy_derivative_check(tr, 0.1, P)
    assert 3 <= r.max_ratio <= 5
    assert r.parameters["integrated_residual"] < 1e-8


def test_almost_conservation_small():
    g = make_grid(128, 32.0)
    res = dg.almost_conservation_experiment(
        analytic_datum(g), [0.0, 0.02, 0.05, 0.1], 0.5, P, dt=0.01, observer_stride=1
    )
    assert res.deviations[0] <= 1e-10
    assert abs(res.fit.slope - 2) < 0.3
    with pytest.raises(dg.InsufficientDataError):
        dg.almost_conservation_experiment(analytic_datum(g), [0.0, 0.1], 0.1, P, dt=0.01)


def test_c_hat_closes_bound():
    c, e = 0.01, 5.0
    ch = dg.c_hat_from_constant(c, e)
    # constant * sigma^2 * T * (1 + (2E)^1/2) (2E)^3/2 == E at sigma = C/sqrt(T)
    assert c * ch**2 * (1 + np.sqrt(2 * e)) * (2 * e) ** 1.5 == pytest.approx(e)


def test_contraction_calibration_small():
    g = make_grid(32, 16.0)
    fields = dg.picard_ensemble(g, 0, count=2)
    c = dg.calibrate_contraction(fields, P, n_nodes=17, rel_tol=0.05)
    chk = dg.contraction_check(fields, c, P, n_nodes=17, compare_steps=None)
    assert chk.max_ratio <= 0.45
    looser = dg.contraction_check(fields, c * 0.5, P, n_nodes=17, compare_steps=None)
    assert looser.max_ratio > chk.max_ratio
