"""Tests for decay prediction, tail fitting, and the bound constants.

Reference numbers quoted in comments were measured with this package on the
default grid (1200 log-spaced nodes on [1e-3, 1e3]); analytical values are
stated next to the formulas they come from.
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracradial import (
    NonlinearitySpec,
    ProblemParams,
    RadialFunction,
    RadialGrid,
    bound_constants,
    fit_tail,
    h_beta_function,
    predict_decay,
    riesz_constant,
    sharp_constant,
    solve_ground_state,
    verify_chain_rule,
    verify_riesz_tail,
)

SQRT_17 = math.sqrt(1.7)


def make_params(r, mu=1.0, convention="sqrt_r"):
    return ProblemParams(N=3, s=0.5, alpha=2.0, mu=mu,
                         nonlinearity=NonlinearitySpec.homogeneous(
                             r, convention=convention))


@pytest.fixture(scope="module")
def solution():
    return solve_ground_state(make_params(1.7))


@pytest.fixture(scope="module")
def grid():
    return RadialGrid.log_spaced()


# ---------------------------------------------------------------------------
# predict_decay


def test_predict_slow_regime():
    pred = predict_decay(make_params(1.7))
    assert pred.regime == "choquard_dominated"
    assert_allclose(pred.beta, 10.0 / 3.0, rtol=1e-15)
    assert pred.r_star == 1.75
    assert pred.sharp_constant is None


def test_predict_operator_regime():
    pred = predict_decay(make_params(1.9))
    assert pred.regime == "laplacian_dominated"
    assert pred.beta == 4.0


def test_predict_boundary_exponent():
    # at r = r* = 1.75 both branches of the min give exactly N + 2s
    pred = predict_decay(make_params(1.75))
    assert pred.regime == "boundary"
    assert pred.beta == 4.0


def test_predict_lower_critical_exponent():
    pred = predict_decay(make_params(5.0 / 3.0))
    assert_allclose(pred.beta, 3.0, rtol=1e-12)
    assert pred.regime == "choquard_dominated"


@pytest.mark.parametrize("r", [1.78, 1.85, 1.99])
def test_predict_caps_at_operator_exponent(r):
    assert predict_decay(make_params(r)).beta == 4.0


@pytest.mark.parametrize("bad_r", [1.5, 2.0, 2.3])
def test_predict_rejects_exponent_outside_window(bad_r):
    params = SimpleNamespace(N=3, s=0.5, alpha=2.0, mu=1.0,
                             nonlinearity=SimpleNamespace(r=bad_r))
    with pytest.raises(ValueError):
        predict_decay(params)


def test_predict_fills_constant_from_solution(solution):
    pred = predict_decay(solution.params, solution)
    assert pred.sharp_constant == sharp_constant(solution)


# ---------------------------------------------------------------------------
# fit_tail


def test_fit_recovers_exact_power(grid):
    u = RadialFunction.from_samples(grid, 2.0 * grid.nodes ** -3.5)
    fit = fit_tail(u, (10.0, 100.0))
    assert_allclose(fit.fitted_exponent, 3.5, atol=1e-10)
    assert_allclose(fit.fitted_amplitude, 2.0, rtol=1e-9)
    assert not fit.log_corrected
    assert fit.rms_log_residual < 1e-12


def test_fit_reference_profile(grid):
    # the bounded reference profile with tail exponent 10/3, fitted on
    # [50, 100], reads 3.3326410 (0.02 percent below the exact exponent)
    h = h_beta_function(grid, 10.0 / 3.0)
    fit = fit_tail(h, (50.0, 100.0), model="power")
    assert_allclose(fit.fitted_exponent, 3.3326410263742363, rtol=1e-9)
    assert abs(fit.fitted_exponent - 10.0 / 3.0) <= 0.01 * (10.0 / 3.0)


def test_fit_log_corrected_model(grid):
    vals = 5.0 * np.log(grid.nodes) * grid.nodes ** -3.0
    u = RadialFunction(grid=grid, values=vals,
                       tail=(vals[-1] * grid.r_max ** 3.0, 3.0),
                       value_at_origin=float(vals[0]))
    fit = fit_tail(u, (20.0, 100.0))
    assert fit.log_corrected
    assert_allclose(fit.fitted_exponent, 3.0, atol=1e-9)
    assert_allclose(fit.fitted_amplitude, 5.0, rtol=1e-9)


def test_fit_log_model_needs_window_above_one(grid):
    u = RadialFunction.from_samples(grid, 2.0 * grid.nodes ** -3.5)
    with pytest.raises(ValueError):
        fit_tail(u, (0.5, 50.0), model="log")
    # "auto" silently stays with the plain power fit there
    fit = fit_tail(u, (0.5, 50.0))
    assert not fit.log_corrected
    assert_allclose(fit.fitted_exponent, 3.5, atol=1e-10)


def test_fit_window_validation(grid):
    u = RadialFunction.from_samples(grid, 2.0 * grid.nodes ** -3.5)
    with pytest.raises(ValueError):
        fit_tail(u, (100.0, 50.0))          # reversed
    with pytest.raises(ValueError):
        fit_tail(u, (50.0, 150.0))          # beyond the trusted r_max/10
    with pytest.raises(ValueError):
        fit_tail(u, (50.0, 55.0))           # only a handful of nodes
    with pytest.raises(ValueError):
        fit_tail(u, (10.0, 100.0), model="quadratic")


def test_fit_rejects_nonpositive_samples(grid):
    vals = 2.0 * grid.nodes ** -3.5
    vals[600] = -vals[600]
    u = RadialFunction(grid=grid, values=vals,
                       tail=(vals[-1] * grid.r_max ** 3.5, 3.5),
                       value_at_origin=float(vals[0]))
    lo, hi = grid.nodes[590], grid.nodes[640]
    with pytest.raises(ValueError):
        fit_tail(u, (lo, hi))


# ---------------------------------------------------------------------------
# sharp_constant


def test_sharp_constant_routes_agree(solution):
    """Both evaluation routes give the same limit constant."""
    c_norm = sharp_constant(solution, route="norm")
    c_env = sharp_constant(solution, route="envelope")
    assert sharp_constant(solution) == c_norm   # auto == norm for homogeneous
    assert_allclose(c_env, c_norm, rtol=1e-12)  # measured 5.1e-16
    # frozen from a converged default-grid run
    assert_allclose(c_norm, 663.2591006103447, rtol=1e-9)


def test_sharp_constant_explicit_form(solution):
    # for the sqrt-r convention the slope factors collapse and the constant
    # is (C_{N,alpha} ||u||_r^r / mu)^{1/(2-r)}
    C = riesz_constant(3, 2.0)
    direct = (C * solution.norm_r ** 1.7 / 1.0) ** (1.0 / 0.3)
    assert_allclose(sharp_constant(solution), direct, rtol=1e-12)


def test_sharp_constant_norm_route_needs_homogeneous():
    spec = NonlinearitySpec.general(
        f=lambda t: SQRT_17 * np.power(t, 0.7),
        F=lambda t: SQRT_17 / 1.7 * np.power(t, 1.7),
        r=1.7, C_bar=SQRT_17, C_under=SQRT_17, delta=10.0)
    p = ProblemParams(N=3, s=0.5, alpha=2.0, mu=1.0, nonlinearity=spec)
    sol = SimpleNamespace(params=p, norm_r=10.0, mass_F=50.0)
    with pytest.raises(ValueError):
        sharp_constant(sol, route="norm")


def test_sharp_constant_undefined_in_operator_regime():
    sol = SimpleNamespace(params=make_params(1.9), norm_r=10.0, mass_F=50.0)
    with pytest.raises(ValueError):
        sharp_constant(sol)


def test_sharp_constant_unknown_route(solution):
    with pytest.raises(ValueError):
        sharp_constant(solution, route="direct")


# ---------------------------------------------------------------------------
# bound_constants


def test_bounds_equalize_at_kappa_star(solution):
    bc = bound_constants(solution)
    assert bc.kappa_star == SQRT_17      # C_bar mu^{1-r} at mu = 1
    assert bc.kappa == bc.kappa_star     # default rescaling
    assert abs(bc.C_upper - bc.C_lower) <= 1e-10 * bc.C_lower  # measured 0.0
    assert bc.C_sharp == sharp_constant(solution)


def test_lower_constant_is_kappa_invariant(solution):
    base = bound_constants(solution)
    for mult in (2.0, 3.0, 10.0):
        bc = bound_constants(solution, kappa=mult * base.kappa_star)
        assert bc.C_lower == base.C_lower
    # moving kappa off the equalizer only loosens the upper bound
    worse = bound_constants(solution, kappa=10.0 * base.kappa_star)
    assert worse.C_upper > base.C_upper


def test_too_small_kappa_breaks_hypothesis(solution):
    bc = bound_constants(solution)
    with pytest.raises(ValueError):
        bound_constants(solution, kappa=bc.kappa_star / 8.0)
    with pytest.raises(ValueError):
        bound_constants(solution, kappa=-1.0)


def test_distinct_envelopes_have_no_equalizer():
    spec = NonlinearitySpec.general(
        f=lambda t: SQRT_17 * np.power(t, 0.7),
        F=lambda t: SQRT_17 / 1.7 * np.power(t, 1.7),
        r=1.7, C_bar=1.2 * SQRT_17, C_under=0.8 * SQRT_17, delta=10.0)
    p = ProblemParams(N=3, s=0.5, alpha=2.0, mu=1.0, nonlinearity=spec)
    sol = SimpleNamespace(params=p, norm_r=13.9, mass_F=67.7)
    # kappa = 1 violates mu > (r-1) C_bar^{1/(r-1)} here, so a rescaling is
    # mandatory rather than cosmetic
    with pytest.raises(ValueError):
        bound_constants(sol)
    bc = bound_constants(sol, kappa=10.0)
    assert bc.kappa_star is None
    assert bc.kappa == 10.0
    assert bc.C_upper > 0.0 and bc.C_lower > 0.0


# ---------------------------------------------------------------------------
# chain rule


def test_chain_rule_on_reference_profile(grid):
    h4 = h_beta_function(grid, 4.0)
    report = verify_chain_rule(h4, 0.3, [0.5, 1.0, 5.0, 20.0], 0.5)
    assert report.passed
    assert np.all(report.margin > 0.0)   # measured: 0.46, 0.33, 0.055, 0.009


def test_chain_rule_becomes_equality_at_theta_one(grid):
    h4 = h_beta_function(grid, 4.0)
    report = verify_chain_rule(h4, 1.0 - 1e-9, [0.5, 1.0, 5.0, 20.0], 0.5)
    assert report.passed
    # both sides coincide up to rounding (measured 3.6e-9 of scale)
    assert np.max(np.abs(report.margin) / report.scale) <= 1e-6


@pytest.mark.parametrize("theta", [2.0 - 1.7, 0.3])
def test_chain_rule_on_computed_solution(solution, theta):
    report = verify_chain_rule(solution.u, theta, [0.5, 1.0, 5.0, 20.0], 0.5)
    assert report.passed
    assert np.all(report.margin > 0.0)


@pytest.mark.parametrize("theta", [-0.3, 0.0, 1.0, 1.2])
def test_chain_rule_theta_validation(grid, theta):
    h4 = h_beta_function(grid, 4.0)
    with pytest.raises(ValueError):
        verify_chain_rule(h4, theta, [1.0], 0.5)


def test_chain_rule_needs_positive_function(grid):
    minus_one = RadialFunction(grid=grid, values=-np.ones(grid.nodes.size),
                               tail=(-1.0, 0.0), value_at_origin=-1.0)
    with pytest.raises(ValueError):
        verify_chain_rule(minus_one, 0.3, [1.0], 0.5)


# ---------------------------------------------------------------------------
# riesz tail


def test_riesz_tail_approaches_point_mass(solution):
    report = verify_riesz_tail(solution, theta=4.0)
    assert report.window == (20.0, 100.0)
    # the normalized convolution settles on the total mass from above;
    # at the outer end of the window the gap is 0.5 percent (measured)
    assert abs(report.normalized_ratio[-1] - 1.0) <= 0.05
    assert np.all(np.diff(report.deviation) < 0.0)
    assert report.sup_deviation <= 2.5 * report.mass   # measured 2.1 * mass


def test_riesz_tail_mass_matches_solution(solution):
    report = verify_riesz_tail(solution, theta=4.0)
    assert_allclose(report.mass, solution.mass_F, rtol=1e-10)  # measured exact


def test_riesz_tail_custom_window(solution):
    report = verify_riesz_tail(solution, theta=5.0, window=(10.0, 50.0))
    assert report.window == (10.0, 50.0)
    assert np.all((report.radii >= 10.0) & (report.radii <= 50.0))
    assert report.theta == 5.0


@pytest.mark.parametrize("theta", [3.0, 5.1, 0.0])
def test_riesz_tail_theta_validation(solution, theta):
    # admissible decay rates for the envelope lie in (N, N + alpha]
    with pytest.raises(ValueError):
        verify_riesz_tail(solution, theta=theta)
