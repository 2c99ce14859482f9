"""Tests for fracradial.specfun.

Reference values were frozen from mpmath at mp.dps = 40 and are quoted to
full double precision.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracradial.specfun import (
    AsymptoticLaw,
    NonConvergenceError,
    ProfileParams,
    frac_lap_h_asymptotic,
    frac_lap_h_exact,
    frac_lap_h_prefactor,
    gamma_real,
    h_beta_eval,
    hyp2f1,
    riesz_constant,
)


def test_gamma_real_positive_axis():
    assert gamma_real(1.0) == 1.0
    assert gamma_real(5.0) == 24.0
    assert_allclose(gamma_real(0.5), math.sqrt(math.pi), rtol=1e-15)


def test_gamma_real_negative_axis():
    # mpmath: gamma(-1.5) = 2.363271801207355, gamma(-3.7) = 0.2516439959024227
    assert_allclose(gamma_real(-1.5), 2.363271801207355, rtol=1e-14)
    assert_allclose(gamma_real(-3.7), 0.2516439959024227, rtol=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -17.0])
def test_gamma_real_rejects_poles(x):
    with pytest.raises(ValueError):
        gamma_real(x)


def test_gamma_recurrence():
    """gamma(x+1) = x gamma(x) away from the poles."""
    xs = np.concatenate([
        np.linspace(0.05, 9.95, 67),
        np.linspace(-4.95, -0.05, 53),
    ])
    for x in xs:
        if abs(x - round(x)) < 1e-3:
            continue
        assert_allclose(gamma_real(x + 1.0), x * gamma_real(x), rtol=1e-12)


# 2F1 reference table, mpmath mp.dps = 40.  The rows cover every evaluation
# branch: direct series, Pfaff series, the three large-|x| connection cases
# (generic, a = b, a - b a positive integer), and the terminating b - c
# in {0, 1} families.
HYP2F1_CASES = [
    (0.9, 1.4, 2.2, -0.37, 0.8315383053760435),
    (1.9, 0.6, 1.1, -0.995, 0.5102504171767118),
    (2.3, 0.8, 1.9, -55.0, 0.030979765274255507),
    (1.5, 1.2, 1.0, -10000.0, -7.859606283396258e-06),
    (2.0, 2.25, 1.5, -1000000.0, -7.715804987829107e-13),
    (1.75, 1.75, 1.5, -2500.0, -7.799612199318395e-07),
    (2.0, 2.0, 1.5, -1000000.0, -3.0504414534360575e-12),
    (2.8, 1.8, 2.5, -400.0, 1.2703176569361037e-05),
    (3.6, 1.6, 2.5, -40000.0, 1.4498389671143972e-08),
    (4.1, 1.1, 2.05, -200000.0, 4.292005733393078e-07),
    (1.6, 1.6, 1.6, -900000.0, 2.9731116098747454e-10),
    (2.0, 2.3, 1.3, -321.0, -5.147213722433079e-06),
    (1.75, 2.25, 1.75, -500000.0, 1.5042344681709892e-13),
]


@pytest.mark.parametrize("a,b,c,x,expected", HYP2F1_CASES)
def test_hyp2f1_reference_values(a, b, c, x, expected):
    assert_allclose(hyp2f1(a, b, c, x), expected, rtol=1e-12)


def test_hyp2f1_at_zero():
    assert hyp2f1(1.3, 0.7, 2.1, 0.0) == 1.0


def test_hyp2f1_binomial_identity():
    """2F1(a, b, b; x) = (1 - x)^(-a), checked over the whole argument range."""
    for a in (0.3, 1.0, 2.7):
        for x in (-1e-3, -0.4, -3.0, -98.6, -1e4, -1e6):
            assert_allclose(hyp2f1(a, 1.3, 1.3, x), (1.0 - x) ** (-a), rtol=1e-13)


def test_hyp2f1_seam_consistency():
    # The evaluation strategy switches branches at x = -0.5 and x = -100;
    # values on either side must agree to within the function's own variation.
    for a, b, c in [(1.5, 1.2, 1.0), (2.3, 0.8, 1.9), (1.75, 1.75, 1.5)]:
        for seam in (-0.5, -100.0):
            lo = hyp2f1(a, b, c, seam * (1.0 + 1e-12))
            hi = hyp2f1(a, b, c, seam * (1.0 - 1e-12))
            assert_allclose(lo, hi, rtol=1e-10)


def test_hyp2f1_rejects_bad_parameters():
    with pytest.raises(ValueError):
        hyp2f1(-0.5, 1.0, 1.5, -1.0)
    with pytest.raises(ValueError):
        hyp2f1(1.0, 0.0, 1.5, -1.0)
    with pytest.raises(ValueError):
        hyp2f1(1.0, 1.0, 1.5, 0.25)  # positive argument
    with pytest.raises(ValueError):
        hyp2f1(1.2, 2.2, 1.0, -1.0)  # a - b = -1
    with pytest.raises(ValueError):
        hyp2f1(1.1, 3.5, 1.5, -1.0)  # b - c = 2


def test_non_convergence_error_is_runtime_error():
    assert issubclass(NonConvergenceError, RuntimeError)


@pytest.mark.parametrize("N,alpha,expected", [
    (3, 2.0, 1.0 / (4.0 * math.pi)),
    (2, 1.0, 1.0 / (2.0 * math.pi)),
    (4, 2.0, 1.0 / (4.0 * math.pi ** 2)),
])
def test_riesz_constant_known_values(N, alpha, expected):
    assert_allclose(riesz_constant(N, alpha), expected, rtol=1e-14)


def test_riesz_constant_domain():
    with pytest.raises(ValueError):
        riesz_constant(3, 0.0)
    with pytest.raises(ValueError):
        riesz_constant(3, 3.0)
    with pytest.raises(ValueError):
        riesz_constant(0, 0.5)


def test_h_beta_eval():
    assert h_beta_eval(0.0, 3.0) == 1.0
    assert_allclose(h_beta_eval(1.0, 3.0), 2.0 ** -1.5, rtol=1e-15)
    r = np.array([0.0, 1.0, 3.0])
    out = h_beta_eval(r, 2.0)
    assert_allclose(out, [1.0, 0.5, 0.1], rtol=1e-15)
    with pytest.raises(ValueError):
        h_beta_eval(1.0, 0.0)


def test_profile_params_validation():
    ProfileParams(3, 0.5, 4.0)  # beta = N + 2s is allowed
    with pytest.raises(ValueError):
        ProfileParams(1, 0.5, 1.0)
    with pytest.raises(ValueError):
        ProfileParams(3, 1.0, 2.0)
    with pytest.raises(ValueError):
        ProfileParams(3, 0.5, 4.2)  # beta > N + 2s
    with pytest.raises(ValueError):
        ProfileParams(3, 0.5, 0.0)


def test_frac_lap_prefactor():
    # N = 2, s = 1/2, beta = 2: the prefactor collapses to pi/2.
    p = ProfileParams(2, 0.5, 2.0)
    assert_allclose(frac_lap_h_prefactor(p), math.pi / 2.0, rtol=1e-14)


def test_frac_lap_prefactor_positive():
    for N in (2, 3, 4, 6):
        for s in (0.1, 0.5, 0.9):
            for frac in (0.2, 0.7, 1.0):
                beta = frac * (N + 2.0 * s)
                assert frac_lap_h_prefactor(ProfileParams(N, s, beta)) > 0.0


# (-Delta)^s h_beta at a point, frozen from the prefactor times mpmath's
# hypergeometric at mp.dps = 40.
FRAC_LAP_CASES = [
    (3, 0.25, 3.0, 2.5, 0.023660802475864696),
    (2, 0.5, 2.5, 7.0, -0.003330186144939285),
    (3, 0.75, 3.5, 1.0, 0.27488105490005105),
]


@pytest.mark.parametrize("N,s,beta,r,expected", FRAC_LAP_CASES)
def test_frac_lap_h_exact_reference_values(N, s, beta, r, expected):
    assert_allclose(frac_lap_h_exact(r, ProfileParams(N, s, beta)), expected,
                    rtol=1e-12)


def test_frac_lap_h_exact_special_points():
    # At the origin the hypergeometric factor is 1.
    p = ProfileParams(2, 0.5, 2.0)
    assert_allclose(frac_lap_h_exact(0.0, p), math.pi / 2.0, rtol=1e-14)
    # N = 3, s = 1/2, beta = N - 2s = 2: exact identity 2 h_4, so the value
    # at r = 1 is 2 / 4 = 1/2.
    p = ProfileParams(3, 0.5, 2.0)
    assert_allclose(frac_lap_h_exact(1.0, p), 0.5, rtol=1e-13)
    with pytest.raises(ValueError):
        frac_lap_h_exact(-1.0, p)


def test_asymptotic_regime_classification():
    def regime(N, s, beta):
        return frac_lap_h_asymptotic(ProfileParams(N, s, beta)).regime

    assert regime(3, 0.5, 3.8) == "above_N"
    assert regime(3, 0.5, 4.0) == "above_N"
    assert regime(3, 0.5, 3.0) == "equal_N"
    assert regime(3, 0.5, 2.5) == "between"
    assert regime(3, 0.5, 2.0) == "equal_N_minus_2s"
    assert regime(3, 0.5, 1.5) == "below_N_minus_2s"
    # Near-boundary values snap onto the degenerate regimes.
    assert regime(3, 0.5, 3.0 + 1e-12) == "equal_N"
    assert regime(3, 0.5, 2.0 - 1e-12) == "equal_N_minus_2s"


def test_asymptotic_exponents():
    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 3.8))
    assert law.exponent == 4.0
    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 3.0))
    assert law.exponent == 4.0 and law.has_log_factor
    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 2.5))
    assert law.exponent == 3.5 and not law.has_log_factor
    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 1.5))
    assert law.exponent == 2.5


def test_asymptotic_constants_frozen():
    # Reference constants from the Gamma-ratio formulas at mp.dps = 40.
    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 3.8))
    assert_allclose(law.constant, -1.3012133179582948, rtol=1e-13)

    # beta = N + 2s collapses to 4^s Gamma(s)/Gamma(-s) = -1 at s = 1/2.
    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 4.0))
    assert_allclose(law.constant, -1.0, rtol=1e-13)

    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 3.0))
    assert_allclose(law.constant, -4.0 / math.pi, rtol=1e-13)
    assert_allclose(law.log_offset, -0.8068528194400547, rtol=1e-13)

    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 2.5))
    assert_allclose(law.constant, -1.5, rtol=1e-13)

    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 2.0))
    assert_allclose(law.constant, 2.0, rtol=1e-13)

    law = frac_lap_h_asymptotic(ProfileParams(3, 0.5, 1.5))
    assert_allclose(law.constant, 0.5, rtol=1e-13)

    law = frac_lap_h_asymptotic(ProfileParams(3, 0.75, 3.5))
    assert_allclose(law.constant, -2.615124050132754, rtol=1e-13)

    law = frac_lap_h_asymptotic(ProfileParams(3, 0.75, 1.0))
    assert_allclose(law.constant, 0.3989422804014327, rtol=1e-13)


def test_asymptotic_constant_signs():
    """Negative above N - 2s (except the exact identity point), positive below."""
    for N in (2, 3, 5):
        for s in (0.2, 0.5, 0.8):
            lo, hi = N - 2.0 * s, N + 2.0 * s
            for beta, sign in [
                (0.5 * lo, +1),
                (lo, +1),
                (0.5 * (lo + N), -1),
                (float(N), -1),
                (0.5 * (N + hi), -1),
                (hi, -1),
            ]:
                if beta <= 0:
                    continue
                law = frac_lap_h_asymptotic(ProfileParams(N, s, beta))
                assert sign * law.constant > 0.0, (N, s, beta, law)


def test_asymptotic_exact_identity_regime():
    # beta = N - 2s: the law reproduces the closed form at every radius,
    # not only in the far field.
    p = ProfileParams(3, 0.5, 2.0)
    law = frac_lap_h_asymptotic(p)
    for r in (0.0, 0.3, 1.0, 10.0, 250.0):
        assert_allclose(law.evaluate(r), frac_lap_h_exact(r, p), rtol=1e-12)


def test_asymptotic_matches_closed_form_far_field():
    # One representative per regime; the model should sit within a couple of
    # percent of the closed form by r = 100.
    reps = [
        (ProfileParams(3, 0.5, 3.8), 0.02),
        (ProfileParams(3, 0.5, 3.0), 0.01),
        (ProfileParams(3, 0.9, 1.65), 0.01),
        (ProfileParams(3, 0.5, 2.0), 1e-12),
        (ProfileParams(3, 0.5, 1.5), 0.01),
    ]
    for p, tol in reps:
        law = frac_lap_h_asymptotic(p)
        exact = frac_lap_h_exact(100.0, p)
        model = law.evaluate(100.0)
        assert abs(exact / model - 1.0) <= tol, (p, exact, model)


def test_asymptotic_law_evaluate_vectorized():
    law = AsymptoticLaw(regime="above_N", exponent=4.0, constant=-2.0,
                        has_log_factor=False)
    r = np.array([10.0, 100.0])
    assert_allclose(law.evaluate(r), -2.0 * r ** -4.0, rtol=1e-15)
