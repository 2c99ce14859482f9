"""Decay diagnostics for computed radial profiles.

The solutions of the doubly nonlocal equation decay polynomially with
exponent beta = min{(N-alpha)/(2-r), N+2s}: below the threshold
r* = (N+alpha+4s)/(N+2s) the convolution term dictates the rate (and the
limit constant is explicit), above it the fractional Laplacian does.  This
module predicts (beta, regime, constants) from the problem parameters, fits
measured tails, evaluates the upper/lower bound constants with their
kappa-rescaling, and checks the two pointwise inequalities the decay
argument rests on: the concave chain rule for (-Delta)^s and the Riesz-tail
bound for I_alpha * F(u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fracradial.radial_ops import (
    RadialFunction,
    frac_laplacian_radial,
    riesz_convolve_radial,
    volume_integral,
)
from fracradial.specfun import riesz_constant

__all__ = [
    "DecayPrediction",
    "DecayFit",
    "BoundConstants",
    "ChainRuleReport",
    "RieszTailReport",
    "predict_decay",
    "fit_tail",
    "sharp_constant",
    "bound_constants",
    "verify_chain_rule",
    "verify_riesz_tail",
]

# Matching two floats that are analytically equal but arrive through
# different arithmetic (e.g. r placed exactly at the regime threshold).
_SNAP = 1e-12


@dataclass(frozen=True)
class DecayPrediction:
    """Predicted tail behaviour for one parameter set.

    beta is min{(N-alpha)/(2-r), N+2s}; regime records which branch of the
    min is active ("boundary" when both coincide).  sharp_constant is the
    predicted limit of u(r) r^beta and is only available in the
    convolution-dominated regime and only once a solution supplies its own
    norm, so it may be None.
    """

    beta: float
    regime: str
    r_star: float
    sharp_constant: float | None = None

    def __post_init__(self):
        if self.regime not in ("choquard_dominated", "laplacian_dominated", "boundary"):
            raise ValueError(f"DecayPrediction: unknown regime {self.regime!r}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError("DecayPrediction: beta must be positive and finite")


@dataclass(frozen=True)
class DecayFit:
    """Least-squares power fit of a measured tail on a radius window."""

    window: tuple[float, float]
    fitted_exponent: float
    fitted_amplitude: float
    rms_log_residual: float
    log_corrected: bool = False


@dataclass(frozen=True)
class BoundConstants:
    """Upper/lower/sharp tail constants for one solution.

    C_upper is the kappa-adjusted upper-bound constant, C_lower the
    kappa-invariant lower-bound constant, C_sharp the limit constant (None
    outside the convolution-dominated regime).  kappa is the rescaling the
    upper bound was evaluated with; kappa_star is the equalizing value
    C_{u,kappa*} = C_lower, available only when the two envelope constants
    coincide.
    """

    C_upper: float
    C_lower: float
    C_sharp: float | None
    kappa: float
    kappa_star: float | None


@dataclass(frozen=True)
class ChainRuleReport:
    """Pointwise check of (-Delta)^s u^theta >= theta u^(theta-1) (-Delta)^s u."""

    theta: float
    s: float
    radii: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    margin: np.ndarray
    scale: np.ndarray
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class RieszTailReport:
    """Tail comparison of I_alpha * F(u) against its point-mass limit."""

    theta: float
    window: tuple[float, float]
    radii: np.ndarray
    deviation: np.ndarray
    sup_deviation: float
    normalized_ratio: np.ndarray
    mass: float


def _dims(params) -> tuple[int, float, float]:
    return int(params.N), float(params.s), float(params.alpha)


def _sublinear_exponent(params) -> float:
    r = float(params.nonlinearity.r)
    N, _, alpha = _dims(params)
    lo = (N + alpha) / N
    if not (lo - _SNAP <= r < 2.0):
        raise ValueError(
            f"decay prediction needs r in [(N+alpha)/N, 2) = [{lo}, 2), got {r!r}")
    return r


def predict_decay(params, sol=None) -> DecayPrediction:
    """Predicted decay exponent, regime, and (optionally) limit constant.

    Args:
        params: problem parameters (N, s, alpha, mu, nonlinearity).
        sol: optional converged solution; when given and the regime is
            convolution-dominated, the limit constant is filled in from the
            solution's own norm via sharp_constant.

    Raises:
        ValueError: r outside the sublinear admissible range [(N+alpha)/N, 2).
    """
    N, s, alpha = _dims(params)
    r = _sublinear_exponent(params)
    r_star = (N + alpha + 4.0 * s) / (N + 2.0 * s)
    beta_choq = (N - alpha) / (2.0 - r)
    beta_lap = N + 2.0 * s
    beta = min(beta_choq, beta_lap)
    if abs(r - r_star) <= _SNAP * r_star:
        regime = "boundary"
    elif r < r_star:
        regime = "choquard_dominated"
    else:
        regime = "laplacian_dominated"
    const = None
    if sol is not None and regime == "choquard_dominated":
        const = sharp_constant(sol)
    return DecayPrediction(beta=beta, regime=regime, r_star=r_star,
                           sharp_constant=const)


def fit_tail(u: RadialFunction, window: tuple[float, float],
             model: str = "auto") -> DecayFit:
    """Fit log u(r) = log A - omega log r over a radius window.

    The window must stay inside the trusted part of the grid (upper end at
    most r_max/10, where the quadrature tail models have no influence) and
    contain at least 20 nodes with positive samples.

    Args:
        u: the profile to fit.
        window: (lo, hi) radius interval.
        model: "power" for the plain fit, "log" for the log-corrected model
            A log(r) r^{-omega}, "auto" to pick the smaller rms residual.

    Raises:
        ValueError: malformed window, too few nodes, or non-positive values.
    """
    lo, hi = float(window[0]), float(window[1])
    grid = u.grid
    if not (0.0 < lo < hi):
        raise ValueError(f"fit_tail: malformed window ({lo!r}, {hi!r})")
    if hi > grid.r_max / 10.0 * (1.0 + 1e-12):
        raise ValueError(
            f"fit_tail: window top {hi!r} beyond the trusted range r_max/10 "
            f"= {grid.r_max / 10.0!r}")
    if model not in ("auto", "power", "log"):
        raise ValueError(f"fit_tail: unknown model {model!r}")
    sel = (grid.nodes >= lo) & (grid.nodes <= hi)
    if int(sel.sum()) < 20:
        raise ValueError(
            f"fit_tail: window contains {int(sel.sum())} nodes, need at least 20")
    vals = u.values[sel]
    if np.any(vals <= 0.0):
        raise ValueError("fit_tail: non-positive samples in the fit window")
    t = np.log(grid.nodes[sel])
    y = np.log(vals)

    def lsq(target):
        coef, res = np.polyfit(t, target, 1, full=True)[:2]
        rms = math.sqrt(float(res[0]) / t.size) if res.size else 0.0
        return float(-coef[0]), float(math.exp(coef[1])), rms

    om_p, amp_p, rms_p = lsq(y)
    if model == "power":
        return DecayFit(window=(lo, hi), fitted_exponent=om_p,
                        fitted_amplitude=amp_p, rms_log_residual=rms_p)
    if t[0] <= 0.0:
        # log(r) changes sign inside the window, so the log-corrected model
        # A log(r) r^{-omega} is meaningless there.
        if model == "log":
            raise ValueError(
                "fit_tail: the log-corrected model needs a window inside (1, inf)")
        return DecayFit(window=(lo, hi), fitted_exponent=om_p,
                        fitted_amplitude=amp_p, rms_log_residual=rms_p)
    om_l, amp_l, rms_l = lsq(y - np.log(t))
    if model == "log" or rms_l < rms_p:
        return DecayFit(window=(lo, hi), fitted_exponent=om_l,
                        fitted_amplitude=amp_l, rms_log_residual=rms_l,
                        log_corrected=True)
    return DecayFit(window=(lo, hi), fitted_exponent=om_p,
                    fitted_amplitude=amp_p, rms_log_residual=rms_p)


def sharp_constant(sol, route: str = "auto") -> float:
    """Predicted limit of u(r) r^beta in the convolution-dominated regime.

    Two equivalent evaluations exist and are kept as separate code paths:
    "norm" uses the r-norm of the solution directly,
    (C_{N,alpha} ||u||_r^r / mu)^{1/(2-r)}, valid whenever the nonlinearity
    pair satisfies F'(t) f-slope algebra of the homogeneous case; "envelope"
    uses the general form (C_{N,alpha} L int F(u) / mu)^{1/(2-r)} with
    L = lim f(t)/t^{r-1}.  "auto" picks "norm" for homogeneous
    nonlinearities and "envelope" otherwise.

    Raises:
        ValueError: r >= r* (the limit constant is only asserted below the
            threshold), or an unknown route.
    """
    params = sol.params
    N, s, alpha = _dims(params)
    r = _sublinear_exponent(params)
    r_star = (N + alpha + 4.0 * s) / (N + 2.0 * s)
    if r >= r_star - _SNAP * r_star:
        raise ValueError(
            f"sharp_constant: r = {r!r} is not below the threshold r* = {r_star!r}; "
            "the limit constant is not defined in the operator-dominated regime")
    C = riesz_constant(N, alpha)
    mu = float(params.mu)
    spec = params.nonlinearity
    if route == "auto":
        route = "norm" if spec.is_homogeneous else "envelope"
    if route == "norm":
        if not spec.is_homogeneous:
            raise ValueError("sharp_constant: route 'norm' needs a homogeneous "
                             "nonlinearity")
        # ||u||_r^r times the slope-mass product of the convention collapses
        # to f_slope * mass_F; for the default convention that is ||u||_r^r
        return (C * spec.f_slope * spec.mass_scale * sol.norm_r ** r / mu) \
            ** (1.0 / (2.0 - r))
    if route == "envelope":
        slope = spec.limit_slope()
        return (C * slope * sol.mass_F / mu) ** (1.0 / (2.0 - r))
    raise ValueError(f"sharp_constant: unknown route {route!r}")


def bound_constants(sol, kappa: float | None = None) -> BoundConstants:
    """Upper and lower tail-bound constants with kappa rescaling.

    The comparison argument gives an upper constant

        C_{u,kappa} = (2-r) (C_{N,alpha} kappa int F(u))^{1/(2-r)}
                      / (mu - (r-1) (C_bar/kappa)^{1/(r-1)})

    valid whenever the denominator is positive, and a lower constant

        C'_u = ((C_under/kappa) C_{N,alpha} (kappa int F(u)) / mu)^{1/(2-r)}

    that does not depend on kappa at all: the kappa factors cancel
    algebraically, and they are cancelled here too, so the reported lower
    constant is bitwise identical for every admissible kappa.  When the two
    envelope constants coincide there is a unique kappa* equalizing the two
    bounds, kappa* = C_bar mu^{1-r}, and it is used as the default rescaling.

    Args:
        sol: converged solution (mass_F and params are read).
        kappa: optional rescaling; must keep the denominator positive.

    Raises:
        ValueError: no kappa given, distinct envelopes, and the raw
            denominator hypothesis mu > (r-1) C_bar^{1/(r-1)} fails; or a
            supplied kappa makes the denominator nonpositive.
    """
    params = sol.params
    N, s, alpha = _dims(params)
    r = _sublinear_exponent(params)
    spec = params.nonlinearity
    mu = float(params.mu)
    C = riesz_constant(N, alpha)
    mass = float(sol.mass_F)
    c_bar, c_under = float(spec.C_bar), float(spec.C_under)

    k_star = c_bar * mu ** (1.0 - r) if c_bar == c_under else None
    if kappa is None:
        kappa = k_star if k_star is not None else 1.0
    kappa = float(kappa)
    if kappa <= 0.0:
        raise ValueError(f"bound_constants: kappa must be positive, got {kappa!r}")

    denom = mu - (r - 1.0) * (c_bar / kappa) ** (1.0 / (r - 1.0))
    if denom <= 0.0:
        raise ValueError(
            f"bound_constants: hypothesis mu > (r-1) (C_bar/kappa)^(1/(r-1)) "
            f"fails (mu = {mu!r}, kappa = {kappa!r}); supply a larger kappa")
    c_upper = (2.0 - r) * (C * kappa * mass) ** (1.0 / (2.0 - r)) / denom
    # (C_under/kappa) * (kappa * mass) written with kappa cancelled, so the
    # float result cannot pick up a kappa-dependent rounding error.
    c_lower = (c_under * C * mass / mu) ** (1.0 / (2.0 - r))

    r_star = (N + alpha + 4.0 * s) / (N + 2.0 * s)
    c_sharp = sharp_constant(sol) if r < r_star - _SNAP * r_star else None
    return BoundConstants(C_upper=c_upper, C_lower=c_lower, C_sharp=c_sharp,
                          kappa=kappa, kappa_star=k_star)


def _power_of(u: RadialFunction, theta: float) -> RadialFunction:
    if np.any(u.values <= 0.0) or u.value_at_origin <= 0.0:
        raise ValueError("verify_chain_rule: u must be strictly positive")
    amp, om = u.tail
    return RadialFunction(grid=u.grid, values=u.values ** theta,
                          tail=(amp ** theta, om * theta),
                          value_at_origin=u.value_at_origin ** theta)


def verify_chain_rule(u: RadialFunction, theta: float, radii, s: float,
                      tolerance: float = 1e-6) -> ChainRuleReport:
    """Check the concave chain rule for the fractional Laplacian pointwise.

    For 0 < theta < 1 the power t -> t^theta is concave on (0, inf), so
    (-Delta)^s u^theta >= theta u^{theta-1} (-Delta)^s u holds wherever u is
    positive.  Both sides are computed by PV quadrature at each requested
    radius and the margin lhs - rhs is compared against -tolerance * scale
    with scale = |lhs| + |rhs| + machine floor.
    """
    if not (0.0 < theta < 1.0):
        raise ValueError(f"verify_chain_rule: theta must lie in (0, 1), got {theta!r}")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    u_pow = _power_of(u, theta)
    lhs = np.array([frac_laplacian_radial(u_pow, s, at=r) for r in radii])
    lap_u = np.array([frac_laplacian_radial(u, s, at=r) for r in radii])
    u_at = np.asarray(u.evaluate(radii), dtype=float)
    rhs = theta * u_at ** (theta - 1.0) * lap_u
    scale = np.abs(lhs) + np.abs(rhs) + np.finfo(float).tiny
    margin = lhs - rhs
    passed = bool(np.all(margin >= -tolerance * scale))
    return ChainRuleReport(theta=theta, s=s, radii=radii, lhs=lhs, rhs=rhs,
                           margin=margin, scale=scale, tolerance=tolerance,
                           passed=passed)


def verify_riesz_tail(sol, theta: float,
                      window: tuple[float, float] | None = None) -> RieszTailReport:
    """Compare I_alpha * F(u) against its point-mass limit on the tail.

    The convolution of a decaying density approaches (mass) * C_{N,alpha}
    r^{alpha-N}; the deviation, normalized by the theoretical envelope
    C_{N,alpha} r^{alpha-N} (1/(1+r) + 1/(1+r^{theta-N})), must stay bounded
    on the tail window.  The mass int F(u) is integrated independently here
    rather than read from the solution record.

    Args:
        sol: object with .u and .params (a converged Solution in practice).
        theta: envelope exponent in (N, N+alpha].
        window: radius interval; defaults to [r_max/50, r_max/10].
    """
    params = sol.params
    N, _, alpha = _dims(params)
    if not (N < theta <= N + alpha):
        raise ValueError(
            f"verify_riesz_tail: theta must lie in (N, N+alpha], got {theta!r}")
    u = sol.u
    grid = u.grid
    if window is None:
        window = (grid.r_max / 50.0, grid.r_max / 10.0)
    lo, hi = float(window[0]), float(window[1])
    spec = params.nonlinearity
    fu = spec.F_of(u)
    conv = riesz_convolve_radial(fu, alpha)
    mass = volume_integral(fu)
    C = riesz_constant(N, alpha)
    sel = (grid.nodes >= lo) & (grid.nodes <= hi)
    radii = grid.nodes[sel]
    i_alpha = C * radii ** (alpha - N)
    envelope = i_alpha * (1.0 / (1.0 + radii) + 1.0 / (1.0 + radii ** (theta - N)))
    deviation = np.abs(conv.values[sel] - i_alpha * mass) / envelope
    normalized = conv.values[sel] * radii ** (N - alpha) / (C * mass)
    return RieszTailReport(theta=theta, window=(lo, hi), radii=radii,
                           deviation=deviation,
                           sup_deviation=float(np.max(deviation)),
                           normalized_ratio=normalized, mass=mass)
