"""Comparative statics of the threshold and the High/Low ordering report.

The implicit-function derivative of the fixed point mu_k = F(tau, mu_k) is

    d mu_k / d tau = F_tau / (1 - F_mu),

with F_tau = 1/(tau(1-tau)) and F_mu the analytic derivative of the
log-CDF-ratio term (the portfolio-moment term does not depend on mu).
The ordering report compares data scale d, technology z = d^eta,
aggregate output and the financial-friction coefficient lambda between a
high-cost and a low-cost type.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .errors import DegenerateInputError, InvalidInputError
from .model import ModelParams
from .numerics import GaussianSpec, hazard_rate, log_normal_sf, normal_cdf, normal_pdf
from .threshold import solve_threshold
from . import wealth


@dataclass(frozen=True)
class Theorem1Report:
    tau_L: float
    tau_H: float
    delta: float        # ability gap around each threshold
    mu_L: float
    mu_H: float
    d_L: float
    d_H: float
    z_L: float
    z_H: float
    y_L: float
    y_H: float
    lambda_L: float
    lambda_H: float

    # verdicts are recomputed from the stored values, never cached
    @property
    def d_ordered(self) -> bool:
        return self.d_H > self.d_L

    @property
    def z_ordered(self) -> bool:
        return self.z_H > self.z_L

    @property
    def y_ordered(self) -> bool:
        return self.y_H > self.y_L

    @property
    def lambda_ordered(self) -> bool:
        return self.lambda_H > self.lambda_L

    def to_dict(self) -> dict:
        return {
            "tau_L": self.tau_L,
            "tau_H": self.tau_H,
            "delta": self.delta,
            "mu_L": self.mu_L,
            "mu_H": self.mu_H,
            "d_L": self.d_L,
            "d_H": self.d_H,
            "z_L": self.z_L,
            "z_H": self.z_H,
            "y_L": self.y_L,
            "y_H": self.y_H,
            "lambda_L": self.lambda_L,
            "lambda_H": self.lambda_H,
            "verdicts": {
                "d_H_gt_d_L": self.d_ordered,
                "z_H_gt_z_L": self.z_ordered,
                "y_H_gt_y_L": self.y_ordered,
                "lambda_H_gt_lambda_L": self.lambda_ordered,
            },
        }


def partials(tau: float, mu_k: float, params: ModelParams) -> Tuple[float, float]:
    """(dF/dtau, dF/dmu) at a solved threshold.

    dF/dmu = -[hazard(mu_k; sigma^2, sigma^2) + pdf(mu_k)/cdf(mu_k)] < 0.
    """
    v = params.sigma_mu ** 2
    dF_dtau = 1.0 / (tau * (1.0 - tau))
    spec_hi = GaussianSpec(v, v)
    spec_lo = GaussianSpec(0.0, v)
    dF_dmu = -(
        hazard_rate(mu_k, spec_hi)
        + normal_pdf(mu_k, spec_lo) / normal_cdf(mu_k, spec_lo)
    )
    return dF_dtau, dF_dmu


def threshold_sensitivity(tau: float, params: ModelParams) -> float:
    """d mu_k / d tau > 0 via the implicit-function formula."""
    solution = solve_threshold(tau, params)
    dF_dtau, dF_dmu = partials(tau, solution.mu_k, params)
    return dF_dtau / (1.0 - dF_dmu)


def log_output_ratio(mu_k: float, sigma_mu: float) -> float:
    """log of the tail ratio; keeps full relative resolution in the far
    left tail where the ratio itself rounds to 1 in double precision."""
    if sigma_mu <= 0.0:
        raise InvalidInputError(f"sigma_mu must be > 0, got {sigma_mu}")
    v = sigma_mu * sigma_mu
    return log_normal_sf(mu_k, GaussianSpec(v, v)) - log_normal_sf(
        mu_k, GaussianSpec(0.0, v)
    )


def output_ratio(mu_k: float, sigma_mu: float) -> float:
    """Tail ratio SF(mu_k; sigma^2, sigma^2) / SF(mu_k; 0, sigma^2).

    Strictly increasing in mu_k (the normal hazard rate is increasing);
    evaluated in log space so deep tails do not underflow.
    """
    return math.exp(log_output_ratio(mu_k, sigma_mu))


def aggregate_output(mu_k: float, eps_agg: float, params: ModelParams) -> float:
    """Total user output D e^eps m e^(mu_bar + sigma^2/2) * tail ratio.

    With m = SF(mu_k; 0, sigma^2) the expression collapses to
    D e^eps e^(mu_bar + sigma^2/2) SF(mu_k; sigma^2, sigma^2); both forms
    are evaluated and must agree to 1e-12 relative.
    """
    v = params.sigma_mu ** 2
    m = math.exp(log_normal_sf(mu_k, GaussianSpec(0.0, v)))
    prefactor = params.D * math.exp(eps_agg) * math.exp(params.mu_bar + 0.5 * v)
    full = prefactor * m * output_ratio(mu_k, params.sigma_mu)
    simplified = prefactor * math.exp(log_normal_sf(mu_k, GaussianSpec(v, v)))
    if abs(full - simplified) > 1e-12 * max(abs(simplified), 1e-300):
        raise ArithmeticError(
            f"aggregate-output forms disagree: {full} vs {simplified}"
        )
    return simplified


def tech_from_tau(tau: float, params: ModelParams) -> Tuple[float, float]:
    """Data scale d = d0*tau and technology z = d^eta."""
    if not (0.0 < tau < 1.0):
        raise InvalidInputError(f"tau must be in (0, 1), got {tau}")
    d = params.d0 * tau
    return d, d ** params.eta


def theorem1_report(
    tau_L: float,
    tau_H: float,
    params: ModelParams,
    delta: float = None,
    eps_agg: float = None,
) -> Theorem1Report:
    """High/Low ordering report for a pair of data cost rates.

    High-type ability sits `delta` above the threshold solved at tau_H,
    low-type `delta` below the threshold at tau_L (default delta =
    0.5*sigma_mu).  Outputs are compared with a common aggregate shock
    and a common participation scale, so the ordering is carried entirely
    by the increasing tail ratio, as in the underlying monotonicity
    argument; lambda comes from the friction match at each ability.
    """
    if tau_L == tau_H:
        raise DegenerateInputError(f"tau_L and tau_H coincide: {tau_L}")
    if tau_H < tau_L:
        raise InvalidInputError(
            f"tau_L must be < tau_H, got tau_L={tau_L}, tau_H={tau_H}"
        )
    if delta is None:
        delta = 0.5 * params.sigma_mu
    if delta <= 0.0:
        raise InvalidInputError(f"delta must be > 0, got {delta}")
    if eps_agg is None:
        eps_agg = params.agg_shock_spec.mean

    sol_L = solve_threshold(tau_L, params)
    sol_H = solve_threshold(tau_H, params)
    mu_L = sol_L.mu_k - delta
    mu_H = sol_H.mu_k + delta

    d_L, z_L = tech_from_tau(tau_L, params)
    d_H, z_H = tech_from_tau(tau_H, params)

    # common scale: same shock, same participation measure for both types
    m_common = 0.5 * (sol_L.m + sol_H.m)
    prefactor = (
        params.D
        * math.exp(eps_agg)
        * m_common
        * math.exp(params.mu_bar + 0.5 * params.sigma_mu ** 2)
    )
    y_L = prefactor * output_ratio(mu_L, params.sigma_mu)
    y_H = prefactor * output_ratio(mu_H, params.sigma_mu)

    lam_L = wealth.solve_lambda(mu_L, params).lam
    lam_H = wealth.solve_lambda(mu_H, params).lam

    return Theorem1Report(
        tau_L=tau_L,
        tau_H=tau_H,
        delta=delta,
        mu_L=mu_L,
        mu_H=mu_H,
        d_L=d_L,
        d_H=d_H,
        z_L=z_L,
        z_H=z_H,
        y_L=y_L,
        y_H=y_H,
        lambda_L=lam_L,
        lambda_H=lam_H,
    )
