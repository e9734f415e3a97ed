"""Ability-threshold equilibrium: fixed point, participation, utilities.

The threshold mu_k (centered ability) is the fixed point of

    mu = log(tau/(1-tau)) + sigma_mu^2/2
         + log[(1 - Phi(mu; sigma_mu^2, sigma_mu^2)) / Phi(mu; 0, sigma_mu^2)]
         - moment_term(theta, sigma_idio, gamma)

where the moment term is (1/(1-gamma)) log E[(theta e^e + 1-theta)^(1-gamma)]
for gamma != 1 and E[log(theta e^e + 1-theta)] at gamma = 1.  Agents with
centered ability above mu_k act as data users, the rest as providers; the
two expected utilities coincide exactly at the threshold.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateInputError, InvalidInputError, SolverError
from .model import ModelParams
from .numerics import (
    GaussianSpec,
    log_normal_cdf,
    log_normal_sf,
    portfolio_moment,
    solve_bracketed,
)

# log(tau/(1-tau)) overflows floats outside this band
_TAU_MIN, _TAU_MAX = 1e-6, 1.0 - 1e-6
_ROOT_TOL = 1e-13


class Role(enum.Enum):
    HIGH_USER = "HighUser"
    LOW_PROVIDER = "LowProvider"


@dataclass(frozen=True)
class Classification:
    role: Role
    tie: bool


@dataclass(frozen=True)
class ThresholdSolution:
    mu_k: float        # centered threshold
    K: float           # uncentered threshold mu_k + mu_bar
    m: float           # user measure 1 - Phi(mu_k; 0, sigma_mu^2)
    tail_mean: float   # E[e^mu | mu > K]
    residual: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "mu_k": self.mu_k,
            "K": self.K,
            "m": self.m,
            "tail_mean": self.tail_mean,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _check_tau(tau: float) -> None:
    if not (_TAU_MIN <= tau <= _TAU_MAX):
        raise InvalidInputError(
            f"tau must lie in [{_TAU_MIN}, {_TAU_MAX}], got {tau}"
        )


def tail_expectation(K: float, mu_bar: float, sigma_mu: float) -> float:
    """E[e^mu | mu > K] for mu ~ N(mu_bar, sigma_mu^2).

    Equals e^(mu_bar + sigma_mu^2/2) * SF(K; mu_bar + sigma_mu^2) /
    SF(K; mu_bar); the tail ratio is computed in log space so that both
    tails may underflow individually without breaking the quotient.
    """
    if sigma_mu <= 0.0:
        raise InvalidInputError(f"sigma_mu must be > 0, got {sigma_mu}")
    v = sigma_mu * sigma_mu
    log_ratio = log_normal_sf(K, GaussianSpec(mu_bar + v, v)) - log_normal_sf(
        K, GaussianSpec(mu_bar, v)
    )
    return math.exp(mu_bar + 0.5 * v + log_ratio)


def _moment_term(params: ModelParams) -> float:
    """The gamma-dependent portfolio-moment term entering F."""
    if params.gamma == 1.0:
        return portfolio_moment(params.theta, params.sigma_idio, 1.0)
    m = portfolio_moment(params.theta, params.sigma_idio, params.gamma)
    return math.log(m) / (1.0 - params.gamma)


def F_threshold(tau: float, mu: float, params: ModelParams) -> float:
    """Right-hand side of the fixed-point equation; decreasing in mu."""
    _check_tau(tau)
    v = params.sigma_mu ** 2
    logit = math.log(tau) - math.log1p(-tau)
    log_ratio = log_normal_sf(mu, GaussianSpec(v, v)) - log_normal_cdf(
        mu, GaussianSpec(0.0, v)
    )
    return logit + 0.5 * v + log_ratio - _moment_term(params)


def solve_threshold(tau: float, params: ModelParams) -> ThresholdSolution:
    """Unique root of G(mu) = mu - F(tau, mu).

    G is strictly increasing (F is decreasing in mu) with limits -inf and
    +inf, so a sign-change bracket always exists; we expand outward from
    the logit term, which dominates F at moderate mu.
    """
    _check_tau(tau)
    moment = _moment_term(params)
    v = params.sigma_mu ** 2
    spec_hi = GaussianSpec(v, v)
    spec_lo = GaussianSpec(0.0, v)
    logit = math.log(tau) - math.log1p(-tau)

    def G(mu: float) -> float:
        log_ratio = log_normal_sf(mu, spec_hi) - log_normal_cdf(mu, spec_lo)
        return mu - (logit + 0.5 * v + log_ratio - moment)

    # The root sits near the logit for sigma_mu = O(1) but collapses toward
    # zero as sigma_mu -> 0, so seed the bracket with both anchors and grow
    # the step geometrically on each failed expansion.
    step = 6.0 * params.sigma_mu
    lo, hi = min(logit, 0.0) - step, max(logit, 0.0) + step
    expansions = 0
    while G(lo) > 0.0:
        lo -= step
        step *= 2.0
        expansions += 1
        if expansions > 100:
            raise SolverError(f"no lower bracket for tau={tau}: reached mu={lo}")
    step = 6.0 * params.sigma_mu
    while G(hi) < 0.0:
        hi += step
        step *= 2.0
        expansions += 1
        if expansions > 100:
            raise SolverError(f"no upper bracket for tau={tau}: reached mu={hi}")

    mu_k = solve_bracketed(G, lo, hi, _ROOT_TOL)
    K = mu_k + params.mu_bar
    m = math.exp(log_normal_sf(mu_k, spec_lo))
    return ThresholdSolution(
        mu_k=mu_k,
        K=K,
        m=m,
        tail_mean=tail_expectation(K, params.mu_bar, params.sigma_mu),
        residual=G(mu_k),
        iterations=expansions,
    )


def _agg_moment(params: ModelParams) -> float:
    """E[e^((1-gamma) * eps_agg)] with eps_agg ~ N(-sigma^2/2, sigma^2)."""
    a = 1.0 - params.gamma
    s2 = params.sigma_agg ** 2
    return math.exp(-0.5 * a * s2 + 0.5 * a * a * s2)


def user_utility(mu_i: float, tau: float, params: ModelParams) -> float:
    """Expected utility of investing as a data user with ability mu_i."""
    _check_tau(tau)
    if params.gamma == 1.0:
        return (
            math.log1p(-tau)
            + math.log(params.D)
            + mu_i
            - 0.5 * params.sigma_agg ** 2
            + portfolio_moment(params.theta, params.sigma_idio, 1.0)
        )
    a = 1.0 - params.gamma
    return (
        (1.0 - tau) ** a
        * params.D ** a
        * math.exp(a * mu_i)
        / a
        * _agg_moment(params)
        * portfolio_moment(params.theta, params.sigma_idio, params.gamma)
    )


def provider_utility(
    tau: float, m: float, tail_mean: float, params: ModelParams
) -> float:
    """Expected utility of a data provider given equilibrium (m, tail_mean)."""
    _check_tau(tau)
    if not (0.0 < m < 1.0):
        raise DegenerateInputError(f"user measure must be in (0, 1), got {m}")
    if tail_mean <= 0.0:
        raise InvalidInputError(f"tail_mean must be > 0, got {tail_mean}")
    if params.gamma == 1.0:
        return (
            math.log(tau)
            + math.log(params.D)
            - 0.5 * params.sigma_agg ** 2
            + math.log(m)
            + math.log(tail_mean)
            - math.log1p(-m)
        )
    a = 1.0 - params.gamma
    return (
        tau ** a
        * params.D ** a
        * _agg_moment(params)
        * tail_mean ** a
        * (m / (1.0 - m)) ** a
        / a
    )


def classify(mu_i: float, solution: ThresholdSolution) -> Classification:
    """HighUser iff centered ability exceeds mu_k; ties go to the provider."""
    mu_bar = solution.K - solution.mu_k
    centered = mu_i - mu_bar
    if centered == solution.mu_k:
        return Classification(Role.LOW_PROVIDER, tie=True)
    if centered > solution.mu_k:
        return Classification(Role.HIGH_USER, tie=False)
    return Classification(Role.LOW_PROVIDER, tie=False)
