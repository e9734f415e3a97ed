"""Finite-population brute-force checks of the continuum identities.

Every statistical check uses the 3-standard-error acceptance rule with a
fixed master seed; identities that hold exactly at finite n (market
clearing, role sorting away from the boundary) are checked exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .model import ModelParams
from .numerics import RandomStream
from .statics import aggregate_output
from .threshold import (
    Role,
    ThresholdSolution,
    provider_utility,
    solve_threshold,
    user_utility,
)

_BOUNDARY_BAND = 1e-8


@dataclass(frozen=True)
class CheckReport:
    """One verified statistic; serializes to the report JSON schema."""

    statistic: str
    expected: float
    observed: float
    se: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "expected": self.expected,
            "observed": self.observed,
            "se": self.se,
            "pass": self.passed,
        }


def _three_se_report(statistic: str, expected: float, observed: float,
                     se: float) -> CheckReport:
    return CheckReport(
        statistic=statistic,
        expected=expected,
        observed=observed,
        se=se,
        passed=abs(observed - expected) <= 3.0 * se,
    )


@dataclass(frozen=True)
class PopulationSample:
    abilities: np.ndarray
    roles: np.ndarray          # boolean, True = HighUser
    idio_shocks: np.ndarray
    agg_shock: float
    n: int
    threshold: ThresholdSolution

    def user_mask(self) -> np.ndarray:
        return self.roles


def draw_population(
    n: int, params: ModelParams, stream: RandomStream
) -> PopulationSample:
    """n i.i.d. agents with roles assigned at the solved threshold."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    solution = solve_threshold(params.tau, params)
    abilities = stream.gaussians(params.ability_spec, n)
    idio = stream.gaussians(params.idio_shock_spec, n)
    agg = float(stream.gaussians(params.agg_shock_spec, 1)[0])
    roles = abilities > solution.K  # ties (measure zero) go to provider
    return PopulationSample(
        abilities=abilities,
        roles=roles,
        idio_shocks=idio,
        agg_shock=agg,
        n=n,
        threshold=solution,
    )


def lln_check(
    sample: PopulationSample,
    threshold: ThresholdSolution,
    params: ModelParams,
) -> List[CheckReport]:
    """Sample aggregate of user output vs the m * tail_mean continuum limit."""
    users = sample.user_mask()
    if not np.any(users):
        raise DegenerateInputError("population contains no data users")
    terms = np.where(users, np.exp(sample.abilities + sample.idio_shocks), 0.0)
    observed = float(np.mean(terms))
    se = float(np.std(terms, ddof=1) / math.sqrt(sample.n))
    expected = threshold.m * threshold.tail_mean
    reports = [
        _three_se_report("lln_user_aggregate", expected, observed, se),
    ]
    # same identity scaled by D e^eps: total user output vs aggregate_output
    scale = params.D * math.exp(sample.agg_shock)
    reports.append(
        _three_se_report(
            "lln_aggregate_output",
            aggregate_output(threshold.mu_k, sample.agg_shock, params),
            scale * observed,
            scale * se,
        )
    )
    return reports


def market_clearing_check(
    sample: PopulationSample, theta: float
) -> List[CheckReport]:
    """Portfolio shares sum to 1 - theta exactly; risk-free holdings are 0."""
    if sample.n < 2:
        raise InvalidInputError("market clearing needs n >= 2")
    if not (0.0 < theta < 1.0):
        raise InvalidInputError(f"theta must be in (0, 1), got {theta}")
    weights = np.exp(sample.abilities)
    shares = (1.0 - theta) * weights / float(np.sum(weights))
    total = float(np.sum(shares))
    risk_free = 0.0 * weights  # N0 = 0 identically in equilibrium
    return [
        CheckReport(
            statistic="clearing_share_sum",
            expected=1.0 - theta,
            observed=total,
            se=0.0,
            passed=abs(total - (1.0 - theta)) <= 1e-12,
        ),
        CheckReport(
            statistic="risk_free_holdings",
            expected=0.0,
            observed=float(np.max(np.abs(risk_free))),
            se=0.0,
            passed=bool(np.all(risk_free == 0.0)),
        ),
    ]


def _portfolio_consumption(sample: PopulationSample, params: ModelParams):
    """Finite-n user consumption from the portfolio definition.

    C_i = theta y_i (1-tau) + (1-theta)(1-tau) D e^mu_i e^eps
          * (sum_j e^(mu_j + eps_j)) / (sum_p e^(mu_p)),   j, p over users.
    """
    users = sample.user_mask()
    mu = sample.abilities[users]
    eps_i = sample.idio_shocks[users]
    scale = params.D * math.exp(sample.agg_shock) * (1.0 - params.tau)
    own = params.theta * scale * np.exp(mu + eps_i)
    pool_ratio = float(np.sum(np.exp(mu + eps_i)) / np.sum(np.exp(mu)))
    diversified = (1.0 - params.theta) * scale * np.exp(mu) * pool_ratio
    return own + diversified


def _closed_form_consumption(sample: PopulationSample, params: ModelParams):
    users = sample.user_mask()
    mu = sample.abilities[users]
    eps_i = sample.idio_shocks[users]
    scale = params.D * math.exp(sample.agg_shock) * (1.0 - params.tau)
    return scale * np.exp(mu) * (params.theta * np.exp(eps_i) + 1.0 - params.theta)


def consumption_convergence(
    params: ModelParams, sizes: Sequence[int], stream: RandomStream
) -> List[CheckReport]:
    """Portfolio-built consumption converges to its closed form as n grows.

    Reports the mean deviation per size (must pass 3 SE at the largest
    size) plus the provider-consumption identity at the largest size.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes) or len(sizes) == 0:
        raise InvalidInputError("sizes must be a non-empty increasing sequence")
    reports = []
    last_sample = None
    for n in sizes:
        sample = draw_population(n, params, stream)
        last_sample = sample
        built = _portfolio_consumption(sample, params)
        closed = _closed_form_consumption(sample, params)
        diff = built - closed
        # Every user's gap shares the single pool factor, so the
        # cross-sectional spread of diff says nothing about the sampling
        # error of its mean.  Algebraically the mean gap equals
        # (1-theta) * scale * mean_j[e^mu_j (e^eps_j - 1)] whose terms are
        # i.i.d.; the SE comes from those terms.
        users = sample.user_mask()
        mu = sample.abilities[users]
        eps_i = sample.idio_shocks[users]
        scale = params.D * math.exp(sample.agg_shock) * (1.0 - params.tau)
        pool_terms = np.exp(mu + eps_i) - np.exp(mu)
        se = (
            (1.0 - params.theta) * scale
            * float(np.std(pool_terms, ddof=1) / math.sqrt(len(pool_terms)))
            if len(pool_terms) > 1
            else 0.0
        )
        reports.append(
            _three_se_report(f"consumption_gap_n{n}", 0.0, float(np.mean(diff)), se)
        )
    # provider consumption: pooled costs spread over the provider mass
    sample = last_sample
    users = sample.user_mask()
    m_hat = float(np.mean(users))
    if not (0.0 < m_hat < 1.0):
        raise DegenerateInputError("population is all users or all providers")
    user_output = params.D * math.exp(sample.agg_shock) * np.exp(
        sample.abilities + sample.idio_shocks
    ) * users
    observed_cs = params.tau * float(np.mean(user_output)) / (1.0 - m_hat)
    sol = sample.threshold
    expected_cs = (
        params.tau
        * params.D
        * math.exp(sample.agg_shock)
        * sol.m
        * sol.tail_mean
        / (1.0 - sol.m)
    )
    se_cs = (
        params.tau
        * float(np.std(user_output, ddof=1))
        / math.sqrt(sample.n)
        / (1.0 - m_hat)
    )
    reports.append(
        _three_se_report("provider_consumption", expected_cs, observed_cs, se_cs)
    )
    return reports


def role_sorting_check(
    sample: PopulationSample, tau: float, params: ModelParams
) -> CheckReport:
    """Utility comparison must reproduce the threshold classification.

    Agents within the boundary band |mu_i - K| < 1e-8 are excluded (the
    sign there is numerically undecidable by construction).
    """
    sol = sample.threshold
    v_s = provider_utility(tau, sol.m, sol.tail_mean, params)
    outside = np.abs(sample.abilities - sol.K) >= _BOUNDARY_BAND
    agree = 0
    counted = 0
    for mu_i, is_user in zip(sample.abilities[outside], sample.roles[outside]):
        v_i = user_utility(float(mu_i), tau, params)
        counted += 1
        if (v_i > v_s) == bool(is_user):
            agree += 1
    fraction = agree / counted if counted else 1.0
    return CheckReport(
        statistic="role_sorting_agreement",
        expected=1.0,
        observed=fraction,
        se=0.0,
        passed=fraction == 1.0,
    )


def classify_roles(sample: PopulationSample) -> List[Role]:
    """Role labels for a drawn sample (HighUser above the threshold)."""
    return [
        Role.HIGH_USER if is_user else Role.LOW_PROVIDER
        for is_user in sample.roles
    ]
