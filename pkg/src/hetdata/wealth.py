"""Jump-diffusion capital dynamics and the financial-friction match.

Log capital follows

    d log K = (r_f + alpha*mu_hat - alpha^2 sigma_w^2 / 2 - lambda) dt
              + alpha sigma_w dZ + log(1 - alpha L) dN,

with Poisson jump intensity w and loss fraction L, starting from
K_0 = lambda * W_0.  The dynamics are exactly integrable between jumps,
so simulation carries no discretization bias and the closed-form mean

    E K_t = lambda W_0 exp{(r_f + alpha*mu_hat - lambda
                            + w[E(1 - alpha L) - 1]) t}

can be verified by Monte Carlo to statistical accuracy.  The friction
coefficient lambda >= 1 solves e^(lambda t*)/lambda = f(mu_i, t*) on the
increasing branch.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, NoSolutionError, NumericalRangeError
from .model import ModelParams
from .numerics import RandomStream, make_stream, solve_bracketed

_EXP_ARG_MAX = 700.0  # exp overflows just above this
_MC_BATCH = 16384     # paths per stream; fixed so results are seed-reproducible


@dataclass(frozen=True)
class WealthPath:
    """One exact trajectory of log K with its jump events."""

    times: np.ndarray
    logK: np.ndarray
    jump_times: np.ndarray
    jump_losses: np.ndarray


@dataclass(frozen=True)
class LambdaSolution:
    lam: float
    residual: float
    branch_ok: bool  # lambda * t_star > 1, i.e. on the increasing branch


def _drift_continuous(params: ModelParams, lam: float) -> float:
    """Drift of log K between jumps."""
    a, s = params.alpha, params.sigma_w
    return params.r_f + a * params.mu_hat - 0.5 * a * a * s * s - lam


def _mean_rate(params: ModelParams, lam: float) -> float:
    """Exponential growth rate of E K_t (diffusion variance cancels)."""
    return (
        params.r_f
        + params.alpha * params.mu_hat
        - lam
        - params.w * params.alpha * params.loss.mean  # w[E(1-aL) - 1]
    )


def expected_capital(params: ModelParams, t: float, lam: float) -> float:
    """Closed-form E K_t."""
    if t <= 0.0:
        raise InvalidInputError(f"t must be > 0, got {t}")
    if lam < 1.0:
        raise InvalidInputError(f"lambda must be >= 1, got {lam}")
    return lam * params.W0 * math.exp(_mean_rate(params, lam) * t)


def simulate_path(
    params: ModelParams, lam: float, horizon: float, stream: RandomStream
) -> WealthPath:
    """Exact path: Poisson jump times, exact Gaussian bridge increments."""
    if horizon <= 0.0:
        raise InvalidInputError(f"horizon must be > 0, got {horizon}")
    if lam < 1.0:
        raise InvalidInputError(f"lambda must be >= 1, got {lam}")
    jump_times = stream.exponential_arrivals(params.w, horizon)
    losses = params.loss.sample(stream, len(jump_times))

    drift = _drift_continuous(params, lam)
    vol = params.alpha * params.sigma_w
    times = [0.0]
    logK = [math.log(lam * params.W0)]
    t_prev = 0.0
    for t_jump, loss in zip(jump_times, losses):
        dt = t_jump - t_prev
        increment = drift * dt + vol * math.sqrt(dt) * stream.normals(1)[0]
        times.append(t_jump)
        logK.append(logK[-1] + increment + math.log1p(-params.alpha * loss))
        t_prev = t_jump
    dt = horizon - t_prev
    if dt > 0.0:
        increment = drift * dt + vol * math.sqrt(dt) * stream.normals(1)[0]
        times.append(horizon)
        logK.append(logK[-1] + increment)
    return WealthPath(
        times=np.array(times),
        logK=np.array(logK),
        jump_times=jump_times,
        jump_losses=losses,
    )


def _terminal_capital(
    params: ModelParams, lam: float, t: float, n: int, stream: RandomStream
) -> np.ndarray:
    """Vectorized exact terminal K for n paths (one stream)."""
    drift = _drift_continuous(params, lam)
    vol = params.alpha * params.sigma_w
    logK = math.log(lam * params.W0) + drift * t
    logK = logK + vol * math.sqrt(t) * stream.normals(n)
    counts = stream.poisson_counts(params.w * t, n)
    loss = params.loss
    if len(loss.values) == 1:
        logK += counts * math.log1p(-params.alpha * loss.values[0])
    else:
        k1 = stream.binomials(counts, loss.probs[0])
        logK += k1 * math.log1p(-params.alpha * loss.values[0])
        logK += (counts - k1) * math.log1p(-params.alpha * loss.values[1])
    return np.exp(logK)


def mc_expected_capital(
    params: ModelParams,
    lam: float,
    t: float,
    n_paths: int,
    master_seed: int,
) -> Tuple[float, float]:
    """Monte Carlo (estimate, standard error) of E K_t.

    Paths are drawn in fixed-size batches with one stream per batch
    index, then reduced in batch order, so the result is bit-identical
    for a given master seed regardless of how batches are scheduled.
    """
    if n_paths < 100:
        raise InvalidInputError(f"n_paths must be >= 100, got {n_paths}")
    if t <= 0.0:
        raise InvalidInputError(f"t must be > 0, got {t}")
    total = 0.0
    total_sq = 0.0
    done = 0
    batch_index = 0
    while done < n_paths:
        n = min(_MC_BATCH, n_paths - done)
        terminal = _terminal_capital(
            params, lam, t, n, make_stream(master_seed, batch_index)
        )
        total += float(np.sum(terminal))
        total_sq += float(np.sum(terminal * terminal))
        done += n
        batch_index += 1
    mean = total / n_paths
    var = max(total_sq / n_paths - mean * mean, 0.0)
    return mean, math.sqrt(var / n_paths)


def f_lambda(lam: float, t: float) -> float:
    """e^(lambda t) / lambda; increasing in lambda where lambda*t > 1."""
    if t <= 0.0:
        raise InvalidInputError(f"t must be > 0, got {t}")
    if lam <= 0.0:
        raise InvalidInputError(f"lambda must be > 0, got {lam}")
    if lam * t > _EXP_ARG_MAX:
        raise NumericalRangeError(f"e^(lambda*t) overflows for lambda*t={lam * t}")
    return math.exp(lam * t) / lam


def f_mu(
    mu_i: float,
    params: ModelParams,
    shocks: Optional[Tuple[float, float]] = None,
) -> float:
    """Ability side of the friction match, at the target capital level.

    f(mu_i, t*) = e^(mu_i + eps0 + eps_i0) D (1 - tau) / EK_target
                  * exp{(r_f + alpha*mu_hat + w[E(1 - alpha L) - 1]) t*},
    with initial wealth W0 = y_0 (1 - tau) built from a single realized
    shock pair; shocks default to their means.
    """
    if shocks is None:
        shocks = (params.agg_shock_spec.mean, params.idio_shock_spec.mean)
    eps0, eps_i0 = shocks
    rate = (
        params.r_f
        + params.alpha * params.mu_hat
        - params.w * params.alpha * params.loss.mean
    )
    return (
        math.exp(mu_i + eps0 + eps_i0)
        * params.D
        * (1.0 - params.tau)
        / params.EK_target
        * math.exp(rate * params.t_star)
    )


def solve_lambda(
    mu_i: float,
    params: ModelParams,
    shocks: Optional[Tuple[float, float]] = None,
) -> LambdaSolution:
    """Root of e^(lambda t*)/lambda = f(mu_i, t*) on the increasing branch.

    The branch starts at lambda = max(1, 1/t*) = 1 (t* > 1 is enforced at
    validation), where f_lambda attains its minimum e^(t*); targets below
    that minimum have no solution and are reported, never fabricated.
    """
    t = params.t_star
    target = f_mu(mu_i, params, shocks)
    lam_min = max(1.0, 1.0 / t)
    f_min = f_lambda(lam_min, t)
    if target < f_min * (1.0 - 1e-12):
        raise NoSolutionError(target, f_min)

    log_target = math.log(target)

    def g(lam: float) -> float:
        return lam * t - math.log(lam) - log_target

    if abs(g(lam_min)) <= 1e-13 * max(1.0, abs(log_target)):
        lam = lam_min
    else:
        hi = lam_min
        while g(hi) < 0.0:
            hi *= 2.0
            if hi * t > _EXP_ARG_MAX:
                raise NumericalRangeError(
                    f"lambda bracket exceeds overflow bound at lambda={hi}"
                )
        lam = solve_bracketed(g, lam_min, hi, 1e-12)
    return LambdaSolution(lam=lam, residual=g(lam), branch_ok=lam * t > 1.0)


@dataclass(frozen=True)
class Figure1Table:
    """f_lambda curve plus one horizontal ability level per mu."""

    lambdas: np.ndarray
    f_values: np.ndarray
    mu_values: np.ndarray
    levels: np.ndarray
    lambda_stars: list  # float where a root exists, None otherwise

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("lambda,f_lambda\n")
        for lam, fv in zip(self.lambdas, self.f_values):
            out.write(f"{float(lam)!r},{float(fv)!r}\n")
        out.write("\nmu,level,lambda_star\n")
        for mu, level, star in zip(self.mu_values, self.levels, self.lambda_stars):
            star_txt = "" if star is None else repr(float(star))
            out.write(f"{float(mu)!r},{float(level)!r},{star_txt}\n")
        return out.getvalue()


def figure1_curves(
    params: ModelParams,
    lambda_grid: Sequence[float],
    mu_values: Sequence[float],
    shocks: Optional[Tuple[float, float]] = None,
) -> Figure1Table:
    """Curve/level data for the f(lambda, t*) = f(mu_i, t*) intersection."""
    lambdas = np.asarray(list(lambda_grid), dtype=float)
    mus = np.asarray(list(mu_values), dtype=float)
    if lambdas.size == 0 or mus.size == 0:
        raise InvalidInputError("lambda grid and mu values must be non-empty")
    f_values = np.array([f_lambda(l, params.t_star) for l in lambdas])
    levels = np.array([f_mu(m, params, shocks) for m in mus])
    stars = []
    for mu in mus:
        try:
            stars.append(solve_lambda(float(mu), params, shocks).lam)
        except NoSolutionError:
            stars.append(None)
    return Figure1Table(
        lambdas=lambdas,
        f_values=f_values,
        mu_values=mus,
        levels=levels,
        lambda_stars=stars,
    )
