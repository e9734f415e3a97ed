"""Validated parameter record for the data-economy model.

Field conventions:

* ability distribution N(mu_bar, sigma_mu^2),
* aggregate shock N(-sigma_agg^2/2, sigma_agg^2) and idiosyncratic shock
  N(-sigma_idio^2/2, sigma_idio^2), so both have E[e^shock] = 1,
* sigma_agg (output shock) and sigma_w (wealth diffusion) are distinct
  parameters even though they play similar roles in their own equations,
* pi_depr is a passive field, normalized to 1 (stock price standardized).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path
from typing import Union

import numpy as np

from .errors import InvalidInputError, ParamError
from .numerics import GaussianSpec, RandomStream


@dataclass(frozen=True)
class LossSpec:
    """Jump-loss distribution: a constant or a bounded two-point draw."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.values) not in (1, 2) or len(self.probs) != len(self.values):
            raise InvalidInputError("loss spec needs 1 or 2 (value, prob) pairs")
        for v in self.values:
            if not (0.0 <= v < 1.0):
                raise InvalidInputError(f"loss values must lie in [0, 1), got {v}")
        if any(p <= 0.0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-12:
            raise InvalidInputError("loss probabilities must be positive and sum to 1")

    @classmethod
    def constant(cls, value: float) -> "LossSpec":
        return cls(values=(float(value),), probs=(1.0,))

    @classmethod
    def two_point(cls, v1: float, v2: float, p1: float) -> "LossSpec":
        return cls(values=(float(v1), float(v2)), probs=(float(p1), 1.0 - float(p1)))

    @property
    def mean(self) -> float:
        return sum(v * p for v, p in zip(self.values, self.probs))

    @property
    def maximum(self) -> float:
        return max(self.values)

    def sample(self, stream: RandomStream, n: int) -> np.ndarray:
        if len(self.values) == 1:
            return np.full(n, self.values[0])
        picks = stream.gen.random(n) < self.probs[0]
        return np.where(picks, self.values[0], self.values[1])


def _parse_loss(raw) -> LossSpec:
    if isinstance(raw, LossSpec):
        return raw
    if isinstance(raw, (int, float)):
        return LossSpec.constant(float(raw))
    if isinstance(raw, dict):
        vals = raw.get("values")
        probs = raw.get("probs")
        if vals is None or probs is None:
            raise InvalidInputError("loss dict needs 'values' and 'probs'")
        return LossSpec(values=tuple(float(v) for v in vals),
                        probs=tuple(float(p) for p in probs))
    raise InvalidInputError(f"unrecognized loss descriptor: {raw!r}")


@dataclass(frozen=True)
class ModelParams:
    """Immutable, validated model parameters.  Build via `validate`."""

    gamma: float          # risk aversion; 1 selects log utility
    sigma_mu: float       # ability std
    sigma_agg: float      # aggregate output shock std
    sigma_idio: float     # idiosyncratic output shock std
    theta: float          # retained ownership share
    tau: float            # data cost rate
    D: float              # data contribution to output
    eta: float            # data -> technology exponent
    d0: float             # slope of the data-scale map d = d0 * tau
    r_f: float            # risk-free log return
    alpha: float          # risky portfolio share
    mu0: float            # continuous excess return
    w: float              # jump intensity
    loss: LossSpec        # jump loss distribution
    sigma_w: float        # wealth diffusion volatility
    W0: float             # initial net wealth
    t_star: float         # matching horizon
    EK_target: float      # target expected capital in the friction match
    mu_bar: float = 0.0   # ability mean
    pi_depr: float = 1.0  # depreciation index, normalized to 1

    # -- derived specs ----------------------------------------------------
    @property
    def ability_spec(self) -> GaussianSpec:
        return GaussianSpec(self.mu_bar, self.sigma_mu ** 2)

    @property
    def agg_shock_spec(self) -> GaussianSpec:
        s2 = self.sigma_agg ** 2
        return GaussianSpec(-0.5 * s2, s2)

    @property
    def idio_shock_spec(self) -> GaussianSpec:
        s2 = self.sigma_idio ** 2
        return GaussianSpec(-0.5 * s2, s2)

    @property
    def mu_hat(self) -> float:
        """Total expected excess return: continuous part + jump compensation."""
        return self.mu0 + self.w * self.loss.mean


_RANGE_CHECKS = [
    ("gamma", lambda p: p["gamma"] > 0.0, "must be > 0"),
    ("sigma_mu", lambda p: p["sigma_mu"] > 0.0, "must be > 0"),
    ("sigma_agg", lambda p: p["sigma_agg"] > 0.0, "must be > 0"),
    ("sigma_idio", lambda p: p["sigma_idio"] > 0.0, "must be > 0"),
    ("theta", lambda p: 0.0 < p["theta"] < 1.0, "must be in (0, 1)"),
    ("tau", lambda p: 0.0 < p["tau"] < 1.0, "must be in (0, 1)"),
    ("D", lambda p: p["D"] > 0.0, "must be > 0"),
    ("pi_depr", lambda p: p["pi_depr"] > 0.0, "must be > 0"),
    ("eta", lambda p: 0.0 < p["eta"] < 1.0, "must be in (0, 1)"),
    ("d0", lambda p: p["d0"] > 0.0, "must be > 0"),
    ("alpha", lambda p: 0.0 <= p["alpha"] <= 1.0, "must be in [0, 1]"),
    ("mu0", lambda p: p["mu0"] > 0.0, "must be > 0"),
    ("w", lambda p: p["w"] >= 0.0, "must be >= 0"),
    ("sigma_w", lambda p: p["sigma_w"] >= 0.0, "must be >= 0"),
    ("W0", lambda p: p["W0"] > 0.0, "must be > 0"),
    ("t_star", lambda p: p["t_star"] > 1.0,
     "must be > 1 (the friction match lives on the increasing branch)"),
    ("EK_target", lambda p: p["EK_target"] > 0.0, "must be > 0"),
]

_FIELD_NAMES = tuple(f.name for f in dc_fields(ModelParams))
_REQUIRED = tuple(n for n in _FIELD_NAMES if n not in ("mu_bar", "pi_depr"))


def validate(raw: Union[dict, ModelParams]) -> ModelParams:
    """Validate a raw record; raises ParamError with every violation found."""
    if isinstance(raw, ModelParams):
        raw = {f.name: getattr(raw, f.name) for f in dc_fields(ModelParams)}
    violations = []
    unknown = sorted(set(raw) - set(_FIELD_NAMES))
    if unknown:
        violations.append(f"unknown keys: {', '.join(unknown)}")
    missing = sorted(set(_REQUIRED) - set(raw))
    if missing:
        violations.append(f"missing keys: {', '.join(missing)}")
    if violations:
        raise ParamError(violations)

    vals = dict(raw)
    vals.setdefault("mu_bar", 0.0)
    vals.setdefault("pi_depr", 1.0)
    try:
        vals["loss"] = _parse_loss(vals["loss"])
    except InvalidInputError as exc:
        raise ParamError([f"loss: {exc}"]) from exc

    for name in _FIELD_NAMES:
        if name == "loss":
            continue
        v = vals[name]
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            violations.append(f"{name}: must be a finite number, got {v!r}")
        else:
            vals[name] = float(v)
    if violations:
        raise ParamError(violations)

    for name, ok, msg in _RANGE_CHECKS:
        if not ok(vals):
            violations.append(f"{name}: {msg} (got {vals[name]})")
    if not violations:
        if vals["alpha"] * vals["loss"].maximum >= 1.0:
            violations.append(
                "alpha * max(loss): must be < 1 so log(1 - alpha*L) is finite "
                f"(got {vals['alpha'] * vals['loss'].maximum})"
            )
        mu_hat = vals["mu0"] + vals["w"] * vals["loss"].mean
        if not (math.isfinite(mu_hat) and mu_hat > 0.0):
            violations.append(f"mu_hat = mu0 + w*E[L]: must be positive (got {mu_hat})")
    if violations:
        raise ParamError(violations)
    return ModelParams(**vals)


def load_params(path) -> ModelParams:
    """Read parameters from a JSON document with exactly the field names."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ParamError(["top-level JSON value must be an object"])
    return validate(raw)


def default_params(**overrides) -> ModelParams:
    """Reference parameter set used by the CLI when no file is given."""
    base = dict(
        gamma=2.0,
        mu_bar=0.0,
        sigma_mu=1.0,
        sigma_agg=0.2,
        sigma_idio=0.5,
        theta=0.1,
        tau=0.5,
        D=1.0,
        eta=0.5,
        d0=1.0,
        r_f=0.02,
        alpha=0.5,
        mu0=0.08,
        w=0.1,
        loss=0.2,
        sigma_w=0.3,
        W0=1.0,
        t_star=2.0,
        EK_target=0.02,
    )
    base.update(overrides)
    return validate(base)
