"""Command-line surface: solvers, verification suite, CSV/JSON artifacts.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver error.  Identical (config, seed) pairs produce byte-identical
artifacts; plot data is emitted as CSV only.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import mc, statics, threshold, verify, wealth
from .errors import ConfigError, HetdataError, ParamError, SolverError
from .model import ModelParams, default_params, load_params
from .numerics import make_stream

COMMANDS = ("threshold", "statics", "wealth", "figure1", "verify", "report")
_STOCHASTIC = {"wealth", "verify", "report"}

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


@dataclass
class RunConfig:
    command: str
    params: ModelParams
    output_dir: Path
    seed: Optional[int] = None
    tau: Optional[float] = None
    tau_grid: Optional[List[float]] = None
    lambda_grid: Optional[List[float]] = None
    mu_grid: Optional[List[float]] = None
    n_paths: int = 100_000
    population: int = 1_000_000
    threads: int = 1


def _parse_grid(text: str, name: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--{name} expects a:b:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--{name}: non-numeric grid spec {text!r}") from exc
    if step <= 0.0 or b <= a:
        raise ConfigError(f"--{name}: grid must be strictly increasing, got {text!r}")
    return [float(x) for x in np.arange(a, b + 0.5 * step, step)]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetdata",
        description="Threshold equilibrium, comparative statics, and "
        "jump-diffusion friction solver with built-in verification.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--params", help="JSON parameter file")
    parser.add_argument("--seed", type=int, help="master seed (required for "
                        "stochastic commands)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--tau", type=float, help="single data cost rate")
    parser.add_argument("--tau-grid", help="tau grid a:b:step")
    parser.add_argument("--lambda-grid", help="lambda grid a:b:step")
    parser.add_argument("--mu-grid", help="ability grid a:b:step")
    parser.add_argument("--paths", type=int, default=100_000,
                        help="Monte Carlo path count")
    parser.add_argument("--population", type=int, default=1_000_000,
                        help="finite-population size for LLN checks")
    return parser


def load_config(argv: List[str], env: dict) -> RunConfig:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError("bad command line") from exc

    if args.command in _STOCHASTIC and args.seed is None:
        raise ConfigError(f"--seed is required for the {args.command} command")

    if args.params is not None:
        path = Path(args.params)
        if not path.is_file():
            raise ConfigError(f"params file not found: {path}")
        try:
            params = load_params(path)
        except (ParamError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad params file {path}: {exc}") from exc
    else:
        params = default_params()
    if args.tau is not None:
        if not (0.0 < args.tau < 1.0):
            raise ConfigError(f"--tau must be in (0, 1), got {args.tau}")
        params = default_params(**{"tau": args.tau}) if args.params is None else _override_tau(params, args.tau)

    threads = int(env.get("HETDATA_THREADS", "1") or "1")
    return RunConfig(
        command=args.command,
        params=params,
        output_dir=Path(args.out),
        seed=args.seed,
        tau=args.tau,
        tau_grid=_parse_grid(args.tau_grid, "tau-grid") if args.tau_grid else None,
        lambda_grid=_parse_grid(args.lambda_grid, "lambda-grid")
        if args.lambda_grid else None,
        mu_grid=_parse_grid(args.mu_grid, "mu-grid") if args.mu_grid else None,
        n_paths=args.paths,
        population=args.population,
        threads=max(1, threads),
    )


def _override_tau(params: ModelParams, tau: float) -> ModelParams:
    from dataclasses import fields
    from .model import validate

    raw = {f.name: getattr(params, f.name) for f in fields(ModelParams)}
    raw["tau"] = tau
    return validate(raw)


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, np.ndarray)):
        return float(obj) if np.isscalar(obj) or obj.ndim == 0 else obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
        + "\n",
        encoding="utf-8",
    )


def _run_threshold(config: RunConfig) -> int:
    taus = config.tau_grid or [config.tau if config.tau is not None
                               else config.params.tau]
    rows = []
    for tau in taus:
        sol = threshold.solve_threshold(tau, config.params)
        rows.append({"tau": tau, **sol.to_dict()})
    _write_json(config.output_dir / "threshold.json", rows)
    return EXIT_OK


def _run_statics(config: RunConfig) -> int:
    params = config.params
    taus = config.tau_grid or [float(t) for t in np.arange(0.05, 0.951, 0.05)]
    lines = ["tau,mu_k,dmu_dtau,output_ratio"]
    for tau in taus:
        sol = threshold.solve_threshold(tau, params)
        sens = statics.threshold_sensitivity(tau, params)
        ratio = statics.output_ratio(sol.mu_k, params.sigma_mu)
        lines.append(f"{tau!r},{sol.mu_k!r},{sens!r},{ratio!r}")
    (config.output_dir / "sensitivity.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )
    tau_L, tau_H = (taus[0], taus[-1]) if config.tau_grid else (0.3, 0.6)
    report = statics.theorem1_report(tau_L, tau_H, params)
    _write_json(config.output_dir / "theorem1.json", report.to_dict())
    return EXIT_OK


def _run_wealth(config: RunConfig) -> int:
    params = config.params
    lams = config.lambda_grid or [1.5]
    lines = ["lambda,t,closed_form,mc_estimate,mc_se,pass"]
    all_pass = True
    for lam in lams:
        closed = wealth.expected_capital(params, params.t_star, lam)
        est, se = wealth.mc_expected_capital(
            params, lam, params.t_star, config.n_paths, config.seed
        )
        ok = abs(est - closed) <= max(3.0 * se, 8e-16 * abs(closed))
        all_pass &= ok
        lines.append(
            f"{lam!r},{params.t_star!r},{closed!r},{est!r},{se!r},{ok}"
        )
    (config.output_dir / "wealth.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )
    return EXIT_OK if all_pass else EXIT_VERIFY_FAIL


def _run_figure1(config: RunConfig) -> int:
    params = config.params
    lam_grid = config.lambda_grid or [
        float(x) for x in np.arange(1.0, 5.001, 0.05)
    ]
    sol = threshold.solve_threshold(params.tau, params)
    mu_grid = config.mu_grid or [sol.mu_k - 0.5, sol.mu_k + 0.5, sol.mu_k + 1.5]
    table = wealth.figure1_curves(params, lam_grid, mu_grid)
    (config.output_dir / "figure1.csv").write_text(
        table.to_csv(), encoding="utf-8"
    )
    return EXIT_OK


def _run_verify(config: RunConfig) -> int:
    results = verify.run_all(
        config.seed, n_paths=config.n_paths, population=config.population
    )
    _write_json(
        config.output_dir / "verify.json",
        [r.to_dict() for r in results],
    )
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAIL


def run(config: RunConfig) -> int:
    """Execute a validated config; artifacts land in config.output_dir."""
    config.output_dir.mkdir(parents=True, exist_ok=True)
    runners = {
        "threshold": _run_threshold,
        "statics": _run_statics,
        "wealth": _run_wealth,
        "figure1": _run_figure1,
        "verify": _run_verify,
    }
    if config.command == "report":
        status = EXIT_OK
        for name in ("threshold", "statics", "wealth", "figure1", "verify"):
            status = max(status, runners[name](config))
        return status
    return runners[config.command](config)


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = load_config(argv, dict(os.environ))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(config)
    except (SolverError, HetdataError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
