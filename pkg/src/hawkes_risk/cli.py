"""Batch command line front end.

Subcommands: moments, simulate, fclt-check, ruin, figures. Every run
writes its artifacts plus a manifest (config echo, seed, versions,
parameter hash) to the output directory; reruns with identical config
and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analytic_exp, gaussian, ruin as ruin_mod, volterra
from .config import ExperimentConfig, load_config, manifest
from .errors import AsymptoticInapplicable, HawkesRiskError
from .grids import TimeGrid
from .hawkes_sim import simulate_compound, simulate_risk_path, RiskPathConfig
from .kernels import ExponentialKernel

FIGURES = ("fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b")

DEFAULT_ALPHA_SWEEP = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]
DEFAULT_RATE_SWEEP = [0.5, 0.75, 1.0, 1.5, 2.0]
DEFAULT_SHAPE_SWEEP = [0.5, 1.0, 1.5, 2.0]


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out(args, config: ExperimentConfig) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "manifest.json", manifest(config))
    return out


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    raw = config.echo()
    if getattr(args, "seed", None) is not None:
        raw["run"]["seed"] = args.seed
    if getattr(args, "mu", None) is not None:
        raw["run"]["mu"] = args.mu
    if getattr(args, "paths", None) is not None:
        raw["run"]["n_paths"] = args.paths
    if getattr(args, "grid_step", None) is not None:
        raw["run"]["grid_step"] = args.grid_step
    from .config import config_from_mapping

    return config_from_mapping(raw)


def _grid(config: ExperimentConfig) -> TimeGrid:
    return TimeGrid(t_max=config.horizon, step=config.grid_step)


# --------------------------------------------------------------------------
# subcommands


def _cmd_moments(config: ExperimentConfig, out: Path) -> None:
    grid = _grid(config)
    kernel = config.kernel
    g1 = volterra.solve_g1(kernel, grid)
    g2 = volterra.solve_g2(kernel, g1)
    mean, variance = volterra.count_moments(config.mu, g1, g2)
    sigma = volterra.sigma_function(config.claims, g1, g2)
    header = ["t", "g1", "g2", "mean", "variance", "sigma"]
    columns = [grid.nodes, g1.values, g2.values, mean.values, variance.values, sigma.values]
    if isinstance(kernel, ExponentialKernel) and 0 < kernel.alpha < kernel.beta:
        p = analytic_exp.ExpKernelParams.from_kernel(kernel)
        header += ["g1_closed", "g2_closed"]
        columns += [analytic_exp.g1_closed(p, grid.nodes), analytic_exp.g2_closed(p, grid.nodes)]
    _write_csv(out / "moments.csv", header, zip(*(c.tolist() for c in columns)))


def _cmd_simulate(config: ExperimentConfig, out: Path, what: str) -> None:
    grid = _grid(config)
    kernel, claims = config.kernel, config.claims
    if what == "events":
        rows = []
        for i in range(config.n_paths):
            path = simulate_compound(kernel, config.mu, config.horizon, claims,
                                     config.seed, i)
            rows.extend((i, float(t), float(y))
                        for t, y in zip(path.events.event_times, path.claim_sizes))
        _write_csv(out / "events.csv", ["path", "event_time", "claim_size"], rows)
        return
    cfg = RiskPathConfig(u=config.u, c=config.c, mu=config.mu, claims=claims,
                         kernel=kernel, horizon=config.horizon)
    g1_cum = volterra.solve_g1(kernel, grid).cumulative()
    rows = []
    for i in range(config.n_paths):
        wealth = simulate_risk_path(cfg, grid, config.seed, i, g1_cum=g1_cum)
        rows.extend((i, float(t), float(v)) for t, v in zip(grid.nodes, wealth.values))
    _write_csv(out / "wealth.csv", ["path", "t", "wealth"], rows)


def _cmd_fclt(config: ExperimentConfig, out: Path) -> None:
    report = gaussian.fclt_check(config.kernel, config.claims, config.mu, _grid(config),
                                 config.n_paths, config.seed)
    report.to_json(out / "fclt_check.json")


def _problem(config: ExperimentConfig) -> ruin_mod.RuinProblem:
    return ruin_mod.RuinProblem(u=config.u, c=config.c, horizon=config.horizon,
                                kernel=config.kernel, claims=config.claims)


def _cmd_ruin(config: ExperimentConfig, out: Path) -> None:
    problem = _problem(config)
    grid = _grid(config)
    for method in config.methods:
        dest = out / f"ruin_{method}.json"
        if method == "mc-gaussian":
            est = ruin_mod.ruin_mc_gaussian(problem, grid, config.n_paths, config.seed)
        elif method == "mc-direct":
            est = ruin_mod.ruin_mc_direct(problem, config.mu, grid, config.n_paths,
                                          config.seed)
        else:
            try:
                inputs = ruin_mod.exponential_asymptotic_inputs(problem)
                est = ruin_mod.ruin_asymptotic(problem, inputs, seed=config.seed)
            except AsymptoticInapplicable as exc:
                _write_json(dest, {"method": "asymptotic",
                                   "error": "AsymptoticInapplicable",
                                   "message": str(exc)})
                continue
        payload = est.to_dict()
        payload["inputs"] = config.echo()
        _write_json(dest, payload)


def _sweep_config(config: ExperimentConfig, parameter: str, value: float) -> ExperimentConfig:
    from .config import config_from_mapping

    raw = config.echo()
    if parameter == "alpha":
        raw["kernel"]["alpha"] = value
    elif parameter == "claim_rate":
        raw["claims"] = {"variant": "exponential", "rate": value}
    elif parameter == "gamma_shape":
        rate = raw["claims"].get("rate", 0.5)
        raw["claims"] = {"variant": "gamma", "shape": value, "rate": rate}
    else:
        raise HawkesRiskError(f"unknown sweep parameter {parameter!r}")
    return config_from_mapping(raw)


def _sweep_point(payload):
    config, parameter, value = payload
    point = _sweep_config(config, parameter, value)
    est = ruin_mod.ruin_mc_gaussian(_problem(point), _grid(point), point.n_paths,
                                    point.seed)
    return value, est.p_hat, est.std_err


def _ruin_sweep(config: ExperimentConfig, parameter: str, values, threads: int):
    jobs = [(config, parameter, v) for v in values]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def _var_curve_rows(config: ExperimentConfig, parameter: str, values):
    """(value, t, Var G(t)) rows over a coarse horizon grid."""
    ts = np.linspace(0.05, config.horizon, 20)
    rows = []
    for v in values:
        point = _sweep_config(config, parameter, v)
        kernel = point.kernel
        p = analytic_exp.ExpKernelParams.from_kernel(kernel)
        var = analytic_exp.var_G(p, point.claims, ts)
        rows.extend((float(v), float(t), float(x)) for t, x in zip(ts, var))
    return rows


def _cmd_figures(config: ExperimentConfig, out: Path, which: str, threads: int) -> None:
    wanted = FIGURES if which == "all" else (which,)
    sweep_values = None
    if config.sweep:
        sweep_values = list(config.sweep["values"])
    for name in wanted:
        if name == "fig1a":
            values = sweep_values if config.sweep.get("parameter") == "alpha" else None
            points = _ruin_sweep(config, "alpha", values or DEFAULT_ALPHA_SWEEP, threads)
            _write_csv(out / "fig1a.csv", ["alpha", "p_hat", "std_err"], points)
        elif name == "fig1b":
            rows = _var_curve_rows(config, "alpha", DEFAULT_ALPHA_SWEEP)
            _write_csv(out / "fig1b.csv", ["alpha", "t", "var_g"], rows)
        elif name == "fig2a":
            values = sweep_values if config.sweep.get("parameter") == "claim_rate" else None
            points = _ruin_sweep(config, "claim_rate", values or DEFAULT_RATE_SWEEP, threads)
            _write_csv(out / "fig2a.csv", ["claim_rate", "p_hat", "std_err"], points)
        elif name == "fig2b":
            rows = _var_curve_rows(config, "claim_rate", DEFAULT_RATE_SWEEP)
            _write_csv(out / "fig2b.csv", ["claim_rate", "t", "var_g"], rows)
        elif name == "fig3a":
            values = sweep_values if config.sweep.get("parameter") == "gamma_shape" else None
            points = _ruin_sweep(config, "gamma_shape", values or DEFAULT_SHAPE_SWEEP, threads)
            _write_csv(out / "fig3a.csv", ["gamma_shape", "p_hat", "std_err"], points)
        elif name == "fig3b":
            rows = _var_curve_rows(config, "gamma_shape", DEFAULT_SHAPE_SWEEP)
            _write_csv(out / "fig3b.csv", ["gamma_shape", "t", "var_g"], rows)


# --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkes-risk",
        description="Moments, diffusion approximation, and finite-horizon ruin "
                    "probabilities for risk processes with Hawkes claim arrivals.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--mu", type=float, default=None, help="baseline intensity override")
        p.add_argument("--paths", type=int, default=None, help="path count override")
        p.add_argument("--grid-step", type=float, default=None, dest="grid_step",
                       help="grid step override")

    common(sub.add_parser("moments", help="Volterra & closed-form moment tables"))
    p_sim = sub.add_parser("simulate", help="simulated paths to CSV")
    common(p_sim)
    p_sim.add_argument("--what", choices=("events", "wealth"), default="events")
    common(sub.add_parser("fclt-check", help="empirical check of the Gaussian limit"))
    common(sub.add_parser("ruin", help="finite-horizon ruin estimates"))
    p_fig = sub.add_parser("figures", help="figure-data sweeps")
    common(p_fig)
    p_fig.add_argument("--which", choices=FIGURES + ("all",), default="all")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        out = _prepare_out(args, config)
        if args.command == "moments":
            _cmd_moments(config, out)
        elif args.command == "simulate":
            _cmd_simulate(config, out, args.what)
        elif args.command == "fclt-check":
            _cmd_fclt(config, out)
        elif args.command == "ruin":
            _cmd_ruin(config, out)
        elif args.command == "figures":
            _cmd_figures(config, out, args.which, args.threads)
    except HawkesRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
