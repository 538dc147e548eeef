"""Command-line interface: fit, se, test, simulate and mc subcommands."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, Direction, bootstrap_joint, bootstrap_test
from .estimation import fit, sigma_blocks
from .exceptions import GarchMomentsError
from .io import DataKind, RunReport, ingest
from .models import Family, ModelSpec, Params, estimate_moments, simulate
from .montecarlo import (
    ExperimentConfig,
    InnovationFamily,
    export_density_samples,
    run_experiment,
)
from .spectral import SpectralMode


def _csv_floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _csv_ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _add_model_args(p):
    p.add_argument("--family", default="garch", choices=[f.value for f in Family])
    p.add_argument("--p", type=int, default=1, help="volatility lag order")
    p.add_argument("--q", type=int, default=1, help="innovation lag order")
    p.add_argument("--delta", type=float, default=None, help="AP-GARCH power")
    p.add_argument("--gamma", type=float, default=None, help="AP-GARCH asymmetry")


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV input path")
    p.add_argument("--kind", default="returns", choices=[k.value for k in DataKind])
    p.add_argument("--column", default=None, help="column name or index (auto-detected)")


def _add_common_args(p):
    p.add_argument("--m", default="1,2,3", help="comma list of half-orders")
    p.add_argument("--B", type=int, default=1999, help="bootstrap replicates")
    p.add_argument("--level", default="0.05,0.10", help="comma list of nominal levels")
    p.add_argument("--mode", default="radius", choices=[m.value for m in SpectralMode])
    p.add_argument("--direction", default="upper", choices=[d.value for d in Direction])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="write the report to this path")
    p.add_argument("--table", action="store_true", help="print a human-readable table")
    p.add_argument(
        "--deterministic",
        action="store_true",
        help="omit wall-clock timing so identical runs are byte-identical",
    )


def _spec_from_args(args) -> ModelSpec:
    family = Family(args.family)
    p = 0 if family is Family.ARCH else args.p
    return ModelSpec(family, q=args.q, p=p, delta=args.delta, gamma=args.gamma)


def _fit_summary(spec, result, m_max):
    mu = estimate_moments(result.residuals, spec, m_max)
    return {
        "family": spec.family.value,
        "p": spec.p,
        "q": spec.q,
        "n": int(result.series.shape[0]),
        "theta": {
            "omega": result.theta_hat.omega,
            "alpha": result.theta_hat.alpha,
            "beta": result.theta_hat.beta,
        },
        "loglik": result.loglik,
        "converged": result.converged,
        "iterations": result.iterations,
        "score_norm": result.score_norm,
        "residual_moments": {f"mu_{2 * k}": mu.mu[k - 1] for k in range(1, m_max + 1)},
    }


def _emit(report: RunReport, args):
    text = report.serialize()
    if args.out:
        Path(args.out).write_text(text)
    if not getattr(args, "table", False):
        sys.stdout.write(text)


def _config_echo(args):
    skip = {"func", "out", "table"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


# ---------------------------------------------------------------------------
# Subcommands


def cmd_fit(args):
    started = time.perf_counter()
    ds = ingest(args.data, args.kind, args.column)
    spec = _spec_from_args(args)
    result = fit(spec, ds.series)
    m_list = _csv_ints(args.m)
    report = RunReport(
        command="fit",
        config=_config_echo(args),
        seed=args.seed,
        version=__version__,
        fit=_fit_summary(spec, result, max(m_list)),
        timing_seconds=None if args.deterministic else time.perf_counter() - started,
    )
    if args.sigma:
        blocks = sigma_blocks(result, spec, max(m_list))
        report.sigma = {
            "J": blocks.J,
            "Omega": blocks.Omega,
            "nu": blocks.nu,
            "xi": blocks.xi,
            "Upsilon": blocks.Upsilon,
            "Xi": blocks.Xi,
            "mu4": blocks.mu4,
            "Sigma": blocks.Sigma,
        }
    _emit(report, args)
    if args.table:
        _print_fit_table(report.fit)
    return 0


def _print_fit_table(fitdict):
    theta = fitdict["theta"]
    names = ["omega"]
    names += [f"alpha{i+1}" for i in range(len(theta["alpha"]))]
    names += [f"beta{j+1}" for j in range(len(theta["beta"]))]
    values = [theta["omega"], *theta["alpha"], *theta["beta"]]
    print("parameter      estimate")
    for name, value in zip(names, values):
        print(f"{name:<12} {value:>12.4f}")
    for key, value in fitdict["residual_moments"].items():
        print(f"{key:<12} {value:>12.4f}")
    print(f"loglik       {fitdict['loglik']:>12.6f}   converged={fitdict['converged']}")


def cmd_se(args):
    started = time.perf_counter()
    ds = ingest(args.data, args.kind, args.column)
    spec = _spec_from_args(args)
    result = fit(spec, ds.series)
    m_list = _csv_ints(args.m)
    m_max = max(m_list)
    cfg = BootstrapConfig(B=args.B, seed=args.seed, direction=Direction(args.direction))
    draws = bootstrap_joint(spec, result, ds.series, m_max, cfg, n_jobs=args.threads)
    theta_sd = draws.theta_std
    mu_sd = draws.mu_std
    report = RunReport(
        command="se",
        config=_config_echo(args),
        seed=args.seed,
        version=__version__,
        fit=_fit_summary(spec, result, m_max),
        bootstrap_se={
            "omega": theta_sd[0],
            "alpha": theta_sd[1 : 1 + spec.n_alpha],
            "beta": theta_sd[1 + spec.n_alpha :],
            "mu": {f"mu_{2 * k}": mu_sd[k - 1] for k in range(1, m_max + 1)},
            "B_effective": int(draws.theta_draws.shape[0]),
            "failures": draws.failures,
        },
        timing_seconds=None if args.deterministic else time.perf_counter() - started,
    )
    _emit(report, args)
    if args.table:
        _print_fit_table(report.fit)
        print("bootstrap standard errors:")
        print(json.dumps(report.bootstrap_se, indent=2, default=float))
    return 0


def cmd_test(args):
    started = time.perf_counter()
    ds = ingest(args.data, args.kind, args.column)
    spec = _spec_from_args(args)
    m_list = _csv_ints(args.m)
    levels = _csv_floats(args.level)
    base = fit(spec, ds.series)
    tests = []
    for m in m_list:
        cfg = BootstrapConfig(B=args.B, seed=args.seed, direction=Direction(args.direction))
        res = bootstrap_test(
            spec,
            ds.series,
            m,
            cfg,
            mode=SpectralMode(args.mode),
            n_jobs=args.threads,
            fit_result=base,
        )
        tests.append(
            {
                "m": m,
                "T_hat": res.T_hat,
                "T_hat_c": res.T_hat_c,
                "p_value": res.p_value,
                "B_effective": res.B_effective,
                "reject": {f"{lv:g}": bool(res.p_value < lv) for lv in levels},
            }
        )
    report = RunReport(
        command="test",
        config=_config_echo(args),
        seed=args.seed,
        version=__version__,
        fit=_fit_summary(spec, base, max(m_list)),
        tests=tests,
        timing_seconds=None if args.deterministic else time.perf_counter() - started,
    )
    _emit(report, args)
    if args.table:
        print("m        T_hat      T_hat_c    p_value")
        for t in tests:
            print(f"{t['m']:<6} {t['T_hat']:>9.4f} {t['T_hat_c']:>10.4f} {t['p_value']:>10.4f}")
    return 0


def cmd_simulate(args):
    spec = _spec_from_args(args)
    theta = Params.from_array(np.asarray(_csv_floats(args.params)), spec)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(0,)))
    total = args.n + args.burn_in
    if InnovationFamily(args.innovations) is InnovationFamily.GAUSSIAN:
        eta = rng.standard_normal(total)
    else:
        if args.t_dof is None or args.t_dof <= 2:
            raise GarchMomentsError("--t-dof > 2 required for student_t innovations")
        eta = rng.standard_t(args.t_dof, total) * np.sqrt((args.t_dof - 2) / args.t_dof)
    series = simulate(spec, theta, eta, burn_in=args.burn_in)
    out = args.out or "simulated.csv"
    np.savetxt(out, series, fmt="%.17g")
    sys.stdout.write(
        json.dumps({"written": out, "n": int(series.shape[0]), "seed": args.seed}, sort_keys=True)
        + "\n"
    )
    return 0


def _parse_mc_config(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise GarchMomentsError(f"cannot read config file {path}")
    if "design" not in parser or "grid" not in parser:
        raise GarchMomentsError("mc config needs [design] and [grid] sections")
    design = parser["design"]
    grid = parser["grid"]
    family = Family(design.get("family", "garch"))
    spec = ModelSpec(
        family,
        q=design.getint("q", 1),
        p=0 if family is Family.ARCH else design.getint("p", 1),
    )
    beta_raw = design.get("beta", "boundary").strip()
    beta = None if beta_raw == "boundary" else float(beta_raw)
    base = {
        "spec": spec,
        "omega": design.getfloat("omega"),
        "alpha": _csv_floats(design.get("alpha")),
        "beta": beta,
        "boundary_m": design.getint("boundary_m", 3),
        "innovations": InnovationFamily(design.get("innovations", "gaussian")),
        "t_dof": design.getfloat("t_dof", fallback=None),
        "S": grid.getint("S"),
        "B": grid.getint("B"),
        "nominal_levels": _csv_floats(grid.get("levels", "0.05,0.10")),
        "master_seed": grid.getint("seed", 0),
        "burn_in": grid.getint("burn_in", 500),
    }
    cells = []
    for section in parser.sections():
        if section.startswith("cell"):
            cells.append(
                (
                    _csv_ints(parser[section].get("n")),
                    _csv_ints(parser[section].get("m")),
                )
            )
    if not cells:
        raise GarchMomentsError("mc config defines no [cell*] sections")
    return [ExperimentConfig(n_grid=ns, m_grid=ms, **base) for ns, ms in cells]


def cmd_mc(args):
    configs = _parse_mc_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    echo = []
    for cfg in configs:
        table = run_experiment(cfg, n_jobs=args.threads)
        rows.extend(table.rows())
        echo.append({"n_grid": cfg.n_grid, "m_grid": cfg.m_grid, "beta_used": table.beta_used})
        for n in cfg.n_grid:
            for m in cfg.m_grid:
                export_density_samples(table, n, m, out_dir)
    csv_path = out_dir / "rejection_table.csv"
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n", "m", "level", "frequency", "S_effective"])
        for row in rows:
            writer.writerow([row[0], row[1], f"{row[2]:g}", f"{row[3]:.10g}", row[4]])
    summary = {"rejection_table": str(csv_path), "cells": echo}
    (out_dir / "mc_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="garchmoments",
        description="GARCH-family QML estimation and the bootstrap moment-existence test",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="estimate a model and report residual moments")
    _add_data_args(p_fit)
    _add_model_args(p_fit)
    _add_common_args(p_fit)
    p_fit.add_argument("--sigma", action="store_true", help="include covariance blocks")
    p_fit.set_defaults(func=cmd_fit)

    p_se = sub.add_parser("se", help="fit plus fixed-design bootstrap standard errors")
    _add_data_args(p_se)
    _add_model_args(p_se)
    _add_common_args(p_se)
    p_se.set_defaults(func=cmd_se)

    p_test = sub.add_parser("test", help="bootstrap test for the existence of moments")
    _add_data_args(p_test)
    _add_model_args(p_test)
    _add_common_args(p_test)
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="simulate a return series")
    _add_model_args(p_sim)
    p_sim.add_argument("--params", required=True, help="omega,alpha...,beta... comma list")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--burn-in", type=int, default=500, dest="burn_in")
    p_sim.add_argument("--innovations", default="gaussian", choices=[i.value for i in InnovationFamily])
    p_sim.add_argument("--t-dof", type=float, default=None, dest="t_dof")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo experiment from a config file")
    p_mc.add_argument("--config", required=True)
    p_mc.add_argument("--out-dir", required=True, dest="out_dir")
    p_mc.add_argument("--threads", type=int, default=1)
    p_mc.set_defaults(func=cmd_mc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GarchMomentsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
