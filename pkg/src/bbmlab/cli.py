"""Command-line front end.

Subcommands: ``constants``, ``sweep``, ``verify``, ``counterexample``.
Exit codes: 0 success / all claims pass, 1 verdict failure, 2 configuration
error, 3 runtime error (a partial CSV is kept with an ``# ABORTED``
trailer).  The ``BBMLAB_LOG`` environment variable (error | info | debug)
controls verbosity.
"""

from __future__ import annotations

import logging
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import limits as lm
from .config import ConfigError, ExperimentConfig
from .geometry import Cusp, ExhaustionLevel, GeometryError
from .maximal import (
    default_t_grid,
    gradient_magnitude_field,
    spherical_maximal,
    verify_lp_bound,
    verify_pointwise_bound,
)
from .rng import RandomStream
from .seminorm import SeminormParams, k_constant, k_constant_sphere_mc
from . import reporting

log = logging.getLogger("bbmlab")

VERIFY_TOLERANCE = 0.05
CONSTANTS_MC_SAMPLES = 1_000_000
CONSTANTS_MC_SEED = 414213562


def _setup_logging() -> None:
    level = os.environ.get("BBMLAB_LOG", "error").strip().lower()
    chosen = {"error": logging.ERROR, "info": logging.INFO,
              "debug": logging.DEBUG}.get(level, logging.ERROR)
    logging.basicConfig(level=chosen, format="%(levelname)s %(name)s: %(message)s")


@click.group()
def main():
    """Fractional energy sweeps on bounded domains."""
    _setup_logging()


def _config_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="Experiment config (JSON).")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config seed (unsigned 64-bit).")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="Worker threads (default: machine parallelism).")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=None,
                      help="Output directory (default: config out_dir or '.').")(fn)
    fn = click.option("--emit-plots", is_flag=True, default=False,
                      help="Also render SVG figures next to the CSV/JSON.")(fn)
    return fn


def _load(config_path: str, seed, out_dir, emit_plots, threads):
    try:
        cfg = ExperimentConfig.from_path(config_path)
        if seed is not None:
            if not (0 <= seed < 2**64):
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
            cfg.seed = int(seed)
        if out_dir is not None:
            cfg.out_dir = str(out_dir)
        if emit_plots:
            cfg.emit_plots = True
        cfg.validate()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    threads = threads if threads and threads > 0 else (os.cpu_count() or 1)
    out = Path(cfg.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out, threads


@main.command()
@click.option("--n", "n", type=int, required=True, help="Ambient dimension.")
@click.option("--p", "p", type=float, required=True, help="Integrability exponent.")
def constants(n: int, p: float):
    """Print the sharp constant and its sphere Monte Carlo cross-check."""
    try:
        kc = k_constant(n, p)
    except ValueError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    mc = k_constant_sphere_mc(n, p, CONSTANTS_MC_SAMPLES,
                              RandomStream(CONSTANTS_MC_SEED))
    rel = abs(mc - kc.value) / kc.value
    click.echo(f"K(n={n}, p={reporting.fmt(p)}) = {reporting.fmt(kc.value)}")
    click.echo(f"sphere_mc[{CONSTANTS_MC_SAMPLES}] = {reporting.fmt(mc)}")
    click.echo(f"relative_difference = {reporting.fmt(rel)}")


@main.command()
@_config_options
def sweep(config_path, seed, threads, out_dir, emit_plots):
    """Run the configured sweep; write sweep.csv (and sweep.svg)."""
    cfg, out, threads = _load(config_path, seed, out_dir, emit_plots, threads)
    csv_path = out / "sweep.csv"
    try:
        f = cfg.build_function()
        dom = cfg.build_domain()
        sw = lm.sweep(f, dom, cfg.p, cfg.tau, cfg.s_grid, cfg.kinds,
                      cfg.budgets, cfg.seed, threads)
    except lm.SweepAborted as exc:
        if exc.partial is not None:
            reporting.write_partial_sweep_csv(csv_path, exc.partial)
        else:
            reporting.append_aborted(csv_path)
        click.echo(f"computation error: {exc}", err=True)
        sys.exit(3)
    except Exception as exc:
        click.echo(f"computation error: {exc}", err=True)
        sys.exit(3)
    reporting.write_sweep_csv(csv_path, sw)
    if cfg.emit_plots:
        reporting.plot_sweep(out / "sweep.svg", sw)
    limit, sigma, _ = sw.limit
    click.echo(
        f"limit[{sw.primary_kind}] = {reporting.fmt(limit)} "
        f"+/- {reporting.fmt(sigma)} (target {reporting.fmt(sw.target)})"
    )


@main.command()
@_config_options
@click.option("--corrupt-target", type=float, default=None,
              help="Negative control: scale the limit target by this factor.")
def verify(config_path, seed, threads, out_dir, emit_plots, corrupt_target):
    """Run the verification suite; write verdicts.json; exit 1 on any fail."""
    cfg, out, threads = _load(config_path, seed, out_dir, emit_plots, threads)
    try:
        verdicts = _verify_suite(cfg, threads, corrupt_target)
    except lm.SweepAborted as exc:
        click.echo(f"computation error: {exc}", err=True)
        sys.exit(3)
    except Exception as exc:
        click.echo(f"computation error: {exc}", err=True)
        sys.exit(3)
    reporting.write_verdicts_json(out / "verdicts.json", verdicts)
    failed = [v for v in verdicts if v.status == "fail"]
    for v in verdicts:
        click.echo(f"{v.claim}: {v.status}")
    if failed:
        sys.exit(1)


def _verify_suite(cfg: ExperimentConfig, threads: int, corrupt) -> list:
    f = cfg.build_function()
    dom = cfg.build_domain()
    verdicts = []
    scale = corrupt if corrupt is not None else 1.0

    sw = lm.sweep(f, dom, cfg.p, cfg.tau, cfg.s_grid, ("truncated",),
                  cfg.budgets, cfg.seed, threads)
    verdicts.append(lm.theorem_verdict(sw, VERIFY_TOLERANCE, target_scale=scale))

    verdicts.append(_pointwise_claim(cfg, f, dom))
    verdicts.append(_lp_claim(cfg, f, dom))
    verdicts.extend(_step5_claims(cfg, f, dom, threads))
    verdicts.append(
        lm.farpart_decay_verdict(f, dom, cfg.p, cfg.tau, cfg.s_grid,
                                 cfg.budgets, cfg.seed, threads)
    )
    if isinstance(dom, Cusp):
        verdicts.append(
            lm.divergence_verdict(f, dom, cfg.p, cfg.tau, cfg.s_grid,
                                  cfg.budgets, cfg.seed, threads=threads)
        )
    return verdicts


def _pointwise_claim(cfg, f, dom):
    stream = RandomStream(cfg.seed).child(901)
    xs = dom.sample(5, stream.child(0))
    t_grid = default_t_grid(dom)
    grad = gradient_magnitude_field(f, dom)
    s_probe = (cfg.s_grid[0], cfg.s_grid[-1])
    worst = None
    n_pass = 0
    total = 0
    for j, x in enumerate(xs):
        hstar = spherical_maximal(grad, x, cfg.p, 256, t_grid).value
        for s in s_probe:
            params = SeminormParams(s=s, p=cfg.p, tau=cfg.tau)
            rep = verify_pointwise_bound(
                f, dom, params, x, 1 << 14, stream.child(1 + j),
                maximal_value=hstar, t_grid=t_grid,
            )
            total += 1
            n_pass += rep.passed
            if worst is None or (rep.rhs - rep.lhs) < (worst.rhs - worst.lhs):
                worst = rep
    status = "pass" if n_pass == total else "fail"
    return lm.Verdict(
        claim="pointwise-maximal-bound", status=status,
        lhs=worst.lhs, rhs=worst.rhs, tolerance=worst.tolerance,
        notes=f"{n_pass}/{total} point/s checks passed; worst: {worst.notes}",
    )


def _lp_claim(cfg, f, dom):
    grad = gradient_magnitude_field(f, dom)
    rep = verify_lp_bound(grad, dom, cfg.p, 192, RandomStream(cfg.seed).child(902))
    return lm.Verdict(
        claim="maximal-lp-bound", status="pass" if rep.passed else "fail",
        lhs=rep.lhs, rhs=rep.rhs, tolerance=rep.tolerance, notes=rep.notes,
    )


def _step5_claims(cfg, f, dom, threads):
    try:
        level = ExhaustionLevel(1, 0.5 * dom.inradius())
        report = lm.step5_decomposition(
            f, dom, level, cfg.p, cfg.tau, (0.90, 0.95, 0.99),
            cfg.budgets.scaled(0.25), cfg.seed, threads,
        )
    except GeometryError as exc:
        return [lm.Verdict(
            claim="exhaustion-decomposition", status="inconclusive",
            lhs=math.nan, rhs=math.nan, tolerance=0.0,
            notes=f"no usable inner region: {exc}",
        )]
    last = report.rows[-1]
    return [
        lm.Verdict(
            claim="exhaustion-near-part", status="pass" if report.near_ok else "fail",
            lhs=last.near.value, rhs=last.near_reference.value, tolerance=0.0,
            notes=f"alpha={report.alpha:g}; inner cone part vs full-domain energy",
        ),
        lm.Verdict(
            claim="exhaustion-far-bound", status="pass" if report.far_ok else "fail",
            lhs=last.far.value, rhs=last.far_bound, tolerance=0.0,
            notes=f"alpha={report.alpha:g}; pair bound at s={last.s:g}",
        ),
        lm.Verdict(
            claim="exhaustion-far-decay", status="pass" if report.decay_ok else "fail",
            lhs=(1 - report.rows[-1].s) * report.rows[-1].far.value,
            rhs=(1 - report.rows[0].s) * report.rows[0].far.value,
            tolerance=2.0,
            notes=f"scaled far part shrank {report.decay_ratio:.3g}x",
        ),
    ]


@main.command()
@_config_options
def counterexample(config_path, seed, threads, out_dir, emit_plots):
    """Classical vs truncated curves on one config, plus divergence verdict."""
    cfg, out, threads = _load(config_path, seed, out_dir, emit_plots, threads)
    csv_path = out / "counterexample.csv"
    try:
        f = cfg.build_function()
        dom = cfg.build_domain()
        sw = lm.sweep(f, dom, cfg.p, cfg.tau, cfg.s_grid,
                      ("truncated", "classical"), cfg.budgets, cfg.seed, threads)
        verdict = lm.divergence_verdict(
            f, dom, cfg.p, cfg.tau, cfg.s_grid, cfg.budgets, cfg.seed,
            threads=threads,
        )
    except lm.SweepAborted as exc:
        if exc.partial is not None:
            reporting.write_partial_sweep_csv(csv_path, exc.partial)
        else:
            reporting.append_aborted(csv_path)
        click.echo(f"computation error: {exc}", err=True)
        sys.exit(3)
    except Exception as exc:
        click.echo(f"computation error: {exc}", err=True)
        sys.exit(3)
    reporting.write_counterexample_csv(csv_path, sw, verdict)
    if cfg.emit_plots:
        reporting.plot_counterexample(out / "counterexample.svg", sw)
    click.echo(f"divergence: {verdict.status} ({verdict.notes})")
    if verdict.status == "fail":
        sys.exit(1)


if __name__ == "__main__":
    main()
