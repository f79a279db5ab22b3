"""Command-line entry points: batch simulation, bound reports, live service.

Artifacts are deterministic functions of (config, seed): floats are
serialized with shortest round-trip repr, so identical values produce
identical bytes regardless of worker count or invocation.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from pathlib import Path
from typing import Dict, List, Optional

import click

from pooltest.bounds import InfeasibleBoundError, estimate_nu, minorant_moments
from pooltest.config import ConfigError, RunConfig, load_config, load_f_traces
from pooltest.design import optimal_f
from pooltest.model import TestParams
from pooltest.simulate import SweepReport, run_sweep


def _configure_logging() -> None:
    level = os.environ.get("GT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@click.group()
def main() -> None:
    """Adaptive pooled-testing toolkit."""
    _configure_logging()


def _cell_bound(cfg: RunConfig, sigma_prime: float, s_prime: float, delta: float) -> Optional[float]:
    """Test-count horizon for one cell: minorant mean at the cell's target f.

    Uses the true parameters for the information coefficients and the
    cell's assumed parameters only through the operating point, so the
    matched cell reduces to the plain horizon.
    """
    f_center = optimal_f(TestParams(s_prime, sigma_prime)).f_star
    nu = cfg.nu if (sigma_prime, s_prime) == (
        cfg.true_params.specificity, cfg.true_params.sensitivity
    ) else cfg.nu_prime
    moments = minorant_moments(f_center, nu, cfg.true_params)
    if moments.E_F <= 0.0:
        return None
    return (1.0 - delta) * cfg.prior.entropy_bits() / moments.E_F


def _write_series_csv(path: Path, report: SweepReport) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma_prime", "s_prime", "iteration", "mean_entropy", "n_runs"])
        for cell in report.cells:
            for t in range(report.max_tests):
                writer.writerow([
                    repr(cell.sigma_prime),
                    repr(cell.s_prime),
                    t + 1,
                    repr(float(cell.mean_entropy[t])),
                    cell.n_runs,
                ])


def _summary_payload(cfg: RunConfig, report: SweepReport) -> Dict:
    cells: List[Dict] = []
    for cell in report.cells:
        stop_times = []
        for d in report.deltas:
            stat = cell.stop_times[d]
            stop_times.append({
                "delta": d,
                "mean_tests": stat.mean,
                "std_tests": stat.std,
                "t_e_bound": _cell_bound(cfg, cell.sigma_prime, cell.s_prime, d),
            })
        fit = None
        if cell.fit is not None:
            fit = {
                "mean": cell.fit.mean,
                "nu": cell.fit.nu,
                "window": list(cell.fit.window),
            }
        auc = {str(c): (None if math.isnan(v) else v) for c, v in sorted(cell.auc_mean.items())}
        cells.append({
            "sigma_prime": cell.sigma_prime,
            "s_prime": cell.s_prime,
            "matched": cell.matched,
            "n_runs": cell.n_runs,
            "stop_times": stop_times,
            "auc": auc,
            "fit": fit,
        })
    return {
        "population": cfg.prior.n,
        "prior_entropy_bits": report.prior_entropy_bits,
        "runs": report.runs,
        "seed": report.base_seed,
        "max_tests": report.max_tests,
        "deltas": list(report.deltas),
        "checkpoints": list(report.checkpoints),
        "cells": cells,
    }


def _print_summary_table(report: SweepReport, deltas) -> None:
    d0 = min(deltas)
    click.echo(f"{'sigma_p':>8} {'s_p':>6} {'matched':>8} {'stop(d=' + repr(d0) + ')':>14} "
               f"{'auc':>18} {'nu':>10}")
    for cell in report.cells:
        stat = cell.stop_times[d0]
        aucs = " ".join(
            f"@{c}={'nan' if math.isnan(v) else format(v, '.3f')}"
            for c, v in sorted(cell.auc_mean.items())
        )
        nu_txt = "-" if cell.fit is None else format(cell.fit.nu, ".2e")
        click.echo(
            f"{cell.sigma_prime:>8} {cell.s_prime:>6} {str(cell.matched):>8} "
            f"{stat.mean:>7.3f}±{stat.std:<5.3f} {aucs:>18} {nu_txt:>10}"
        )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON run config.")
@click.option("--runs", type=int, default=None, help="Override run count from the config.")
@click.option("--seed", type=int, default=None, help="Override base seed from the config.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Artifact directory.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker threads; never changes results.")
def simulate(config_path: str, runs: Optional[int], seed: Optional[int],
             out_dir: Optional[str], workers: int) -> None:
    """Run a simulated campaign sweep and write CSV/JSON artifacts."""
    try:
        cfg = load_config(config_path)
        if runs is not None:
            if runs < 1:
                raise ConfigError(f"field 'runs': must be >= 1, got {runs}")
            cfg = _replace(cfg, runs=runs)
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError(f"field 'seed': must be an unsigned 64-bit integer, got {seed}")
            cfg = _replace(cfg, seed=seed)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc

    report = run_sweep(
        cfg.episode_config(),
        grid=cfg.sweep_grid(),
        runs=cfg.runs,
        checkpoints=cfg.checkpoints,
        deltas=cfg.deltas,
        workers=workers,
    )

    target = Path(out_dir) if out_dir is not None else (cfg.output_dir or Path.cwd())
    target.mkdir(parents=True, exist_ok=True)
    series = target / "series.csv"
    summary = target / "summary.json"
    _write_series_csv(series, report)
    summary.write_text(json.dumps(_summary_payload(cfg, report), indent=2, sort_keys=True) + "\n")

    _print_summary_table(report, cfg.deltas)
    click.echo(f"wrote {series}")
    click.echo(f"wrote {summary}")


def _replace(cfg: RunConfig, **changes) -> RunConfig:
    import dataclasses

    return dataclasses.replace(cfg, **changes)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON run config.")
def bounds(config_path: str) -> None:
    """Print the test-count horizon report for a config."""
    from pooltest.bounds import complexity_report

    try:
        cfg = load_config(config_path)
        nu = cfg.nu
        if cfg.nu_trace is not None:
            traces = load_f_traces(cfg.nu_trace)
            window = (5, 15) if cfg.matched else (3, 7)
            nu = estimate_nu(traces, window=window).nu
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc

    try:
        report = complexity_report(
            prior_H=cfg.prior.entropy_bits(),
            delta=cfg.delta,
            true_params=cfg.true_params,
            assumed_params=None if cfg.matched else cfg.assumed_params,
            nu=nu,
            nu_prime=cfg.nu_prime,
        )
    except InfeasibleBoundError as exc:
        raise click.ClickException(str(exc)) from exc

    click.echo(f"f_star          {report.f_star!r}")
    if report.f_prime is not None:
        click.echo(f"f_prime         {report.f_prime!r}")
    if not report.feasible:
        click.echo("feasible        False")
        click.echo("T_E             inf")
        return
    click.echo(f"T_E             {report.T_E!r}")
    if report.alpha is not None:
        click.echo(f"alpha           {report.alpha!r}")
    click.echo(f"E_F             {report.E_F!r}")
    click.echo(f"V_F             {report.V_F!r}")
    click.echo("curve:")
    for t, p in sorted(report.probability_curve.items()):
        click.echo(f"  T={t:<6d} P>= {p!r}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--state-dir", type=click.Path(), default="gt-sessions", show_default=True,
              help="Directory for per-session journals.")
def serve(port: int, host: str, state_dir: str) -> None:
    """Run the live session API."""
    import uvicorn

    from pooltest.service import create_app

    app = create_app(Path(state_dir))
    uvicorn.run(app, host=host, port=port,
                log_level=os.environ.get("GT_LOG", "warning").lower())


if __name__ == "__main__":
    main()
