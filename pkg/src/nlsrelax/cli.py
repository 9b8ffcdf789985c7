"""Command-line driver for the experiment suite."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import operators as op
from .config import ConfigError, load_config
from .runs import (
    execute_run,
    run_bench,
    run_convergence,
    run_error_growth,
    write_bench_csv,
    write_convergence_csv,
    write_growth_csv,
    write_run_outputs,
)

OUTPUT_ENV = "NLSRELAX_OUTPUT"


def _resolve_output(config_output, cli_output) -> Path:
    if cli_output:
        return Path(cli_output)
    if config_output:
        return Path(config_output)
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _load(config_path: str):
    try:
        return load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


def _set_threads(threads: int):
    if threads < 1:
        raise click.ClickException("--threads must be at least 1")
    return threads


@click.group()
def main():
    """Structure-preserving solvers for the cubic Schroedinger equation."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_dir", default=None, type=click.Path())
@click.option("--threads", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def run(config_path, output_dir, threads, seed):
    """Execute one integration and write invariants, snapshots, metadata."""
    _set_threads(threads)
    config = _load(config_path)
    out = _resolve_output(config.output, output_dir)
    try:
        result = execute_run(config)
    except ArithmeticError as exc:
        raise click.ClickException(f"integration failed: {exc}") from exc
    write_run_outputs(result, out)
    click.echo(
        f"run finished: {result.record.steps} steps, "
        f"{result.record.wall_time:.3f} s, output in {out}"
    )
    if result.final_error is not None:
        click.echo(f"final L2 error vs exact solution: {result.final_error:.6e}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_dir", default=None, type=click.Path())
@click.option("--threads", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def converge(config_path, output_dir, threads, seed):
    """Run a space or time refinement sweep and tabulate observed orders."""
    threads = _set_threads(threads)
    config = _load(config_path)
    out = _resolve_output(config.output, output_dir)
    try:
        rows = run_convergence(config, threads=threads)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    write_convergence_csv(out / "convergence.csv", rows)
    click.echo(f"{'resolution':>14} {'error':>14} {'order':>8}")
    for row in rows:
        click.echo(f"{row.resolution:14.6e} {row.error:14.6e} {row.observed_order:8.3f}")


@main.command("error-growth")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_dir", default=None, type=click.Path())
@click.option("--threads", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def error_growth(config_path, output_dir, threads, seed):
    """Measure error growth in time with and without relaxation."""
    _set_threads(threads)
    config = _load(config_path)
    out = _resolve_output(config.output, output_dir)
    try:
        report = run_error_growth(config)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    write_growth_csv(out / "error_growth.csv", report)
    click.echo(f"baseline growth slope: {report.baseline_slope:.3f}")
    click.echo(f"relaxed growth slope:  {report.relaxed_slope:.3f}")
    click.echo(f"density-error slope (baseline): {report.density_slope:.3f}")


@main.command()
@click.option("--config", "config_paths", required=True, multiple=True,
              type=click.Path(exists=True))
@click.option("--output", "output_dir", default=None, type=click.Path())
@click.option("--threads", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def bench(config_paths, output_dir, threads, seed):
    """Time each configuration (best of three) and report error vs runtime."""
    _set_threads(threads)
    configs = [(Path(p).stem, _load(p)) for p in config_paths]
    out = _resolve_output(None, output_dir)
    rows = run_bench(configs)
    out.mkdir(parents=True, exist_ok=True)
    write_bench_csv(out / "bench.csv", rows)
    for row in rows:
        err = f"{row.final_error:.3e}" if row.final_error is not None else "n/a"
        click.echo(f"{row.label}: {row.runtime_seconds:.4f} s, error {err}")


@main.command()
@click.option("--output", "output_dir", default=None, type=click.Path())
@click.option("--threads", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def conformance(output_dir, threads, seed):
    """Run the operator test battery and report worst-case residuals."""
    _set_threads(threads)
    battery = []
    for n in (64, 65):
        battery.append((f"fourier n={n}", op.make_fourier(n, -1.0, 1.0)))
    for order in (2, 4, 6, 8):
        battery.append((f"central order={order}", op.make_central_fd(order, 64, -1.0, 1.0)))
    for order in (2, 4, 6):
        battery.append((f"bounded order={order}", op.make_bounded_fd_sbp(order, 64, -1.0, 1.0)))
        battery.append((f"upwind order={order}", op.make_upwind_fd(order, 64, -1.0, 1.0)))

    failures = 0
    lines = ["operators,max_identity_residual,a2_min_quadratic_form"]
    for label, ops in battery:
        report = op.sbp_conformance(ops, seed=seed)
        residual = report.max_identity_residual()
        ok = residual <= 1e-12 and report.a2_min_quadratic_form >= -1e-12
        failures += 0 if ok else 1
        status = "ok" if ok else "FAIL"
        click.echo(f"{label:24s} residual {residual:10.3e} {status}")
        lines.append(f"{label},{residual:.17g},{report.a2_min_quadratic_form:.17g}")
    if output_dir:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "conformance.csv").write_text("\n".join(lines) + "\n")
    if failures:
        raise click.ClickException(f"{failures} operator families failed conformance")
    click.echo("all operator families conform")


if __name__ == "__main__":
    sys.exit(main())
