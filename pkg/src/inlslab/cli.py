"""Command-line interface: config-driven experiments.

Subcommands mirror the harness actions; every command takes --config and
the global output/cache/seed flags.  Exit codes: 0 success, 1 check failure,
2 usage or config error, 3 I/O error.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import load_config
from .errors import CacheMiss, ConfigParseError, InlsLabError, IoError
from .harness import run_experiment

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="Experiment config file (INI)")(fn)
    fn = click.option("--cache-dir", default=None, type=click.Path(),
                      help="Ground-state cache directory (overrides config/env)")(fn)
    fn = click.option("--out", "out_dir", default=None, type=click.Path(),
                      help="Output directory (overrides config)")(fn)
    fn = click.option("--seed", default=None, type=int,
                      help="Seed for randomized property sweeps")(fn)
    fn = click.option("--quiet", is_flag=True, default=False,
                      help="Suppress progress output")(fn)
    return fn


def _run(action: str, config_path, cache_dir, out_dir, seed, quiet) -> int:
    try:
        cfg = load_config(config_path, overrides={
            "cache_dir": cache_dir,
            "out_dir": out_dir,
            "seed": seed,
            "quiet": quiet or None,
        })
    except ConfigParseError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_USAGE
    except InlsLabError as exc:
        click.echo(f"invalid parameters: {exc}", err=True)
        return EXIT_USAGE
    try:
        summary = run_experiment(cfg, action)
    except (CacheMiss, ConfigParseError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except IoError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_IO
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return EXIT_IO
    if not cfg.quiet:
        if action == "verify":
            rep = summary["results"]
            for chk in rep["checks"]:
                mark = "PASS" if chk["passed"] else "FAIL"
                click.echo(f"{mark} {chk['name']}: residual={chk['residual']:.3e} "
                           f"tol={chk['tolerance']:.3e}")
            click.echo(f"{rep['n_checks']} checks, {rep['n_failed']} failed")
        elif action == "sweep":
            click.echo(f"sweep finished: {summary['jobs']} jobs -> {cfg.out_dir}")
        else:
            click.echo(f"{action} finished -> {cfg.out_dir}")
    if action == "verify" and not summary["results"]["all_passed"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


@click.group()
def main():
    """Numerical laboratory for the focusing inhomogeneous NLS with an
    inverse-square potential: ground states, thresholds, classification,
    and radial time evolution."""


@main.command("ground-state")
@_common_options
def ground_state_cmd(config_path, cache_dir, out_dir, seed, quiet):
    """Solve the ground state and cache it with all derived constants."""
    sys.exit(_run("ground-state", config_path, cache_dir, out_dir, seed, quiet))


@main.command("classify")
@_common_options
def classify_cmd(config_path, cache_dir, out_dir, seed, quiet):
    """Classify the configured initial data against the thresholds."""
    sys.exit(_run("classify", config_path, cache_dir, out_dir, seed, quiet))


@main.command("evolve")
@_common_options
def evolve_cmd(config_path, cache_dir, out_dir, seed, quiet):
    """Time-evolve the configured initial data and record invariants."""
    sys.exit(_run("evolve", config_path, cache_dir, out_dir, seed, quiet))


@main.command("verify")
@_common_options
def verify_cmd(config_path, cache_dir, out_dir, seed, quiet):
    """Run the identity/property verification suite."""
    sys.exit(_run("verify", config_path, cache_dir, out_dir, seed, quiet))


@main.command("sweep")
@_common_options
def sweep_cmd(config_path, cache_dir, out_dir, seed, quiet):
    """Run the configured action over a grid of parameter values."""
    sys.exit(_run("sweep", config_path, cache_dir, out_dir, seed, quiet))


if __name__ == "__main__":
    main()
