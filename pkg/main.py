#!/usr/bin/env python3
"""
ConflictLab - Main Entry Point

Runs seeded xApp conflict experiments from scenario files, learns priority
orderings and compares the artifact bundles of two runs.

Exit codes: 0 success, 2 invalid configuration, 3 I/O failure, 4 missing artifact.
"""

import asyncio
import logging
import logging.config
import sqlite3
import sys
from pathlib import Path
from typing import List, Optional

import click
import orjson
import yaml
from pydantic import ValidationError

from config import get_settings
from conflictlab.exceptions import ConfigInvalidError, MissingArtifactError, TooManyXAppsError
from conflictlab.scenario import format_validation_errors, load_scenario

logger = logging.getLogger(__name__)

EXIT_CONFIG_INVALID = 2
EXIT_IO_ERROR = 3
EXIT_MISSING_ARTIFACT = 4


def _configure_logging(ctx: click.Context, quiet: bool = False) -> None:
    debug = ctx.obj.get('debug', False) if ctx.obj else False
    level = 'DEBUG' if debug else ('WARNING' if quiet else None)
    logging.config.dictConfig(get_settings().get_log_config(level))


def _fail(code: int, message: str, details: Optional[List[str]] = None) -> None:
    logger.error(message)
    for line in details or []:
        logger.error(f"  {line}")
    sys.exit(code)


def _load(config_path: Path, seed: Optional[int]):
    try:
        return load_scenario(config_path, seed)
    except ConfigInvalidError as e:
        _fail(EXIT_CONFIG_INVALID, f"Invalid scenario {config_path}: {e}", e.errors)
    except ValidationError as e:
        _fail(EXIT_CONFIG_INVALID, f"Invalid scenario {config_path}", format_validation_errors(e))
    except yaml.YAMLError as e:
        _fail(EXIT_CONFIG_INVALID, f"Invalid scenario {config_path}: {e}")
    except OSError as e:
        _fail(EXIT_IO_ERROR, f"Cannot read {config_path}: {e}")


def _output_dir(out: Optional[Path], scenario_name: str, seed: int) -> Path:
    if out is not None:
        return out
    return Path(get_settings().output.default_directory) / f"{scenario_name}-seed{seed}"


@click.group()
@click.option('--debug', is_flag=True, help='Enable debug logging')
@click.pass_context
def cli(ctx: click.Context, debug: bool):
    """ConflictLab - xApp conflict experiments on a simulated Near-RT RIC."""
    ctx.ensure_object(dict)
    ctx.obj['debug'] = debug


@cli.command()
@click.option('--config', '-c', 'config_path', required=True, type=click.Path(path_type=Path),
              help='Scenario YAML file')
@click.option('--out', '-o', type=click.Path(path_type=Path), default=None, help='Output directory')
@click.option('--seed', type=int, default=None, help='Override the scenario seed')
@click.option('--quiet', '-q', is_flag=True, help='Only log warnings and errors')
@click.option('--no-baseline', is_flag=True, help='Skip the seed-matched no-xApp baseline (reward is omitted)')
@click.pass_context
def run(ctx: click.Context, config_path: Path, out: Optional[Path], seed: Optional[int], quiet: bool,
        no_baseline: bool):
    """Run a scenario and write its artifact bundle."""
    _configure_logging(ctx, quiet)
    scenario = _load(config_path, seed)

    from conflictlab.artifacts import write_run_bundle
    from conflictlab.engine import run_experiment

    xnib_path = get_settings().output.xnib_path
    try:
        result = run_experiment(scenario, with_baseline=not no_baseline, xnib_path=xnib_path)
    except (ConfigInvalidError, ValidationError) as e:
        _fail(EXIT_CONFIG_INVALID, f"Scenario cannot run: {e}")
    except (OSError, sqlite3.Error) as e:
        _fail(EXIT_IO_ERROR, f"Cannot open the xNIB at {xnib_path}: {e}")

    out_dir = _output_dir(out, scenario.name, scenario.seed)
    summary = result.summary()
    try:
        paths = asyncio.run(write_run_bundle(result, out_dir))
    except OSError as e:
        _fail(EXIT_IO_ERROR, f"Cannot write artifacts to {out_dir}: {e}")
    finally:
        result.xnib.close()

    logger.info(f"Artifacts: {', '.join(sorted(p.name for p in paths.values()))}")
    if not quiet:
        click.echo(f"run '{scenario.name}' seed {scenario.seed} -> {out_dir}")
        for kpi, total in summary['totals'].items():
            click.echo(f"  {kpi:<18}{total}")
        click.echo(f"  conflicts         {summary['conflict_counts']}")
        if summary['reward'] is not None:
            click.echo(f"  reward            {summary['reward']:.4f}")


@cli.command()
@click.option('--config', '-c', 'config_path', required=True, type=click.Path(path_type=Path),
              help='Scenario YAML file (mitigation.priorities: learn)')
@click.option('--out', '-o', type=click.Path(path_type=Path), default=None, help='Output directory')
@click.option('--seed', type=int, default=None, help='Override the scenario seed')
@click.option('--quiet', '-q', is_flag=True, help='Only log warnings and errors; no progress bar')
@click.pass_context
def learn(ctx: click.Context, config_path: Path, out: Optional[Path], seed: Optional[int], quiet: bool):
    """Learn a priority ordering and write policy.json and rewards.csv."""
    _configure_logging(ctx, quiet)
    scenario = _load(config_path, seed)
    if scenario.mitigation.priorities != 'learn':
        _fail(EXIT_CONFIG_INVALID, f"Invalid scenario {config_path}",
              ["mitigation.priorities: must be 'learn' for the learn command"])

    from conflictlab.artifacts import write_learning_bundle
    from conflictlab.engine import run_learning

    show_progress = not quiet and get_settings().performance.show_progress_bars
    try:
        _, learned, trace = run_learning(scenario, progress=show_progress)
    except TooManyXAppsError as e:
        _fail(EXIT_CONFIG_INVALID, f"Cannot learn priorities: {e}")

    out_dir = _output_dir(out, scenario.name, scenario.seed)
    try:
        asyncio.run(write_learning_bundle(learned, trace, out_dir))
    except OSError as e:
        _fail(EXIT_IO_ERROR, f"Cannot write artifacts to {out_dir}: {e}")

    if not quiet:
        click.echo(f"learned ordering {' > '.join(learned.ordering)} after {learned.episodes} episodes -> {out_dir}")


@cli.command()
@click.argument('run_a', type=click.Path(path_type=Path))
@click.argument('run_b', type=click.Path(path_type=Path))
@click.option('--json', 'as_json', is_flag=True, help='Print machine-readable JSON')
@click.pass_context
def compare(ctx: click.Context, run_a: Path, run_b: Path, as_json: bool):
    """Compare the KPI totals of two run directories (ratios are A / B)."""
    _configure_logging(ctx, quiet=as_json)

    from conflictlab.artifacts import compare_runs, format_comparison

    try:
        comparison = asyncio.run(compare_runs(run_a, run_b))
    except MissingArtifactError as e:
        _fail(EXIT_MISSING_ARTIFACT, f"Missing artifact: {e}")
    except OSError as e:
        _fail(EXIT_IO_ERROR, f"Cannot read run summaries: {e}")
    except orjson.JSONDecodeError as e:
        _fail(EXIT_MISSING_ARTIFACT, f"Unreadable summary.json: {e}")

    if as_json:
        click.echo(orjson.dumps(comparison, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2).decode())
        return
    click.echo(f"A: {run_a} ({comparison['a']['scenario']}, seed {comparison['a']['seed']})")
    click.echo(f"B: {run_b} ({comparison['b']['scenario']}, seed {comparison['b']['seed']})")
    for line in format_comparison(comparison):
        click.echo(line)


if __name__ == '__main__':
    cli()
