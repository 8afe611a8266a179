# File: memctrl/management/commands/run.py

from pathlib import Path
from typing import Optional
import logging

import click

from ... import settings
from ...config import load_config
from ...exceptions import ConfigError, ExperimentInconclusive, MemctrlError
from ...experiments import run_experiment
from ...utils.exporters import ExperimentResult, ResultWriter

logger = logging.getLogger('memctrl.cli')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT = 2


def _print_summary(result: ExperimentResult, output_dir: Path) -> None:
    color = 'green' if result.passed else 'yellow'
    click.secho('\n' + '=' * 60, fg=color)
    click.secho(f"memctrl {result.experiment}: {'PASSED' if result.passed else 'FAILED'}", fg=color, bold=True)
    click.secho('=' * 60, fg=color)
    if result.message:
        click.echo(f"  {result.message}")
    for key, value in result.verdicts.items():
        shown = f"{value:.4g}" if isinstance(value, float) else value
        click.echo(f"  - {key}: {shown}")
    click.echo(f"  Artifacts: {output_dir}")


@click.command('run', help='Run the experiment described by a JSON (or YAML) config')
@click.argument('config_path', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--output-dir', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Override output_dir from the config')
@click.option('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR (default MEMCTRL_LOG_LEVEL)')
@click.pass_context
def run(ctx: click.Context, config_path: Path, output_dir: Optional[Path], log_level: Optional[str]):
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        click.secho(exc.render(), fg='red', err=True)
        ctx.exit(EXIT_ERROR)

    output_dir = output_dir or cfg.output_dir
    output_dir.mkdir(parents=True, exist_ok=True)
    settings.configure_logging(log_level, output_dir / 'memctrl.log')
    logger.info(f"Config {config_path} -> {output_dir} (threads={settings.THREADS})")

    try:
        result = run_experiment(cfg, base_dir=config_path.parent)
    except ExperimentInconclusive as exc:
        click.secho(f"Inconclusive: {exc}", fg='yellow', err=True)
        ctx.exit(EXIT_VERDICT)
    except MemctrlError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        click.secho(f"{type(exc).__name__}: {exc}", fg='red', err=True)
        ctx.exit(EXIT_ERROR)

    writer = ResultWriter(output_dir)
    for name, frame in result.frames.items():
        writer.write_csv(name, frame)
    writer.write_results(result, cfg.model_dump(mode='json'))

    _print_summary(result, output_dir)
    ctx.exit(EXIT_OK if result.passed else EXIT_VERDICT)
