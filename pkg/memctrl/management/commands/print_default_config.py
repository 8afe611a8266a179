# File: memctrl/management/commands/print_default_config.py

import click

from ...config import ExperimentKind
from ...experiments import render_template


@click.command('print-default-config', help='Print a commented config template for one experiment')
@click.argument('experiment', type=click.Choice([kind.value for kind in ExperimentKind]))
@click.option('--json', 'as_json', is_flag=True, help='Emit plain JSON instead of commented YAML')
def print_default_config(experiment: str, as_json: bool):
    click.echo(render_template(ExperimentKind(experiment), as_json=as_json), nl=False)
