# File: memctrl/management/__init__.py
"""
memctrl command-line entry point.

    memctrl run <config.json>
    memctrl print-default-config <experiment>
"""

import click

from .. import settings
from .commands.print_default_config import print_default_config
from .commands.run import run


@click.group(help="Boundary steering of the wave equation with memory")
@click.version_option(settings.VERSION, prog_name='memctrl')
def cli():
    pass


cli.add_command(run)
cli.add_command(print_default_config)


def main(argv=None):
    return cli.main(args=argv, prog_name='memctrl')
