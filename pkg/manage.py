#!/usr/bin/env python
"""memctrl command-line utility for running archived experiments."""
import sys


def main():
    """Run the memctrl CLI."""
    try:
        from memctrl.management import cli
    except ImportError as exc:
        raise ImportError(
            "Couldn't import memctrl. Are its dependencies installed "
            "(pip install -r requirements.txt) and is the project root "
            "on your PYTHONPATH?"
        ) from exc
    cli(prog_name='memctrl')


if __name__ == '__main__':
    main()
