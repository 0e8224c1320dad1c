"""
Copyright 2025 local-metric contributors
"""
import sys
import click
import typer
from local_metric.cli_commands import model, bench, diagnose


app = typer.Typer(no_args_is_help=True)

# flat command set: train, eval, bench, gradcheck, geom
for sub_app in (model.app, bench.app, diagnose.app):
    app.registered_commands.extend(sub_app.registered_commands)

__version__ = "0.1.0"


def main():
    """
    Console entry point. Usage errors leave with code 1, the other codes come from the commands:
    2 data error, 3 numerical failure, 4 gradient check failure.
    """
    try:
        result = app(standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    sys.exit(result if isinstance(result, int) else 0)


if __name__ == "__main__":
    """
    Local metric learning with influential regions: train, evaluate, benchmark and debug.
    """
    main()
