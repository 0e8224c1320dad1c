"""
Copyright 2025 local-metric contributors
"""
import json
from typing import List
import numpy as np
import typer
from rich.console import Console
from rich.markup import escape
from typing_extensions import Annotated
import local_metric.core.geometry_mgr as geometry_mgr
import local_metric.core.gradcheck_mgr as gradcheck_mgr
from local_metric.core.models.metric_model import Ball, Segment
from local_metric.core.utils.errors import GradientCheckError, LocalMetricError
from local_metric.core.utils.report_mgr import build_gradcheck_summary

"""
Debugging tools: finite difference check of the gradients and the segment / ball geometry.
"""
app = typer.Typer(no_args_is_help=True)
err_console = Console(stderr=True)


def _parse_vector(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",")]
    except ValueError:
        raise typer.BadParameter(f"'{value}' is not a comma separated list of numbers")


def _parse_dims(value: str) -> List[int]:
    try:
        dims = [int(v) for v in value.split(",")]
    except ValueError:
        raise typer.BadParameter(f"'{value}' is not a comma separated list of integers")
    if any(d < 1 for d in dims):
        raise typer.BadParameter("dimensions must be positive")
    return dims


@app.command()
def gradcheck(dims: Annotated[str, typer.Option("--dims", help="Comma separated dimensions to check")] = "2,8,30",
              configs: Annotated[int, typer.Option("--configs", min=1, help="Random kink-free configurations per group and dimension")] = 50,
              seed: Annotated[int, typer.Option("--seed", help="Seed of the random configurations")] = 0,
              to_json: Annotated[bool, typer.Option("--json", help="Print the report as JSON on stdout")] = False):
    """
    Compare the analytic gradients (gamma, composite distance, objective) with centered finite differences.
    """
    err_console.print("#" * 30 + " Gradient check")
    report = gradcheck_mgr.run_gradient_check(dims=_parse_dims(dims), configurations=configs, seed=seed)
    err_console.print(build_gradcheck_summary(report), markup=False)
    if to_json:
        typer.echo(report.model_dump_json(indent=2))
    if not report.passed:
        failed = [f"{r.group}/d={r.dim}" for r in report.results if not r.passed]
        err_console.print(f"[red]Gradient check failed for {', '.join(failed)}[/red]")
        raise typer.Exit(GradientCheckError.exit_code)


@app.command()
def geom(start: Annotated[str, typer.Option("--start", help="Segment start x_i, e.g. -2,0")],
         end: Annotated[str, typer.Option("--end", help="Segment end x_j, e.g. 2,0")],
         center: Annotated[str, typer.Option("--center", help="Ball center o, e.g. 0,0")],
         radius: Annotated[float, typer.Option("--radius", help="Ball radius r > 0")]):
    """
    Intersection of one segment with one ball: coefficients, gamma and the case name, as one JSON line.
    """
    try:
        segment = Segment(start=np.asarray(_parse_vector(start)), end=np.asarray(_parse_vector(end)))
        ball = Ball(center=np.asarray(_parse_vector(center)), radius=radius)
    except ValueError as e:
        raise typer.BadParameter(str(e))
    try:
        result = geometry_mgr.intersection(segment, ball)
    except LocalMetricError as e:
        err_console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(e.exit_code)
    typer.echo(json.dumps({**result.model_dump(), "case": geometry_mgr.table_case(result)}, ensure_ascii=False))
