"""
Copyright 2025 local-metric contributors
"""
from enum import Enum
from typing import Optional
import typer
from rich.console import Console
from rich.markup import escape
from typing_extensions import Annotated
import local_metric.core.benchmark_mgr as benchmark_mgr
import local_metric.core.dataset_mgr as dataset_mgr
from local_metric.cli_commands.model import DataFormat
from local_metric.core.utils.app_config import get_benchmark_settings, load_train_config
from local_metric.core.utils.errors import LocalMetricError
from local_metric.core.utils.report_mgr import BenchmarkRun, build_benchmark_summary, render_report

"""
Benchmark protocol: seeded splits, learned model against the identity metric baseline.
"""
app = typer.Typer(no_args_is_help=True)
err_console = Console(stderr=True)


class Statistics(str, Enum):
    train_only = "train-only"
    global_stats = "global"


@app.command()
def bench(data: Annotated[str, typer.Option("--data", help="Dataset file, LIBSVM text or CSV with a header")],
          data_format: Annotated[Optional[DataFormat], typer.Option("--format", help="Dataset format, default from the file extension")] = None,
          label_col: Annotated[str, typer.Option("--label-col", help="CSV label column, by header name or position")] = "label",
          config: Annotated[Optional[str], typer.Option("--config", help="toml or yaml file with training settings")] = None,
          alpha: Annotated[Optional[float], typer.Option("--alpha", help="Frobenius regularization weight")] = None,
          margin: Annotated[Optional[float], typer.Option("--margin", help="Margin constant C in [0, 1)")] = None,
          k: Annotated[Optional[int], typer.Option("--k", help="Number of neighbors K")] = None,
          regions: Annotated[Optional[int], typer.Option("--regions", help="Number of influential regions S")] = None,
          lr: Annotated[Optional[float], typer.Option("--lr", help="Learning rate")] = None,
          epochs: Annotated[Optional[int], typer.Option("--epochs", help="Maximum number of epochs")] = None,
          seed: Annotated[Optional[int], typer.Option("--seed", help="First seed, runs use seed .. seed + repeats - 1")] = None,
          repeats: Annotated[Optional[int], typer.Option("--repeats", help="Number of seeded splits")] = None,
          split_frac: Annotated[Optional[float], typer.Option("--split-frac", help="Fraction of instances used for training")] = None,
          stats: Annotated[Optional[Statistics], typer.Option("--stats", help="Standardization statistics from the train split only or the whole dataset")] = None,
          out: Annotated[Optional[str], typer.Option("--out", help="Write the report to this file instead of stdout")] = None,
          to_yaml: Annotated[bool, typer.Option("--yaml", help="YAML report instead of JSON")] = False):
    """
    Repeat split / preprocess / train / evaluate over seeded splits and report mean and std accuracy.
    """
    err_console.print("#" * 30 + f" Benchmark on {data}")
    settings = get_benchmark_settings()
    statistics = settings["statistics"] if stats is None else ("train" if stats == Statistics.train_only else "global")
    try:
        train_config = load_train_config(config, {"alpha": alpha, "margin_c": margin, "k_neighbors": k, "num_regions": regions,
                                                  "learning_rate": lr, "max_epochs": epochs, "seed": seed})
        dataset = dataset_mgr.load_dataset(data, data_format.value if data_format else None, label_col).as_labeled()

        def show(run: BenchmarkRun):
            err_console.print(f"seed {run.seed}: learned {run.learned_accuracy:.4f}, baseline {run.baseline_accuracy:.4f}, epochs {run.epochs_run}")

        report = benchmark_mgr.run_benchmark(dataset,
                                             train_config,
                                             repeats=settings["repeats"] if repeats is None else repeats,
                                             train_fraction=settings["train_fraction"] if split_frac is None else split_frac,
                                             statistics=statistics,
                                             on_run=show)
    except LocalMetricError as e:
        err_console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(e.exit_code)
    err_console.print(build_benchmark_summary(report), markup=False)
    content = render_report(report, to_yaml)
    if out:
        with open(out, "w") as f:
            f.write(content)
        err_console.print(f"Report written to {out}")
    else:
        typer.echo(content)
