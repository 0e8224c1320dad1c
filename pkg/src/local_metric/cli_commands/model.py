"""
Copyright 2025 local-metric contributors
"""
import json
import os
from enum import Enum
from typing import Optional
import typer
from rich.console import Console
from rich.markup import escape
from typing_extensions import Annotated
import local_metric.core.dataset_mgr as dataset_mgr
import local_metric.core.trainer_mgr as trainer_mgr
import local_metric.core.classifier_mgr as classifier_mgr
from local_metric.core.utils.app_config import load_train_config
from local_metric.core.utils.errors import ConfigurationError, LocalMetricError
from local_metric.core.utils.model_store import load_model, save_model

"""
Train a model on a dataset and evaluate a saved model on new data.
"""
app = typer.Typer(no_args_is_help=True)
err_console = Console(stderr=True)


class DataFormat(str, Enum):
    libsvm = "libsvm"
    csv = "csv"


@app.command()
def train(data: Annotated[str, typer.Option("--data", help="Dataset file, LIBSVM text or CSV with a header")],
          out: Annotated[str, typer.Option("--out", help="Folder receiving model.json and train_report.json")] = ".",
          data_format: Annotated[Optional[DataFormat], typer.Option("--format", help="Dataset format, default from the file extension")] = None,
          label_col: Annotated[str, typer.Option("--label-col", help="CSV label column, by header name or position")] = "label",
          config: Annotated[Optional[str], typer.Option("--config", help="toml or yaml file with training settings")] = None,
          alpha: Annotated[Optional[float], typer.Option("--alpha", help="Frobenius regularization weight")] = None,
          margin: Annotated[Optional[float], typer.Option("--margin", help="Margin constant C in [0, 1)")] = None,
          k: Annotated[Optional[int], typer.Option("--k", help="Number of neighbors K")] = None,
          regions: Annotated[Optional[int], typer.Option("--regions", help="Number of influential regions S")] = None,
          lr: Annotated[Optional[float], typer.Option("--lr", help="Learning rate")] = None,
          epochs: Annotated[Optional[int], typer.Option("--epochs", help="Maximum number of epochs")] = None,
          seed: Annotated[Optional[int], typer.Option("--seed", help="Seed of the k-means initialization")] = None):
    """
    Train on the whole dataset (standardized then L2 normalized) and save the model.
    """
    err_console.print("#" * 30 + f" Train on {data}")
    try:
        train_config = load_train_config(config, {"alpha": alpha, "margin_c": margin, "k_neighbors": k, "num_regions": regions,
                                                  "learning_rate": lr, "max_epochs": epochs, "seed": seed})
        raw = dataset_mgr.load_dataset(data, data_format.value if data_format else None, label_col).as_labeled()
        stats = dataset_mgr.fit_preprocessing(raw)
        trainset = dataset_mgr.apply_preprocessing(raw, stats)
        report = trainer_mgr.train(trainset, train_config)
        os.makedirs(out, exist_ok=True)
        model_path = save_model(os.path.join(out, "model.json"), report.final_model, trainset, stats, train_config)
        report_path = os.path.join(out, "train_report.json")
        with open(report_path, "w") as f:
            f.write(report.model_dump_json(indent=2, exclude={"final_model"}))
    except LocalMetricError as e:
        err_console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(e.exit_code)
    err_console.print(f"Objective {report.initial_objective:.6f} -> {report.final_objective:.6f} after {report.epochs_run} epochs")
    typer.echo(json.dumps({"model": model_path,
                           "report": report_path,
                           "dim": report.final_model.dim,
                           "regions": report.final_model.num_regions,
                           "epochs_run": report.epochs_run,
                           "initial_objective": report.initial_objective,
                           "final_objective": report.final_objective}))


@app.command(name="eval")
def evaluate(model: Annotated[str, typer.Option("--model", help="model.json written by train")],
             data: Annotated[str, typer.Option("--data", help="Dataset file to score")],
             data_format: Annotated[Optional[DataFormat], typer.Option("--format", help="Dataset format, default from the file extension")] = None,
             label_col: Annotated[str, typer.Option("--label-col", help="CSV label column, by header name or position")] = "label",
             k: Annotated[Optional[int], typer.Option("--k", help="Override the K stored with the model")] = None,
             lipschitz_pairs: Annotated[int, typer.Option("--lipschitz-pairs", help="Random pairs for the empirical Lipschitz ratio, 0 to skip")] = 0,
             seed: Annotated[int, typer.Option("--seed", help="Seed of the Lipschitz pairs")] = 0):
    """
    Score a dataset with a saved model, after the preprocessing stored with it.
    """
    err_console.print("#" * 30 + f" Evaluate {model} on {data}")
    try:
        stored = load_model(model)
        if k is not None and k < 1:
            raise ConfigurationError(f"--k must be at least 1, got {k}")
        k_neighbors = stored.k_neighbors if k is None else k
        raw = dataset_mgr.load_dataset(data, data_format.value if data_format else None, label_col).as_labeled()
        testset = dataset_mgr.apply_preprocessing(raw, stored.preprocessing)
        accuracy = classifier_mgr.evaluate(testset, stored.trainset, stored.model, k_neighbors)
        diagnostics = classifier_mgr.lipschitz_diagnostics(stored.model, k_neighbors)
        if lipschitz_pairs > 0:
            ratio = classifier_mgr.empirical_lipschitz_ratio(stored.trainset, stored.model, k_neighbors, lipschitz_pairs, seed)
            diagnostics = diagnostics.model_copy(update={"empirical_ratio": ratio})
    except LocalMetricError as e:
        err_console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(e.exit_code)
    typer.echo(json.dumps({"accuracy": accuracy, "n": testset.size, "k": k_neighbors, **diagnostics.model_dump()}))
