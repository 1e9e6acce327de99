import logging

import click

from src.calibration import calibration_report
from src.commands.common import build_overrides, data_options
from src.data import make_folds
from src.errors import ConfigError
from src.experiment import METHOD_ROUTES, fit_strategy, load_dataset
from src.models.config import METHODS, ExperimentConfig
from src.models.store import artifact_store

# Configure logging
logger = logging.getLogger(__name__)

CV_ROUTINES = ("basic-C", "thresholding", "cost-sensitive", "cost-sensitive-simple")


@click.command("train")
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False), help="Training data.")
@data_options
@click.option("--strategy", type=click.Choice(METHODS), default=None, help="Method to train for (default basic).")
@click.option("--C", "C", type=float, default=None, help="Regularization parameter for fixed-C methods.")
@click.option("--c-grid", default=None, help="Comma-separated C grid for basic-C.")
@click.option("--fbr", default=None, help="Comma-separated fbr candidates for thresholding.")
@click.option("--k-folds", type=int, default=None, help="Cross-validation folds.")
@click.option("--inner-folds", type=int, default=None, help="Inner folds of thresholding.")
@click.option("--seed", type=int, default=None, help="Fold seed.")
@click.option("--tolerance", type=float, default=None, help="Relative gradient-norm tolerance.")
@click.option("--no-bias", is_flag=True, default=False, help="Train without an intercept.")
@click.option("--allow-ground-truth", is_flag=True, default=None, help="Permit the unrealistic method.")
@click.option("--n-jobs", type=int, default=None, help="Worker threads.")
@click.option("--out", "model_path", required=True, type=click.Path(dir_okay=False), help="Model file to write.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Calibration report (default: <out>.calibration.txt).")
def train_command(data_path, data_format, label_path, one_based, normalize, config_path, strategy, C,
                  c_grid, fbr, k_folds, inner_folds, seed, tolerance, no_bias, allow_ground_truth,
                  n_jobs, model_path, report_path):
    """
    Train a one-vs-rest model and write it with its calibration report.
    """
    overrides = build_overrides(
        format=data_format, labels=label_path, one_based=one_based, normalize=normalize,
        strategies=strategy or (None if config_path else "basic"), c=C, c_grid=c_grid, fbr=fbr,
        k_folds=k_folds, inner_folds=inner_folds, seeds=seed, tolerance=tolerance,
        bias=False if no_bias else None, allow_ground_truth=allow_ground_truth, n_jobs=n_jobs,
    )
    config = ExperimentConfig.load(config_path, overrides)
    if len(config.strategies) != 1:
        raise ConfigError(f"train runs one method at a time, got {', '.join(config.strategies)}")
    method = config.strategies[0]
    routine = METHOD_ROUTES[method][0]

    dataset = load_dataset(data_path, config)
    folds = None
    if routine in CV_ROUTINES:
        folds = make_folds(dataset.n_instances, config.k_folds, config.seeds[0])
    model = fit_strategy(routine, dataset, folds, config, config.n_jobs)

    artifact_store.save_model(model, model_path)
    report_path = report_path or f"{model_path}.calibration.txt"
    artifact_store.write_text(report_path, calibration_report(model))
    click.echo(f"{method}: wrote {model_path} and {report_path}")
