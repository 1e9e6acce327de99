import logging

import click

from src.commands.common import build_overrides
from src.data import FORMATS
from src.experiment import run_experiment, write_experiment
from src.models.config import METHODS, ExperimentConfig
from src.models.store import artifact_store

# Configure logging
logger = logging.getLogger(__name__)


@click.command("experiment")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="KEY=value experiment file.")
@click.option("--features", multiple=True, type=click.Path(dir_okay=False),
              help="Feature file; repeat for several representations.")
@click.option("--labels", "label_path", type=click.Path(dir_okay=False), default=None,
              help="Shared label file.")
@click.option("--format", "data_format", type=click.Choice(FORMATS), default=None)
@click.option("--one-based", is_flag=True, default=None)
@click.option("--normalize", is_flag=True, default=None)
@click.option("--strategy", "strategies", multiple=True, type=click.Choice(METHODS),
              help="Method to run; repeat for several (default: all but unrealistic and one-label).")
@click.option("--seeds", default=None, help="Comma-separated split seeds (default 0,1,2,3,4).")
@click.option("--train-fraction", type=float, default=None)
@click.option("--k-folds", type=int, default=None)
@click.option("--allow-ground-truth", is_flag=True, default=None, help="Permit the unrealistic method.")
@click.option("--n-jobs", type=int, default=None, help="Worker threads.")
@click.option("--parallel-seeds", is_flag=True, default=None, help="Run seeds concurrently.")
@click.option("--output-dir", default=None, help="Directory for results.json and results_table.txt.")
def experiment_command(config_path, features, label_path, data_format, one_based, normalize, strategies,
                       seeds, train_fraction, k_folds, allow_ground_truth, n_jobs, parallel_seeds, output_dir):
    """
    Run every method over seeded splits shared by all feature files.
    """
    overrides = build_overrides(
        features=features, labels=label_path, format=data_format, one_based=one_based,
        normalize=normalize, strategies=strategies, seeds=seeds, train_fraction=train_fraction,
        k_folds=k_folds, allow_ground_truth=allow_ground_truth, n_jobs=n_jobs,
        parallel_seeds=parallel_seeds, output_dir=output_dir,
    )
    config = ExperimentConfig.load(config_path, overrides)
    artifact_store.open(config.output_dir)

    results = run_experiment(config)
    write_experiment(results, artifact_store)
    click.echo(results["table"], nl=False)
