import json
import logging

import click

from src.commands.common import build_overrides, data_options
from src.data import dataset_stats, make_folds, make_split
from src.experiment import load_dataset
from src.models.config import ExperimentConfig
from src.models.store import artifact_store

# Configure logging
logger = logging.getLogger(__name__)


@click.command("split")
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False))
@data_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train-fraction", type=float, default=None)
@click.option("--k-folds", type=int, default=None)
@click.option("--output-dir", default=None)
def split_command(data_path, data_format, label_path, one_based, normalize, config_path, seed,
                  train_fraction, k_folds, output_dir):
    """
    Write the train/test split and the training folds of one seed.
    """
    overrides = build_overrides(
        format=data_format, labels=label_path, one_based=one_based, normalize=normalize,
        train_fraction=train_fraction, k_folds=k_folds, output_dir=output_dir,
    )
    config = ExperimentConfig.load(config_path, overrides)
    dataset = load_dataset(data_path, config)

    split = make_split(dataset.n_instances, seed, config.train_fraction)
    folds = make_folds(len(split.train_indices), config.k_folds, seed)
    artifact_store.open(config.output_dir)
    split_path = artifact_store.write_text(artifact_store.path(f"split_seed{seed}.txt"), split.to_text())
    folds_path = artifact_store.write_text(artifact_store.path(f"folds_seed{seed}.txt"), folds.to_text())
    click.echo(f"split {split.digest()} -> {split_path}")
    click.echo(f"folds {folds.digest()} -> {folds_path}")


@click.command("describe")
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False))
@data_options
def describe_command(data_path, data_format, label_path, one_based, normalize, config_path):
    """
    Print label statistics of a data file.
    """
    overrides = build_overrides(format=data_format, labels=label_path, one_based=one_based, normalize=normalize)
    config = ExperimentConfig.load(config_path, overrides)
    stats = dataset_stats(load_dataset(data_path, config))
    click.echo(json.dumps(stats.to_dict(), indent=2, sort_keys=True))
