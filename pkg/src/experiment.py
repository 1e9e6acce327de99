import logging
import os

import pandas as pd

from src.calibration import build_cost_grid, calibrate_cost_sensitive, calibrate_thresholding
from src.data import make_folds, make_split, parse_dataset, read_label_file
from src.errors import ConfigError
from src.metrics import evaluate
from src.models.dataset import SparseDataset
from src.models.ovr_model import CGrid
from src.predictor import decision_matrix, predict
from src.trainer import train_ovr_basic, train_ovr_basic_C
from src.utils import phase_timer, run_tasks

# Configure logging
logger = logging.getLogger(__name__)

# method -> (training routine, prediction rule)
METHOD_ROUTES = {
    "unrealistic": ("basic", "unrealistic"),
    "basic": ("basic", "basic"),
    "basic-C": ("basic-C", "basic"),
    "no-empty": ("basic", "no-empty"),
    "thresholding": ("thresholding", "as-calibrated"),
    "cost-sensitive": ("cost-sensitive", "basic"),
    "cost-sensitive-no-empty": ("cost-sensitive", "cost-sensitive-no-empty"),
    "cost-sensitive-simple": ("cost-sensitive-simple", "basic"),
    "one-label": ("basic", "one-label"),
}


def fit_strategy(routine, train, folds, config, n_jobs=None):
    """
    Run one training routine with the configured parameters.

    Args:
        routine (str): basic, basic-C, thresholding, cost-sensitive or cost-sensitive-simple
        train (SparseDataset): Training data
        folds (FoldPlan): Folds of the training data
        config (ExperimentConfig): Parameters
        n_jobs (int, optional): Worker threads

    Returns:
        OvRModel: Trained model
    """
    common = {"tolerance": config.tolerance, "bias": config.bias, "n_jobs": n_jobs}
    if routine == "basic":
        return train_ovr_basic(train, C=config.C, **common)
    if routine == "basic-C":
        grid = CGrid(config.c_grid) if config.c_grid else None
        return train_ovr_basic_C(train, grid=grid, folds=folds, **common)
    if routine == "thresholding":
        return calibrate_thresholding(
            train, C=config.C, fbr_candidates=config.fbr, outer_folds=folds,
            inner_folds_k=config.inner_folds, **common,
        )
    if routine == "cost-sensitive":
        return calibrate_cost_sensitive(train, build_cost_grid("dense"), folds=folds, **common)
    if routine == "cost-sensitive-simple":
        return calibrate_cost_sensitive(train, build_cost_grid("simple"), folds=folds, **common)
    raise ConfigError(f"unknown training routine {routine!r}")


def load_dataset(path, config):
    """
    Read one feature file, taking labels from config.labels when set.

    Args:
        path (str): Feature file
        config (ExperimentConfig): Format and label settings

    Returns:
        SparseDataset: Dataset
    """
    with phase_timer("parse"):
        dataset = parse_dataset(
            path, format=config.format, label_path=config.labels if config.format == "dense-pair" else None,
            one_based=config.one_based, normalize=config.normalize,
        )
        if config.labels and config.format != "dense-pair":
            label_sets = read_label_file(config.labels, config.one_based)
            if len(label_sets) != dataset.n_instances:
                raise ConfigError(f"{config.labels} has {len(label_sets)} lines for {dataset.n_instances} instances")
            dataset = SparseDataset(dataset.features, label_sets, source=path)
    return dataset


def load_feature_sets(config):
    """
    Read every feature file of an experiment; all must describe the same instances.

    Returns:
        list: (feature file, SparseDataset) pairs in config order
    """
    if not config.features:
        raise ConfigError("no feature file given")
    datasets = [(path, load_dataset(path, config)) for path in config.features]
    reference = datasets[0][1]
    for path, dataset in datasets[1:]:
        if dataset.n_instances != reference.n_instances or dataset.label_sets != reference.label_sets:
            raise ConfigError(f"{path} does not share the instances and labels of {datasets[0][0]}")
    n_labels = max(dataset.n_labels for _, dataset in datasets)
    return [
        (path, dataset if dataset.n_labels == n_labels else SparseDataset(
            dataset.features, dataset.label_sets, n_labels=n_labels, source=path,
        ))
        for path, dataset in datasets
    ]


def run_split(seed, split, datasets, config, n_jobs=None):
    """
    Train, predict and evaluate every (feature file, method) pair on one split.

    Models are trained once per training routine and reused by the
    methods that share it.

    Returns:
        list: One run record per (feature file, method)
    """
    runs = []
    for path, dataset in datasets:
        train = dataset.subset(split.train_indices)
        test = dataset.subset(split.test_indices)
        folds = make_folds(train.n_instances, config.k_folds, seed)
        models = {}
        for method in config.strategies:
            routine, rule = METHOD_ROUTES[method]
            if routine not in models:
                logger.info(f"Seed {seed}, {path}: training {routine}")
                models[routine] = fit_strategy(routine, train, folds, config, n_jobs)
            with phase_timer("predict"):
                decisions = decision_matrix(models[routine], test)
                predictions = predict(
                    decisions, rule, true_label_counts=test.label_counts(),
                    allow_ground_truth=config.allow_ground_truth,
                )
            with phase_timer("evaluate"):
                report = evaluate(test.label_sets, predictions, n_labels=dataset.n_labels)
            runs.append({
                "features": path,
                "strategy": method,
                "seed": seed,
                "split_digest": split.digest(),
                "fold_digest": folds.digest(),
                "metrics": report.to_dict(),
            })
    return runs


def run_experiment(config):
    """
    Repeat training and evaluation over seeded splits shared by all feature files.

    Args:
        config (ExperimentConfig): Experiment settings

    Returns:
        dict: ``config``, ``splits`` (plans per seed), ``runs`` and ``table``
    """
    datasets = load_feature_sets(config)
    n_instances = datasets[0][1].n_instances
    with phase_timer("split"):
        splits = {seed: make_split(n_instances, seed, config.train_fraction) for seed in config.seeds}

    if config.parallel_seeds:
        per_seed = run_tasks(
            lambda seed: run_split(seed, splits[seed], datasets, config, n_jobs=1),
            config.seeds, config.n_jobs,
        )
    else:
        per_seed = [run_split(seed, splits[seed], datasets, config, config.n_jobs) for seed in config.seeds]
    runs = [run for seed_runs in per_seed for run in seed_runs]

    return {
        "config": config.to_dict(),
        "splits": {str(seed): plan.digest() for seed, plan in splits.items()},
        "runs": runs,
        "plans": splits,
        "table": results_table(runs, config.strategies, config.features),
    }


def results_table(runs, strategies, features):
    """
    Mean +- standard deviation over seeds, one block per F1 measure.

    Rows are methods and columns are feature files, as in a benchmark
    results table.

    Args:
        runs (list): Run records of run_experiment
        strategies (list): Row order
        features (list): Column order

    Returns:
        str: Rendered table
    """
    frame = pd.DataFrame([
        {
            "strategy": run["strategy"],
            "features": os.path.basename(run["features"]),
            "Macro-F1": run["metrics"]["macro_f1"],
            "Micro-F1": run["metrics"]["micro_f1"],
        }
        for run in runs
    ])
    columns = [os.path.basename(path) for path in features]
    blocks = []
    for measure in ("Macro-F1", "Micro-F1"):
        summary = frame.groupby(["strategy", "features"])[measure].agg(
            mean="mean", std=lambda s: s.std(ddof=0),
        )
        cells = summary.apply(lambda row: f"{row['mean']:.3f} ± {row['std']:.3f}", axis=1)
        table = cells.unstack("features").reindex(index=list(strategies), columns=columns)
        table.index.name = None
        table.columns.name = None
        blocks.append(f"{measure}\n{table.to_string()}")
    return "\n\n".join(blocks) + "\n"


def write_experiment(results, store):
    """
    Write results.json, results_table.txt and the split plans.

    Args:
        results (dict): Output of run_experiment
        store (ArtifactStore): Opened store

    Returns:
        list: Written paths
    """
    document = {key: results[key] for key in ("config", "splits", "runs")}
    paths = [
        store.write_json(store.path("results.json"), document),
        store.write_text(store.path("results_table.txt"), results["table"]),
    ]
    for seed, plan in results["plans"].items():
        paths.append(store.write_text(store.path(f"split_seed{seed}.txt"), plan.to_text()))
    return paths
