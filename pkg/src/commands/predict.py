import logging

import click

from src.commands.common import build_overrides, data_options
from src.data import read_label_file
from src.errors import GroundTruthGateError
from src.experiment import load_dataset
from src.models.config import ExperimentConfig
from src.models.prediction import PREDICTION_STRATEGIES
from src.models.store import artifact_store
from src.predictor import decision_matrix, predict
from src.utils import phase_timer

# Configure logging
logger = logging.getLogger(__name__)


@click.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False), help="Model file.")
@click.option("--data", "data_path", required=True, type=click.Path(dir_okay=False), help="Test data.")
@data_options
@click.option("--strategy", type=click.Choice(PREDICTION_STRATEGIES), default="basic", show_default=True,
              help="Prediction rule.")
@click.option("--k", type=int, default=None, help="Labels per instance for top-k.")
@click.option("--truth", "truth_path", type=click.Path(dir_okay=False), default=None,
              help="Label file whose counts the unrealistic rule consumes (default: labels of --data).")
@click.option("--allow-ground-truth", is_flag=True, default=False, help="Permit the unrealistic rule.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Prediction dump.")
@click.option("--decisions", "decisions_path", type=click.Path(dir_okay=False), default=None,
              help="Also write decision values as TSV.")
def predict_command(model_path, data_path, data_format, label_path, one_based, normalize, config_path,
                    strategy, k, truth_path, allow_ground_truth, out_path, decisions_path):
    """
    Predict label sets for a test file.
    """
    if strategy == "unrealistic" and not allow_ground_truth:
        raise GroundTruthGateError("unrealistic prediction reads test labels; pass --allow-ground-truth")
    overrides = build_overrides(format=data_format, labels=label_path, one_based=one_based, normalize=normalize)
    config = ExperimentConfig.load(config_path, overrides)

    model = artifact_store.load_model(model_path)
    test = load_dataset(data_path, config)

    counts = None
    if strategy == "unrealistic":
        truth = read_label_file(truth_path, config.one_based) if truth_path else test.label_sets
        counts = [len(labels) for labels in truth]

    with phase_timer("predict"):
        decisions = decision_matrix(model, test)
        predictions = predict(
            decisions, strategy, true_label_counts=counts, k=k, allow_ground_truth=allow_ground_truth,
        )
    artifact_store.save_predictions(predictions, out_path)
    if decisions_path:
        artifact_store.save_decisions(decisions, decisions_path)
    if predictions.ground_truth_used:
        click.echo("warning: predictions used ground-truth label counts", err=True)
    click.echo(f"{strategy}: wrote {len(predictions)} predictions to {out_path}")
