import json
import logging

import click

from src.data import SVMLIGHT, parse_dataset, read_label_file
from src.errors import ValidationError, VerificationError
from src.metrics import evaluate
from src.models.store import artifact_store
from src.predictor import predict_basic
from src.utils import phase_timer

# Configure logging
logger = logging.getLogger(__name__)


def _read_truth(path, truth_format, one_based):
    """Truth label sets plus the vocabulary size the file declares (0 when it declares none)."""
    if truth_format == SVMLIGHT:
        dataset = parse_dataset(path, format=SVMLIGHT, one_based=one_based)
        return dataset.label_sets, dataset.n_labels
    return [tuple(labels) for labels in read_label_file(path, one_based)], 0


def vocabulary_size(truth, declared=0, predictions=None, decisions=None, n_labels=None):
    """
    Number of labels Macro-F1 averages over.

    An explicit n_labels wins; otherwise the largest of the declared size,
    the labels seen and the decision columns is used.

    Args:
        truth (list): True label sets
        declared (int): Size stated by the truth file
        predictions (PredictionSet, optional): Predicted sets
        decisions (numpy.ndarray, optional): Decision matrix
        n_labels (int, optional): Vocabulary size given by the caller

    Returns:
        int: Vocabulary size
    """
    observed = max([max(labels) + 1 for labels in truth if labels] + [declared])
    if predictions is not None:
        observed = max(observed, predictions.n_labels)
    if decisions is not None:
        observed = max(observed, decisions.shape[1])
    if n_labels is None:
        return observed
    if n_labels < observed:
        raise ValidationError(f"--n-labels {n_labels} is smaller than the {observed} labels in the inputs")
    return n_labels


@click.command("eval")
@click.option("--truth", "truth_path", required=True, type=click.Path(dir_okay=False),
              help="Ground truth: a label file, or svmlight data with --truth-format svmlight.")
@click.option("--truth-format", type=click.Choice(["label-list", SVMLIGHT]), default="label-list",
              show_default=True)
@click.option("--one-based", is_flag=True, default=False, help="Truth labels start at 1.")
@click.option("--predictions", "predictions_path", type=click.Path(dir_okay=False), default=None,
              help="Prediction dump.")
@click.option("--decisions", "decisions_path", type=click.Path(dir_okay=False), default=None,
              help="Decision TSV; the sign rule predicts when no dump is given.")
@click.option("--k", type=int, default=None, help="Cut-off for precision@k (needs --decisions).")
@click.option("--n-labels", type=int, default=None,
              help="Vocabulary size for Macro-F1 (default: the truth header or the largest label seen).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Metrics JSON (default: standard output).")
def eval_command(truth_path, truth_format, one_based, predictions_path, decisions_path, k, n_labels, out_path):
    """
    Score predictions against ground truth.
    """
    if predictions_path is None and decisions_path is None:
        raise ValidationError("eval needs --predictions or --decisions")
    truth, declared = _read_truth(truth_path, truth_format, one_based)
    decisions = artifact_store.load_decisions(decisions_path) if decisions_path else None
    if predictions_path:
        predictions = artifact_store.load_predictions(predictions_path)
    else:
        predictions = predict_basic(decisions)
    n_labels = vocabulary_size(truth, declared, predictions, decisions, n_labels)

    with phase_timer("evaluate"):
        report = evaluate(truth, predictions, decisions=decisions, k=k, n_labels=n_labels)
    document = report.to_dict()
    if out_path:
        artifact_store.write_json(out_path, document)
        click.echo(f"macro_f1={report.macro_f1:.4f} micro_f1={report.micro_f1:.4f} -> {out_path}")
    else:
        click.echo(json.dumps(document, indent=2, sort_keys=True))
    if not report.bound_holds:
        raise VerificationError(
            f"Micro-F1 {report.micro_f1} exceeds its bound {report.micro_upper_bound}",
            counterexample=document,
        )
