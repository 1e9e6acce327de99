import logging

import numpy as np
from sklearn.preprocessing import MultiLabelBinarizer

from src.errors import ValidationError
from src.models.prediction import PredictionSet
from src.models.report import ConfusionCounts, MetricsReport

# Configure logging
logger = logging.getLogger(__name__)


def f1_from_counts(tp, fp, fn):
    """
    F1 = 2TP / (2TP + FP + FN), with 0/0 defined as 0.

    Works elementwise on arrays of counts.
    """
    tp = np.asarray(tp, dtype=np.int64)
    denominator = 2 * tp + np.asarray(fp, dtype=np.int64) + np.asarray(fn, dtype=np.int64)
    safe = np.where(denominator > 0, denominator, 1)
    score = np.where(denominator > 0, 2 * tp / safe, 0.0)
    return float(score) if score.ndim == 0 else score


def _label_sets(pred):
    if isinstance(pred, PredictionSet):
        return pred.predicted
    return [tuple(sorted(labels)) for labels in pred]


def _check_aligned(truth, pred):
    if len(truth) != len(pred):
        logger.error(f"Truth has {len(truth)} instances but predictions have {len(pred)}")
        raise ValidationError(f"{len(truth)} truth sets but {len(pred)} predictions")


def _indicators(truth, pred, n_labels=None):
    observed = max(
        [max(labels) + 1 for labels in list(truth) + list(pred) if labels] + [0]
    )
    if n_labels is None:
        n_labels = observed
    elif observed > n_labels:
        raise ValidationError(f"label index {observed - 1} outside vocabulary of {n_labels}")
    if not truth:
        empty = np.zeros((0, n_labels), dtype=bool)
        return empty, empty
    binarizer = MultiLabelBinarizer(classes=list(range(n_labels)))
    T = binarizer.fit_transform(truth).astype(bool)
    P = binarizer.transform(pred).astype(bool)
    return T, P


def confusion(truth, pred, n_labels=None):
    """
    Per-label confusion counts.

    Args:
        truth (list): Ground-truth label sets
        pred (PredictionSet or list): Predicted label sets
        n_labels (int, optional): Vocabulary size; a PredictionSet supplies its own

    Returns:
        ConfusionCounts: TP/FP/FN per label
    """
    pred_sets = _label_sets(pred)
    _check_aligned(truth, pred_sets)
    if n_labels is None and isinstance(pred, PredictionSet):
        n_labels = pred.n_labels
    T, P = _indicators(truth, pred_sets, n_labels)
    return ConfusionCounts(
        tp=(T & P).sum(axis=0),
        fp=(~T & P).sum(axis=0),
        fn=(T & ~P).sum(axis=0),
    )


def per_label_f1(counts):
    """F1 of every label in the vocabulary."""
    return f1_from_counts(counts.tp, counts.fp, counts.fn)


def macro_f1(counts):
    """
    Mean of per-label F1 over the whole vocabulary, labels absent from the
    test data included.

    Args:
        counts (ConfusionCounts): Confusion counts

    Returns:
        float: Macro-F1
    """
    if counts.n_labels < 1:
        raise ValidationError("Macro-F1 needs at least one label")
    return float(np.mean(per_label_f1(counts)))


def micro_f1(counts):
    """
    F1 of the confusion counts pooled over all labels.

    Args:
        counts (ConfusionCounts): Confusion counts

    Returns:
        float: Micro-F1
    """
    return f1_from_counts(counts.tp_sum, counts.fp_sum, counts.fn_sum)


def instance_f1(truth, pred):
    """
    Mean over instances of the F1 between predicted and true label sets.

    Args:
        truth (list): Ground-truth label sets
        pred (PredictionSet or list): Predicted label sets

    Returns:
        float: Instance-F1, 0 for an empty test set
    """
    pred_sets = _label_sets(pred)
    _check_aligned(truth, pred_sets)
    if not truth:
        return 0.0
    scores = []
    for t, p in zip(truth, pred_sets):
        overlap = len(set(t) & set(p))
        scores.append(f1_from_counts(overlap, len(p) - overlap, len(t) - overlap))
    return float(np.mean(scores))


def example_precision(truth, pred):
    """Mean over instances of |truth & pred| / |pred|, empty predictions scoring 0."""
    pred_sets = _label_sets(pred)
    _check_aligned(truth, pred_sets)
    if not truth:
        return 0.0
    scores = [
        len(set(t) & set(p)) / len(p) if p else 0.0
        for t, p in zip(truth, pred_sets)
    ]
    return float(np.mean(scores))


def micro_upper_bound(K, K_hat):
    """
    Best Micro-F1 reachable when instance i gets K_hat[i] predicted labels
    and has K[i] true ones: 2 sum min(K_hat, K) / sum (K + K_hat).

    Args:
        K (array-like): True label counts
        K_hat (array-like): Predicted label counts

    Returns:
        float: The bound, 0 when both count lists are all zero
    """
    K = np.asarray(K, dtype=np.int64)
    K_hat = np.asarray(K_hat, dtype=np.int64)
    if K.shape != K_hat.shape:
        raise ValidationError("count lists are not aligned")
    if (K < 0).any() or (K_hat < 0).any():
        raise ValidationError("label counts must be nonnegative")
    # Same form as f1_from_counts: numerator 2 sum min, denominator sum K + sum K_hat.
    overlap = int(np.minimum(K, K_hat).sum())
    return f1_from_counts(overlap, int(K_hat.sum()) - overlap, int(K.sum()) - overlap)


def multiclass_accuracy(truth, pred):
    """
    Fraction of instances whose single predicted label is the true one.

    Args:
        truth (list): Singleton ground-truth label sets
        pred (PredictionSet or list): Singleton predictions

    Returns:
        float: Accuracy
    """
    pred_sets = _label_sets(pred)
    _check_aligned(truth, pred_sets)
    if any(len(t) != 1 for t in truth) or any(len(p) != 1 for p in pred_sets):
        raise ValidationError("accuracy needs exactly one true and one predicted label per instance")
    if not truth:
        return 0.0
    correct = sum(1 for t, p in zip(truth, pred_sets) if tuple(t) == tuple(p))
    return correct / len(truth)


def precision_at_k(truth, decisions, k):
    """
    Mean over instances of the share of true labels among the k highest
    decision values (ties go to the smaller label index).

    Args:
        truth (list): Ground-truth label sets
        decisions (array-like): (n_instances, n_labels) decision values
        k (int): Cut-off, 1 <= k <= n_labels

    Returns:
        float: precision@k
    """
    decisions = np.asarray(decisions, dtype=np.float64)
    if decisions.ndim != 2:
        raise ValidationError("decisions must be a matrix")
    _check_aligned(truth, decisions)
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if k > decisions.shape[1]:
        raise ValidationError(f"k={k} exceeds the {decisions.shape[1]} labels")
    if not truth:
        return 0.0
    top = np.argsort(-decisions, axis=1, kind="stable")[:, :k]
    hits = [len(set(row.tolist()) & set(t)) for row, t in zip(top, truth)]
    return float(np.mean(hits)) / k


def evaluate(truth, pred, decisions=None, k=None, n_labels=None):
    """
    Every applicable metric of one prediction run.

    Accuracy is reported only when all true and predicted sets are
    singletons; precision@k only when decision values and k are given.

    Args:
        truth (list): Ground-truth label sets
        pred (PredictionSet or list): Predictions
        decisions (array-like, optional): Decision matrix for precision@k
        k (int, optional): Cut-off for precision@k
        n_labels (int, optional): Vocabulary size

    Returns:
        MetricsReport: Bundled metrics
    """
    pred_sets = _label_sets(pred)
    counts = confusion(truth, pred, n_labels=n_labels)
    K = [len(t) for t in truth]
    K_hat = [len(p) for p in pred_sets]

    accuracy = None
    if truth and all(n == 1 for n in K) and all(n == 1 for n in K_hat):
        accuracy = multiclass_accuracy(truth, pred_sets)

    p_at_k = None
    if decisions is not None and k is not None:
        p_at_k = precision_at_k(truth, decisions, k)

    report = MetricsReport(
        macro_f1=macro_f1(counts),
        micro_f1=micro_f1(counts),
        instance_f1=instance_f1(truth, pred_sets),
        example_precision=example_precision(truth, pred_sets),
        micro_upper_bound=micro_upper_bound(K, K_hat),
        n_test=len(truth),
        counts=counts,
        accuracy_multiclass=accuracy,
        precision_at_k=p_at_k,
        k=k if p_at_k is not None else None,
        strategy=getattr(pred, "strategy", None),
        ground_truth_used=getattr(pred, "ground_truth_used", False),
        per_label_f1=per_label_f1(counts).tolist(),
    )
    if not report.bound_holds:
        logger.error(
            f"Micro-F1 {report.micro_f1} exceeds its bound {report.micro_upper_bound}"
        )
    return report
