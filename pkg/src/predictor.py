import logging

import numpy as np

from src.errors import DimensionMismatchError, GroundTruthGateError, ValidationError
from src.models.prediction import PredictionSet

# Configure logging
logger = logging.getLogger(__name__)


def decision_matrix(model, test):
    """
    Decision values of every (instance, label) pair.

    Test data with fewer features than the model is zero-padded, since a
    parsed test file only knows the largest index it saw.

    Args:
        model (OvRModel): Trained model
        test (SparseDataset): Test data

    Returns:
        numpy.ndarray: (n_instances, n_labels) matrix, -inf for always-negative labels
    """
    X = test.features
    if X.shape[1] > model.n_features:
        raise DimensionMismatchError(
            f"test data has {X.shape[1]} features, model was trained on {model.n_features}"
        )
    if X.shape[1] < model.n_features:
        X = X.copy()
        X.resize((X.shape[0], model.n_features))
    scores = np.asarray(X @ model.weight_matrix(), dtype=np.float64).reshape(X.shape[0], model.n_labels)
    return scores + model.offsets()


def _as_matrix(decisions):
    decisions = np.asarray(decisions, dtype=np.float64)
    if decisions.ndim != 2:
        raise ValidationError("decisions must be an (instances, labels) matrix")
    return decisions


def _rows(mask):
    return [np.flatnonzero(row).tolist() for row in mask]


def top_ranked(decisions, counts):
    """
    Per instance, the counts[i] labels with the largest decision values.

    Ties go to the smaller label index.

    Args:
        decisions (array-like): Decision matrix
        counts (array-like): Labels to keep per instance

    Returns:
        list: Sorted label lists
    """
    decisions = _as_matrix(decisions)
    counts = np.asarray(counts, dtype=np.int64)
    if len(counts) != decisions.shape[0]:
        raise ValidationError(f"{len(counts)} label counts for {decisions.shape[0]} instances")
    if (counts < 0).any():
        raise ValidationError("label counts must be nonnegative")
    if (counts > decisions.shape[1]).any():
        raise ValidationError(f"a label count exceeds the {decisions.shape[1]} labels")
    order = np.argsort(-decisions, axis=1, kind="stable")
    return [sorted(order[i, :count].tolist()) for i, count in enumerate(counts)]


def predict_basic(decisions, strategy="basic"):
    """
    Sign rule: label j is predicted iff its decision value is >= 0.

    Args:
        decisions (array-like): Decision matrix
        strategy (str): Tag for the result (``basic`` or ``as-calibrated``)

    Returns:
        PredictionSet: Predictions, possibly with empty sets
    """
    decisions = _as_matrix(decisions)
    return PredictionSet(_rows(decisions >= 0), decisions.shape[1], strategy=strategy, decisions=decisions)


def predict_no_empty(decisions, strategy="no-empty"):
    """
    Sign rule, except empty rows get their highest-scoring label.

    Args:
        decisions (array-like): Decision matrix
        strategy (str): ``no-empty`` or ``cost-sensitive-no-empty``

    Returns:
        PredictionSet: Predictions with no empty set
    """
    decisions = _as_matrix(decisions)
    if decisions.shape[1] < 1:
        raise ValidationError("no-empty prediction needs at least one label")
    predicted = _rows(decisions >= 0)
    best = np.argmax(decisions, axis=1)
    rescued = 0
    for i, labels in enumerate(predicted):
        if not labels:
            predicted[i] = [int(best[i])]
            rescued += 1
    logger.debug(f"Filled {rescued} empty predictions with their top label")
    return PredictionSet(predicted, decisions.shape[1], strategy=strategy, decisions=decisions)


def predict_unrealistic(decisions, true_label_counts):
    """
    Predict exactly as many labels as each test instance truly has.

    This reads the test ground truth and over-estimates performance; it is
    kept only to audit results reported that way.

    Args:
        decisions (array-like): Decision matrix
        true_label_counts (array-like): K_i per test instance

    Returns:
        PredictionSet: Predictions flagged with ground_truth_used
    """
    decisions = _as_matrix(decisions)
    predicted = top_ranked(decisions, true_label_counts)
    logger.warning(
        f"unrealistic prediction consumed the true label counts of {len(predicted)} test instances"
    )
    return PredictionSet(
        predicted, decisions.shape[1], strategy="unrealistic", decisions=decisions, ground_truth_used=True,
    )


def predict_top_k(decisions, k):
    """The k highest-scoring labels of every instance."""
    decisions = _as_matrix(decisions)
    if k < 0 or k > decisions.shape[1]:
        raise ValidationError(f"k={k} outside [0, {decisions.shape[1]}]")
    predicted = top_ranked(decisions, np.full(decisions.shape[0], k))
    return PredictionSet(predicted, decisions.shape[1], strategy="top-k", decisions=decisions)


def predict_one_label(decisions):
    """
    Multi-class simulation: each instance gets only its argmax label.

    Args:
        decisions (array-like): Decision matrix

    Returns:
        PredictionSet: Singleton predictions
    """
    decisions = _as_matrix(decisions)
    if decisions.shape[1] < 1:
        raise ValidationError("one-label prediction needs at least one label")
    best = np.argmax(decisions, axis=1)
    return PredictionSet([[int(j)] for j in best], decisions.shape[1], strategy="one-label", decisions=decisions)


def predict(decisions, strategy, true_label_counts=None, k=None, allow_ground_truth=False):
    """
    Apply a prediction strategy by name.

    Args:
        decisions (array-like): Decision matrix
        strategy (str): One of PREDICTION_STRATEGIES
        true_label_counts (array-like, optional): Needed by ``unrealistic``
        k (int, optional): Needed by ``top-k``
        allow_ground_truth (bool): Must be True for ``unrealistic``

    Returns:
        PredictionSet: Predictions
    """
    if strategy in ("basic", "as-calibrated"):
        return predict_basic(decisions, strategy=strategy)
    if strategy in ("no-empty", "cost-sensitive-no-empty"):
        return predict_no_empty(decisions, strategy=strategy)
    if strategy == "one-label":
        return predict_one_label(decisions)
    if strategy == "top-k":
        if k is None:
            raise ValidationError("top-k prediction needs k")
        return predict_top_k(decisions, k)
    if strategy == "unrealistic":
        if not allow_ground_truth:
            raise GroundTruthGateError(
                "unrealistic prediction reads test labels; pass --allow-ground-truth to run it"
            )
        if true_label_counts is None:
            raise ValidationError("unrealistic prediction needs the true label counts")
        return predict_unrealistic(decisions, true_label_counts)
    raise ValidationError(f"unknown prediction strategy {strategy!r}")
