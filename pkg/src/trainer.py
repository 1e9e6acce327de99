import logging

import numpy as np

from src.data import make_folds
from src.errors import DimensionMismatchError, ValidationError
from src.metrics import f1_from_counts
from src.models.binary_model import BinaryProblem
from src.models.ovr_model import CGrid, OvRModel
from src.solver import DEFAULT_TOLERANCE, decision_values, train_binary
from src.utils import phase_timer, run_tasks

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_K_FOLDS = 5
FALLBACK_C = 1.0


def train_ovr_basic(train, C=1.0, tolerance=DEFAULT_TOLERANCE, bias=True, n_jobs=None):
    """
    One-vs-rest training at a fixed C with unweighted losses.

    Args:
        train (SparseDataset): Training data
        C (float): Regularization parameter
        tolerance (float): Solver tolerance
        bias (bool): Train with an intercept
        n_jobs (int, optional): Worker threads for the per-label tasks

    Returns:
        OvRModel: Model tagged ``basic``
    """
    if train.n_instances == 0:
        raise ValidationError("training set is empty")

    def fit(label):
        problem = BinaryProblem(train, label, bias=bias)
        return train_binary(problem, C=C, t=1.0, tolerance=tolerance)

    with phase_timer("train"):
        models = run_tasks(fit, range(train.n_labels), n_jobs)
    model = OvRModel(models, train.n_features, strategy_tag="basic", grid=f"C={float(C)!r}", bias=bias)
    model.diagnostics = [{"label": j, "C": float(C), "t": 1.0} for j in range(train.n_labels)]
    return model


def fold_views(train, folds):
    """
    Materialize the (fit, validation) datasets of every fold once so that all
    labels and parameters share them.

    Args:
        train (SparseDataset): Training data the plan was drawn for
        folds (FoldPlan): Fold assignment

    Returns:
        list: (fit_dataset, validation_dataset) per fold
    """
    if folds.train_size != train.n_instances:
        raise DimensionMismatchError(
            f"fold plan covers {folds.train_size} instances, training set has {train.n_instances}"
        )
    views = []
    for fold in range(folds.k):
        fit_idx, val_idx = folds.split(fold)
        views.append((train.subset(fit_idx), train.subset(val_idx)))
    return views


def confusion_row(truth, predicted):
    """(TP, FP, FN) of one binary prediction vector."""
    return np.array([
        np.sum(truth & predicted),
        np.sum(~truth & predicted),
        np.sum(truth & ~predicted),
    ], dtype=np.int64)


def pooled_counts(views, label, params, tolerance=DEFAULT_TOLERANCE, bias=True, warm_start=True):
    """
    Out-of-fold sign-rule confusion counts of one label, pooled over folds.

    Within each fold the parameters are visited in the given order, and a
    model warm-starts the next one while t stays the same.

    Args:
        views (list): Output of fold_views
        label (int): Label index
        params (list): (C, t) pairs
        tolerance (float): Solver tolerance
        bias (bool): Train with an intercept
        warm_start (bool): Reuse the previous solution as the starting point

    Returns:
        numpy.ndarray: (len(params), 3) TP/FP/FN counts
    """
    counts = np.zeros((len(params), 3), dtype=np.int64)
    for fit, val in views:
        problem = BinaryProblem(fit, label, bias=bias)
        truth = val.targets(label) > 0
        previous = None
        for p, (C, t) in enumerate(params):
            start = previous if warm_start and previous is not None and previous.t == t else None
            model = train_binary(problem, C=C, t=t, tolerance=tolerance, warm_start=start)
            counts[p] += confusion_row(truth, decision_values(model, val.features) >= 0)
            previous = model
    return counts


def cv_f1_for_C(train, label, grid, folds, tolerance=DEFAULT_TOLERANCE, bias=True, views=None):
    """
    Cross-validated F1 of one label for every C in a grid.

    Args:
        train (SparseDataset): Training data
        label (int): Label index
        grid (CGrid): C values, visited in ascending order
        folds (FoldPlan): Fold assignment over the training data
        tolerance (float): Solver tolerance
        bias (bool): Train with an intercept
        views (list, optional): Precomputed fold_views(train, folds)

    Returns:
        list: (C, cv_f1) pairs in grid order
    """
    if not 0 <= label < train.n_labels:
        raise ValidationError(f"label {label} outside vocabulary of {train.n_labels}")
    if not any(label in labels for labels in train.label_sets):
        return [(C, 0.0) for C in grid]
    views = views if views is not None else fold_views(train, folds)
    counts = pooled_counts(views, label, [(C, 1.0) for C in grid], tolerance, bias)
    scores = f1_from_counts(counts[:, 0], counts[:, 1], counts[:, 2])
    return [(C, float(f1)) for C, f1 in zip(grid, scores)]


def select_C(scores):
    """
    Pick the C with the best CV F1.

    Ties go to the smallest C. When every score is 0 the fallback C=1 is used.

    Args:
        scores (list): (C, cv_f1) pairs

    Returns:
        tuple: (chosen C, its cv_f1)
    """
    best = max(f1 for _, f1 in scores)
    if best <= 0.0:
        return FALLBACK_C, 0.0
    return min(C for C, f1 in scores if f1 == best), best


def train_ovr_basic_C(train, grid=None, folds=None, k=DEFAULT_K_FOLDS, seed=0,
                      tolerance=DEFAULT_TOLERANCE, bias=True, n_jobs=None):
    """
    One-vs-rest training with C chosen per label by cross-validated F1.

    Args:
        train (SparseDataset): Training data
        grid (CGrid, optional): C values, the default 21-value grid when omitted
        folds (FoldPlan, optional): Shared folds; drawn from (k, seed) when omitted
        k (int): Fold count used when folds is omitted
        seed (int): Fold seed used when folds is omitted
        tolerance (float): Solver tolerance
        bias (bool): Train with an intercept
        n_jobs (int, optional): Worker threads for the per-label tasks

    Returns:
        OvRModel: Model tagged ``basic-C``
    """
    grid = grid or CGrid.default()
    folds = folds or make_folds(train.n_instances, k, seed)
    views = fold_views(train, folds)

    def select(label):
        scores = cv_f1_for_C(train, label, grid, folds, tolerance, bias, views=views)
        return select_C(scores), scores

    with phase_timer("cv"):
        selections = run_tasks(select, range(train.n_labels), n_jobs)

    def fit(label):
        (C, _), _ = selections[label]
        return train_binary(BinaryProblem(train, label, bias=bias), C=C, t=1.0, tolerance=tolerance)

    with phase_timer("train"):
        models = run_tasks(fit, range(train.n_labels), n_jobs)

    model = OvRModel(
        models, train.n_features, strategy_tag="basic-C", seed=folds.seed,
        fold_digest=folds.digest(), grid=grid.describe(), bias=bias,
    )
    for label, ((C, f1), _) in enumerate(selections):
        logger.debug(f"Label {label}: chose C={C} with CV F1 {f1:.4f}")
        model.diagnostics.append({"label": label, "C": C, "t": 1.0, "cv_f1": f1})
    return model
