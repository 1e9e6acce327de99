"""
Threshold and cost calibration of one-vs-rest models.

Two methods live here. Thresholding trains at a fixed C and shifts every
label's decision values by a delta found on validation folds. The fbr floor
is chosen by an inner cross-validation. Cost-sensitive training instead
picks (C, t) per label by cross-validated F1, weighting positive losses by
C (2 - t) and negative losses by C t.
"""
import logging

import numpy as np

from src.data import make_folds
from src.errors import ValidationError
from src.metrics import f1_from_counts
from src.models.binary_model import BinaryProblem
from src.models.ovr_model import CGrid, OvRModel
from src.solver import DEFAULT_TOLERANCE, decision_values, train_binary
from src.trainer import DEFAULT_K_FOLDS, confusion_row, fold_views, pooled_counts
from src.utils import phase_timer, run_tasks

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_FBR_CANDIDATES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_INNER_FOLDS = 3
SHARED_FOLDS = "shared-folds"
REFOLD_PER_PAIR = "refold-per-pair"
FOLD_POLICIES = (SHARED_FOLDS, REFOLD_PER_PAIR)
SIMPLE_C_FACTORS = (0.01, 0.1, 1.0, 10.0, 100.0)


class ThresholdResult:
    """
    Threshold shift of one label and the fold deltas it averages.
    """

    def __init__(self, label_index, per_fold_deltas, fbr_used, per_fold_f1=None, cv_f1=None):
        """
        Initialize a new ThresholdResult.

        Args:
            label_index (int): Label index
            per_fold_deltas (list): Delta contributed by each usable fold
            fbr_used (float): fbr floor applied to the folds
            per_fold_f1 (list, optional): Best sweep F1 of each usable fold
            cv_f1 (float, optional): Outer-CV F1 that selected fbr_used
        """
        self.label_index = int(label_index)
        self.per_fold_deltas = [float(d) for d in per_fold_deltas]
        self.fbr_used = float(fbr_used)
        self.per_fold_f1 = [float(f) for f in (per_fold_f1 or [])]
        self.cv_f1 = cv_f1

    @property
    def delta(self):
        if not self.per_fold_deltas:
            return 0.0
        return float(np.mean(self.per_fold_deltas))

    def to_dict(self):
        return {
            "label": self.label_index,
            "delta": self.delta,
            "fbr": self.fbr_used,
            "cv_f1": self.cv_f1,
            "fold_deltas": self.per_fold_deltas,
            "fold_f1": self.per_fold_f1,
        }


class CostGrid:
    """
    (C, t) pairs searched by cost-sensitive training, with the fold policy.
    """

    def __init__(self, pairs, fold_policy=SHARED_FOLDS, kind="custom"):
        """
        Initialize a new CostGrid.

        Args:
            pairs (iterable): (C, t) pairs
            fold_policy (str): One of FOLD_POLICIES
            kind (str): ``dense``, ``simple`` or ``custom``
        """
        self.pairs = [(float(C), float(t)) for C, t in pairs]
        if not self.pairs:
            raise ValidationError("cost grid is empty")
        for C, t in self.pairs:
            if not C > 0:
                raise ValidationError(f"C must be positive, got {C}")
            if not 0.0 < t <= 1.0:
                raise ValidationError(f"t must lie in (0, 1], got {t}")
        if fold_policy not in FOLD_POLICIES:
            raise ValidationError(f"unknown fold policy {fold_policy!r}")
        self.fold_policy = fold_policy
        self.kind = kind

    def __len__(self):
        return len(self.pairs)

    @property
    def strategy_tag(self):
        return "cost-sensitive-simple" if self.kind == "simple" else "cost-sensitive"

    def paths(self):
        """
        Pair indices grouped by t, each group in ascending C.

        Returns:
            list: Lists of indices into ``pairs``
        """
        groups = {}
        for index, (C, t) in enumerate(self.pairs):
            groups.setdefault(t, []).append(index)
        return [sorted(indices, key=lambda i: self.pairs[i][0]) for _, indices in sorted(groups.items())]

    def describe(self):
        return f"{self.kind}:{self.fold_policy}:" + ",".join(f"{C!r}/{t!r}" for C, t in self.pairs)


def build_cost_grid(kind):
    """
    Build one of the two predefined cost grids.

    ``dense`` crosses t = 0.1, 0.2, ..., 1 with the default C grid and draws
    new folds for every pair. ``simple`` uses t = 1/7, ..., 1 and
    C = {0.01, 0.1, 1, 10, 100} / t on shared folds.

    Args:
        kind (str): ``dense`` or ``simple``

    Returns:
        CostGrid: The grid
    """
    if kind == "dense":
        pairs = [(C, i / 10) for i in range(1, 11) for C in CGrid.default()]
        return CostGrid(pairs, fold_policy=REFOLD_PER_PAIR, kind="dense")
    if kind == "simple":
        pairs = [(factor / (i / 7), i / 7) for i in range(1, 8) for factor in SIMPLE_C_FACTORS]
        return CostGrid(pairs, fold_policy=SHARED_FOLDS, kind="simple")
    raise ValidationError(f"unknown cost grid kind {kind!r}, expected dense or simple")


def sweep_threshold(dec_values):
    """
    Best F1 cut of one label's validation decision values.

    Candidate thresholds are the midpoints between adjacent distinct values,
    one point below the minimum and one above the maximum. A value is
    predicted positive when value + delta >= 0. Among equally good cuts the
    one predicting the fewest positives wins, so a list without positives
    gets a threshold above its maximum.

    Args:
        dec_values (list): (decision value, is_positive) pairs

    Returns:
        tuple: (delta, best_f1)
    """
    if len(dec_values) == 0:
        raise ValidationError("cannot sweep an empty list")
    values = np.array([v for v, _ in dec_values], dtype=np.float64)
    positive = np.array([bool(p) for _, p in dec_values])
    if not np.all(np.isfinite(values)):
        raise ValidationError("decision values must be finite")

    distinct = np.unique(values)[::-1]
    position = np.searchsorted(-distinct, -values)
    pos_at = np.bincount(position[positive], minlength=len(distinct))
    neg_at = np.bincount(position[~positive], minlength=len(distinct))

    # Cut m predicts the m largest distinct values.
    tp = np.concatenate([[0], np.cumsum(pos_at)])
    fp = np.concatenate([[0], np.cumsum(neg_at)])
    fn = int(positive.sum()) - tp
    scores = f1_from_counts(tp, fp, fn)
    m = int(np.argmax(scores))

    if m == 0:
        threshold = distinct[0] + 1.0
    elif m == len(distinct):
        threshold = distinct[-1] - 1.0
    else:
        threshold = (distinct[m - 1] + distinct[m]) / 2.0
    # The cut must sit strictly above the largest value it rejects.
    if m < len(distinct) and threshold <= distinct[m]:
        threshold = np.nextafter(distinct[m], np.inf)
    return float(-threshold), float(scores[m])


def _fold_sweep(model, val, label):
    """Sweep one fold; None when the fold model never predicts the label."""
    if model.always_negative:
        return None
    dv = decision_values(model, val.features)
    truth = val.targets(label) > 0
    delta, best_f1 = sweep_threshold(list(zip(dv, truth)))
    return delta, best_f1, float(dv.max()), dv, truth


def _floored_delta(sweep, fbr):
    delta, best_f1, largest = sweep[0], sweep[1], sweep[2]
    if best_f1 < fbr:
        # Put the threshold just above the largest validation value.
        return -float(np.nextafter(largest, np.inf))
    return delta


def _averaged_delta(sweeps, fbr):
    usable = [s for s in sweeps if s is not None]
    if not usable:
        return 0.0
    return float(np.mean([_floored_delta(s, fbr) for s in usable]))


def inner_seed(outer_seed, fold):
    """Seed of the inner folds drawn inside one outer fold."""
    return int(outer_seed) * 1000 + fold + 1


def _threshold_label(label, C, fbr_candidates, outer, inner, tolerance, bias):
    # Outer sweeps give the final deltas; inner sweeps pick fbr.
    outer_sweeps = []
    counts = np.zeros((len(fbr_candidates), 3), dtype=np.int64)
    for (fit, val), inner_views in zip(outer, inner):
        model = train_binary(BinaryProblem(fit, label, bias=bias), C=C, tolerance=tolerance)
        outer_sweeps.append(_fold_sweep(model, val, label))

        inner_sweeps = [
            _fold_sweep(
                train_binary(BinaryProblem(inner_fit, label, bias=bias), C=C, tolerance=tolerance),
                inner_val, label,
            )
            for inner_fit, inner_val in inner_views
        ]
        truth = val.targets(label) > 0
        dv = decision_values(model, val.features)
        for f, fbr in enumerate(fbr_candidates):
            predicted = dv + _averaged_delta(inner_sweeps, fbr) >= 0
            counts[f] += confusion_row(truth, predicted)

    scores = f1_from_counts(counts[:, 0], counts[:, 1], counts[:, 2])
    best = float(np.max(scores))
    f = min(i for i, s in enumerate(scores) if s == best)
    fbr = fbr_candidates[f]
    usable = [s for s in outer_sweeps if s is not None]
    return ThresholdResult(
        label,
        [_floored_delta(s, fbr) for s in usable],
        fbr,
        per_fold_f1=[s[1] for s in usable],
        cv_f1=best,
    )


def calibrate_thresholding(train, C=1.0, fbr_candidates=DEFAULT_FBR_CANDIDATES, outer_folds=None,
                           inner_folds_k=DEFAULT_INNER_FOLDS, k=DEFAULT_K_FOLDS, seed=0,
                           tolerance=DEFAULT_TOLERANCE, bias=True, n_jobs=None):
    """
    Thresholding: train at fixed C, then shift each label by an averaged delta.

    For every outer fold a model is trained on the fit part and its
    validation values are swept. Folds whose best F1 falls below fbr instead
    put the threshold just above their largest validation value. fbr itself
    is chosen per label by the pooled outer-fold F1 of deltas derived on
    inner folds, ties going to the smallest fbr. Folds whose model has no
    positives to learn from do not contribute a delta.

    Args:
        train (SparseDataset): Training data
        C (float): Regularization parameter
        fbr_candidates (list): fbr floors to choose from, each in [0, 1]
        outer_folds (FoldPlan, optional): Outer folds; drawn from (k, seed) when omitted
        inner_folds_k (int): Inner fold count
        k (int): Outer fold count used when outer_folds is omitted
        seed (int): Outer fold seed used when outer_folds is omitted
        tolerance (float): Solver tolerance
        bias (bool): Train with an intercept
        n_jobs (int, optional): Worker threads for the per-label tasks

    Returns:
        OvRModel: Model tagged ``thresholding``
    """
    fbr_candidates = sorted(float(f) for f in fbr_candidates)
    if not fbr_candidates:
        raise ValidationError("fbr candidate list is empty")
    if fbr_candidates[0] < 0.0 or fbr_candidates[-1] > 1.0:
        raise ValidationError("fbr candidates must lie in [0, 1]")
    outer_folds = outer_folds or make_folds(train.n_instances, k, seed)

    outer = fold_views(train, outer_folds)
    inner = []
    for fold, (fit, _) in enumerate(outer):
        inner_plan = make_folds(fit.n_instances, inner_folds_k, inner_seed(outer_folds.seed, fold))
        inner.append(fold_views(fit, inner_plan))

    def calibrate(label):
        return _threshold_label(label, C, fbr_candidates, outer, inner, tolerance, bias)

    with phase_timer("calibrate"):
        results = run_tasks(calibrate, range(train.n_labels), n_jobs)

    def fit(label):
        return train_binary(BinaryProblem(train, label, bias=bias), C=C, tolerance=tolerance)

    with phase_timer("train"):
        base = run_tasks(fit, range(train.n_labels), n_jobs)

    models = [m.with_delta(0.0 if m.always_negative else r.delta) for m, r in zip(base, results)]
    model = OvRModel(
        models, train.n_features, strategy_tag="thresholding", seed=outer_folds.seed,
        fold_digest=outer_folds.digest(),
        grid=f"C={float(C)!r};fbr=" + ",".join(repr(f) for f in fbr_candidates),
        bias=bias,
    )
    for result in results:
        logger.debug(f"Label {result.label_index}: fbr={result.fbr_used} delta={result.delta:.4f}")
        model.diagnostics.append(dict(result.to_dict(), C=float(C), t=1.0))
    return model


def select_cost_pair(grid, scores):
    """
    Pick the (C, t) pair with the best CV F1.

    Ties prefer the larger t, then the smaller C. When every score is 0 the
    unweighted pair (1, 1) is used.

    Args:
        grid (CostGrid): Searched pairs
        scores (list): CV F1 per pair, aligned with grid.pairs

    Returns:
        tuple: ((C, t), cv_f1)
    """
    best = max(scores)
    if best <= 0.0:
        return (1.0, 1.0), 0.0
    tied = [pair for pair, score in zip(grid.pairs, scores) if score == best]
    return min(tied, key=lambda pair: (-pair[1], pair[0])), best


def _shared_fold_scores(train, grid, folds, tolerance, bias, n_jobs):
    views = fold_views(train, folds)
    order = [i for path in grid.paths() for i in path]
    params = [grid.pairs[i] for i in order]

    def score(label):
        scores = np.zeros(len(grid))
        if not any(label in labels for labels in train.label_sets):
            return scores
        counts = pooled_counts(views, label, params, tolerance, bias, warm_start=True)
        scores[order] = f1_from_counts(counts[:, 0], counts[:, 1], counts[:, 2])
        return scores

    return run_tasks(score, range(train.n_labels), n_jobs)


def _refolded_scores(train, grid, folds, tolerance, bias, n_jobs):
    # Pair p draws its own folds from seed folds.seed + p + 1; no warm start
    # across pairs since the folds differ.
    scores = np.zeros((train.n_labels, len(grid)))
    has_positive = [any(j in labels for labels in train.label_sets) for j in range(train.n_labels)]
    for p, pair in enumerate(grid.pairs):
        plan = make_folds(train.n_instances, folds.k, folds.seed + p + 1)
        views = fold_views(train, plan)

        def score(label):
            if not has_positive[label]:
                return 0.0
            counts = pooled_counts(views, label, [pair], tolerance, bias, warm_start=False)
            return float(f1_from_counts(*counts[0]))

        scores[:, p] = run_tasks(score, range(train.n_labels), n_jobs)
    return list(scores)


def calibrate_cost_sensitive(train, grid, folds=None, k=DEFAULT_K_FOLDS, seed=0,
                             tolerance=DEFAULT_TOLERANCE, bias=True, n_jobs=None):
    """
    Cost-sensitive training with (C, t) chosen per label by CV F1.

    Args:
        train (SparseDataset): Training data
        grid (CostGrid): Pairs to search and the fold policy
        folds (FoldPlan, optional): Shared folds (or the seed schedule base for
            refold-per-pair); drawn from (k, seed) when omitted
        k (int): Fold count used when folds is omitted
        seed (int): Fold seed used when folds is omitted
        tolerance (float): Solver tolerance
        bias (bool): Train with an intercept
        n_jobs (int, optional): Worker threads for the per-label tasks

    Returns:
        OvRModel: Model tagged ``cost-sensitive`` or ``cost-sensitive-simple``
    """
    folds = folds or make_folds(train.n_instances, k, seed)
    logger.info(f"Searching {len(grid)} (C, t) pairs with {grid.fold_policy}")

    with phase_timer("cv"):
        if grid.fold_policy == SHARED_FOLDS:
            scores = _shared_fold_scores(train, grid, folds, tolerance, bias, n_jobs)
        else:
            scores = _refolded_scores(train, grid, folds, tolerance, bias, n_jobs)
    selections = [select_cost_pair(grid, [float(s) for s in label_scores]) for label_scores in scores]

    def fit(label):
        (C, t), _ = selections[label]
        return train_binary(BinaryProblem(train, label, bias=bias), C=C, t=t, tolerance=tolerance)

    with phase_timer("train"):
        models = run_tasks(fit, range(train.n_labels), n_jobs)

    model = OvRModel(
        models, train.n_features, strategy_tag=grid.strategy_tag, seed=folds.seed,
        fold_digest=folds.digest(), grid=grid.describe(), bias=bias,
    )
    for label, ((C, t), f1) in enumerate(selections):
        logger.debug(f"Label {label}: chose C={C} t={t} with CV F1 {f1:.4f}")
        model.diagnostics.append({"label": label, "C": C, "t": t, "cv_f1": f1})
    return model


def calibration_report(model):
    """
    Line-oriented audit report of a model's per-label selections.

    Args:
        model (OvRModel): Trained model

    Returns:
        str: Header plus one ``label j key value ...`` line per label
    """
    lines = [
        f"# calibration strategy={model.strategy_tag} seed={model.seed} "
        f"folds={model.fold_digest or '-'} labels={model.n_labels}"
    ]
    for j, m in enumerate(model.models):
        details = model.diagnostics[j] if j < len(model.diagnostics) else {}
        fields = {"C": m.C, "t": m.t, "delta": m.delta, "always_negative": int(m.always_negative)}
        for key in ("fbr", "cv_f1", "fold_deltas", "fold_f1"):
            if details.get(key) is not None:
                fields[key] = details[key]
        rendered = []
        for key, value in fields.items():
            if isinstance(value, list):
                value = ",".join(repr(v) for v in value) or "-"
            rendered.append(f"{key} {value!r}" if isinstance(value, float) else f"{key} {value}")
        lines.append(f"label {j} " + " ".join(rendered))
    return "\n".join(lines) + "\n"
