"""
Empirical checks of the Micro-F1 results for multi-label prediction.

- The Micro-F1 of any prediction is at most 2 sum min(K_hat_i, K_i) /
  sum (K_i + K_hat_i), where K_i and K_hat_i are true and predicted
  label counts.
- When every instance ranks its true labels above its false ones,
  predicting the K_hat_i top-ranked labels reaches that bound, and no other
  prediction of the same sizes does better.
- With one true and one predicted label per instance, accuracy equals
  Micro-F1.

All generators are seeded; trial t of a run with seed s draws from its own
PCG64 stream, so reports do not depend on scheduling.
"""
import itertools
import logging

import numpy as np

from src.calibration import sweep_threshold
from src.errors import ValidationError
from src.metrics import confusion, micro_f1, micro_upper_bound, multiclass_accuracy
from src.models.dataset import trial_rng
from src.predictor import predict_basic, predict_no_empty, top_ranked
from src.utils import phase_timer, run_tasks

# Configure logging
logger = logging.getLogger(__name__)

BRUTE_FORCE_LABEL_BOUND = 6
MAX_INSTANCES = 20
EQUALITY_TOLERANCE = 1e-12
NOISE_LEVELS = (0.0, 0.1, 0.2, 0.4)
DEMO_SHIFT = -0.7
EPS = np.finfo(np.float64).eps


class SyntheticRanking:
    """
    Random truth sets with a decision matrix over them.
    """

    def __init__(self, truth, decisions, perfect):
        self.truth = [tuple(sorted(labels)) for labels in truth]
        self.decisions = np.asarray(decisions, dtype=np.float64)
        self.perfect = bool(perfect)

    @property
    def n_instances(self):
        return self.decisions.shape[0]

    @property
    def n_labels(self):
        return self.decisions.shape[1]

    def true_counts(self):
        return np.array([len(labels) for labels in self.truth], dtype=np.int64)

    def is_perfectly_ranked(self):
        """Every row's smallest true-label value beats its largest false-label value."""
        for labels, row in zip(self.truth, self.decisions):
            mask = np.zeros(self.n_labels, dtype=bool)
            mask[list(labels)] = True
            if mask.all() or not mask.any():
                continue
            if row[mask].min() <= row[~mask].max():
                return False
        return True


def _draw_truth(rng, n_instances, n_labels, label_density):
    mask = rng.random((n_instances, n_labels)) < label_density
    return mask, [np.flatnonzero(row).tolist() for row in mask]


def gen_perfect_ranking(seed, n_instances, n_labels, label_density, rng=None):
    """
    Random truth with perfectly ranked decision values.

    True labels score in (0.5, 1) and false labels in (0, 0.5).

    Args:
        seed (int): PCG64 seed, ignored when rng is given
        n_instances (int): Number of instances
        n_labels (int): Number of labels
        label_density (float): Probability that an instance carries a label, in (0, 1)
        rng (numpy.random.Generator, optional): Generator to draw from

    Returns:
        SyntheticRanking: Perfect ranking
    """
    if not 0.0 < label_density < 1.0:
        raise ValidationError(f"label_density must lie in (0, 1), got {label_density}")
    rng = rng or trial_rng(seed, 0)
    mask, truth = _draw_truth(rng, n_instances, n_labels, label_density)
    # u in [eps, 1 - eps]: both bands stay open
    u = np.clip(rng.random((n_instances, n_labels)), EPS, 1.0 - EPS)
    decisions = np.where(mask, 1.0 - 0.5 * u, 0.5 * u)
    return SyntheticRanking(truth, decisions, perfect=True)


class TheoremReport:
    """
    Outcome of one checker: trial count, violations and the first counterexample.
    """

    def __init__(self, name, statement, trials):
        self.name = name
        self.statement = statement
        self.trials = trials
        self.violations = 0
        self.counterexample = None
        self.max_slack = None
        self.min_slack = None
        self.equality_count = 0
        self.brute_force_instances = 0
        self.label_bound = BRUTE_FORCE_LABEL_BOUND

    @property
    def passed(self):
        return self.violations == 0

    def record(self, outcome):
        """Fold one trial's outcome dict into the report."""
        slack = outcome["slack"]
        self.max_slack = slack if self.max_slack is None else max(self.max_slack, slack)
        self.min_slack = slack if self.min_slack is None else min(self.min_slack, slack)
        self.equality_count += int(outcome["equal"])
        self.brute_force_instances += outcome.get("brute_force", 0)
        if outcome["violation"]:
            self.violations += 1
            if self.counterexample is None:
                self.counterexample = outcome["example"]

    def to_dict(self):
        return {
            "name": self.name,
            "statement": self.statement,
            "trials": self.trials,
            "violations": self.violations,
            "passed": self.passed,
            "counterexample": self.counterexample,
            "max_slack": self.max_slack,
            "min_slack": self.min_slack,
            "equality_count": self.equality_count,
            "brute_force_instances": self.brute_force_instances,
            "brute_force_label_bound": self.label_bound,
        }


def _random_sets(rng, n_instances, n_labels):
    return [
        sorted(rng.choice(n_labels, size=rng.integers(0, n_labels + 1), replace=False).tolist())
        for _ in range(n_instances)
    ]


def _example(truth, pred, **extra):
    return dict({"truth": [list(t) for t in truth], "pred": [list(p) for p in pred]}, **extra)


def _theorem1_trial(seed, trial):
    rng = trial_rng(seed, trial)
    n_instances = int(rng.integers(1, MAX_INSTANCES + 1))
    n_labels = int(rng.integers(1, BRUTE_FORCE_LABEL_BOUND + 1))
    truth = _random_sets(rng, n_instances, n_labels)
    pred = _random_sets(rng, n_instances, n_labels)
    micro = micro_f1(confusion(truth, pred, n_labels=n_labels))
    bound = micro_upper_bound([len(t) for t in truth], [len(p) for p in pred])
    slack = bound - micro
    return {
        "slack": slack,
        "equal": abs(slack) <= EQUALITY_TOLERANCE,
        "violation": slack < -EQUALITY_TOLERANCE,
        "example": _example(truth, pred, micro_f1=micro, bound=bound, trial=trial),
    }


def _best_overlap(truth, n_labels, size):
    truth = set(truth)
    return max(len(truth & set(subset)) for subset in itertools.combinations(range(n_labels), size))


def _theorem2_trial(seed, trial):
    rng = trial_rng(seed, trial)
    n_instances = int(rng.integers(1, MAX_INSTANCES + 1))
    n_labels = int(rng.integers(1, BRUTE_FORCE_LABEL_BOUND + 1))
    density = float(rng.uniform(0.1, 0.9))
    ranking = gen_perfect_ranking(seed, n_instances, n_labels, density, rng=rng)
    K_hat = rng.integers(0, n_labels + 1, size=n_instances)
    pred = top_ranked(ranking.decisions, K_hat)
    micro = micro_f1(confusion(ranking.truth, pred, n_labels=n_labels))
    bound = micro_upper_bound(ranking.true_counts(), K_hat)
    deviation = bound - micro

    # Micro-F1 denominators are fixed once the sizes are, so per-instance
    # overlap optimality is global optimality.
    suboptimal = [
        i for i, (t, p) in enumerate(zip(ranking.truth, pred))
        if len(set(t) & set(p)) < _best_overlap(t, n_labels, int(K_hat[i]))
    ]
    return {
        "slack": deviation,
        "equal": abs(deviation) <= EQUALITY_TOLERANCE,
        "violation": abs(deviation) > EQUALITY_TOLERANCE or bool(suboptimal) or not ranking.is_perfectly_ranked(),
        "brute_force": n_instances,
        "example": _example(
            ranking.truth, pred, micro_f1=micro, bound=bound, k_hat=K_hat.tolist(),
            suboptimal_instances=suboptimal, trial=trial,
        ),
    }


def _theorem3_trial(seed, trial):
    rng = trial_rng(seed, trial)
    n_instances = int(rng.integers(1, MAX_INSTANCES + 1))
    n_labels = int(rng.integers(2, BRUTE_FORCE_LABEL_BOUND + 1))
    truth = [[int(j)] for j in rng.integers(0, n_labels, size=n_instances)]
    pred = [[int(j)] for j in rng.integers(0, n_labels, size=n_instances)]
    accuracy = multiclass_accuracy(truth, pred)
    micro = micro_f1(confusion(truth, pred, n_labels=n_labels))
    return {
        "slack": accuracy - micro,
        "equal": accuracy == micro,
        "violation": accuracy != micro,
        "example": _example(truth, pred, accuracy=accuracy, micro_f1=micro, trial=trial),
    }


def _run(name, statement, trial_fn, seed, trials, n_jobs):
    if trials < 1:
        raise ValidationError(f"trials must be at least 1, got {trials}")
    report = TheoremReport(name, statement, trials)
    for outcome in run_tasks(lambda trial: trial_fn(seed, trial), range(trials), n_jobs):
        report.record(outcome)
    if report.passed:
        logger.info(f"{name}: {trials} trials, no violation")
    else:
        logger.error(f"{name}: {report.violations} of {trials} trials violate the statement")
    return report


def check_theorem1(seed, trials, n_jobs=None):
    """
    Micro-F1 never exceeds its label-count bound on random predictions.

    Args:
        seed (int): Run seed
        trials (int): Number of random (truth, prediction) pairs
        n_jobs (int, optional): Worker threads

    Returns:
        TheoremReport: slack = bound - Micro-F1 per trial
    """
    return _run("theorem1", "micro_f1 <= micro_upper_bound", _theorem1_trial, seed, trials, n_jobs)


def check_theorem2(seed, trials, n_jobs=None):
    """
    Top-K_hat prediction on perfect rankings reaches the bound, and brute
    force finds no same-size prediction with more true positives.

    Args:
        seed (int): Run seed
        trials (int): Number of random perfect rankings
        n_jobs (int, optional): Worker threads

    Returns:
        TheoremReport: slack = bound - Micro-F1 per trial
    """
    return _run(
        "theorem2", "top-K_hat micro_f1 == micro_upper_bound under perfect ranking",
        _theorem2_trial, seed, trials, n_jobs,
    )


def check_theorem3(seed, trials, n_jobs=None):
    """Accuracy equals Micro-F1 exactly on single-label data."""
    return _run("theorem3", "accuracy == micro_f1 on single-label data", _theorem3_trial, seed, trials, n_jobs)


def add_swap_noise(ranking, p, rng):
    """
    With probability p per instance, swap the values of one random true label
    and one random false label.

    Args:
        ranking (SyntheticRanking): Ranking to perturb
        p (float): Swap probability in [0, 1]
        rng (numpy.random.Generator): Generator

    Returns:
        SyntheticRanking: Perturbed copy, perfect only if p == 0
    """
    decisions = ranking.decisions.copy()
    for i, labels in enumerate(ranking.truth):
        if rng.random() >= p:
            continue
        false_labels = [j for j in range(ranking.n_labels) if j not in labels]
        if not labels or not false_labels:
            continue
        a = labels[rng.integers(len(labels))]
        b = false_labels[rng.integers(len(false_labels))]
        decisions[i, a], decisions[i, b] = decisions[i, b], decisions[i, a]
    return SyntheticRanking(ranking.truth, decisions, perfect=(p == 0.0))


def _swept_deltas(validation):
    deltas = []
    for j in range(validation.n_labels):
        pairs = [(validation.decisions[i, j], j in labels) for i, labels in enumerate(validation.truth)]
        deltas.append(sweep_threshold(pairs)[0])
    return np.array(deltas)


class OverestimationReport:
    """
    Micro-F1 of each prediction rule at each noise level.
    """

    def __init__(self, seed, n_instances, n_labels, label_density, shift):
        self.seed = seed
        self.n_instances = n_instances
        self.n_labels = n_labels
        self.label_density = label_density
        self.shift = shift
        self.rows = []

    def to_dict(self):
        return {
            "seed": self.seed,
            "n_instances": self.n_instances,
            "n_labels": self.n_labels,
            "label_density": self.label_density,
            "shift": self.shift,
            "rows": self.rows,
        }

    def to_table(self):
        header = f"{'noise':>6} {'unrealistic':>12} {'basic':>8} {'no-empty':>9} {'thresholded':>12} {'gap':>8}"
        lines = [header]
        for row in self.rows:
            lines.append(
                f"{row['noise']:>6.2f} {row['unrealistic']:>12.4f} {row['basic']:>8.4f} "
                f"{row['no_empty']:>9.4f} {row['thresholded']:>12.4f} {row['gap']:>8.4f}"
            )
        return "\n".join(lines) + "\n"


def overestimation_demo(seed, n_instances=200, n_labels=6, label_density=0.3,
                        noise_levels=NOISE_LEVELS, shift=DEMO_SHIFT):
    """
    Show how far the unrealistic rule over-estimates Micro-F1.

    The gap column is unrealistic minus sign-rule (basic) Micro-F1; the
    no-empty and thresholded columns are reported alongside.

    Decisions are perfect rankings shifted by ``shift`` so that the sign rule
    misses the lower-scoring true labels, then perturbed by swap noise.
    Thresholded prediction learns per-label deltas on a separate validation
    draw with the same noise.

    Args:
        seed (int): Run seed
        n_instances (int): Test and validation instances per noise level
        n_labels (int): Number of labels
        label_density (float): Label probability
        noise_levels (list): Swap probabilities
        shift (float): Constant added to every decision value

    Returns:
        OverestimationReport: One row per noise level
    """
    report = OverestimationReport(seed, n_instances, n_labels, label_density, shift)
    for level, p in enumerate(noise_levels):
        rng = trial_rng(seed, level)
        test = add_swap_noise(gen_perfect_ranking(seed, n_instances, n_labels, label_density, rng=rng), p, rng)
        validation = add_swap_noise(
            gen_perfect_ranking(seed, n_instances, n_labels, label_density, rng=rng), p, rng,
        )
        decisions = test.decisions + shift

        def score(pred):
            return micro_f1(confusion(test.truth, pred, n_labels=n_labels))

        unrealistic = score(top_ranked(decisions, test.true_counts()))
        basic = score(predict_basic(decisions))
        no_empty = score(predict_no_empty(decisions))
        thresholded = score(predict_basic(decisions + _swept_deltas(
            SyntheticRanking(validation.truth, validation.decisions + shift, perfect=False)
        )))
        report.rows.append({
            "noise": p,
            "unrealistic": unrealistic,
            "basic": basic,
            "no_empty": no_empty,
            "thresholded": thresholded,
            "gap": unrealistic - basic,
        })
    return report


def run_all_checks(seed, trials, n_jobs=None):
    """
    Run the three theorem checkers and the over-estimation demo.

    Args:
        seed (int): Run seed
        trials (int): Trials per checker
        n_jobs (int, optional): Worker threads

    Returns:
        dict: ``theorems`` (list of reports), ``overestimation``, the zero-noise
        ``overestimation_gap`` and ``passed``
    """
    with phase_timer("verify"):
        reports = [
            check_theorem1(seed, trials, n_jobs),
            check_theorem2(seed, trials, n_jobs),
            check_theorem3(seed, trials, n_jobs),
        ]
        demo = overestimation_demo(seed)
    return {
        "seed": seed,
        "trials": trials,
        "theorems": [r.to_dict() for r in reports],
        "overestimation": demo.to_dict(),
        "overestimation_table": demo.to_table(),
        "overestimation_gap": demo.rows[0]["gap"],
        "passed": all(r.passed for r in reports) and demo.rows[0]["gap"] > 0.0,
    }


def render_text(results):
    """Plain-text table of run_all_checks output."""
    lines = [f"# verify seed={results['seed']} trials={results['trials']}"]
    lines.append(f"{'check':<10} {'trials':>7} {'violations':>11} {'equalities':>11} {'min slack':>12} {'max slack':>12}")
    for r in results["theorems"]:
        lines.append(
            f"{r['name']:<10} {r['trials']:>7} {r['violations']:>11} {r['equality_count']:>11} "
            f"{r['min_slack']:>12.3e} {r['max_slack']:>12.3e}"
        )
    lines.append("")
    lines.append("# over-estimation of Micro-F1 by the unrealistic rule")
    lines.append(results["overestimation_table"].rstrip("\n"))
    lines.append("")
    lines.append("PASS" if results["passed"] else "FAIL")
    return "\n".join(lines) + "\n"
