import numpy as np


class ConfusionCounts:
    """
    Per-label true positive, false positive and false negative counts.
    """

    def __init__(self, tp, fp, fn):
        """
        Initialize a new ConfusionCounts.

        Args:
            tp (array-like): True positives per label
            fp (array-like): False positives per label
            fn (array-like): False negatives per label
        """
        self.tp = np.asarray(tp, dtype=np.int64)
        self.fp = np.asarray(fp, dtype=np.int64)
        self.fn = np.asarray(fn, dtype=np.int64)

    @property
    def n_labels(self):
        return len(self.tp)

    @property
    def tp_sum(self):
        return int(self.tp.sum())

    @property
    def fp_sum(self):
        return int(self.fp.sum())

    @property
    def fn_sum(self):
        return int(self.fn.sum())

    def to_dict(self):
        return {
            "tp": self.tp.tolist(),
            "fp": self.fp.tolist(),
            "fn": self.fn.tolist(),
            "tp_sum": self.tp_sum,
            "fp_sum": self.fp_sum,
            "fn_sum": self.fn_sum,
        }


class MetricsReport:
    """
    Every evaluation measure of one prediction run.

    Optional measures are None when they do not apply (accuracy needs
    single-label data, precision@K needs decision values).
    """

    def __init__(self, macro_f1, micro_f1, instance_f1, example_precision, micro_upper_bound,
                 n_test, counts, accuracy_multiclass=None, precision_at_k=None, k=None,
                 strategy=None, ground_truth_used=False, per_label_f1=None):
        self.macro_f1 = float(macro_f1)
        self.micro_f1 = float(micro_f1)
        self.instance_f1 = float(instance_f1)
        self.example_precision = float(example_precision)
        self.micro_upper_bound = float(micro_upper_bound)
        self.n_test = int(n_test)
        self.counts = counts
        self.accuracy_multiclass = accuracy_multiclass
        self.precision_at_k = precision_at_k
        self.k = k
        self.strategy = strategy
        self.ground_truth_used = bool(ground_truth_used)
        self.per_label_f1 = [float(f) for f in per_label_f1] if per_label_f1 is not None else None

    @property
    def bound_holds(self):
        return self.micro_f1 <= self.micro_upper_bound + 1e-12

    def to_dict(self):
        """
        Key-value form for the metrics JSON document.

        Returns:
            dict: Scalar metrics, confusion totals and the per-label breakdown
        """
        return {
            "macro_f1": self.macro_f1,
            "micro_f1": self.micro_f1,
            "instance_f1": self.instance_f1,
            "example_precision": self.example_precision,
            "accuracy_multiclass": self.accuracy_multiclass,
            "precision_at_k": self.precision_at_k,
            "k": self.k,
            "micro_upper_bound": self.micro_upper_bound,
            "bound_holds": self.bound_holds,
            "n_test": self.n_test,
            "n_labels": self.counts.n_labels,
            "tp_sum": self.counts.tp_sum,
            "fp_sum": self.counts.fp_sum,
            "fn_sum": self.counts.fn_sum,
            "strategy": self.strategy,
            "ground_truth_used": self.ground_truth_used,
            "per_label": {
                "tp": self.counts.tp.tolist(),
                "fp": self.counts.fp.tolist(),
                "fn": self.counts.fn.tolist(),
                "f1": self.per_label_f1,
            },
        }
