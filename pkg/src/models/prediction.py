import numpy as np

from src.errors import DatasetFormatError, ValidationError

PREDICTION_STRATEGIES = (
    "unrealistic",
    "basic",
    "no-empty",
    "as-calibrated",
    "cost-sensitive-no-empty",
    "top-k",
    "one-label",
)


class PredictionSet:
    """
    Predicted label subsets of a test set, with the decision values behind them.
    """

    def __init__(self, predicted, n_labels, strategy="basic", decisions=None, ground_truth_used=False):
        """
        Initialize a new PredictionSet.

        Args:
            predicted (list): Per-instance iterables of predicted labels
            n_labels (int): Label vocabulary size
            strategy (str): One of PREDICTION_STRATEGIES
            decisions (numpy.ndarray, optional): (n_instances, n_labels) decision values
            ground_truth_used (bool): True label counts were consumed to predict
        """
        if strategy not in PREDICTION_STRATEGIES:
            raise ValidationError(f"unknown prediction strategy {strategy!r}")
        self.predicted = [tuple(sorted(int(j) for j in labels)) for labels in predicted]
        self.n_labels = int(n_labels)
        self.strategy = strategy
        self.decisions = decisions
        self.ground_truth_used = bool(ground_truth_used)
        for labels in self.predicted:
            if labels and (labels[0] < 0 or labels[-1] >= self.n_labels):
                raise ValidationError(f"predicted label outside vocabulary of {self.n_labels}")

    def __len__(self):
        return len(self.predicted)

    def counts(self):
        """Predicted label-set sizes (K-hat)."""
        return np.array([len(labels) for labels in self.predicted], dtype=np.int64)

    def to_lines(self):
        """One comma-separated label list per instance; empty sets give empty lines."""
        return [",".join(str(j) for j in labels) for labels in self.predicted]

    @classmethod
    def from_lines(cls, lines, n_labels=None, strategy="basic", path=None):
        """
        Parse a prediction dump.

        Args:
            lines (list): One line per instance
            n_labels (int, optional): Vocabulary size, defaults to max label + 1
            strategy (str): Strategy to tag the set with
            path (str, optional): File name for error messages

        Returns:
            PredictionSet: Parsed predictions
        """
        predicted = []
        for number, line in enumerate(lines, start=1):
            line = line.strip()
            try:
                predicted.append([int(p) for p in line.split(",")] if line else [])
            except ValueError:
                raise DatasetFormatError(f"bad prediction line {line!r}", path=path, line_number=number)
        observed = max((max(labels) + 1 for labels in predicted if labels), default=0)
        return cls(predicted, n_labels if n_labels is not None else observed, strategy=strategy)
