import hashlib
import logging

import numpy as np
import scipy.sparse as sp

from src.errors import ValidationError

# Configure logging
logger = logging.getLogger(__name__)

# Every shuffle in the toolkit draws from numpy's PCG64 (64-bit permuted
# congruential generator) seeded with the plan seed.
PRNG_NAME = "PCG64"


def make_rng(seed):
    """
    Build the generator used for splits, folds and synthetic data.

    Args:
        seed (int): Seed of the plan

    Returns:
        numpy.random.Generator: PCG64-backed generator
    """
    return np.random.Generator(np.random.PCG64(int(seed)))


def trial_rng(seed, trial):
    """Independent PCG64 stream for one numbered trial of a seeded run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(trial)])))


class SparseDataset:
    """
    Row-sparse feature matrix paired with per-instance label sets.

    Features are stored as a canonical CSR matrix (sorted indices, no
    duplicates). Label sets are sorted tuples of 0-based label indices.
    Instances are treated as read-only once constructed.
    """

    def __init__(self, features, label_sets, n_labels=None, empty_label_count=None, source=None):
        """
        Initialize a new SparseDataset.

        Args:
            features (scipy.sparse matrix): (n_instances, n_features) feature matrix
            label_sets (list): Per-instance iterables of label indices
            n_labels (int, optional): Label vocabulary size, defaults to max label + 1
            empty_label_count (int, optional): Number of unlabeled instances seen by the parser
            source (str, optional): Where the data came from, for logging
        """
        features = sp.csr_matrix(features, dtype=np.float64)
        features.sum_duplicates()
        features.sort_indices()
        self.features = features
        self.label_sets = [tuple(sorted(set(int(j) for j in labels))) for labels in label_sets]
        observed = max((labels[-1] for labels in self.label_sets if labels), default=-1) + 1
        self.n_labels = int(n_labels) if n_labels is not None else observed
        self.source = source
        if empty_label_count is None:
            empty_label_count = sum(1 for labels in self.label_sets if not labels)
        self.empty_label_count = empty_label_count
        self._augmented = None
        self._validate(observed)

    def _validate(self, observed_labels):
        if self.features.shape[0] != len(self.label_sets):
            raise ValidationError(
                f"{self.features.shape[0]} feature rows but {len(self.label_sets)} label sets"
            )
        if observed_labels > self.n_labels:
            raise ValidationError(
                f"label index {observed_labels - 1} outside vocabulary of {self.n_labels} labels"
            )
        if any(labels and labels[0] < 0 for labels in self.label_sets):
            raise ValidationError("negative label index")

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def row(self, i):
        """
        Get one instance as (feature_index, value) pairs sorted by index.

        Args:
            i (int): Instance index

        Returns:
            list: Sorted (index, value) pairs
        """
        start, end = self.features.indptr[i], self.features.indptr[i + 1]
        return [
            (int(j), float(v))
            for j, v in zip(self.features.indices[start:end], self.features.data[start:end])
        ]

    def augmented(self):
        """Features with a trailing constant-1 column, built once."""
        if self._augmented is None:
            ones = sp.csr_matrix(np.ones((self.n_instances, 1)))
            self._augmented = sp.hstack([self.features, ones], format="csr")
        return self._augmented

    def label_counts(self):
        """Per-instance number of true labels (K_i)."""
        return np.array([len(labels) for labels in self.label_sets], dtype=np.int64)

    def targets(self, label_index):
        """
        Signs of one binary problem.

        Args:
            label_index (int): Label defining the positive class

        Returns:
            numpy.ndarray: +1 where the instance carries the label, -1 otherwise
        """
        y = -np.ones(self.n_instances)
        for i, labels in enumerate(self.label_sets):
            if label_index in labels:
                y[i] = 1.0
        return y

    def subset(self, indices):
        """
        Rows selected by index, keeping both vocabulary sizes.

        Args:
            indices (array-like): Instance indices

        Returns:
            SparseDataset: New dataset holding the selected rows in the given order
        """
        indices = np.asarray(indices, dtype=np.int64)
        return SparseDataset(
            self.features[indices],
            [self.label_sets[i] for i in indices],
            n_labels=self.n_labels,
            source=self.source,
        )

    def l2_normalize(self):
        """Copy with every non-zero row scaled to unit Euclidean norm."""
        norms = np.sqrt(np.asarray(self.features.multiply(self.features).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        scaled = sp.diags(1.0 / norms) @ self.features
        return SparseDataset(scaled, self.label_sets, n_labels=self.n_labels, source=self.source)

    def same_as(self, other):
        """
        Structural equality: shapes, sparsity pattern, values and label sets.

        Args:
            other (SparseDataset): Dataset to compare with

        Returns:
            bool: True if both datasets hold exactly the same data
        """
        if self.features.shape != other.features.shape or self.n_labels != other.n_labels:
            return False
        if self.label_sets != other.label_sets:
            return False
        return (
            np.array_equal(self.features.indptr, other.features.indptr)
            and np.array_equal(self.features.indices, other.features.indices)
            and np.array_equal(self.features.data, other.features.data)
        )


class DatasetStats:
    """
    Label statistics of a dataset (single-labeled, multi-labeled, averages).
    """

    def __init__(self, dataset):
        counts = dataset.label_counts()
        self.n_instances = dataset.n_instances
        self.n_features = dataset.n_features
        self.n_labels = dataset.n_labels
        self.single_labeled = int(np.sum(counts == 1))
        self.multi_labeled = int(np.sum(counts > 1))
        self.unlabeled = int(np.sum(counts == 0))
        self.avg_labels = float(counts.mean()) if len(counts) else 0.0

    def to_dict(self):
        return {
            "n_instances": self.n_instances,
            "n_features": self.n_features,
            "n_labels": self.n_labels,
            "single_labeled": self.single_labeled,
            "multi_labeled": self.multi_labeled,
            "unlabeled": self.unlabeled,
            "avg_labels_per_instance": self.avg_labels,
        }


def _index_line(name, indices):
    return " ".join([name] + [str(int(i)) for i in indices])


def _parse_index_line(line, name):
    parts = line.split()
    if not parts or parts[0] != name:
        raise ValidationError(f"expected '{name}' line, got {line!r}")
    return np.array([int(p) for p in parts[1:]], dtype=np.int64)


def _parse_header(line, kind):
    parts = line.lstrip("#").split()
    if not parts or parts[0] != kind:
        raise ValidationError(f"not a {kind} plan: {line!r}")
    fields = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        fields[key] = value
    return fields


class SplitPlan:
    """
    Train/test partition of instance indices drawn from a seed.
    """

    def __init__(self, seed, train_fraction, train_indices, test_indices):
        """
        Initialize a new SplitPlan.

        Args:
            seed (int): Seed the permutation was drawn from
            train_fraction (float): Requested training share in (0, 1)
            train_indices (array-like): Training instance indices
            test_indices (array-like): Test instance indices
        """
        self.seed = int(seed)
        self.train_fraction = float(train_fraction)
        self.train_indices = np.asarray(train_indices, dtype=np.int64)
        self.test_indices = np.asarray(test_indices, dtype=np.int64)
        if np.intersect1d(self.train_indices, self.test_indices).size:
            raise ValidationError("train and test indices overlap")

    @property
    def n_instances(self):
        return len(self.train_indices) + len(self.test_indices)

    def to_text(self):
        """
        Plain-text index-list form used for reproducibility audits.

        Returns:
            str: Header line plus one train and one test line
        """
        return "\n".join([
            f"# split seed={self.seed} train_fraction={self.train_fraction!r} "
            f"n={self.n_instances} prng={PRNG_NAME}",
            _index_line("train", self.train_indices),
            _index_line("test", self.test_indices),
        ]) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) != 3:
            raise ValidationError("split plan must have a header, a train line and a test line")
        header = _parse_header(lines[0], "split")
        return cls(
            seed=int(header["seed"]),
            train_fraction=float(header["train_fraction"]),
            train_indices=_parse_index_line(lines[1], "train"),
            test_indices=_parse_index_line(lines[2], "test"),
        )

    def digest(self):
        """SHA-256 of the text form; equal digests mean identical plans."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def __eq__(self, other):
        return isinstance(other, SplitPlan) and self.to_text() == other.to_text()


class FoldPlan:
    """
    Assignment of training instances to k cross-validation folds.
    """

    def __init__(self, seed, k, assignment):
        """
        Initialize a new FoldPlan.

        Args:
            seed (int): Seed the assignment was drawn from
            k (int): Number of folds, at least 2
            assignment (array-like): Fold id in [0, k) per training instance
        """
        self.seed = int(seed)
        self.k = int(k)
        self.assignment = np.asarray(assignment, dtype=np.int64)
        if self.k < 2:
            raise ValidationError(f"fold count must be at least 2, got {self.k}")
        if self.assignment.size and (self.assignment.min() < 0 or self.assignment.max() >= self.k):
            raise ValidationError("fold id outside [0, k)")

    @property
    def train_size(self):
        return len(self.assignment)

    def fold_sizes(self):
        return np.bincount(self.assignment, minlength=self.k)

    def split(self, fold):
        """
        Indices (relative to the training set) of one fold's two parts.

        Args:
            fold (int): Fold id

        Returns:
            tuple: (fit_indices, validation_indices)
        """
        mask = self.assignment == fold
        return np.flatnonzero(~mask), np.flatnonzero(mask)

    def to_text(self):
        return "\n".join([
            f"# folds seed={self.seed} k={self.k} n={self.train_size} prng={PRNG_NAME}",
            _index_line("assignment", self.assignment),
        ]) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) != 2:
            raise ValidationError("fold plan must have a header and an assignment line")
        header = _parse_header(lines[0], "folds")
        return cls(
            seed=int(header["seed"]),
            k=int(header["k"]),
            assignment=_parse_index_line(lines[1], "assignment"),
        )

    def digest(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def __eq__(self, other):
        return isinstance(other, FoldPlan) and self.to_text() == other.to_text()
