import logging
import math
import os

import numpy as np
import scipy.sparse as sp

from src.errors import DatasetFormatError, ValidationError
from src.models.dataset import DatasetStats, FoldPlan, SparseDataset, SplitPlan, make_rng

# Configure logging
logger = logging.getLogger(__name__)

SVMLIGHT = "svmlight"
DENSE_PAIR = "dense-pair"
FORMATS = (SVMLIGHT, DENSE_PAIR)


def parse_dataset(path, format=SVMLIGHT, label_path=None, one_based=False,
                  n_features=None, n_labels=None, normalize=False):
    """
    Read a multi-label dataset from disk.

    Two layouts are understood:

    - ``svmlight``: one instance per line, ``lbl[,lbl...] idx:val idx:val``.
      The label field may be empty (line starts with whitespace). Lines
      starting with ``#`` are comments; a comment of the form
      ``# n_features=D n_labels=L`` overrides the inferred sizes.
    - ``dense-pair``: ``path`` holds whitespace-separated dense rows and
      ``label_path`` one comma-separated label list per line, row-aligned.

    Args:
        path (str): Feature file (or svmlight file)
        format (str): One of FORMATS
        label_path (str, optional): Label file, required for dense-pair
        one_based (bool): Indices in the file start at 1
        n_features (int, optional): Override for the feature dimension
        n_labels (int, optional): Override for the label vocabulary size
        normalize (bool): Scale every row to unit L2 norm

    Returns:
        SparseDataset: Validated dataset
    """
    if format not in FORMATS:
        raise ValidationError(f"unknown dataset format {format!r}, expected one of {FORMATS}")
    if not os.path.exists(path):
        raise DatasetFormatError("file does not exist", path=path)

    if format == SVMLIGHT:
        rows, label_sets, header = _read_svmlight(path, one_based)
    else:
        if label_path is None:
            raise ValidationError("dense-pair format needs a label file")
        rows, header = _read_dense(path)
        label_sets = read_label_file(label_path, one_based)
        if len(label_sets) != len(rows):
            logger.error(f"{path} has {len(rows)} rows but {label_path} has {len(label_sets)}")
            raise DatasetFormatError(
                f"{len(rows)} feature rows but {len(label_sets)} label lines", path=label_path
            )

    if not rows:
        logger.error(f"No instances found in {path}")
        raise DatasetFormatError("file holds no instances", path=path)

    n_features = n_features if n_features is not None else header.get("n_features")
    n_labels = n_labels if n_labels is not None else header.get("n_labels")
    dataset = _assemble(rows, label_sets, n_features, n_labels, path)

    if dataset.empty_label_count:
        logger.warning(f"{path}: {dataset.empty_label_count} instances have no labels")
    logger.info(
        f"Parsed {path}: {dataset.n_instances} instances, "
        f"{dataset.n_features} features, {dataset.n_labels} labels"
    )
    return dataset.l2_normalize() if normalize else dataset


def _assemble(rows, label_sets, n_features, n_labels, path):
    indptr = [0]
    indices = []
    data = []
    for row in rows:
        for j, v in row:
            indices.append(j)
            data.append(v)
        indptr.append(len(indices))
    observed = max(indices, default=-1) + 1
    if n_features is None:
        n_features = observed
    elif observed > n_features:
        raise DatasetFormatError(
            f"feature index {observed - 1} exceeds declared n_features={n_features}", path=path
        )
    features = sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(rows), n_features),
    )
    try:
        return SparseDataset(features, label_sets, n_labels=n_labels, source=path)
    except ValidationError as e:
        raise DatasetFormatError(str(e), path=path)


def _read_header(line, header):
    for token in line.lstrip("#").split():
        key, sep, value = token.partition("=")
        if sep and key in ("n_features", "n_labels"):
            try:
                header[key] = int(value)
            except ValueError:
                pass


def _parse_labels(field, one_based, path, line_number):
    labels = []
    for piece in field.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            label = int(piece)
        except ValueError:
            raise DatasetFormatError(f"bad label {piece!r}", path=path, line_number=line_number)
        if one_based:
            label -= 1
        if label < 0:
            raise DatasetFormatError(f"negative label index {piece}", path=path, line_number=line_number)
        labels.append(label)
    if len(set(labels)) != len(labels):
        raise DatasetFormatError("duplicate label in label set", path=path, line_number=line_number)
    return sorted(labels)


def _parse_feature(token, one_based, path, line_number):
    index, sep, value = token.partition(":")
    if not sep:
        raise DatasetFormatError(f"expected idx:val, got {token!r}", path=path, line_number=line_number)
    try:
        j = int(index)
        v = float(value)
    except ValueError:
        raise DatasetFormatError(f"malformed feature {token!r}", path=path, line_number=line_number)
    if one_based:
        j -= 1
    if j < 0:
        raise DatasetFormatError(f"negative feature index in {token!r}", path=path, line_number=line_number)
    return j, v


def _read_svmlight(path, one_based):
    rows = []
    label_sets = []
    header = {}
    with open(path, "r") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                _read_header(stripped, header)
                continue

            tokens = line.split()
            # A leading blank or a first token shaped idx:val means no label field.
            if line[0].isspace() or ":" in tokens[0]:
                label_field, feature_tokens = "", tokens
            else:
                label_field, feature_tokens = tokens[0], tokens[1:]

            labels = _parse_labels(label_field, one_based, path, line_number)
            row = [_parse_feature(t, one_based, path, line_number) for t in feature_tokens]
            seen = [j for j, _ in row]
            if len(set(seen)) != len(seen):
                raise DatasetFormatError("duplicate feature index", path=path, line_number=line_number)
            rows.append(sorted(row))
            label_sets.append(labels)
    return rows, label_sets, header


def _read_dense(path):
    rows = []
    width = None
    with open(path, "r") as f:
        for line_number, raw in enumerate(f, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                values = [float(v) for v in stripped.split()]
            except ValueError:
                raise DatasetFormatError("non-numeric feature value", path=path, line_number=line_number)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DatasetFormatError(
                    f"row has {len(values)} values, expected {width}", path=path, line_number=line_number
                )
            rows.append([(j, v) for j, v in enumerate(values) if v != 0.0])
    return rows, {"n_features": width} if width is not None else {}


def read_label_file(path, one_based):
    if not os.path.exists(path):
        raise DatasetFormatError("file does not exist", path=path)
    with open(path, "r") as f:
        lines = [(n, raw.strip()) for n, raw in enumerate(f, start=1)]
    lines = [(n, text) for n, text in lines if not text.startswith("#")]
    # Trailing blank lines are not instances.
    while lines and not lines[-1][1]:
        lines.pop()
    return [_parse_labels(text, one_based, path, n) for n, text in lines]


def write_dataset(dataset, path):
    """
    Serialize a dataset in the svmlight-multilabel format (0-based).

    An instance with neither labels nor features is written as a lone comma
    so that the line is not mistaken for a blank one.

    Args:
        dataset (SparseDataset): Dataset to write
        path (str): Destination file
    """
    with open(path, "w") as f:
        f.write(f"# n_features={dataset.n_features} n_labels={dataset.n_labels}\n")
        for i in range(dataset.n_instances):
            labels = ",".join(str(j) for j in dataset.label_sets[i])
            features = " ".join(f"{j}:{v!r}" for j, v in dataset.row(i))
            if not labels and not features:
                f.write(",\n")
            else:
                f.write(f"{labels} {features}".rstrip() + "\n")
    logger.info(f"Wrote {dataset.n_instances} instances to {path}")


def dataset_stats(dataset):
    """Label statistics of a dataset."""
    return DatasetStats(dataset)


def make_split(n_instances, seed, train_fraction=0.8):
    """
    Draw a uniform random train/test split.

    The training size is round-half-up of ``train_fraction * n_instances``,
    clamped so that both parts are nonempty.

    Args:
        n_instances (int): Number of instances, at least 2
        seed (int): PCG64 seed
        train_fraction (float): Training share in (0, 1)

    Returns:
        SplitPlan: Deterministic plan for the seed
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if n_instances < 2:
        raise ValidationError(f"need at least 2 instances to split, got {n_instances}")
    n_train = int(math.floor(train_fraction * n_instances + 0.5))
    n_train = min(max(n_train, 1), n_instances - 1)
    perm = make_rng(seed).permutation(n_instances)
    return SplitPlan(seed, train_fraction, np.sort(perm[:n_train]), np.sort(perm[n_train:]))


def make_folds(train_size, k, seed):
    """
    Balanced random assignment of training instances to k folds.

    Args:
        train_size (int): Number of training instances
        k (int): Number of folds, 2 <= k <= train_size
        seed (int): PCG64 seed

    Returns:
        FoldPlan: Plan whose fold sizes differ by at most one
    """
    if k < 2:
        raise ValidationError(f"fold count must be at least 2, got {k}")
    if k > train_size:
        raise ValidationError(f"cannot make {k} folds from {train_size} instances")
    perm = make_rng(seed).permutation(train_size)
    assignment = np.empty(train_size, dtype=np.int64)
    assignment[perm] = np.arange(train_size) % k
    return FoldPlan(seed, k, assignment)
