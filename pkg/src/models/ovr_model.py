import numpy as np

from src.errors import DatasetFormatError, ValidationError
from src.models.binary_model import BinaryModel

MODEL_FORMAT = "mlc-model"
MODEL_FORMAT_VERSION = 1

STRATEGY_TAGS = ("basic", "basic-C", "thresholding", "cost-sensitive", "cost-sensitive-simple")


class CGrid:
    """
    Ascending grid of regularization parameters.
    """

    def __init__(self, values):
        """
        Initialize a new CGrid.

        Args:
            values (iterable): Positive C values; sorted on construction
        """
        values = sorted(float(c) for c in values)
        if not values:
            raise ValidationError("C grid is empty")
        if values[0] <= 0:
            raise ValidationError("C values must be positive")
        if any(a == b for a, b in zip(values, values[1:])):
            raise ValidationError("C grid has duplicate values")
        self.values = values

    @classmethod
    def default(cls):
        """The 21 powers of two from 2^-10 to 2^10."""
        return cls([2.0 ** e for e in range(-10, 11)])

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def describe(self):
        return "C=" + ",".join(repr(c) for c in self.values)


class OvRModel:
    """
    One binary model per label plus training provenance.
    """

    def __init__(self, models, n_features, strategy_tag="basic", seed=None, fold_digest=None,
                 grid=None, bias=True):
        """
        Initialize a new OvRModel.

        Args:
            models (list): BinaryModel per label, in label order
            n_features (int): Feature dimension
            strategy_tag (str): One of STRATEGY_TAGS
            seed (int, optional): Seed of the folds used in training
            fold_digest (str, optional): Digest of the FoldPlan used
            grid (str, optional): Description of the parameter grid searched
            bias (bool): Models were trained with an intercept
        """
        if strategy_tag not in STRATEGY_TAGS:
            raise ValidationError(f"unknown strategy tag {strategy_tag!r}")
        if strategy_tag != "thresholding" and any(m.delta != 0.0 for m in models):
            raise ValidationError("only thresholding models may carry a threshold shift")
        self.models = list(models)
        self.n_features = int(n_features)
        self.strategy_tag = strategy_tag
        self.seed = seed
        self.fold_digest = fold_digest
        self.grid = grid
        self.bias = bool(bias)
        # Per-label selection details; written to the calibration report,
        # not to the model file.
        self.diagnostics = []

    @property
    def n_labels(self):
        return len(self.models)

    def weight_matrix(self):
        """Dense (n_features, n_labels) matrix of weight vectors."""
        if not self.models:
            return np.zeros((self.n_features, 0))
        return np.column_stack([m.w for m in self.models])

    def offsets(self):
        """Per-label bias + delta, -inf for always-negative labels."""
        return np.array([
            -np.inf if m.always_negative else m.bias + m.delta for m in self.models
        ])

    def to_text(self):
        """
        Versioned text form; floats are written with repr so they round-trip exactly.

        Returns:
            str: Model file content
        """
        lines = [
            f"{MODEL_FORMAT} {MODEL_FORMAT_VERSION}",
            f"n_features {self.n_features}",
            f"n_labels {self.n_labels}",
            f"strategy {self.strategy_tag}",
            f"seed {'-' if self.seed is None else self.seed}",
            f"folds {self.fold_digest or '-'}",
            f"grid {self.grid or '-'}",
            f"bias {int(self.bias)}",
        ]
        for j, m in enumerate(self.models):
            weights = " ".join(f"{i}:{m.w[i]!r}" for i in np.flatnonzero(m.w))
            lines.append(
                f"label {j} C {m.C!r} t {m.t!r} delta {m.delta!r} "
                f"always_negative {int(m.always_negative)} bias {m.bias!r} weights {weights}".rstrip()
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, path=None):
        """
        Parse a model file.

        Args:
            text (str): Model file content
            path (str, optional): File name for error messages

        Returns:
            OvRModel: Parsed model
        """
        lines = text.splitlines()
        if not lines or lines[0].split() != [MODEL_FORMAT, str(MODEL_FORMAT_VERSION)]:
            raise DatasetFormatError("not a version 1 model file", path=path, line_number=1)
        header = {}
        for number, line in enumerate(lines[1:8], start=2):
            key, _, value = line.partition(" ")
            header[key] = value
        try:
            n_features = int(header["n_features"])
            n_labels = int(header["n_labels"])
        except (KeyError, ValueError):
            raise DatasetFormatError("model header lacks dimensions", path=path)

        models = []
        for number, line in enumerate(lines[8:], start=9):
            if not line.strip():
                continue
            models.append(_parse_label_record(line, n_features, path, number))
        if len(models) != n_labels:
            raise DatasetFormatError(
                f"header declares {n_labels} labels but {len(models)} records follow", path=path
            )
        seed = header.get("seed", "-")
        return cls(
            models,
            n_features,
            strategy_tag=header.get("strategy", "basic"),
            seed=None if seed == "-" else int(seed),
            fold_digest=None if header.get("folds", "-") == "-" else header["folds"],
            grid=None if header.get("grid", "-") == "-" else header["grid"],
            bias=header.get("bias", "1") == "1",
        )


def _parse_label_record(line, n_features, path, number):
    tokens = line.split()
    try:
        fields = dict(zip(tokens[0:12:2], tokens[1:12:2]))
        if tokens[12] != "weights":
            raise ValueError("missing weights marker")
        w = np.zeros(n_features)
        for token in tokens[13:]:
            index, _, value = token.partition(":")
            w[int(index)] = float(value)
        return BinaryModel(
            w,
            bias=float(fields["bias"]),
            delta=float(fields["delta"]),
            C=float(fields["C"]),
            t=float(fields["t"]),
            always_negative=fields["always_negative"] == "1",
            label_index=int(fields["label"]),
        )
    except (KeyError, ValueError, IndexError) as e:
        raise DatasetFormatError(f"bad label record: {e}", path=path, line_number=number)
