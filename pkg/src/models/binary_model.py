import numpy as np

from src.errors import ValidationError


def cost_weights(C, t):
    """
    Per-class loss weights of the cost-sensitive objective.

    Args:
        C (float): Regularization parameter, > 0
        t (float): Cost ratio in (0, 1]; t = 1 gives the unweighted problem

    Returns:
        tuple: (C_pos, C_neg) = (C * (2 - t), C * t)
    """
    if not C > 0:
        raise ValidationError(f"C must be positive, got {C}")
    if not 0.0 < t <= 1.0:
        raise ValidationError(f"t must lie in (0, 1], got {t}")
    return C * (2.0 - t), C * t


class BinaryProblem:
    """
    One label's binary problem over a shared dataset.

    ``c_pos`` and ``c_neg`` scale the positive and negative loss terms on top
    of the (C, t) weights given to the solver; both default to 1.
    """

    def __init__(self, dataset, label_index, c_pos=1.0, c_neg=1.0, bias=True):
        """
        Initialize a new BinaryProblem.

        Args:
            dataset (SparseDataset): Training data, shared read-only
            label_index (int): Label that defines the positive class
            c_pos (float): Extra weight of positive losses
            c_neg (float): Extra weight of negative losses
            bias (bool): Augment features with a constant 1 column
        """
        if not (c_pos > 0 and c_neg > 0):
            raise ValidationError("per-class weights must be positive")
        if not 0 <= label_index < dataset.n_labels:
            raise ValidationError(f"label {label_index} outside vocabulary of {dataset.n_labels}")
        self.dataset = dataset
        self.label_index = int(label_index)
        self.c_pos = float(c_pos)
        self.c_neg = float(c_neg)
        self.bias = bool(bias)
        self.y = dataset.targets(label_index)

    @property
    def n_positive(self):
        return int(np.sum(self.y > 0))

    @property
    def n_negative(self):
        return int(np.sum(self.y < 0))

    def design_matrix(self):
        """
        Features the solver works on: X, or [X, 1] when the bias is on.

        Returns:
            scipy.sparse.csr_matrix: Design matrix
        """
        if not self.bias:
            return self.dataset.features
        return self.dataset.augmented()

    def instance_weights(self, C, t):
        c_plus, c_minus = cost_weights(C, t)
        return np.where(self.y > 0, c_plus * self.c_pos, c_minus * self.c_neg)


class BinaryModel:
    """
    Linear model of one label: weights, bias, threshold shift and provenance.

    An always-negative model (trained on a problem without positives) has
    zero weights and emits -inf decision values.
    """

    def __init__(self, w, bias=0.0, delta=0.0, C=1.0, t=1.0, always_negative=False,
                 iterations=0, grad_norm=0.0, label_index=None):
        """
        Initialize a new BinaryModel.

        Args:
            w (array-like): Dense weight vector of length n_features
            bias (float): Intercept
            delta (float): Additive threshold shift
            C (float): Regularization parameter used in training
            t (float): Cost ratio used in training
            always_negative (bool): Model never predicts the label
            iterations (int): Solver iterations
            grad_norm (float): Final objective gradient norm
            label_index (int, optional): Label this model scores
        """
        self.w = np.asarray(w, dtype=np.float64)
        self.bias = float(bias)
        self.delta = float(delta)
        self.C = float(C)
        self.t = float(t)
        self.always_negative = bool(always_negative)
        self.iterations = int(iterations)
        self.grad_norm = float(grad_norm)
        self.label_index = label_index

    @property
    def n_features(self):
        return len(self.w)

    def with_delta(self, delta):
        """Copy of the model with another threshold shift."""
        return BinaryModel(
            self.w, self.bias, delta, self.C, self.t, self.always_negative,
            self.iterations, self.grad_norm, self.label_index,
        )

    def to_dict(self):
        return {
            "label_index": self.label_index,
            "w": self.w.tolist(),
            "bias": self.bias,
            "delta": self.delta,
            "C": self.C,
            "t": self.t,
            "always_negative": self.always_negative,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            w=data.get("w", []),
            bias=data.get("bias", 0.0),
            delta=data.get("delta", 0.0),
            C=data.get("C", 1.0),
            t=data.get("t", 1.0),
            always_negative=data.get("always_negative", False),
            iterations=data.get("iterations", 0),
            grad_norm=data.get("grad_norm", 0.0),
            label_index=data.get("label_index"),
        )
