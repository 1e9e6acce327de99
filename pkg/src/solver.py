"""
Cost-weighted L2-regularized logistic regression for one label.

The objective over the (optionally bias-augmented) weight vector v is

    f(v) = v'v / 2 + sum_i c_i * log(1 + exp(-y_i v'x_i))

with c_i = C (2 - t) for positives and C t for negatives. It is minimized by
a truncated Newton iteration: conjugate gradient on Hessian-vector products
for the direction, Armijo backtracking for the step. Training stops when
||grad f|| <= tolerance * max(1, ||grad f(0)||).
"""
import logging

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg
from scipy.special import expit

from src.errors import ConvergenceError, DimensionMismatchError, ValidationError
from src.models.binary_model import BinaryModel, cost_weights

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
DEFAULT_MAX_ITER = 1000

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACK = 40


def logistic_loss(z):
    """xi(z) = log(1 + exp(-z)), evaluated without overflow."""
    return np.logaddexp(0.0, -z)


def _split(problem, v):
    if problem.bias:
        return v[:-1], float(v[-1])
    return v, 0.0


def _join(problem, w, bias):
    w = np.asarray(w, dtype=np.float64)
    if problem.bias:
        return np.append(w, bias)
    return w.copy()


class _Objective:
    """Objective, gradient and Hessian-vector products at fixed (C, t)."""

    def __init__(self, problem, C, t):
        self.X = problem.design_matrix()
        self.y = problem.y
        self.c = problem.instance_weights(C, t)
        self._z = None

    def value_and_gradient(self, v):
        z = self.y * (self.X @ v)
        value = 0.5 * float(v @ v) + float(self.c @ logistic_loss(z))
        # d xi / dz = -sigma(-z)
        coef = -self.c * self.y * expit(-z)
        gradient = v + self.X.T @ coef
        self._z = z
        return value, gradient

    def value(self, v):
        z = self.y * (self.X @ v)
        return 0.5 * float(v @ v) + float(self.c @ logistic_loss(z))

    def hessian_operator(self):
        # Curvature of the last point passed to value_and_gradient.
        s = expit(self._z)
        d = self.c * s * (1.0 - s)
        X = self.X
        n = X.shape[1]
        return LinearOperator((n, n), matvec=lambda u: u + X.T @ (d * (X @ u)), dtype=np.float64)


def objective_and_gradient(problem, w, bias, C, t):
    """
    Objective value and its exact gradient.

    Args:
        problem (BinaryProblem): Binary problem
        w (array-like): Weight vector (length n_features)
        bias (float): Intercept, ignored when the problem has no bias
        C (float): Regularization parameter
        t (float): Cost ratio

    Returns:
        tuple: (value, gradient with respect to w, derivative with respect to bias)
    """
    objective = _Objective(problem, C, t)
    value, gradient = objective.value_and_gradient(_join(problem, w, bias))
    grad_w, grad_b = _split(problem, gradient)
    return value, grad_w, (grad_b if problem.bias else 0.0)


def _certificate_scale(objective, size):
    _, g0 = objective.value_and_gradient(np.zeros(size))
    return max(1.0, float(np.linalg.norm(g0)))


def train_binary(problem, C=1.0, t=1.0, tolerance=DEFAULT_TOLERANCE, warm_start=None,
                 max_iter=DEFAULT_MAX_ITER):
    """
    Train one label's logistic-regression model.

    Args:
        problem (BinaryProblem): Binary problem
        C (float): Regularization parameter, > 0
        t (float): Cost ratio in (0, 1]
        tolerance (float): Relative gradient-norm tolerance, > 0
        warm_start (BinaryModel, optional): Starting point
        max_iter (int): Newton iteration cap

    Returns:
        BinaryModel: Certified model, or an always-negative model when the
        problem has no positive instance
    """
    if not tolerance > 0:
        raise ValidationError(f"tolerance must be positive, got {tolerance}")
    cost_weights(C, t)

    X = problem.dataset.features
    if not np.all(np.isfinite(X.data)):
        raise ValidationError("feature matrix holds non-finite values")
    if problem.n_positive + problem.n_negative == 0:
        raise ValidationError("binary problem has no instances")
    if problem.n_positive == 0:
        logger.debug(f"Label {problem.label_index} has no positives; using the always-negative model")
        return BinaryModel(
            np.zeros(problem.dataset.n_features), C=C, t=t, always_negative=True,
            label_index=problem.label_index,
        )

    objective = _Objective(problem, C, t)
    size = objective.X.shape[1]
    scale = _certificate_scale(objective, size)
    threshold = tolerance * scale

    if warm_start is not None and not warm_start.always_negative:
        if warm_start.n_features != problem.dataset.n_features:
            raise DimensionMismatchError("warm start has a different feature dimension")
        v = _join(problem, warm_start.w, warm_start.bias)
    else:
        v = np.zeros(size)

    value, gradient = objective.value_and_gradient(v)
    grad_norm = float(np.linalg.norm(gradient))
    iterations = 0
    while grad_norm > threshold and iterations < max_iter:
        iterations += 1
        forcing = min(0.1, np.sqrt(grad_norm / scale))
        direction, _ = cg(objective.hessian_operator(), -gradient, rtol=forcing, maxiter=10 * size)
        slope = float(gradient @ direction)
        if not slope < 0:
            direction, slope = -gradient, -grad_norm ** 2

        step = 1.0
        accepted = False
        for _ in range(_MAX_BACKTRACK):
            candidate = v + step * direction
            candidate_value = objective.value(candidate)
            if candidate_value <= value + _ARMIJO_C1 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # Rounding can hide decrease near the optimum; keep the full
            # Newton step only if it shrinks the gradient.
            candidate = v + direction
            candidate_value, candidate_gradient = objective.value_and_gradient(candidate)
            if np.linalg.norm(candidate_gradient) >= grad_norm:
                objective.value_and_gradient(v)
                break
            v, value, gradient = candidate, candidate_value, candidate_gradient
        else:
            v = candidate
            value, gradient = objective.value_and_gradient(v)
        grad_norm = float(np.linalg.norm(gradient))

    if grad_norm > threshold:
        logger.error(
            f"Label {problem.label_index}: solver stopped at |g|={grad_norm:.3e} "
            f"> {threshold:.3e} after {iterations} iterations (C={C}, t={t})"
        )
        raise ConvergenceError(
            f"label {problem.label_index} did not converge in {iterations} iterations "
            f"(|g|={grad_norm:.3e}, required {threshold:.3e})"
        )

    w, bias = _split(problem, v)
    logger.debug(
        f"Label {problem.label_index}: C={C} t={t} converged in {iterations} iterations, |g|={grad_norm:.2e}"
    )
    return BinaryModel(
        w.copy(), bias=bias, C=C, t=t, iterations=iterations, grad_norm=grad_norm,
        label_index=problem.label_index,
    )


def decision_value(model, x):
    """
    Decision value w'x + bias + delta of one sparse row.

    Args:
        model (BinaryModel): Trained model
        x (list): (feature_index, value) pairs

    Returns:
        float: Decision value, -inf for an always-negative model
    """
    total = 0.0
    for j, value in x:
        if j < 0 or j >= model.n_features:
            raise DimensionMismatchError(
                f"feature index {j} outside model dimension {model.n_features}"
            )
        total += model.w[j] * value
    if model.always_negative:
        return -np.inf
    return total + model.bias + model.delta


def decision_values(model, X):
    """
    Decision values of every row of a feature matrix.

    Args:
        model (BinaryModel): Trained model
        X (scipy.sparse matrix): (n, n_features) features

    Returns:
        numpy.ndarray: One decision value per row
    """
    if X.shape[1] != model.n_features:
        raise DimensionMismatchError(
            f"features have dimension {X.shape[1]}, model expects {model.n_features}"
        )
    if model.always_negative:
        return np.full(X.shape[0], -np.inf)
    return X @ model.w + model.bias + model.delta
