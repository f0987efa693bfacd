"""Linear value-function approximation and the weighted projection onto span(Phi)."""

import numpy as np

from .errors import RankError, ShapeError

GRAM_COND_LIMIT = 1e12


def as_features(phi, num_states=None):
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[1] < 1:
        raise ShapeError(f"feature matrix must be (S, d) with d >= 1, got {phi.shape}")
    if num_states is not None and phi.shape[0] != num_states:
        raise ShapeError(f"feature matrix has {phi.shape[0]} rows, expected {num_states}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("feature matrix has non-finite entries")
    return phi


def as_state_weights(weights, num_states):
    w = np.asarray(weights, dtype=float)
    if w.shape != (num_states,):
        raise ShapeError(f"state weights must have length {num_states}, got {w.shape}")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
        raise ValueError("state weights must be a probability vector")
    return w


def approx_value(features, theta):
    """Approximate values ``Phi @ theta``."""
    phi = as_features(features)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (phi.shape[1],):
        raise ShapeError(f"theta must have length {phi.shape[1]}, got {theta.shape}")
    return phi @ theta


def weighted_rmse(v_exact, v_approx, weights):
    """``sqrt(sum_s w_s (v_exact_s - v_approx_s)^2)``."""
    v_exact = np.asarray(v_exact, dtype=float)
    v_approx = np.asarray(v_approx, dtype=float)
    if v_exact.shape != v_approx.shape or v_exact.ndim != 1:
        raise ShapeError(f"value vectors differ in shape: {v_exact.shape} vs {v_approx.shape}")
    w = as_state_weights(weights, v_exact.shape[0])
    err = v_exact - v_approx
    return float(np.sqrt(np.sum(w * err * err)))


def has_full_column_rank(features):
    phi = as_features(features)
    return np.linalg.matrix_rank(phi) == phi.shape[1]


def _solve_spd(gram, rhs):
    # Cholesky first; LU with partial pivoting if the factorization breaks down
    try:
        lower = np.linalg.cholesky(gram)
        return np.linalg.solve(lower.T, np.linalg.solve(lower, rhs))
    except np.linalg.LinAlgError:
        return np.linalg.solve(gram, rhs)


def project(features, weights, v):
    """Weighted least-squares projection of ``v`` onto the span of the features.

    Returns:
        ``(theta_proj, v_proj)`` with ``v_proj = Phi @ theta_proj`` minimizing
        ``sum_s w_s (v_s - v_proj_s)^2``.

    Raises:
        RankError: ``Phi^T D Phi`` is singular or has condition number >= 1e12.
    """
    phi = as_features(features)
    w = as_state_weights(weights, phi.shape[0])
    v = np.asarray(v, dtype=float)
    if v.shape != (phi.shape[0],):
        raise ShapeError(f"value vector must have length {phi.shape[0]}, got {v.shape}")
    gram = phi.T @ (w[:, None] * phi)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond >= GRAM_COND_LIMIT:
        raise RankError(f"Gram matrix Phi^T D Phi is (near) singular, condition number {cond:.3g}")
    theta = _solve_spd(gram, phi.T @ (w * v))
    return theta, phi @ theta
