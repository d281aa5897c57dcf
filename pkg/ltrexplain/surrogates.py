"""Weighted linear surrogates: LASSO by coordinate descent, linear SVR by
subgradient descent on the primal."""
import logging

from collections import namedtuple

import numpy as np

logger = logging.getLogger(__name__)

LASSO_ALPHA = 0.01
LASSO_TOL = 1e-6
LASSO_MAX_ITER = 1000
SVR_C = 1.0
SVR_EPSILON = 0.1
SVR_LEARNING_RATE = 0.1
SVR_MAX_ITER = 2000
SVR_CONVERGENCE_WINDOW = 0.1

SurrogateFit = namedtuple('SurrogateFit',
                          'weights intercept converged iterations_used')


def check_problem(Z, y, sample_weights):
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    y = np.asarray(y, dtype=float)
    w = np.asarray(sample_weights, dtype=float)
    if not (Z.shape[0] == len(y) == len(w)):
        raise ValueError('Z, y and sample_weights differ in length: {}, {}, '
                         '{}'.format(Z.shape[0], len(y), len(w)))

    if (w < 0).any():
        raise ValueError('Sample weights must be non-negative')

    if w.sum() <= 0:
        raise ValueError('Sample weights sum to zero')

    if not (np.isfinite(Z).all() and np.isfinite(y).all()):
        raise ValueError('Z and y must be finite')

    return Z, y, w


def soft_threshold(x, t):
    return np.sign(x) * max(abs(x) - t, 0.0)


def lasso_objective(Z, y, w, alpha, weights, intercept):
    residual = Z @ weights + intercept - y
    return float((w * residual ** 2).sum() + alpha * np.abs(weights).sum())


def fit_weighted_lasso(Z, y, sample_weights, alpha=LASSO_ALPHA, tol=LASSO_TOL,
                       max_iter=LASSO_MAX_ITER):
    """Minimize sum_j w_j (z_j . theta + b - y_j)^2 + alpha * |theta|_1.

    Cyclic coordinate descent on weighted covariance updates: the weighted
    Gram matrix is formed once, so each coordinate step costs O(d). The
    intercept is unpenalized and re-solved at the start of every sweep.
    """
    Z, y, w = check_problem(Z, y, sample_weights)
    if alpha < 0:
        raise ValueError('alpha must be non-negative')

    feature_count = Z.shape[1]
    weight_sum = w.sum()
    weighted_target_sum = (w * y).sum()
    column_sum = Z.T @ w
    gram = (Z * w[:, None]).T @ Z
    covariance = Z.T @ (w * y)

    weights = np.zeros(feature_count)
    intercept = 0.0
    converged = False
    iterations_used = 0
    for iterations_used in range(1, max_iter + 1):
        new_intercept = (weighted_target_sum - column_sum @ weights) / weight_sum
        max_change = abs(new_intercept - intercept)
        intercept = new_intercept

        for k in range(feature_count):
            curvature = gram[k, k]
            if curvature <= 0:
                continue

            rho = (covariance[k] - intercept * column_sum[k] -
                   gram[k] @ weights + curvature * weights[k])
            new_weight = soft_threshold(rho, alpha / 2.0) / curvature
            max_change = max(max_change, abs(new_weight - weights[k]))
            weights[k] = new_weight

        if max_change < tol:
            converged = True
            break

    if not converged:
        logger.debug('LASSO stopped after %d sweeps without converging',
                     iterations_used)

    return SurrogateFit(weights, float(intercept), converged, iterations_used)


def svr_objective(Z, y, w, C, epsilon, weights, intercept):
    residual = Z @ weights + intercept - y
    tube_loss = np.maximum(np.abs(residual) - epsilon, 0.0)
    return float(0.5 * weights @ weights + C * (w * tube_loss).sum())


def fit_weighted_linear_svr(Z, y, sample_weights, C=SVR_C, epsilon=SVR_EPSILON,
                            learning_rate=SVR_LEARNING_RATE,
                            max_iter=SVR_MAX_ITER):
    """Minimize 0.5*|theta|^2 + C * sum_j w_j max(0, |z_j.theta + b - y_j| - eps).

    Full-batch subgradient descent from zero with step learning_rate/sqrt(t),
    always running max_iter iterations and returning the best iterate seen
    (the zero start included). `converged` reports whether the best objective
    stopped improving over the final tenth of the run.
    """
    Z, y, w = check_problem(Z, y, sample_weights)
    if C <= 0 or epsilon < 0 or learning_rate <= 0:
        raise ValueError('C and learning_rate must be positive and epsilon '
                         'non-negative')

    weights = np.zeros(Z.shape[1])
    intercept = 0.0
    best_weights = weights.copy()
    best_intercept = intercept
    best_objective = svr_objective(Z, y, w, C, epsilon, weights, intercept)
    best_iteration = 0

    for iteration in range(1, max_iter + 1):
        residual = Z @ weights + intercept - y
        direction = np.where(np.abs(residual) > epsilon, np.sign(residual), 0.0)
        loss_gradient = C * w * direction
        weight_step = weights + Z.T @ loss_gradient
        intercept_step = loss_gradient.sum()

        step_size = learning_rate / np.sqrt(iteration)
        weights = weights - step_size * weight_step
        intercept = intercept - step_size * intercept_step

        objective = svr_objective(Z, y, w, C, epsilon, weights, intercept)
        if objective < best_objective:
            best_objective = objective
            best_weights = weights.copy()
            best_intercept = intercept
            best_iteration = iteration

    converged = best_iteration <= max_iter * (1.0 - SVR_CONVERGENCE_WINDOW)

    return SurrogateFit(best_weights, float(best_intercept), converged,
                        max_iter)
