import logging

from collections import namedtuple
from hashlib import sha256

import numpy as np

from ltrexplain.letor import quartile_index
from ltrexplain.surrogates import (LASSO_ALPHA, LASSO_MAX_ITER, LASSO_TOL,
                                   SVR_C, SVR_EPSILON, SVR_LEARNING_RATE,
                                   SVR_MAX_ITER, fit_weighted_lasso,
                                   fit_weighted_linear_svr)

logger = logging.getLogger(__name__)

LIRME = 'LIRME'
EXS = 'EXS'
TECHNIQUE_LIST = [LIRME, EXS]

EUCLIDEAN = 'euclidean'
COSINE = 'cosine'
DISTANCE_KIND_LIST = [EUCLIDEAN, COSINE]

SMAX_FROM_SAMPLES = 'samples'
SMAX_FROM_QUERY = 'query'
SMAX_SOURCE_LIST = [SMAX_FROM_SAMPLES, SMAX_FROM_QUERY]

KERNEL_WIDTH_SCALE = 0.75

ExplainerConfig = namedtuple(
    'ExplainerConfig',
    'num_samples kernel_width distance_kind alpha lasso_tol lasso_max_iter '
    'svr_c svr_epsilon svr_learning_rate svr_max_iter smax_source seed'
)
ExplainerConfig.__new__.__defaults__ = (
    2000, None, EUCLIDEAN, LASSO_ALPHA, LASSO_TOL, LASSO_MAX_ITER, SVR_C,
    SVR_EPSILON, SVR_LEARNING_RATE, SVR_MAX_ITER, SMAX_FROM_SAMPLES, 0
)

Explanation = namedtuple('Explanation',
                         'technique qid docid weights intercept')


class ExplanationError(ValueError):
    pass


def check_explainer_config(cfg):
    if cfg.num_samples < 1:
        raise ValueError('num_samples must be at least 1')

    if cfg.kernel_width is not None and cfg.kernel_width <= 0:
        raise ValueError('kernel_width must be positive')

    if cfg.distance_kind not in DISTANCE_KIND_LIST:
        raise ValueError('Unknown distance kind {!r}'.format(
            cfg.distance_kind))

    if cfg.smax_source not in SMAX_SOURCE_LIST:
        raise ValueError('Unknown s_max source {!r}'.format(cfg.smax_source))


def default_kernel_width(feature_count):
    return (KERNEL_WIDTH_SCALE * np.sqrt(feature_count)) ** 2


def resolve_kernel_width(cfg, feature_count):
    if cfg.kernel_width is None:
        return default_kernel_width(feature_count)

    return cfg.kernel_width


def kernel_weights(samples, instance, h, distance_kind=EUCLIDEAN):
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    instance = np.asarray(instance, dtype=float)
    if samples.shape[1] != instance.shape[0]:
        raise ValueError('Dimension mismatch: {} vs {}'.format(
            samples.shape[1], instance.shape[0]))

    if h <= 0:
        raise ValueError('Kernel width must be positive')

    if distance_kind == EUCLIDEAN:
        distance = np.sqrt(((samples - instance) ** 2).sum(axis=1))
    elif distance_kind == COSINE:
        norm_product = np.linalg.norm(samples, axis=1) * np.linalg.norm(instance)
        with np.errstate(divide='ignore', invalid='ignore'):
            cosine = np.where(norm_product > 0,
                              samples @ instance / norm_product,
                              1.0)
        distance = 1.0 - cosine
    else:
        raise ValueError('Unknown distance kind {!r}'.format(distance_kind))

    return np.exp(-distance ** 2 / h)


def kernel_weight(a, b, h, distance_kind=EUCLIDEAN):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError('Dimension mismatch: {} vs {}'.format(a.shape,
                                                                b.shape))

    return float(kernel_weights(a[None, :], b, h, distance_kind)[0])


def instance_rng(seed, qid, docid, technique):
    digest = sha256('{}\x00{}\x00{}'.format(qid, docid, technique)
                    .encode('utf-8')).digest()
    key_words = [int.from_bytes(digest[i:i + 4], 'little')
                 for i in range(0, 16, 4)]

    return np.random.default_rng(np.random.SeedSequence([seed] + key_words))


def quartile_interval(stats, feature, quartile):
    first_quartile, median, third_quartile = stats.quartile_boundaries[feature]
    edge_list = [float(stats.minimums[feature]), first_quartile, median,
                 third_quartile, float(stats.maximums[feature])]

    return edge_list[quartile - 1], edge_list[quartile]


def lirme_sample(instance, stats, rng):
    """One quartile perturbation.

    Each feature draws a quartile uniformly from 1..4; it keeps the instance
    value (z = 1) when the draw hits the instance's own quartile, otherwise
    it takes a value from the drawn quartile's interval, [min, Q1) for the
    first quartile and (low, high] for the others.
    """
    instance = np.asarray(instance, dtype=float)
    feature_count = len(instance)
    drawn = rng.integers(1, 5, size=feature_count)
    position = rng.random(feature_count)

    z = np.zeros(feature_count)
    x_prime = instance.copy()
    for f in range(feature_count):
        if drawn[f] == quartile_index(instance[f],
                                      stats.quartile_boundaries[f]):
            z[f] = 1.0
        else:
            low, high = quartile_interval(stats, f, int(drawn[f]))
            if drawn[f] == 1:
                x_prime[f] = low + position[f] * (high - low)
            else:
                x_prime[f] = high - position[f] * (high - low)

    return z, x_prime


def exs_sample(instance, stats, rng):
    instance = np.asarray(instance, dtype=float)
    feature_count = len(instance)
    replace_count = int(rng.integers(1, feature_count + 1))
    replaced = rng.choice(feature_count, size=replace_count, replace=False)

    z = np.ones(feature_count)
    z[replaced] = 0.0
    x_prime = instance.copy()
    x_prime[replaced] = np.asarray(stats.means, dtype=float)[replaced]

    return z, x_prime


def exs_transform(sample_scores, s_max):
    if s_max == 0:
        raise ExplanationError('s_max is zero, EXS targets are undefined')

    sample_scores = np.asarray(sample_scores, dtype=float)

    return (s_max - sample_scores) / s_max


def draw_samples(sampler, instance, stats, rng, num_samples):
    pair_list = [sampler(instance, stats, rng) for _ in range(num_samples)]
    Z = np.array([z for z, _ in pair_list])
    X_prime = np.array([x_prime for _, x_prime in pair_list])

    return Z, X_prime


def normalized_kernel_weights(X_prime, instance, cfg):
    h = resolve_kernel_width(cfg, len(instance))
    w = kernel_weights(X_prime, instance, h, cfg.distance_kind)
    weight_sum = w.sum()
    if weight_sum <= 0:
        raise ExplanationError('All kernel weights underflowed to zero')

    return w / weight_sum


def check_finite(weights, technique):
    if not np.isfinite(weights).all():
        raise ExplanationError('{} surrogate produced non-finite '
                               'weights'.format(technique))


def lirme_explain(model, instance, stats, cfg, qid='', docid='', rng=None):
    check_explainer_config(cfg)
    instance = np.asarray(instance, dtype=float)
    if rng is None:
        rng = instance_rng(cfg.seed, qid, docid, LIRME)

    Z, X_prime = draw_samples(lirme_sample, instance, stats, rng,
                              cfg.num_samples)
    targets = model.predict_batch(X_prime)
    w = normalized_kernel_weights(X_prime, instance, cfg)

    fit = fit_weighted_lasso(Z, targets, w, cfg.alpha, cfg.lasso_tol,
                             cfg.lasso_max_iter)
    check_finite(fit.weights, LIRME)

    return Explanation(LIRME, qid, docid, fit.weights, fit.intercept)


def exs_explain(model, query_instances, instance, stats, cfg, qid='',
                docid='', rng=None):
    check_explainer_config(cfg)
    instance = np.asarray(instance, dtype=float)
    if rng is None:
        rng = instance_rng(cfg.seed, qid, docid, EXS)

    Z, X_prime = draw_samples(exs_sample, instance, stats, rng,
                              cfg.num_samples)
    sample_scores = model.predict_batch(X_prime)
    if cfg.smax_source == SMAX_FROM_QUERY:
        s_max = float(np.max(model.predict_batch(query_instances)))
    else:
        s_max = float(np.max(sample_scores))

    targets = exs_transform(sample_scores, s_max)
    w = normalized_kernel_weights(X_prime, instance, cfg)

    fit = fit_weighted_linear_svr(Z, targets, w, cfg.svr_c, cfg.svr_epsilon,
                                  cfg.svr_learning_rate, cfg.svr_max_iter)
    check_finite(fit.weights, EXS)

    return Explanation(EXS, qid, docid, fit.weights, fit.intercept)
