from collections import namedtuple

import numpy as np

from scipy.stats import rankdata

SPEARMAN = 'spearman'
EUCLIDEAN = 'euclidean'
TOPK_AUC = 'topk_auc'
METRIC_LIST = [SPEARMAN, EUCLIDEAN, TOPK_AUC]
DEFAULT_AUC_K = 5

SimilarityResult = namedtuple('SimilarityResult', 'metric value defined')


def check_lengths(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError('Vectors differ in length: {} vs {}'.format(
            a.shape, b.shape))

    return a, b


def undefined(metric):
    return SimilarityResult(metric, float('nan'), False)


def spearman(a, b):
    a, b = check_lengths(a, b)
    if len(a) < 2:
        raise ValueError('Spearman needs at least two entries')

    rank_a = rankdata(a, method='average')
    rank_b = rankdata(b, method='average')
    if np.all(rank_a == rank_a[0]) or np.all(rank_b == rank_b[0]):
        return undefined(SPEARMAN)

    centered_a = rank_a - rank_a.mean()
    centered_b = rank_b - rank_b.mean()
    value = (centered_a @ centered_b /
             np.sqrt((centered_a @ centered_a) * (centered_b @ centered_b)))

    return SimilarityResult(SPEARMAN, float(np.clip(value, -1.0, 1.0)), True)


def unit_vector(v):
    norm = np.linalg.norm(v)
    if norm == 0:
        return v

    return v / norm


def euclidean_similarity(a, b):
    a, b = check_lengths(a, b)
    if not a.any() and not b.any():
        return undefined(EUCLIDEAN)

    distance = np.linalg.norm(unit_vector(a) - unit_vector(b))

    return SimilarityResult(EUCLIDEAN,
                            float(np.clip(1.0 - distance / 2.0, 0.0, 1.0)),
                            True)


def top_k_labels(ground_truth, k):
    magnitude = np.abs(ground_truth)
    effective_k = min(k, int(np.count_nonzero(magnitude)))
    # descending magnitude, lower index first among ties
    order = np.lexsort((np.arange(len(magnitude)), -magnitude))
    labels = np.zeros(len(magnitude), dtype=bool)
    labels[order[:effective_k]] = True

    return labels


def mann_whitney_auc(scores, labels):
    ranks = rankdata(scores, method='average')
    positive_count = int(labels.sum())
    negative_count = len(labels) - positive_count
    rank_sum = ranks[labels].sum()

    return ((rank_sum - positive_count * (positive_count + 1) / 2.0) /
            (positive_count * negative_count))


def topk_auc(explanation, ground_truth, k=DEFAULT_AUC_K):
    explanation, ground_truth = check_lengths(explanation, ground_truth)
    if k < 1:
        raise ValueError('K must be at least 1, got {}'.format(k))

    labels = top_k_labels(ground_truth, k)
    if not labels.any() or labels.all():
        return undefined(TOPK_AUC)

    return SimilarityResult(TOPK_AUC,
                            float(mann_whitney_auc(np.abs(explanation),
                                                   labels)),
                            True)


def similarity(metric, explanation, ground_truth, k=DEFAULT_AUC_K):
    if metric == SPEARMAN:
        return spearman(explanation, ground_truth)
    elif metric == EUCLIDEAN:
        return euclidean_similarity(explanation, ground_truth)
    elif metric == TOPK_AUC:
        return topk_auc(explanation, ground_truth, k)

    raise ValueError('Unknown metric {!r}'.format(metric))
