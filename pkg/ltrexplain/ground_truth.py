from collections import namedtuple

import numpy as np

from ltrexplain.trees import BoostedEnsemble, RegressionTree, decision_path

IMPURITY = 'impurity'
FREQUENCY = 'frequency'
GT_MODE_LIST = [IMPURITY, FREQUENCY]

Attribution = namedtuple('Attribution', 'mode bias scores')


def impurity_attribution(tree, x):
    """Split a single-tree prediction into a bias and per-feature deltas.

    Each split on the decision path credits its feature with the change in
    node value from parent to child; the root value is the bias, so
    bias + sum(scores) equals the prediction.
    """
    path_list = decision_path(tree, x)
    scores = np.zeros(tree.feature_count)
    for parent, child in zip(path_list[:-1], path_list[1:]):
        scores[parent.split_feature] += child.node_value - parent.node_value

    return Attribution(IMPURITY, path_list[0].node_value, scores)


def frequency_attribution(tree, x):
    path_list = decision_path(tree, x)
    scores = np.zeros(tree.feature_count)
    split_list = path_list[:-1]
    for node in split_list:
        scores[node.split_feature] += 1.0

    if split_list:
        scores /= len(split_list)

    return Attribution(FREQUENCY, 0.0, scores)


ATTRIBUTION_FUNCTION_DICT = {IMPURITY: impurity_attribution,
                             FREQUENCY: frequency_attribution}


def tree_attribution(tree, x, mode):
    if mode not in ATTRIBUTION_FUNCTION_DICT:
        raise ValueError('Unknown ground-truth mode {!r}'.format(mode))

    return ATTRIBUTION_FUNCTION_DICT[mode](tree, x)


def ensemble_attribution(ens, x, mode):
    # Per-tree node values are averaged unscaled by the learning rate.
    if not ens.trees:
        raise ValueError('Cannot attribute an empty ensemble')

    attribution_list = [tree_attribution(tree, x, mode) for tree in ens.trees]
    if len(attribution_list) == 1:
        return attribution_list[0]

    return Attribution(
        mode,
        float(np.mean([attribution.bias
                       for attribution in attribution_list])),
        np.mean([attribution.scores for attribution in attribution_list],
                axis=0)
    )


def attribution(model, x, mode):
    if isinstance(model, BoostedEnsemble):
        return ensemble_attribution(model, x, mode)

    return tree_attribution(model, x, mode)


def tree_path_depth(tree, x):
    return len(decision_path(tree, x)) - 1


def path_depth(model, x):
    if isinstance(model, RegressionTree):
        return float(tree_path_depth(model, x))

    if not model.trees:
        raise ValueError('Cannot measure path depth of an empty ensemble')

    return float(np.mean([tree_path_depth(tree, x) for tree in model.trees]))
