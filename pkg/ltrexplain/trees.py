import logging

from collections import namedtuple
from json import dumps, loads

import numpy as np

from scipy.special import expit

from ltrexplain.letor import split_queries

logger = logging.getLogger(__name__)

LEAF = -1
MODEL_KIND_TREE = 'decision_tree'
MODEL_KIND_LAMBDAMART = 'lambdamart'
MODEL_KIND_LIST = [MODEL_KIND_TREE, MODEL_KIND_LAMBDAMART]

TreeNode = namedtuple(
    'TreeNode',
    'node_id node_value sample_fraction split_feature threshold '
    'left_child right_child'
)
TreeNode.__new__.__defaults__ = (None, None, None, None)

PathNode = namedtuple('PathNode', 'node_id split_feature node_value')

TreeParams = namedtuple('TreeParams',
                        'max_depth min_samples_split_fraction '
                        'min_samples_leaf_fraction')
TreeParams.__new__.__defaults__ = (1e-9, 1e-9)

LambdaMartParams = namedtuple('LambdaMartParams',
                              'num_trees tree_params learning_rate sigma')
LambdaMartParams.__new__.__defaults__ = (0.1, 1.0)


def check_tree_params(params):
    if int(params.max_depth) < 1:
        raise ValueError('max_depth must be positive, got {}'.format(
            params.max_depth))

    if not 0.0 < params.min_samples_split_fraction <= 1.0:
        raise ValueError('min_samples_split_fraction must be in (0, 1], '
                         'got {}'.format(params.min_samples_split_fraction))

    if not 0.0 < params.min_samples_leaf_fraction <= 0.5:
        raise ValueError('min_samples_leaf_fraction must be in (0, 0.5], '
                         'got {}'.format(params.min_samples_leaf_fraction))


class RegressionTree:
    """Binary regression tree stored as a preorder node list.

    Node ids are list positions; every child id is larger than its parent's.
    Internal nodes route left when x[split_feature] <= threshold.
    """

    def __init__(self, nodes, feature_count):
        nodes = [TreeNode(*node) for node in nodes]
        if not nodes:
            raise ValueError('A tree needs at least one node')

        parent_count = [0] * len(nodes)
        for position, node in enumerate(nodes):
            if node.node_id != position:
                raise ValueError('Node {} stored at position {}'.format(
                    node.node_id, position))

            if node.split_feature is None:
                continue

            if not 0 <= node.split_feature < feature_count:
                raise ValueError('Node {} splits on feature {} outside {} '
                                 'features'.format(node.node_id,
                                                   node.split_feature,
                                                   feature_count))

            for child in (node.left_child, node.right_child):
                if child is None or not node.node_id < child < len(nodes):
                    raise ValueError('Node {} has invalid child {}'.format(
                        node.node_id, child))

                parent_count[child] += 1

        if parent_count[0] != 0 or any(count != 1
                                       for count in parent_count[1:]):
            raise ValueError('Nodes do not form a proper binary tree')

        self.nodes = nodes
        self.feature_count = int(feature_count)

        self._feature = np.array(
            [LEAF if node.split_feature is None else node.split_feature
             for node in nodes],
            dtype=int
        )
        self._threshold = np.array(
            [0.0 if node.threshold is None else node.threshold
             for node in nodes]
        )
        self._left = np.array([node.left_child or 0 for node in nodes],
                              dtype=int)
        self._right = np.array([node.right_child or 0 for node in nodes],
                               dtype=int)
        self._value = np.array([node.node_value for node in nodes])

    @property
    def depth(self):
        depth_list = [0] * len(self.nodes)
        for node in self.nodes:
            if node.split_feature is not None:
                depth_list[node.left_child] = depth_list[node.node_id] + 1
                depth_list[node.right_child] = depth_list[node.node_id] + 1

        return max(depth_list)

    def check_dimension(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.feature_count:
            raise ValueError('Expected {} features, got {}'.format(
                self.feature_count, x.shape[-1]))

        return x

    def leaf_indices(self, X):
        X = np.atleast_2d(self.check_dimension(X))
        row_indices = np.arange(X.shape[0])
        node_indices = np.zeros(X.shape[0], dtype=int)
        internal = self._feature[node_indices] != LEAF
        while internal.any():
            feature = self._feature[node_indices]
            go_left = (X[row_indices, np.maximum(feature, 0)] <=
                       self._threshold[node_indices])
            next_indices = np.where(go_left,
                                    self._left[node_indices],
                                    self._right[node_indices])
            node_indices = np.where(internal, next_indices, node_indices)
            internal = self._feature[node_indices] != LEAF

        return node_indices

    def predict_batch(self, X):
        return self._value[self.leaf_indices(X)]

    def _asdict(self):
        node_list = []
        for node in self.nodes:
            node_dict = {'node_id': node.node_id,
                         'node_value': node.node_value,
                         'sample_fraction': node.sample_fraction}
            if node.split_feature is not None:
                node_dict.update({'split_feature': node.split_feature,
                                  'threshold': node.threshold,
                                  'left_child': node.left_child,
                                  'right_child': node.right_child})

            node_list.append(node_dict)

        return {'nodes': node_list}

    def __eq__(self, other):
        return (isinstance(other, RegressionTree) and
                self.feature_count == other.feature_count and
                self.nodes == other.nodes)

    def __repr__(self):
        return 'RegressionTree({} nodes, depth {})'.format(len(self.nodes),
                                                          self.depth)


class BoostedEnsemble:
    def __init__(self, trees, learning_rate, init_score, feature_count):
        self.trees = list(trees)
        self.learning_rate = float(learning_rate)
        self.init_score = float(init_score)
        self.feature_count = int(feature_count)

    def check_dimension(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.feature_count:
            raise ValueError('Expected {} features, got {}'.format(
                self.feature_count, x.shape[-1]))

        return x

    def predict_batch(self, X):
        X = np.atleast_2d(self.check_dimension(X))
        tree_sum = np.zeros(X.shape[0])
        for tree in self.trees:
            tree_sum += tree.predict_batch(X)

        return self.init_score + self.learning_rate * tree_sum

    def _asdict(self):
        return {'learning_rate': self.learning_rate,
                'init_score': self.init_score,
                'trees': [tree._asdict() for tree in self.trees]}

    def __eq__(self, other):
        return (isinstance(other, BoostedEnsemble) and
                self.feature_count == other.feature_count and
                self.learning_rate == other.learning_rate and
                self.init_score == other.init_score and
                self.trees == other.trees)

    def __repr__(self):
        return 'BoostedEnsemble({} trees, learning_rate {})'.format(
            len(self.trees), self.learning_rate)


def weighted_sse(weight_sum, weighted_target_sum, weighted_square_sum):
    return weighted_square_sum - weighted_target_sum ** 2 / weight_sum


def find_best_split(X, y, w, total_weight, params):
    """Scan every feature for the weighted-MSE split with the largest gain.

    Returns (gain, feature, threshold) or None. Ties keep the lowest feature
    index, then the lowest threshold.
    """
    node_weight = w.sum()
    parent_sse = weighted_sse(node_weight, (w * y).sum(), (w * y * y).sum())
    min_leaf_weight = params.min_samples_leaf_fraction * total_weight

    best_split = None
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind='stable')
        values = X[order, feature]
        distinct = values[1:] != values[:-1]
        if not distinct.any():
            continue

        w_sorted = w[order]
        y_sorted = y[order]
        left_weight = np.cumsum(w_sorted)[:-1]
        left_target = np.cumsum(w_sorted * y_sorted)[:-1]
        left_square = np.cumsum(w_sorted * y_sorted * y_sorted)[:-1]
        right_weight = node_weight - left_weight
        right_target = (w * y).sum() - left_target
        right_square = (w * y * y).sum() - left_square

        valid = (distinct &
                 (left_weight > 0) & (right_weight > 0) &
                 (left_weight >= min_leaf_weight) &
                 (right_weight >= min_leaf_weight))
        if not valid.any():
            continue

        with np.errstate(divide='ignore', invalid='ignore'):
            gain = parent_sse - (
                weighted_sse(left_weight, left_target, left_square) +
                weighted_sse(right_weight, right_target, right_square)
            )

        gain = np.where(valid, gain, -np.inf)
        position = int(np.argmax(gain))
        if best_split is None or gain[position] > best_split[0]:
            threshold = (values[position] + values[position + 1]) / 2.0
            best_split = (float(gain[position]), feature, float(threshold))

    return best_split


def fit_regression_tree(X, y, params, sample_weights=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0 or X.shape[0] != len(y):
        raise ValueError('Need a non-empty X and y of equal length, got {} '
                         'and {}'.format(X.shape[0], len(y)))

    check_tree_params(params)
    if sample_weights is None:
        w = np.ones(len(y))
    else:
        w = np.asarray(sample_weights, dtype=float)
        if len(w) != len(y) or (w < 0).any() or w.sum() <= 0:
            raise ValueError('Sample weights must be non-negative with a '
                             'positive sum')

    total_weight = w.sum()
    node_list = []

    def grow(indices, depth):
        node_id = len(node_list)
        node_w = w[indices]
        node_y = y[indices]
        node_weight = node_w.sum()
        node_value = float((node_w * node_y).sum() / node_weight)
        node_list.append(TreeNode(node_id, node_value,
                                  float(node_weight / total_weight)))

        positive = node_w > 0
        if (depth >= params.max_depth or
                node_weight / total_weight < params.min_samples_split_fraction
                or np.all(node_y[positive] == node_y[positive][0])):
            return node_id

        best_split = find_best_split(X[indices], node_y, node_w,
                                     total_weight, params)
        if best_split is None or best_split[0] <= 0:
            return node_id

        _, feature, threshold = best_split
        go_left = X[indices, feature] <= threshold
        left_child = grow(indices[go_left], depth + 1)
        right_child = grow(indices[~go_left], depth + 1)
        node_list[node_id] = node_list[node_id]._replace(
            split_feature=feature,
            threshold=threshold,
            left_child=left_child,
            right_child=right_child
        )

        return node_id

    grow(np.arange(len(y)), 0)

    return RegressionTree(node_list, X.shape[1])


def tree_predict(tree, x):
    x = tree.check_dimension(x)
    if x.ndim != 1:
        raise ValueError('tree_predict takes a single feature vector')

    return float(tree.predict_batch(x)[0])


def decision_path(tree, x):
    x = tree.check_dimension(x)
    path_list = []
    node = tree.nodes[0]
    while node.split_feature is not None:
        path_list.append(PathNode(node.node_id, node.split_feature,
                                  node.node_value))
        if x[node.split_feature] <= node.threshold:
            node = tree.nodes[node.left_child]
        else:
            node = tree.nodes[node.right_child]

    path_list.append(PathNode(node.node_id, None, node.node_value))

    return path_list


def ensemble_predict(ens, x):
    x = ens.check_dimension(x)
    if x.ndim != 1:
        raise ValueError('ensemble_predict takes a single feature vector')

    return float(ens.predict_batch(x)[0])


def discounts(length):
    return 1.0 / np.log2(np.arange(2, length + 2))


def ndcg(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(scores) != len(labels) or len(scores) == 0:
        raise ValueError('scores and labels must be non-empty and of equal '
                         'length, got {} and {}'.format(len(scores),
                                                        len(labels)))

    gains = 2.0 ** labels - 1.0
    discount = discounts(len(labels))
    ideal_dcg = (np.sort(gains)[::-1] * discount).sum()
    if ideal_dcg == 0:
        return 0.0

    order = np.argsort(-scores, kind='stable')

    return float((gains[order] * discount).sum() / ideal_dcg)


def lambda_gradients(scores, labels, sigma):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(scores) != len(labels):
        raise ValueError('scores and labels differ in length: {} vs '
                         '{}'.format(len(scores), len(labels)))

    output = np.zeros(len(scores))
    if len(scores) < 2:
        return output

    gains = 2.0 ** labels - 1.0
    ideal_dcg = (np.sort(gains)[::-1] * discounts(len(labels))).sum()
    if ideal_dcg == 0:
        return output

    order = np.argsort(-scores, kind='stable')
    rank_discount = np.empty(len(scores))
    rank_discount[order] = discounts(len(scores))

    # |delta NDCG| of swapping i and j, for pairs with label_i > label_j
    delta_ndcg = np.abs(np.subtract.outer(gains, gains) *
                        np.subtract.outer(rank_discount, rank_discount)
                        ) / ideal_dcg
    preferred = np.greater.outer(labels, labels)
    pair_lambda = np.where(
        preferred,
        -sigma * delta_ndcg * expit(-sigma * np.subtract.outer(scores,
                                                               scores)),
        0.0
    )

    output -= pair_lambda.sum(axis=1)
    output += pair_lambda.sum(axis=0)

    return output


def query_data(ds):
    return [(group,
             ds.feature_matrix[group.member_indices],
             ds.labels[group.member_indices])
            for group in split_queries(ds)]


def has_valid_pairs(labels):
    return len(np.unique(labels)) > 1


def fit_lambdamart(groups, params):
    if not any(has_valid_pairs(labels) for _, _, labels in groups):
        raise ValueError('No query has a pair of documents with distinct '
                         'labels')

    check_tree_params(params.tree_params)
    if params.learning_rate <= 0 or params.sigma <= 0:
        raise ValueError('learning_rate and sigma must be positive')

    X = np.vstack([features for _, features, _ in groups])
    offsets = np.cumsum([0] + [len(labels) for _, _, labels in groups])
    scores = np.zeros(X.shape[0])

    tree_list = []
    for round_num in range(params.num_trees):
        lambdas = np.concatenate([
            lambda_gradients(scores[offsets[i]:offsets[i + 1]], labels,
                             params.sigma)
            for i, (_, _, labels) in enumerate(groups)
        ])

        tree = fit_regression_tree(X, lambdas, params.tree_params)
        tree_list.append(tree)
        scores += params.learning_rate * tree.predict_batch(X)
        logger.debug('LambdaMART round %d: %r', round_num + 1, tree)

    return BoostedEnsemble(tree_list, params.learning_rate, 0.0, X.shape[1])


def mean_ndcg(model, ds):
    score_vector = model.predict_batch(ds.feature_matrix)
    ndcg_list = [ndcg(score_vector[group.member_indices],
                      ds.labels[group.member_indices])
                 for group in split_queries(ds)]

    return float(np.mean(ndcg_list))


def model_kind(model):
    if isinstance(model, RegressionTree):
        return MODEL_KIND_TREE
    elif isinstance(model, BoostedEnsemble):
        return MODEL_KIND_LAMBDAMART

    raise ValueError('Unknown model type {}'.format(type(model).__name__))


def model_to_json(model):
    if isinstance(model, RegressionTree):
        model_dict = {'model_kind': MODEL_KIND_TREE,
                      'feature_count': model.feature_count,
                      'learning_rate': 1.0,
                      'init_score': 0.0,
                      'trees': [model._asdict()]}
    else:
        model_dict = {'model_kind': model_kind(model),
                      'feature_count': model.feature_count}
        model_dict.update(model._asdict())

    return dumps(model_dict, indent=1, sort_keys=True) + '\n'


def model_from_json(text):
    model_dict = loads(text)
    feature_count = model_dict['feature_count']
    tree_list = [
        RegressionTree(
            [TreeNode(node['node_id'],
                      node['node_value'],
                      node['sample_fraction'],
                      node.get('split_feature'),
                      node.get('threshold'),
                      node.get('left_child'),
                      node.get('right_child'))
             for node in tree_dict['nodes']],
            feature_count
        )
        for tree_dict in model_dict['trees']
    ]

    if model_dict['model_kind'] == MODEL_KIND_TREE:
        if len(tree_list) != 1:
            raise ValueError('A decision_tree model holds exactly one tree')

        return tree_list[0]
    elif model_dict['model_kind'] == MODEL_KIND_LAMBDAMART:
        return BoostedEnsemble(tree_list, model_dict['learning_rate'],
                               model_dict['init_score'], feature_count)

    raise ValueError('Unknown model_kind {!r}'.format(
        model_dict['model_kind']))


def save_model(model, path):
    with open(path, 'w', encoding='utf-8') as filehandle:
        filehandle.write(model_to_json(model))


def load_model(path):
    with open(path, 'r', encoding='utf-8') as filehandle:
        return model_from_json(filehandle.read())
