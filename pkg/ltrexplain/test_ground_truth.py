import numpy as np
import pytest

from ltrexplain.conftest import (BM25_BODY, BM25_TITLE, LMIR_ABS_TITLE,
                                 LMIRJM_URL, WORKED_FEATURE_COUNT)
from ltrexplain.experiment import sample_tree_params
from ltrexplain.ground_truth import (FREQUENCY, IMPURITY, attribution,
                                     ensemble_attribution,
                                     frequency_attribution,
                                     impurity_attribution, path_depth)
from ltrexplain.letor import synth_dataset
from ltrexplain.trees import (BoostedEnsemble, RegressionTree, TreeNode,
                              decision_path, fit_regression_tree,
                              tree_predict)


def stump(feature, feature_count, low=0.0, high=1.0):
    return RegressionTree([TreeNode(0, (low + high) / 2.0, 1.0, feature, 0.5,
                                    1, 2),
                           TreeNode(1, low, 0.5),
                           TreeNode(2, high, 0.5)], feature_count)


def repeated_feature_tree():
    return RegressionTree([TreeNode(0, 0.5, 1.0, 0, 0.5, 1, 4),
                           TreeNode(1, 0.7, 0.5, 0, 0.25, 2, 3),
                           TreeNode(2, 0.9, 0.25),
                           TreeNode(3, 0.65, 0.25),
                           TreeNode(4, 0.3, 0.5)], 1)


def depth_two_tree(feature_count):
    return RegressionTree([TreeNode(0, 0.5, 1.0, 0, 0.5, 1, 4),
                           TreeNode(1, 0.4, 0.5, 1, 0.5, 2, 3),
                           TreeNode(2, 0.3, 0.25),
                           TreeNode(3, 0.5, 0.25),
                           TreeNode(4, 0.6, 0.5)], feature_count)


def test_worked_impurity_attribution(worked_tree, worked_instance):
    result = impurity_attribution(worked_tree, worked_instance)

    assert result.mode == IMPURITY
    assert result.bias == 0.375
    expected = np.zeros(WORKED_FEATURE_COUNT)
    expected[LMIRJM_URL] = 0.231
    expected[LMIR_ABS_TITLE] = -0.074
    expected[BM25_BODY] = -0.074
    expected[BM25_TITLE] = 0.057
    assert np.abs(result.scores - expected).max() <= 1e-12
    assert np.count_nonzero(result.scores) == 4
    assert result.bias + result.scores.sum() == pytest.approx(0.515,
                                                              abs=1e-12)


def test_worked_frequency_attribution(worked_tree, worked_instance):
    result = frequency_attribution(worked_tree, worked_instance)

    expected = np.zeros(WORKED_FEATURE_COUNT)
    expected[[LMIRJM_URL, LMIR_ABS_TITLE, BM25_BODY, BM25_TITLE]] = 0.25
    assert result.bias == 0.0
    assert list(result.scores) == list(expected)


def test_worked_path_depth(worked_tree, worked_instance):
    assert path_depth(worked_tree, worked_instance) == 4.0


def test_leaf_only_tree():
    tree = RegressionTree([TreeNode(0, 0.8, 1.0)], 3)
    x = [0.1, 0.2, 0.3]

    impurity = impurity_attribution(tree, x)
    frequency = frequency_attribution(tree, x)

    assert impurity.bias == 0.8
    assert not impurity.scores.any()
    assert not frequency.scores.any()
    assert path_depth(tree, x) == 0.0


def test_impurity_accumulates_repeated_feature():
    result = impurity_attribution(repeated_feature_tree(), [0.3])

    assert result.scores[0] == pytest.approx(0.15, abs=1e-12)


def test_frequency_counts_repeated_feature():
    tree = RegressionTree([TreeNode(0, 0.5, 1.0, 1, 0.5, 1, 6),
                           TreeNode(1, 0.4, 0.75, 1, 0.25, 2, 5),
                           TreeNode(2, 0.3, 0.5, 2, 0.5, 3, 4),
                           TreeNode(3, 0.2, 0.25),
                           TreeNode(4, 0.4, 0.25),
                           TreeNode(5, 0.6, 0.25),
                           TreeNode(6, 0.8, 0.25)], 3)

    result = frequency_attribution(tree, [0.0, 0.1, 0.9])

    assert result.scores == pytest.approx([0.0, 2.0 / 3.0, 1.0 / 3.0])


def test_dimension_mismatch(worked_tree):
    with pytest.raises(ValueError):
        impurity_attribution(worked_tree, [0.0])

    with pytest.raises(ValueError):
        frequency_attribution(worked_tree, [0.0])


def test_unknown_mode(worked_tree, worked_instance):
    with pytest.raises(ValueError):
        attribution(worked_tree, worked_instance, 'gain')


def test_ensemble_of_identical_trees(worked_tree, worked_instance):
    ens = BoostedEnsemble([worked_tree, worked_tree], 0.1, 0.0,
                          WORKED_FEATURE_COUNT)

    for mode in (IMPURITY, FREQUENCY):
        single = attribution(worked_tree, worked_instance, mode)
        result = ensemble_attribution(ens, worked_instance, mode)
        assert result.bias == pytest.approx(single.bias)
        assert result.scores == pytest.approx(single.scores)


def test_single_tree_ensemble_is_exact(worked_tree, worked_instance):
    ens = BoostedEnsemble([worked_tree], 0.1, 0.0, WORKED_FEATURE_COUNT)

    for mode in (IMPURITY, FREQUENCY):
        single = attribution(worked_tree, worked_instance, mode)
        result = attribution(ens, worked_instance, mode)
        assert result.bias == single.bias
        assert list(result.scores) == list(single.scores)


def test_ensemble_disjoint_features():
    ens = BoostedEnsemble([stump(0, 2), stump(1, 2)], 0.1, 0.0, 2)

    result = ensemble_attribution(ens, [0.9, 0.1], FREQUENCY)

    assert list(result.scores) == [0.5, 0.5]


def test_ensemble_frequency_sums_to_one():
    rng = np.random.default_rng(2)
    ens = BoostedEnsemble([stump(0, 3), stump(1, 3),
                           stump(2, 3)], 0.1, 0.0, 3)
    for x in rng.random((20, 3)):
        assert ensemble_attribution(ens, x, FREQUENCY).scores.sum() == \
            pytest.approx(1.0)


def test_empty_ensemble():
    ens = BoostedEnsemble([], 0.1, 0.0, 2)

    with pytest.raises(ValueError):
        ensemble_attribution(ens, [0.0, 0.0], IMPURITY)

    with pytest.raises(ValueError):
        path_depth(ens, [0.0, 0.0])


def test_ensemble_path_depth(worked_tree, worked_instance):
    ens = BoostedEnsemble([depth_two_tree(WORKED_FEATURE_COUNT), worked_tree],
                          0.1, 0.0, WORKED_FEATURE_COUNT)

    assert path_depth(ens, worked_instance) == 3.0


def test_impurity_sum_identity_on_fitted_trees():
    ds = synth_dataset(21, 50, 10, 6)
    rng = np.random.default_rng(21)
    for _ in range(10):
        tree = fit_regression_tree(ds.feature_matrix, ds.labels,
                                   sample_tree_params(rng))
        for x in ds.feature_matrix:
            result = impurity_attribution(tree, x)
            assert abs(result.bias + result.scores.sum() -
                       tree_predict(tree, x)) <= 1e-9


def test_support_and_frequency_structure():
    ds = synth_dataset(4, 20, 10, 5)
    tree = fit_regression_tree(ds.feature_matrix, ds.labels,
                               sample_tree_params(np.random.default_rng(4)))
    shifted = RegressionTree([node._replace(node_value=node.node_value * 3.0 +
                                            1.0)
                              for node in tree.nodes], tree.feature_count)

    for x in ds.feature_matrix[:50]:
        path_features = {node.split_feature
                         for node in decision_path(tree, x)[:-1]}
        impurity = impurity_attribution(tree, x)
        frequency = frequency_attribution(tree, x)
        for f in np.flatnonzero(impurity.scores):
            assert f in path_features
        assert (frequency.scores >= 0).all()
        assert frequency.scores.sum() == pytest.approx(
            1.0 if path_features else 0.0)
        assert list(frequency_attribution(shifted, x).scores) == list(
            frequency.scores)
