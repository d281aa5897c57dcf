import numpy as np
import pytest

from ltrexplain.experiment import synth_splits
from ltrexplain.letor import MQ2008_FEATURE_NAMES
from ltrexplain.trees import RegressionTree, TreeNode

LMIRJM_URL = MQ2008_FEATURE_NAMES.index('LMIRJM-URL')
LMIR_ABS_TITLE = MQ2008_FEATURE_NAMES.index('LMIR-ABS-Title')
BM25_BODY = MQ2008_FEATURE_NAMES.index('BM25-Body')
BM25_TITLE = MQ2008_FEATURE_NAMES.index('BM25-Title')
WORKED_FEATURE_COUNT = len(MQ2008_FEATURE_NAMES)


def build_worked_tree():
    """Thirteen-node tree whose path for the worked instance runs
    LMIRJM-URL, LMIR-ABS-Title, BM25-Body, BM25-Title."""
    node_list = [
        TreeNode(0, 0.375, 1.0, LMIRJM_URL, 0.5, 1, 6),
        TreeNode(1, 0.298, 0.75, 0, 0.5, 2, 5),
        TreeNode(2, 0.197, 0.5, 1, 0.5, 3, 4),
        TreeNode(3, 0.1, 0.25),
        TreeNode(4, 0.294, 0.25),
        TreeNode(5, 0.5, 0.25),
        TreeNode(6, 0.606, 0.25, LMIR_ABS_TITLE, 0.1, 7, 12),
        TreeNode(7, 0.532, 0.2, BM25_BODY, 0.5, 8, 9),
        TreeNode(8, 0.606, 0.1),
        TreeNode(9, 0.458, 0.1, BM25_TITLE, 0.5, 10, 11),
        TreeNode(10, 0.401, 0.05),
        TreeNode(11, 0.515, 0.05),
        TreeNode(12, 0.902, 0.05)
    ]

    return RegressionTree(node_list, WORKED_FEATURE_COUNT)


def build_worked_instance():
    x = np.zeros(WORKED_FEATURE_COUNT)
    x[LMIRJM_URL] = 0.786
    x[LMIR_ABS_TITLE] = 0.0
    x[BM25_BODY] = 0.780
    x[BM25_TITLE] = 0.722

    return x


@pytest.fixture
def worked_tree():
    return build_worked_tree()


@pytest.fixture
def worked_instance():
    return build_worked_instance()


@pytest.fixture(scope='session')
def small_splits():
    return synth_splits(7, 8, 6, 5)
