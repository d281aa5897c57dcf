from argparse import Namespace

import pytest

from ltrexplain.config import (DEFAULT_K_VALUES, DEFAULT_NUM_SAMPLES,
                               ConfigEntry, config_defaults,
                               eval_config_from_namespace, parse_bool,
                               parse_config_text, parse_int_list,
                               read_config_file)
from ltrexplain.explainers import COSINE
from ltrexplain.metrics import METRIC_LIST
from ltrexplain.trees import (MODEL_KIND_LAMBDAMART, LambdaMartParams,
                              TreeParams)

CONFIG_TEXT = """
# evaluation defaults
num-samples = 50
metrics = spearman, topk_auc   # two of three

k = 1,5
audit = yes
distance = cosine
"""


def test_parse_config_text():
    entry_list = parse_config_text(CONFIG_TEXT)

    assert entry_list[0] == ConfigEntry(3, 'num_samples', '50')
    assert [entry.key for entry in entry_list] == ['num_samples', 'metrics',
                                                   'k', 'audit', 'distance']
    assert entry_list[1].value == 'spearman, topk_auc'


def test_parse_config_text_rejects_bare_words():
    with pytest.raises(ValueError) as error_info:
        parse_config_text('seed = 1\nworkers\n')

    assert 'line 2' in str(error_info.value)


def test_config_defaults_are_typed():
    default_dict = config_defaults('eval', parse_config_text(CONFIG_TEXT))

    assert default_dict == {'num_samples': 50,
                            'metrics': ['spearman', 'topk_auc'],
                            'k': [1, 5],
                            'audit': True,
                            'distance': COSINE}


def test_config_defaults_unknown_key_names_line():
    with pytest.raises(ValueError) as error_info:
        config_defaults('aggregate', parse_config_text('seed = 1\n'
                                                       'num_samples = 5\n'))

    assert 'line 2' in str(error_info.value)
    assert 'num_samples' in str(error_info.value)


@pytest.mark.parametrize('text', ['num_samples = many',
                                  'distance = manhattan',
                                  'audit = maybe'])
def test_config_defaults_bad_values(text):
    with pytest.raises(ValueError) as error_info:
        config_defaults('eval', parse_config_text(text))

    assert 'line 1' in str(error_info.value)


def test_read_config_file(tmp_path):
    path = tmp_path / 'eval.cfg'
    path.write_text('seed = 9\n', encoding='utf-8')

    assert read_config_file(str(path)) == [ConfigEntry(1, 'seed', '9')]

    with pytest.raises(OSError):
        read_config_file(str(tmp_path / 'missing.cfg'))


@pytest.mark.parametrize('text,expected', [('true', True), ('On', True),
                                           ('1', True), ('no', False),
                                           (' FALSE ', False)])
def test_parse_bool(text, expected):
    assert parse_bool(text) is expected


def test_parse_int_list():
    assert parse_int_list('1, 5,10,') == [1, 5, 10]
    assert parse_int_list([3, 4]) == [3, 4]


def test_eval_config_defaults():
    cfg = eval_config_from_namespace(Namespace())

    assert cfg.explainer.num_samples == DEFAULT_NUM_SAMPLES
    assert cfg.metrics == METRIC_LIST
    assert cfg.k_values == list(DEFAULT_K_VALUES)
    assert cfg.fixed_params is None
    assert cfg.workers == 1
    assert not cfg.audit


def test_eval_config_fixed_params():
    tree_cfg = eval_config_from_namespace(Namespace(max_depth=3))
    ensemble_cfg = eval_config_from_namespace(
        Namespace(max_depth=3, num_trees=2, model_kind=MODEL_KIND_LAMBDAMART))

    assert tree_cfg.fixed_params == TreeParams(3, 1e-9, 1e-9)
    assert ensemble_cfg.fixed_params == LambdaMartParams(
        2, TreeParams(3, 1e-9, 1e-9))


def test_eval_config_seed_reaches_explainer():
    assert eval_config_from_namespace(Namespace(seed=17)).explainer.seed == 17


@pytest.mark.parametrize('option_dict', [
    {'metrics': ['kendall']},
    {'metrics': []},
    {'workers': 0},
    {'k': [0, 5]},
    {'search_trials': 0},
    {'train': 'train.txt'}
])
def test_eval_config_validation(option_dict):
    with pytest.raises(ValueError):
        eval_config_from_namespace(Namespace(**option_dict))
