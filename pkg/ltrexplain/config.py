"""Resolved experiment configuration and `key = value` config files."""
from argparse import Namespace
from collections import namedtuple

from ltrexplain.explainers import (DISTANCE_KIND_LIST, EUCLIDEAN,
                                   SMAX_FROM_SAMPLES, SMAX_SOURCE_LIST,
                                   ExplainerConfig)
from ltrexplain.metrics import DEFAULT_AUC_K, METRIC_LIST
from ltrexplain.surrogates import (LASSO_ALPHA, LASSO_MAX_ITER, LASSO_TOL,
                                   SVR_C, SVR_EPSILON, SVR_LEARNING_RATE,
                                   SVR_MAX_ITER)
from ltrexplain.trees import (MODEL_KIND_LIST, MODEL_KIND_TREE,
                              LambdaMartParams, TreeParams)

DEFAULT_SEARCH_TRIALS = 100
DEFAULT_NUM_SAMPLES = 2000
DEFAULT_K_VALUES = (1, 5, 10, 20, 30, 40)
DEFAULT_SYNTH_QUERIES = 50
DEFAULT_SYNTH_DOCS = 10
DEFAULT_SYNTH_FEATURES = 10
DEFAULT_SPLIT_FRACTION = 1e-9
DEFAULT_LEAF_FRACTION = 1e-9
DEFAULT_NUM_TREES = 1

COMMENT_CHAR = '#'
TRUE_STRINGS = ('1', 'true', 'yes', 'on')
FALSE_STRINGS = ('0', 'false', 'no', 'off')

EvalConfig = namedtuple(
    'EvalConfig',
    'train valid test synth_queries synth_docs synth_features model_kind '
    'search_trials fixed_params explainer metrics auc_k k_values seed '
    'workers out audit'
)

ConfigEntry = namedtuple('ConfigEntry', 'line_number key value')


def parse_int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(value) for value in text]

    return [int(value) for value in text.split(',') if value.strip()]


def parse_name_list(text):
    if isinstance(text, (list, tuple)):
        return list(text)

    return [value.strip() for value in text.split(',') if value.strip()]


def parse_bool(text):
    lowered = text.strip().lower()
    if lowered in TRUE_STRINGS:
        return True
    elif lowered in FALSE_STRINGS:
        return False

    raise ValueError('Expected a boolean, got {!r}'.format(text))


OPTION_DICT = {
    'seed': {'type': int, 'default': 0,
             'help': 'global seed for every stochastic step'},
    'out': {'default': None, 'help': 'output directory'},
    'train': {'default': None, 'help': 'training LETOR file or URL'},
    'valid': {'default': None, 'help': 'validation LETOR file or URL'},
    'test': {'default': None, 'help': 'test LETOR file or URL'},
    'synth_queries': {'type': int, 'default': DEFAULT_SYNTH_QUERIES,
                      'help': 'synthetic queries per split'},
    'synth_docs': {'type': int, 'default': DEFAULT_SYNTH_DOCS,
                   'help': 'synthetic documents per query'},
    'synth_features': {'type': int, 'default': DEFAULT_SYNTH_FEATURES,
                       'help': 'synthetic feature count'},
    'model_kind': {'choices': MODEL_KIND_LIST, 'default': MODEL_KIND_TREE,
                   'help': 'model to train'},
    'search_trials': {'type': int, 'default': DEFAULT_SEARCH_TRIALS,
                      'help': 'random search trials'},
    'max_depth': {'type': int, 'default': None,
                  'help': 'train with fixed parameters instead of searching'},
    'min_split_fraction': {'type': float, 'default': DEFAULT_SPLIT_FRACTION,
                           'help': 'fixed-parameter minimum split fraction'},
    'min_leaf_fraction': {'type': float, 'default': DEFAULT_LEAF_FRACTION,
                          'help': 'fixed-parameter minimum leaf fraction'},
    'num_trees': {'type': int, 'default': DEFAULT_NUM_TREES,
                  'help': 'fixed-parameter LambdaMART tree count'},
    'num_samples': {'type': int, 'default': DEFAULT_NUM_SAMPLES,
                    'help': 'perturbation samples per explanation'},
    'kernel_width': {'type': float, 'default': None,
                     'help': 'kernel width h (default (0.75*sqrt(d))**2)'},
    'distance': {'choices': DISTANCE_KIND_LIST, 'default': EUCLIDEAN,
                 'help': 'kernel distance'},
    'alpha': {'type': float, 'default': LASSO_ALPHA,
              'help': 'LIRME LASSO L1 strength'},
    'lasso_tol': {'type': float, 'default': LASSO_TOL,
                  'help': 'LASSO convergence tolerance'},
    'lasso_max_iter': {'type': int, 'default': LASSO_MAX_ITER,
                       'help': 'LASSO coordinate sweeps'},
    'svr_c': {'type': float, 'default': SVR_C, 'help': 'EXS SVR C'},
    'svr_epsilon': {'type': float, 'default': SVR_EPSILON,
                    'help': 'EXS SVR tube width'},
    'svr_learning_rate': {'type': float, 'default': SVR_LEARNING_RATE,
                          'help': 'EXS SVR base step size'},
    'svr_max_iter': {'type': int, 'default': SVR_MAX_ITER,
                     'help': 'EXS SVR iterations'},
    'smax_source': {'choices': SMAX_SOURCE_LIST, 'default': SMAX_FROM_SAMPLES,
                    'help': 'where the EXS s_max comes from'},
    'metrics': {'type': parse_name_list, 'default': list(METRIC_LIST),
                'help': 'comma-separated similarity metrics'},
    'auc_k': {'type': int, 'default': DEFAULT_AUC_K,
              'help': 'K for the top-K AUC records'},
    'k': {'type': parse_int_list, 'default': list(DEFAULT_K_VALUES),
          'help': 'comma-separated K values for the sweep'},
    'workers': {'type': int, 'default': 1,
                'help': 'evaluation worker processes'},
    'audit': {'action': 'store_true', 'default': False,
              'help': 'recompute every record and report mismatches'},
    'model': {'default': None, 'help': 'model.json written by fit or eval'},
    'qid': {'default': None, 'help': 'query id of the instance to explain'},
    'docid': {'default': None, 'help': 'document id of the instance'},
    'input': {'default': None, 'help': 'directory written by eval'},
    'tree_dir': {'default': None, 'help': 'eval output for a decision tree'},
    'lambdamart_dir': {'default': None,
                       'help': 'eval output for LambdaMART'}
}

DATA_OPTIONS = ['train', 'valid', 'test', 'synth_queries', 'synth_docs',
                'synth_features']
MODEL_OPTIONS = ['model_kind', 'search_trials', 'max_depth',
                 'min_split_fraction', 'min_leaf_fraction', 'num_trees']
EXPLAINER_OPTIONS = ['num_samples', 'kernel_width', 'distance', 'alpha',
                     'lasso_tol', 'lasso_max_iter', 'svr_c', 'svr_epsilon',
                     'svr_learning_rate', 'svr_max_iter', 'smax_source']

COMMAND_OPTION_DICT = {
    'synth': ['seed', 'out', 'synth_queries', 'synth_docs', 'synth_features'],
    'fit': ['seed', 'out'] + DATA_OPTIONS + MODEL_OPTIONS,
    'explain': (['seed', 'out', 'model', 'test', 'train', 'qid', 'docid',
                 'synth_queries', 'synth_docs', 'synth_features',
                 'metrics', 'auc_k'] + EXPLAINER_OPTIONS),
    'eval': (['seed', 'out'] + DATA_OPTIONS + MODEL_OPTIONS +
             EXPLAINER_OPTIONS + ['metrics', 'auc_k', 'k', 'workers',
                                  'audit']),
    'aggregate': ['seed', 'out', 'input'],
    'sweep-k': ['seed', 'out', 'input', 'k'],
    'depth': ['seed', 'out', 'input'],
    'check': ['seed', 'out', 'tree_dir', 'lambdamart_dir']
}


def flag_name(key):
    return '--' + key.replace('_', '-')


def read_config_file(path):
    try:
        with open(path, 'r', encoding='utf-8') as filehandle:
            text = filehandle.read()
    except OSError as error:
        raise OSError('Could not read config {}: {}'.format(path,
                                                             error)) from error

    return parse_config_text(text)


def parse_config_text(text):
    entry_list = []
    for line_number, line in enumerate(text.splitlines(), 1):
        content = line.split(COMMENT_CHAR, 1)[0].strip()
        if not content:
            continue

        if '=' not in content:
            raise ValueError('Config line {}: expected key = value, got '
                             '{!r}'.format(line_number, line))

        key, value = content.split('=', 1)
        key = key.strip().replace('-', '_')
        if not key:
            raise ValueError('Config line {}: empty key'.format(line_number))

        entry_list.append(ConfigEntry(line_number, key, value.strip()))

    return entry_list


def convert_config_value(entry):
    option = OPTION_DICT[entry.key]
    try:
        if option.get('action') == 'store_true':
            return parse_bool(entry.value)

        value = option['type'](entry.value) if 'type' in option else entry.value
    except ValueError as error:
        raise ValueError('Config line {}: bad value for {}: {}'.format(
            entry.line_number, entry.key, error)) from error

    if 'choices' in option and value not in option['choices']:
        raise ValueError('Config line {}: {} must be one of {}'.format(
            entry.line_number, entry.key, ', '.join(option['choices'])))

    return value


def config_defaults(command, entry_list):
    """Typed defaults for `command` from parsed config entries."""
    allowed = COMMAND_OPTION_DICT[command]
    default_dict = {}
    for entry in entry_list:
        if entry.key not in allowed:
            raise ValueError('Config line {}: unknown key {!r} for {}'.format(
                entry.line_number, entry.key, command))

        default_dict[entry.key] = convert_config_value(entry)

    return default_dict


def complete_namespace(args):
    """Copy of `args` with every known option present; options the command
    does not take keep their built-in defaults."""
    value_dict = {key: option['default']
                  for key, option in OPTION_DICT.items()}
    value_dict.update(vars(args))

    return Namespace(**value_dict)


def fixed_params(args):
    if args.max_depth is None:
        return None

    tree_params = TreeParams(args.max_depth, args.min_split_fraction,
                             args.min_leaf_fraction)
    if args.model_kind == MODEL_KIND_TREE:
        return tree_params

    return LambdaMartParams(args.num_trees, tree_params)


def explainer_from_namespace(args):
    return ExplainerConfig(
        num_samples=args.num_samples,
        kernel_width=args.kernel_width,
        distance_kind=args.distance,
        alpha=args.alpha,
        lasso_tol=args.lasso_tol,
        lasso_max_iter=args.lasso_max_iter,
        svr_c=args.svr_c,
        svr_epsilon=args.svr_epsilon,
        svr_learning_rate=args.svr_learning_rate,
        svr_max_iter=args.svr_max_iter,
        smax_source=args.smax_source,
        seed=args.seed
    )


def check_eval_config(cfg):
    if cfg.search_trials < 1:
        raise ValueError('search_trials must be at least 1')

    if any(k < 1 for k in cfg.k_values) or cfg.auc_k < 1:
        raise ValueError('K values must be at least 1')

    unknown_metrics = [metric for metric in cfg.metrics
                       if metric not in METRIC_LIST]
    if unknown_metrics or not cfg.metrics:
        raise ValueError('Metrics must be a non-empty subset of {}'.format(
            ', '.join(METRIC_LIST)))

    if cfg.workers < 1:
        raise ValueError('workers must be at least 1')

    paths = [cfg.train, cfg.valid, cfg.test]
    if any(paths) and not all(paths):
        raise ValueError('Give all of train, valid and test, or none of them '
                         'for synthetic data')


def eval_config_from_namespace(args):
    args = complete_namespace(args)
    cfg = EvalConfig(
        train=args.train,
        valid=args.valid,
        test=args.test,
        synth_queries=args.synth_queries,
        synth_docs=args.synth_docs,
        synth_features=args.synth_features,
        model_kind=args.model_kind,
        search_trials=args.search_trials,
        fixed_params=fixed_params(args),
        explainer=explainer_from_namespace(args),
        metrics=list(args.metrics),
        auc_k=args.auc_k,
        k_values=list(args.k),
        seed=args.seed,
        workers=args.workers,
        out=args.out,
        audit=args.audit
    )
    check_eval_config(cfg)

    return cfg
