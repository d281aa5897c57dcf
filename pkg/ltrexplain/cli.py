import logging

from argparse import ArgumentParser
from datetime import datetime
from os.path import join
from sys import exc_info, stderr
from traceback import format_exception

from pytz import UTC

from ltrexplain.config import (COMMAND_OPTION_DICT, OPTION_DICT,
                               config_defaults, eval_config_from_namespace,
                               flag_name, read_config_file)
from ltrexplain.experiment import (SYNTH_SPLIT_NAMES, evaluate_explanations,
                                   fit_model, random_search_lambdamart,
                                   random_search_tree, synth_splits)
from ltrexplain.explainers import EXS, LIRME, exs_explain, lirme_explain
from ltrexplain.ground_truth import (FREQUENCY, GT_MODE_LIST, IMPURITY,
                                     attribution, path_depth)
from ltrexplain.letor import (MQ2008_FEATURE_NAMES, compute_feature_stats,
                              format_letor, load_letor)
from ltrexplain.metrics import similarity
from ltrexplain.report import (EXPLANATIONS_FILENAME,
                               MODEL_FILENAME, RECORDS_FILENAME,
                               SUMMARY_FILENAME, aggregate, all_tables,
                               audit_records, depth_buckets, directional_check,
                               read_explanations, read_records, read_table,
                               sweep_k, write_outputs, write_table,
                               write_text)
from ltrexplain.trees import (MODEL_KIND_TREE, load_model, model_kind,
                              model_to_json)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s %(message)s'
SYNTH_FILENAME_DICT = {'train': 'train.txt', 'valid': 'vali.txt',
                       'test': 'test.txt'}
EXPLAIN_FILENAME = 'explanation.txt'

COMMAND_HELP_DICT = {
    'synth': 'write synthetic train/vali/test LETOR files',
    'fit': 'train a model (random search or fixed parameters)',
    'explain': 'explain one instance against both ground truths',
    'eval': 'run the full explanation evaluation',
    'aggregate': 'mean and std per technique, ground truth and metric',
    'sweep-k': 'top-K AUC distributions over a list of K values',
    'depth': 'metric distributions per decision path depth',
    'check': 'directional check of tree against LambdaMART summaries'
}


class UtcFormatter(logging.Formatter):
    def formatTime(self, record, datefmt=None):
        return datetime.fromtimestamp(record.created, UTC).isoformat()


def setup_logging(verbose):
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(UtcFormatter(LOG_FORMAT))

    root_logger = logging.getLogger()
    for old_handler in list(root_logger.handlers):
        root_logger.removeHandler(old_handler)

    root_logger.addHandler(handler)
    root_logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def build_parser():
    common_parser = ArgumentParser(add_help=False)
    common_parser.add_argument('--config', default=None,
                               help='file of key = value option defaults')
    common_parser.add_argument('-v', '--verbose', action='store_true',
                               help='log at DEBUG level')

    parser = ArgumentParser(
        prog='ltrexplain',
        description='Evaluate local explanations of learning-to-rank models'
    )
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    subparser_dict = {}
    for command, key_list in COMMAND_OPTION_DICT.items():
        subparser = subparsers.add_parser(command, parents=[common_parser],
                                          help=COMMAND_HELP_DICT[command])
        for key in key_list:
            subparser.add_argument(flag_name(key), dest=key,
                                   **OPTION_DICT[key])

        subparser_dict[command] = subparser

    return parser, subparser_dict


def require(value, flag):
    if value is None:
        raise ValueError('{} is required'.format(flag))

    return value


def load_splits(cfg):
    if cfg.train:
        return tuple(load_letor(source)
                     for source in (cfg.train, cfg.valid, cfg.test))

    logger.info('Generating synthetic splits: %d queries x %d docs x %d '
                'features', cfg.synth_queries, cfg.synth_docs,
                cfg.synth_features)

    return synth_splits(cfg.seed, cfg.synth_queries, cfg.synth_docs,
                        cfg.synth_features)


def train_model(cfg, train, valid):
    params = cfg.fixed_params
    if params is not None:
        logger.info('Training %s with fixed parameters %s', cfg.model_kind,
                    params)
    elif cfg.model_kind == MODEL_KIND_TREE:
        params, _ = random_search_tree(train, valid, cfg.search_trials,
                                       cfg.seed)
    else:
        params, _ = random_search_lambdamart(train, valid, cfg.search_trials,
                                             cfg.seed)

    return fit_model(cfg.model_kind, train, params)


def run_synth(args):
    out_dir = require(args.out, '--out')
    for name, ds in zip(SYNTH_SPLIT_NAMES,
                        synth_splits(args.seed, args.synth_queries,
                                     args.synth_docs, args.synth_features)):
        write_text(format_letor(ds), SYNTH_FILENAME_DICT[name], out_dir)

    return 0


def run_fit(args):
    cfg = eval_config_from_namespace(args)
    out_dir = require(cfg.out, '--out')
    train, valid, _ = load_splits(cfg)
    model = train_model(cfg, train, valid)
    write_text(model_to_json(model), MODEL_FILENAME, out_dir)

    return 0


def feature_names(feature_count):
    if feature_count == len(MQ2008_FEATURE_NAMES):
        return list(MQ2008_FEATURE_NAMES)

    return ['f{}'.format(k + 1) for k in range(feature_count)]


def find_instance_index(ds, qid, docid):
    if qid is None and docid is None:
        return 0

    for index, instance in enumerate(ds):
        if ((qid is None or instance.qid == qid) and
                (docid is None or instance.docid == docid)):
            return index

    raise ValueError('No instance with qid {} and docid {}'.format(qid,
                                                                   docid))


def explanation_report(model, ds, index, stats, cfg):
    instance = ds[index]
    query_features = ds.feature_matrix[[i for i, qid in enumerate(ds.qids)
                                        if qid == instance.qid]]

    weight_dict = {}
    for explanation in (
            lirme_explain(model, instance.features, stats, cfg.explainer,
                          instance.qid, instance.docid),
            exs_explain(model, query_features, instance.features, stats,
                        cfg.explainer, instance.qid, instance.docid)):
        weight_dict[explanation.technique] = explanation.weights

    ground_truth_dict = {mode: attribution(model, instance.features, mode)
                         for mode in GT_MODE_LIST}

    line_list = [
        'qid {} docid {} label {} model {}'.format(instance.qid,
                                                   instance.docid,
                                                   instance.label,
                                                   model_kind(model)),
        'predicted score {:.6f} path depth {:.4g} impurity bias {:.6f}'.format(
            float(model.predict_batch(instance.features)[0]),
            path_depth(model, instance.features),
            ground_truth_dict[IMPURITY].bias
        ),
        '',
        '{:<20} {:>12} {:>12} {:>12} {:>12} {:>12}'.format(
            'feature', 'value', 'LIRME', 'EXS', IMPURITY, FREQUENCY)
    ]
    for k, name in enumerate(feature_names(ds.feature_count)):
        line_list.append(
            '{:<20} {:>12.6f} {:>12.6f} {:>12.6f} {:>12.6f} {:>12.6f}'.format(
                name, instance.features[k], weight_dict[LIRME][k],
                weight_dict[EXS][k], ground_truth_dict[IMPURITY].scores[k],
                ground_truth_dict[FREQUENCY].scores[k]
            )
        )

    line_list += ['', '{:<8} {:<10} {:<10} {:>10}'.format(
        'technique', 'gt_mode', 'metric', 'value')]
    for technique, weights in weight_dict.items():
        for mode in GT_MODE_LIST:
            for metric in cfg.metrics:
                result = similarity(metric, weights,
                                    ground_truth_dict[mode].scores, cfg.auc_k)
                value_str = ('{:.6f}'.format(result.value) if result.defined
                             else 'undefined')
                line_list.append('{:<8} {:<10} {:<10} {:>10}'.format(
                    technique, mode, metric, value_str))

    return '\n'.join(line_list) + '\n'


def run_explain(args):
    cfg = eval_config_from_namespace(args)
    model = load_model(require(args.model, '--model'))
    if cfg.test:
        train = load_letor(require(cfg.train, '--train'))
        test = load_letor(cfg.test)
    else:
        train, _, test = synth_splits(cfg.seed, cfg.synth_queries,
                                      cfg.synth_docs, cfg.synth_features)

    index = find_instance_index(test, args.qid, args.docid)
    text = explanation_report(model, test, index,
                              compute_feature_stats(train), cfg)
    if cfg.out:
        write_text(text, EXPLAIN_FILENAME, cfg.out)
    else:
        print(text, end='')

    return 0


def run_eval(args):
    cfg = eval_config_from_namespace(args)
    out_dir = require(cfg.out, '--out')
    train, valid, test = load_splits(cfg)
    model = train_model(cfg, train, valid)

    result = evaluate_explanations(model, test, compute_feature_stats(train),
                                   cfg)
    tables = all_tables(result.rows, result.records, cfg.k_values)
    write_outputs(result.rows, result.records, tables, out_dir,
                  result.skips)
    write_text(model_to_json(model), MODEL_FILENAME, out_dir)

    if cfg.audit:
        mismatch_list = audit_records(result.rows, result.records, cfg.auc_k)
        logger.info('Audit found %d mismatches in %d records',
                    len(mismatch_list), len(result.records))
        if mismatch_list:
            return 1

    return 0


def run_aggregate(args):
    in_dir = require(args.input, '--input')
    table = aggregate(read_records(join(in_dir, RECORDS_FILENAME)))
    write_table(table, 'summary', args.out or in_dir)

    return 0


def run_sweep_k(args):
    in_dir = require(args.input, '--input')
    table = sweep_k(read_explanations(join(in_dir, EXPLANATIONS_FILENAME)),
                    args.k)
    write_table(table, 'sweep_k', args.out or in_dir)

    return 0


def run_depth(args):
    in_dir = require(args.input, '--input')
    table = depth_buckets(
        read_explanations(join(in_dir, EXPLANATIONS_FILENAME)),
        read_records(join(in_dir, RECORDS_FILENAME))
    )
    write_table(table, 'depth', args.out or in_dir)

    return 0


def run_check(args):
    tree_dir = require(args.tree_dir, '--tree-dir')
    lambdamart_dir = require(args.lambdamart_dir, '--lambdamart-dir')
    result = directional_check(read_table(join(tree_dir, SUMMARY_FILENAME)),
                               read_table(join(lambdamart_dir,
                                               SUMMARY_FILENAME)))
    text = ''.join(message + '\n' for message in result.messages)
    if args.out:
        write_text(text, 'check.txt', args.out)
    else:
        print(text, end='')

    return 0


COMMAND_FUNCTION_DICT = {'synth': run_synth,
                         'fit': run_fit,
                         'explain': run_explain,
                         'eval': run_eval,
                         'aggregate': run_aggregate,
                         'sweep-k': run_sweep_k,
                         'depth': run_depth,
                         'check': run_check}


def main(argv=None):
    parser, subparser_dict = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        if args.config:
            subparser_dict[args.command].set_defaults(
                **config_defaults(args.command, read_config_file(args.config))
            )
            args = parser.parse_args(argv)

        return COMMAND_FUNCTION_DICT[args.command](args)
    except (ValueError, OSError) as error:
        exc_type, exc_value, exc_traceback = exc_info()
        lines = format_exception(exc_type, exc_value, exc_traceback)
        logger.debug(''.join(lines))
        logger.error('%s failed: %s', args.command, error)

        return 1
