import logging

from collections import namedtuple
from functools import partial
from multiprocessing import Pool

import numpy as np

from ltrexplain.explainers import (EXS, LIRME, TECHNIQUE_LIST,
                                   ExplanationError, exs_explain,
                                   lirme_explain)
from ltrexplain.ground_truth import (FREQUENCY, GT_MODE_LIST, IMPURITY,
                                     attribution, path_depth)
from ltrexplain.letor import split_queries, synth_dataset
from ltrexplain.metrics import similarity
from ltrexplain.trees import (MODEL_KIND_LAMBDAMART, MODEL_KIND_TREE,
                              LambdaMartParams, TreeParams, fit_lambdamart,
                              fit_regression_tree, mean_ndcg, model_kind,
                              query_data)

logger = logging.getLogger(__name__)

SPLIT_FRACTION_RANGE = (0.1, 1.0)
LEAF_FRACTION_RANGE = (0.1, 0.5)
TREE_DEPTH_RANGE = (1, 20)
LAMBDAMART_DEPTH_RANGE = (5, 40)
LAMBDAMART_TREES_RANGE = (1, 5)
SYNTH_SPLIT_NAMES = ('train', 'valid', 'test')
CHUNKS_PER_WORKER = 4

SearchTrial = namedtuple('SearchTrial', 'params score')

ExplanationRow = namedtuple(
    'ExplanationRow',
    'qid docid technique model weights gt_impurity gt_impurity_bias '
    'gt_frequency path_depth predicted_score'
)

EvalRecord = namedtuple(
    'EvalRecord',
    'qid docid technique gt_mode metric value defined path_depth'
)

SkipRecord = namedtuple('SkipRecord', 'qid docid technique reason')

EvaluationResult = namedtuple('EvaluationResult', 'rows records skips')

EvalContext = namedtuple(
    'EvalContext',
    'model model_kind test query_features stats explainer metrics auc_k'
)


def synth_splits(seed, num_queries, docs_per_query, feature_count):
    """Train, validation and test sets cut by query from one synthetic draw,
    so all three share the same labelling function."""
    ds = synth_dataset(seed, num_queries * len(SYNTH_SPLIT_NAMES),
                       docs_per_query, feature_count)
    group_list = split_queries(ds)

    split_list = []
    for split_num in range(len(SYNTH_SPLIT_NAMES)):
        member_list = []
        for group in group_list[split_num * num_queries:
                                (split_num + 1) * num_queries]:
            member_list += group.member_indices

        split_list.append(ds.subset(member_list))

    return tuple(split_list)


def sample_tree_params(rng, depth_range=TREE_DEPTH_RANGE):
    split_fraction = float(rng.uniform(*SPLIT_FRACTION_RANGE))
    leaf_fraction = float(rng.uniform(*LEAF_FRACTION_RANGE))
    max_depth = int(rng.integers(depth_range[0], depth_range[1] + 1))

    return TreeParams(max_depth, split_fraction, leaf_fraction)


def sample_lambdamart_params(rng):
    tree_params = sample_tree_params(rng, LAMBDAMART_DEPTH_RANGE)
    num_trees = int(rng.integers(LAMBDAMART_TREES_RANGE[0],
                                 LAMBDAMART_TREES_RANGE[1] + 1))

    return LambdaMartParams(num_trees, tree_params)


def fit_tree_on_labels(train, params):
    return fit_regression_tree(train.feature_matrix, train.labels, params)


def fit_lambdamart_on(train, params):
    return fit_lambdamart(query_data(train), params)


def mean_squared_error(model, ds):
    residual = model.predict_batch(ds.feature_matrix) - ds.labels

    return float(np.mean(residual ** 2))


def check_search_inputs(train, valid, trials):
    if len(train) == 0 or len(valid) == 0:
        raise ValueError('Random search needs non-empty train and validation '
                         'sets')

    if trials < 1:
        raise ValueError('Random search needs at least one trial')


def run_tree_search(train, valid, trials, seed):
    check_search_inputs(train, valid, trials)
    rng = np.random.default_rng(seed)

    trial_list = []
    for trial_num in range(trials):
        params = sample_tree_params(rng)
        score = mean_squared_error(fit_tree_on_labels(train, params), valid)
        logger.debug('Tree trial %d: %s -> validation MSE %.6f',
                     trial_num + 1, params, score)
        trial_list.append(SearchTrial(params, score))

    return trial_list


def random_search_tree(train, valid, trials, seed):
    trial_list = run_tree_search(train, valid, trials, seed)
    best_trial = trial_list[0]
    for trial in trial_list[1:]:
        if trial.score < best_trial.score:
            best_trial = trial

    logger.info('Best decision tree %s with validation MSE %.6f',
                best_trial.params, best_trial.score)

    return best_trial.params, best_trial.score


def run_lambdamart_search(train, valid, trials, seed):
    check_search_inputs(train, valid, trials)
    rng = np.random.default_rng(seed)

    trial_list = []
    for trial_num in range(trials):
        params = sample_lambdamart_params(rng)
        score = mean_ndcg(fit_lambdamart_on(train, params), valid)
        logger.debug('LambdaMART trial %d: %s -> validation NDCG %.6f',
                     trial_num + 1, params, score)
        trial_list.append(SearchTrial(params, score))

    return trial_list


def random_search_lambdamart(train, valid, trials, seed):
    trial_list = run_lambdamart_search(train, valid, trials, seed)
    best_trial = trial_list[0]
    for trial in trial_list[1:]:
        if trial.score > best_trial.score:
            best_trial = trial

    logger.info('Best LambdaMART %s with validation NDCG %.6f',
                best_trial.params, best_trial.score)

    return best_trial.params, best_trial.score


def fit_model(kind, train, params):
    if kind == MODEL_KIND_TREE:
        return fit_tree_on_labels(train, params)
    elif kind == MODEL_KIND_LAMBDAMART:
        return fit_lambdamart_on(train, params)

    raise ValueError('Unknown model kind {!r}'.format(kind))


def explain_instance(technique, context, index):
    instance = context.test[index]
    if technique == LIRME:
        return lirme_explain(context.model, instance.features, context.stats,
                             context.explainer, instance.qid, instance.docid)
    elif technique == EXS:
        return exs_explain(context.model,
                           context.query_features[instance.qid],
                           instance.features, context.stats,
                           context.explainer, instance.qid, instance.docid)

    raise ValueError('Unknown technique {!r}'.format(technique))


def evaluate_instance(context, index):
    instance = context.test[index]
    x = instance.features
    ground_truth_dict = {mode: attribution(context.model, x, mode)
                         for mode in GT_MODE_LIST}
    depth = path_depth(context.model, x)
    predicted_score = float(context.model.predict_batch(x)[0])

    row_list = []
    record_list = []
    skip_list = []
    for technique in TECHNIQUE_LIST:
        try:
            explanation = explain_instance(technique, context, index)
        except ExplanationError as error:
            skip_list.append(SkipRecord(instance.qid, instance.docid,
                                        technique, str(error)))
            continue

        row_list.append(ExplanationRow(
            instance.qid,
            instance.docid,
            technique,
            context.model_kind,
            explanation.weights,
            ground_truth_dict[IMPURITY].scores,
            float(ground_truth_dict[IMPURITY].bias),
            ground_truth_dict[FREQUENCY].scores,
            depth,
            predicted_score
        ))

        for mode in GT_MODE_LIST:
            for metric in context.metrics:
                result = similarity(metric, explanation.weights,
                                    ground_truth_dict[mode].scores,
                                    context.auc_k)
                record_list.append(EvalRecord(instance.qid,
                                              instance.docid,
                                              technique,
                                              mode,
                                              metric,
                                              result.value,
                                              result.defined,
                                              depth))

    return row_list, record_list, skip_list


def instance_key(item):
    return (item.qid, item.docid, item.technique)


def evaluate_explanations(model, test, stats, cfg):
    if len(test) == 0:
        raise ValueError('Cannot evaluate explanations on an empty test set')

    context = EvalContext(
        model,
        model_kind(model),
        test,
        {group.qid: test.feature_matrix[group.member_indices]
         for group in split_queries(test)},
        stats,
        cfg.explainer,
        list(cfg.metrics),
        cfg.auc_k
    )

    logger.info('Explaining %d test instances with %s on %d worker(s)',
                len(test), ', '.join(TECHNIQUE_LIST), cfg.workers)

    evaluate = partial(evaluate_instance, context)
    index_list = list(range(len(test)))
    if cfg.workers > 1:
        chunk_size = max(1, len(index_list) //
                         (cfg.workers * CHUNKS_PER_WORKER))
        with Pool(cfg.workers) as process_pool:
            result_list = process_pool.map(evaluate, index_list, chunk_size)
    else:
        result_list = [evaluate(index) for index in index_list]

    row_list = []
    record_list = []
    skip_list = []
    for rows, records, skips in result_list:
        row_list += rows
        record_list += records
        skip_list += skips

    row_list.sort(key=instance_key)
    record_list.sort(key=instance_key)
    skip_list.sort(key=instance_key)

    for skip in skip_list:
        logger.warning('Skipped %s for qid %s docid %s: %s', skip.technique,
                       skip.qid, skip.docid, skip.reason)

    logger.info('Produced %d explanation rows and %d records (%d skipped)',
                len(row_list), len(record_list), len(skip_list))

    return EvaluationResult(row_list, record_list, skip_list)
