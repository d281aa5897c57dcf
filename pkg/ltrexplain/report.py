"""Aggregation tables, persisted outputs and consistency checks.

Every table is a pandas DataFrame with one row per cell; value summaries use
population statistics and linear-interpolation quartiles.
"""
import csv
import logging

from collections import namedtuple
from io import StringIO
from json import dumps, loads
from math import floor, isnan
from os import makedirs, replace, remove
from os.path import dirname, exists, join
from tempfile import NamedTemporaryFile

import numpy as np
import pandas as pd

from ltrexplain.experiment import EvalRecord, ExplanationRow
from ltrexplain.ground_truth import FREQUENCY, IMPURITY
from ltrexplain.letor import QUARTILE_PROBABILITIES, format_real
from ltrexplain.metrics import DEFAULT_AUC_K, SPEARMAN, similarity, topk_auc
from ltrexplain.trees import MODEL_KIND_TREE

logger = logging.getLogger(__name__)

EXPLANATIONS_FILENAME = 'explanations.jsonl'
RECORDS_FILENAME = 'records.csv'
SUMMARY_FILENAME = 'summary.csv'
SWEEP_FILENAME = 'sweep_k.csv'
DEPTH_FILENAME = 'depth.csv'
SKIPS_FILENAME = 'skips.log'
MODEL_FILENAME = 'model.json'

TABLE_FILENAME_DICT = {'summary': SUMMARY_FILENAME,
                       'sweep_k': SWEEP_FILENAME,
                       'depth': DEPTH_FILENAME}

RECORD_HEADER = ['qid', 'docid', 'technique', 'gt_mode', 'metric', 'value',
                 'defined', 'path_depth']
ROW_VECTOR_FIELDS = ['weights', 'gt_impurity', 'gt_frequency']
ROW_REAL_FIELDS = ['gt_impurity_bias', 'path_depth', 'predicted_score']
CELL_KEYS = ['technique', 'gt_mode', 'metric']
SWEEP_KEYS = ['technique', 'gt_mode', 'k']
DEPTH_KEYS = ['technique', 'gt_mode', 'metric', 'depth_bucket']

SPEARMAN_RANGE = (0.1, 0.5)

CheckResult = namedtuple('CheckResult', 'passed messages')


def population_std(series):
    return series.std(ddof=0)


def first_quartile(series):
    return series.quantile(QUARTILE_PROBABILITIES[0])


def median(series):
    return series.quantile(QUARTILE_PROBABILITIES[1])


def third_quartile(series):
    return series.quantile(QUARTILE_PROBABILITIES[2])


DISTRIBUTION_AGGREGATIONS = {'mean': 'mean',
                             'std_pop': population_std,
                             'min': 'min',
                             'q1': first_quartile,
                             'median': median,
                             'q3': third_quartile,
                             'max': 'max'}


def count_undefined(defined):
    return int((~defined).sum())


def summarize(frame, keys, aggregations):
    """Count defined/undefined values per cell, then summarize the defined
    ones. Cells with no defined value keep NaN statistics."""
    frame = frame.assign(defined=frame['defined'].astype(bool))
    counts = frame.groupby(keys).agg(
        n_defined=('defined', 'sum'),
        n_undefined=('defined', count_undefined)
    )
    statistics = (frame[frame['defined']]
                  .groupby(keys)['value']
                  .agg(**aggregations))
    table = counts.join(statistics)
    table['n_defined'] = table['n_defined'].astype(int)

    return table.reset_index()


def records_frame(records):
    return pd.DataFrame([record._asdict() for record in records],
                        columns=list(EvalRecord._fields))


def aggregate(records):
    if not records:
        raise ValueError('Cannot aggregate an empty record list')

    table = summarize(records_frame(records), CELL_KEYS,
                      {'mean': 'mean', 'std_pop': population_std})

    return table[CELL_KEYS + ['mean', 'std_pop', 'n_defined', 'n_undefined']]


def ground_truth_vectors(row):
    return {IMPURITY: row.gt_impurity, FREQUENCY: row.gt_frequency}


def sweep_k(rows, k_values):
    if not rows or not k_values:
        raise ValueError('sweep_k needs explanation rows and K values')

    entry_list = []
    for k in sorted(set(int(k) for k in k_values)):
        for row in rows:
            for mode, ground_truth in ground_truth_vectors(row).items():
                result = topk_auc(row.weights, ground_truth, k)
                entry_list.append({'technique': row.technique,
                                   'gt_mode': mode,
                                   'k': k,
                                   'value': result.value,
                                   'defined': result.defined})

    return summarize(pd.DataFrame(entry_list), SWEEP_KEYS,
                     DISTRIBUTION_AGGREGATIONS)


def depth_bucket(depth, kind):
    if kind == MODEL_KIND_TREE:
        return int(depth)

    return int(floor(depth + 0.5))


def depth_buckets(rows, records):
    if not rows or not records:
        raise ValueError('depth_buckets needs explanation rows and records')

    kind_dict = {(row.qid, row.docid, row.technique): row.model
                 for row in rows}
    frame = records_frame(records)
    frame['depth_bucket'] = [
        depth_bucket(record.path_depth,
                     kind_dict[(record.qid, record.docid, record.technique)])
        for record in records
    ]

    return summarize(frame, DEPTH_KEYS,
                     DISTRIBUTION_AGGREGATIONS).sort_values(
                         ['depth_bucket', 'technique', 'gt_mode', 'metric'],
                         kind='mergesort'
                     ).reset_index(drop=True)


def row_to_json(row):
    row_dict = row._asdict()
    for field in ROW_VECTOR_FIELDS:
        row_dict[field] = [float(value) for value in row_dict[field]]

    for field in ROW_REAL_FIELDS:
        row_dict[field] = float(row_dict[field])

    return dumps(row_dict)


def row_from_json(line):
    row_dict = loads(line)
    for field in ROW_VECTOR_FIELDS:
        row_dict[field] = np.array(row_dict[field], dtype=float)

    return ExplanationRow(**row_dict)


def format_record_value(value, defined):
    if not defined:
        return ''

    return format_real(value)


def records_to_csv(records):
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(RECORD_HEADER)
    for record in records:
        writer.writerow([record.qid,
                         record.docid,
                         record.technique,
                         record.gt_mode,
                         record.metric,
                         format_record_value(record.value, record.defined),
                         'true' if record.defined else 'false',
                         format_real(record.path_depth)])

    return buffer.getvalue()


def records_from_csv(text):
    reader = csv.DictReader(StringIO(text))
    record_list = []
    for line in reader:
        defined = line['defined'] == 'true'
        record_list.append(EvalRecord(
            line['qid'],
            line['docid'],
            line['technique'],
            line['gt_mode'],
            line['metric'],
            float(line['value']) if defined else float('nan'),
            defined,
            float(line['path_depth'])
        ))

    return record_list


def table_to_csv(table):
    return table.to_csv(index=False, float_format='%.17g')


def skips_to_text(skips):
    return ''.join('{}\t{}\t{}\t{}\n'.format(skip.qid, skip.docid,
                                             skip.technique, skip.reason)
                   for skip in skips)


def atomic_write(path, text):
    directory = dirname(path) or '.'
    temp_name = None
    try:
        with NamedTemporaryFile('w', encoding='utf-8', dir=directory,
                                prefix='.tmp-', delete=False,
                                newline='') as filehandle:
            temp_name = filehandle.name
            filehandle.write(text)

        replace(temp_name, path)
    except OSError as error:
        if temp_name and exists(temp_name):
            remove(temp_name)

        raise OSError('Could not write {}: {}'.format(path, error)) from error


def make_output_dir(out_dir):
    try:
        makedirs(out_dir, exist_ok=True)
    except OSError as error:
        raise OSError('Could not create {}: {}'.format(out_dir,
                                                       error)) from error


def write_text(text, filename, out_dir):
    make_output_dir(out_dir)
    path = join(out_dir, filename)
    atomic_write(path, text)
    logger.info('Wrote %s', path)

    return path


def write_table(table, name, out_dir):
    return write_text(table_to_csv(table), TABLE_FILENAME_DICT[name], out_dir)


def write_outputs(rows, records, tables, out_dir, skips=()):
    make_output_dir(out_dir)
    text_dict = {
        EXPLANATIONS_FILENAME: ''.join(row_to_json(row) + '\n'
                                       for row in rows),
        RECORDS_FILENAME: records_to_csv(records),
        SKIPS_FILENAME: skips_to_text(skips)
    }
    for name, table in tables.items():
        text_dict[TABLE_FILENAME_DICT[name]] = table_to_csv(table)

    return [write_text(text, filename, out_dir)
            for filename, text in text_dict.items()]


def read_text(path):
    try:
        with open(path, 'r', encoding='utf-8') as filehandle:
            return filehandle.read()
    except OSError as error:
        raise OSError('Could not read {}: {}'.format(path, error)) from error


def read_explanations(path):
    return [row_from_json(line)
            for line in read_text(path).splitlines() if line.strip()]


def read_records(path):
    return records_from_csv(read_text(path))


def read_table(path):
    return pd.read_csv(path)


def same_value(recorded, recomputed):
    if recorded.defined != recomputed.defined:
        return False

    if not recorded.defined:
        return True

    return recorded.value == recomputed.value


def audit_records(rows, records, auc_k=DEFAULT_AUC_K):
    """Recompute every record from its explanation row; return mismatches."""
    row_dict = {(row.qid, row.docid, row.technique): row for row in rows}
    mismatch_list = []
    for record in records:
        row = row_dict.get((record.qid, record.docid, record.technique))
        if row is None:
            mismatch_list.append((record, 'no explanation row'))
            continue

        recomputed = similarity(record.metric, row.weights,
                                ground_truth_vectors(row)[record.gt_mode],
                                auc_k)
        if not same_value(record, recomputed):
            mismatch_list.append((record, 'recomputed {} (defined={})'.format(
                recomputed.value, recomputed.defined)))

    for record, reason in mismatch_list:
        logger.warning('Audit mismatch for %s %s %s %s %s: %s', record.qid,
                       record.docid, record.technique, record.gt_mode,
                       record.metric, reason)

    return mismatch_list


def spearman_means(summary):
    spearman_rows = summary[summary['metric'] == SPEARMAN]

    return {(row.technique, row.gt_mode): row.mean
            for row in spearman_rows.itertuples(index=False)}


def directional_check(tree_summary, lambdamart_summary):
    """Soft check of the expected trend: decision-tree mean Spearman inside
    SPEARMAN_RANGE and LambdaMART mean Spearman below the tree's, per
    technique and ground truth. Failures are reported, never raised."""
    tree_means = spearman_means(tree_summary)
    lambdamart_means = spearman_means(lambdamart_summary)

    message_list = []
    passed = True
    for key in sorted(tree_means):
        technique, mode = key
        tree_mean = tree_means[key]
        lambdamart_mean = lambdamart_means.get(key, float('nan'))

        in_range = (not isnan(tree_mean) and
                    SPEARMAN_RANGE[0] <= tree_mean <= SPEARMAN_RANGE[1])
        lower = (not isnan(lambdamart_mean) and not isnan(tree_mean) and
                 lambdamart_mean < tree_mean)
        passed = passed and in_range and lower

        message_list.append(
            '{} {} {}: decision tree spearman {:.4f} (in [{}, {}]: {}), '
            'lambdamart {:.4f} (lower: {})'.format(
                'PASS' if in_range and lower else 'FAIL', technique, mode,
                tree_mean, SPEARMAN_RANGE[0], SPEARMAN_RANGE[1], in_range,
                lambdamart_mean, lower
            )
        )

    if not tree_means:
        passed = False
        message_list.append('FAIL no spearman cells in the decision tree '
                            'summary')

    for message in message_list:
        if message.startswith('FAIL'):
            logger.warning(message)
        else:
            logger.info(message)

    return CheckResult(passed, message_list)


def all_tables(rows, records, k_values):
    return {'summary': aggregate(records),
            'sweep_k': sweep_k(rows, k_values),
            'depth': depth_buckets(rows, records)}
