import logging

from collections import namedtuple, OrderedDict
from math import isnan
from os.path import isfile
from re import compile as compile_regex

import numpy as np

from requests import get

logger = logging.getLogger(__name__)

DOCID_PATTERN = compile_regex(r'docid\s*=\s*(\S+)')
LABEL_PATTERN = compile_regex(r'^[0-9]+$')
INDEX_PATTERN = compile_regex(r'^[1-9][0-9]*$')
QID_PREFIX = 'qid:'
MAX_FEATURE_INDEX = 1 << 16
QUARTILE_PROBABILITIES = (0.25, 0.5, 0.75)

SYNTH_INFORMATIVE_FEATURES = 3
SYNTH_NOISE_SCALE = 0.1
SYNTH_LABEL_QUANTILES = (0.5, 0.8)

MQ2008_FEATURE_NAMES = (
    'TF-Body', 'TF-Anchor', 'TF-Title', 'TF-URL', 'TF-Document',
    'IDF-Body', 'IDF-Anchor', 'IDF-Title', 'IDF-URL', 'IDF-Document',
    'TFIDF-Body', 'TFIDF-Anchor', 'TFIDF-Title', 'TFIDF-URL',
    'TFIDF-Document',
    'DL-Body', 'DL-Anchor', 'DL-Title', 'DL-URL', 'DL-Document',
    'BM25-Body', 'BM25-Anchor', 'BM25-Title', 'BM25-URL', 'BM25-Document',
    'LMIR-ABS-Body', 'LMIR-ABS-Anchor', 'LMIR-ABS-Title', 'LMIR-ABS-URL',
    'LMIR-ABS-Document',
    'LMIR-DIR-Body', 'LMIR-DIR-Anchor', 'LMIR-DIR-Title', 'LMIR-DIR-URL',
    'LMIR-DIR-Document',
    'LMIRJM-Body', 'LMIRJM-Anchor', 'LMIRJM-Title', 'LMIRJM-URL',
    'LMIRJM-Document',
    'PageRank', 'Inlink', 'Outlink', 'URL-Slashes', 'URL-Length',
    'Child-Pages'
)

Instance = namedtuple('Instance', 'qid docid label features')
QueryGroup = namedtuple('QueryGroup', 'qid member_indices')
FeatureStats = namedtuple('FeatureStats',
                          'means quartile_boundaries minimums maximums')


class LetorParseError(ValueError):
    def __init__(self, line_number, reason, line=''):
        self.line_number = line_number
        self.reason = reason
        self.line = line
        super().__init__('line {}: {}'.format(line_number, reason))


class Dataset:
    """Labeled feature vectors with their query and document ids.

    Arrays are frozen on construction; `subset` returns a new Dataset.
    """

    def __init__(self, feature_count, qids, docids, labels, feature_matrix):
        feature_matrix = np.array(feature_matrix, dtype=float)
        if feature_matrix.size == 0:
            feature_matrix = feature_matrix.reshape(len(qids), feature_count)

        labels = np.array(labels, dtype=int)

        if feature_matrix.shape != (len(qids), feature_count):
            raise ValueError(
                'Feature matrix shape {} does not match {} instances with {} '
                'features'.format(feature_matrix.shape, len(qids),
                                  feature_count)
            )

        if not (len(qids) == len(docids) == len(labels)):
            raise ValueError('qids, docids and labels differ in length')

        if len(labels) and labels.min() < 0:
            raise ValueError('Relevance labels must be non-negative')

        seen_keys = set()
        for key in zip(qids, docids):
            if key in seen_keys:
                raise ValueError('Duplicate (qid, docid) pair {}'.format(key))

            seen_keys.add(key)

        feature_matrix.setflags(write=False)
        labels.setflags(write=False)

        self.feature_count = int(feature_count)
        self.qids = tuple(str(qid) for qid in qids)
        self.docids = tuple(str(docid) for docid in docids)
        self.labels = labels
        self.feature_matrix = feature_matrix

    def _asdict(self):
        return {'feature_count': self.feature_count,
                'instances': [instance._asdict() for instance in self]}

    def __len__(self):
        return len(self.qids)

    def __getitem__(self, index):
        return Instance(self.qids[index],
                        self.docids[index],
                        int(self.labels[index]),
                        self.feature_matrix[index])

    def __iter__(self):
        for index in range(len(self)):
            yield self[index]

    def __eq__(self, other):
        return (isinstance(other, Dataset) and
                self.feature_count == other.feature_count and
                self.qids == other.qids and
                self.docids == other.docids and
                np.array_equal(self.labels, other.labels) and
                np.array_equal(self.feature_matrix, other.feature_matrix))

    def subset(self, indices):
        indices = list(indices)
        return Dataset(self.feature_count,
                       [self.qids[i] for i in indices],
                       [self.docids[i] for i in indices],
                       self.labels[indices],
                       self.feature_matrix[indices])

    def __repr__(self):
        return 'Dataset({} instances, {} queries, {} features)'.format(
            len(self), len(set(self.qids)), self.feature_count
        )


def parse_letor_line(line, line_number):
    body, _, comment = line.partition('#')
    token_list = body.split()
    if not token_list:
        raise LetorParseError(line_number, 'no tokens before comment', line)

    if not LABEL_PATTERN.match(token_list[0]):
        raise LetorParseError(line_number,
                              'missing or invalid label {!r}'.format(
                                  token_list[0]),
                              line)

    label = int(token_list[0])
    if len(token_list) < 2 or not token_list[1].startswith(QID_PREFIX):
        raise LetorParseError(line_number, 'missing qid token', line)

    qid = token_list[1][len(QID_PREFIX):]
    if not qid:
        raise LetorParseError(line_number, 'empty qid', line)

    if len(token_list) < 3:
        raise LetorParseError(line_number, 'no feature values', line)

    feature_dict = {}
    for token in token_list[2:]:
        index_str, separator, value_str = token.partition(':')
        if not separator or not INDEX_PATTERN.match(index_str):
            raise LetorParseError(line_number,
                                  'invalid feature token {!r}'.format(token),
                                  line)

        try:
            value = float(value_str)
        except ValueError:
            raise LetorParseError(line_number,
                                  'non-numeric value {!r}'.format(token),
                                  line)

        if isnan(value):
            raise LetorParseError(line_number,
                                  'NaN value {!r}'.format(token),
                                  line)

        index = int(index_str)
        if index > MAX_FEATURE_INDEX:
            raise LetorParseError(line_number,
                                  'feature index {} exceeds {}'.format(
                                      index, MAX_FEATURE_INDEX),
                                  line)

        if index in feature_dict:
            raise LetorParseError(line_number,
                                  'duplicate feature index {}'.format(index),
                                  line)

        feature_dict[index] = value

    docid_match = DOCID_PATTERN.search(comment)
    docid = docid_match.group(1) if docid_match else str(line_number)

    return qid, docid, label, feature_dict


def parse_letor(text):
    if isinstance(text, str):
        line_iterable = text.splitlines()
    else:
        line_iterable = text

    parsed_list = []
    seen_keys = {}
    for line_number, line in enumerate(line_iterable, 1):
        line = line.rstrip('\r\n')
        if not line.strip():
            continue

        qid, docid, label, feature_dict = parse_letor_line(line, line_number)
        if (qid, docid) in seen_keys:
            raise LetorParseError(
                line_number,
                'duplicate (qid, docid) {}, first seen on line {}'.format(
                    (qid, docid), seen_keys[(qid, docid)]
                ),
                line
            )

        seen_keys[(qid, docid)] = line_number
        parsed_list.append((qid, docid, label, feature_dict))

    feature_count = max((max(feature_dict)
                         for _, _, _, feature_dict in parsed_list),
                        default=0)

    feature_matrix = np.zeros((len(parsed_list), feature_count))
    for row, (_, _, _, feature_dict) in enumerate(parsed_list):
        for index, value in feature_dict.items():
            feature_matrix[row, index - 1] = value

    return Dataset(feature_count,
                   [qid for qid, _, _, _ in parsed_list],
                   [docid for _, docid, _, _ in parsed_list],
                   [label for _, _, label, _ in parsed_list],
                   feature_matrix)


def format_letor(ds):
    line_list = []
    for instance in ds:
        feature_str = ' '.join(
            '{}:{}'.format(index, format_real(value))
            for index, value in enumerate(instance.features, 1)
        )

        line_list.append('{} qid:{} {} #docid = {}'.format(instance.label,
                                                           instance.qid,
                                                           feature_str,
                                                           instance.docid))

    return ''.join(line + '\n' for line in line_list)


def format_real(value):
    return '{:.17g}'.format(value)


def load_letor(source):
    if source.startswith('http://') or source.startswith('https://'):
        logger.info('Fetching LETOR data from %s', source)
        response = get(source)
        response.raise_for_status()
        text = response.text
    elif isfile(source):
        with open(source, 'r', encoding='utf-8') as filehandle:
            text = filehandle.read()
    else:
        raise ValueError('LETOR source not found: {}'.format(source))

    ds = parse_letor(text)
    logger.info('Loaded %r from %s', ds, source)

    return ds


def split_queries(ds):
    member_dict = OrderedDict()
    for index, qid in enumerate(ds.qids):
        member_dict.setdefault(qid, []).append(index)

    return [QueryGroup(qid, member_list)
            for qid, member_list in member_dict.items()]


def compute_feature_stats(ds):
    if len(ds) == 0:
        raise ValueError('Cannot compute feature statistics of an empty '
                         'dataset')

    feature_matrix = ds.feature_matrix
    quartile_matrix = np.quantile(feature_matrix, QUARTILE_PROBABILITIES,
                                  axis=0)

    return FeatureStats(
        feature_matrix.mean(axis=0),
        [tuple(float(q) for q in quartile_matrix[:, f])
         for f in range(ds.feature_count)],
        feature_matrix.min(axis=0),
        feature_matrix.max(axis=0)
    )


def quartile_index(value, boundaries):
    if isnan(value):
        raise ValueError('Cannot place NaN in a quartile')

    first_quartile, median, third_quartile = boundaries
    if value <= first_quartile:
        return 1
    elif value <= median:
        return 2
    elif value <= third_quartile:
        return 3

    return 4


def synth_dataset(seed, num_queries, docs_per_query, feature_count):
    """Deterministic desk-scale stand-in for a LETOR benchmark.

    Features are uniform on [0, 1]. A fixed sparse linear score over a few
    seeded informative features, plus small noise, is cut at global
    quantiles into the grades 0, 1 and 2.
    """
    if min(num_queries, docs_per_query, feature_count) < 1:
        raise ValueError('Synthetic dataset sizes must be positive')

    rng = np.random.default_rng(seed)
    informative_count = min(SYNTH_INFORMATIVE_FEATURES, feature_count)
    informative_features = np.sort(
        rng.choice(feature_count, size=informative_count, replace=False)
    )
    coefficients = rng.uniform(0.5, 1.5, size=informative_count)

    instance_count = num_queries * docs_per_query
    feature_matrix = rng.random((instance_count, feature_count))
    score_vector = (feature_matrix[:, informative_features] @ coefficients +
                    SYNTH_NOISE_SCALE * rng.standard_normal(instance_count))

    cut_points = np.quantile(score_vector, SYNTH_LABEL_QUANTILES)
    labels = np.searchsorted(cut_points, score_vector, side='right')

    qids = []
    docids = []
    for query_num in range(num_queries):
        for doc_num in range(docs_per_query):
            qids.append(str(query_num + 1))
            docids.append('S{:05d}-{:04d}'.format(query_num + 1, doc_num + 1))

    return Dataset(feature_count, qids, docids, labels, feature_matrix)
