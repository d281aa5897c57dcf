import numpy as np
import pytest

from ltrexplain.letor import (Dataset, LetorParseError, QueryGroup,
                              compute_feature_stats, format_letor,
                              load_letor, parse_letor, quartile_index,
                              split_queries, synth_dataset)


def make_dataset(qids, values):
    values = np.asarray(values, dtype=float).reshape(len(qids), -1 if qids
                                                     else 1)
    return Dataset(values.shape[1], qids,
                   ['d{}'.format(i) for i in range(len(qids))],
                   [0] * len(qids), values)


def test_parse_worked_line():
    ds = parse_letor('2 qid:10 1:0.786 2:0.0 3:0.722 4:0.780 #docid=GX001\n')

    assert len(ds) == 1
    assert ds.feature_count == 4
    instance = ds[0]
    assert instance.qid == '10'
    assert instance.docid == 'GX001'
    assert instance.label == 2
    assert list(instance.features) == [0.786, 0.0, 0.722, 0.780]


def test_parse_empty_input():
    ds = parse_letor('')

    assert ds.feature_count == 0
    assert len(ds) == 0


def test_parse_missing_label():
    with pytest.raises(LetorParseError) as error_info:
        parse_letor('qid:3 1:0.5')

    assert error_info.value.line_number == 1
    assert str(error_info.value).startswith('line 1:')


@pytest.mark.parametrize('line', ['1 qid:3 1:abc',
                                  '1 qid:3 1:0.5 1:0.7',
                                  '1 qid:3 0:0.5',
                                  '1 qid:3 1:nan',
                                  '1 qid:3 1000000000:1',
                                  '1 3 1:0.5'])
def test_parse_malformed_lines(line):
    with pytest.raises(LetorParseError) as error_info:
        parse_letor('1 qid:1 1:0.1 #docid = a\n' + line + '\n')

    assert error_info.value.line_number == 2


def test_parse_sparse_fill_and_docid_fallback():
    ds = parse_letor('0 qid:1 3:0.5\n1 qid:1 1:0.25 # no id here\n')

    assert ds.feature_count == 3
    assert list(ds[0].features) == [0.0, 0.0, 0.5]
    assert list(ds[1].features) == [0.25, 0.0, 0.0]
    assert ds.docids == ('1', '2')


def test_parse_duplicate_key():
    with pytest.raises(LetorParseError) as error_info:
        parse_letor('0 qid:1 1:0.5 #docid = a\n1 qid:1 1:0.7 #docid = a\n')

    assert error_info.value.line_number == 2


def test_format_round_trip():
    ds = synth_dataset(3, 4, 5, 6)

    assert parse_letor(format_letor(ds)) == ds


def test_load_letor_from_path(tmp_path):
    path = tmp_path / 'train.txt'
    path.write_text('1 qid:7 1:0.5 2:0.25 #docid = x\n', encoding='utf-8')

    ds = load_letor(str(path))

    assert ds.qids == ('7',)
    assert ds.docids == ('x',)


class StubResponse:

    def __init__(self, text):
        self.text = text
        self.checked = False

    def raise_for_status(self):
        self.checked = True


def test_load_letor_from_url(monkeypatch):
    response = StubResponse('0 qid:2 1:0.5 #docid = a\n'
                            '2 qid:2 2:0.75 #docid = b\n')
    url_list = []

    def fake_get(url):
        url_list.append(url)
        return response

    monkeypatch.setattr('ltrexplain.letor.get', fake_get)

    ds = load_letor('https://example.org/vali.txt')

    assert url_list == ['https://example.org/vali.txt']
    assert response.checked
    assert ds.docids == ('a', 'b')
    assert list(ds.labels) == [0, 2]
    assert list(ds[1].features) == [0.0, 0.75]


def test_load_letor_missing_path(tmp_path):
    with pytest.raises(ValueError):
        load_letor(str(tmp_path / 'missing.txt'))


def test_dataset_rejects_duplicates():
    with pytest.raises(ValueError):
        Dataset(1, ['a', 'a'], ['d', 'd'], [0, 1], [[0.0], [1.0]])


def test_dataset_rejects_bad_shape():
    with pytest.raises(ValueError):
        Dataset(2, ['a'], ['d'], [0], [[0.0]])


@pytest.mark.parametrize('qids,expected', [
    (['a', 'a', 'b'], [QueryGroup('a', [0, 1]), QueryGroup('b', [2])]),
    (['a', 'b', 'a'], [QueryGroup('a', [0, 2]), QueryGroup('b', [1])]),
    ([], [])
])
def test_split_queries(qids, expected):
    ds = make_dataset(qids, np.zeros(len(qids)))

    assert split_queries(ds) == expected


def test_split_queries_partition():
    ds = synth_dataset(1, 7, 3, 2)
    index_list = sorted(index for group in split_queries(ds)
                        for index in group.member_indices)

    assert index_list == list(range(len(ds)))


def test_feature_stats_interpolated_quartiles():
    stats = compute_feature_stats(make_dataset(['q'] * 4, [0, 1, 2, 3]))

    assert stats.quartile_boundaries[0] == pytest.approx((0.75, 1.5, 2.25))
    assert stats.means[0] == pytest.approx(1.5)
    assert stats.minimums[0] == 0.0
    assert stats.maximums[0] == 3.0


@pytest.mark.parametrize('values', [[4.5, 4.5, 4.5], [5.0]])
def test_feature_stats_degenerate(values):
    stats = compute_feature_stats(make_dataset(['q'] * len(values), values))

    assert stats.quartile_boundaries[0] == (values[0],) * 3
    assert stats.means[0] == values[0]


def test_feature_stats_empty():
    with pytest.raises(ValueError):
        compute_feature_stats(parse_letor(''))


def test_feature_stats_against_sorted_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 30))
        values = rng.random(n)
        stats = compute_feature_stats(make_dataset(['q'] * n, values))
        ordered = np.sort(values)
        for p, boundary in zip((0.25, 0.5, 0.75),
                               stats.quartile_boundaries[0]):
            position = p * (n - 1)
            k = int(np.floor(position))
            upper = ordered[min(k + 1, n - 1)]
            expected = ordered[k] + (position - k) * (upper - ordered[k])
            assert boundary == pytest.approx(expected, abs=1e-12)

        assert stats.means[0] == pytest.approx(values.mean(), rel=1e-12)


def test_quartile_buckets_are_balanced():
    rng = np.random.default_rng(5)
    values = rng.random(101)
    boundaries = compute_feature_stats(
        make_dataset(['q'] * 101, values)).quartile_boundaries[0]

    counts = np.bincount([quartile_index(v, boundaries) for v in values],
                         minlength=5)[1:]

    assert all(abs(count - 101 / 4.0) <= 1 for count in counts)


@pytest.mark.parametrize('value,expected', [(0.1, 1), (0.25, 1), (0.3, 2),
                                            (0.5, 2), (0.6, 3), (0.75, 3),
                                            (0.9, 4)])
def test_quartile_index(value, expected):
    assert quartile_index(value, (0.25, 0.5, 0.75)) == expected


def test_quartile_index_degenerate_boundaries():
    assert quartile_index(2.0, (2.0, 2.0, 2.0)) == 1
    assert quartile_index(2.0 + 1e-9, (2.0, 2.0, 2.0)) == 4


def test_quartile_index_nan():
    with pytest.raises(ValueError):
        quartile_index(float('nan'), (0.0, 1.0, 2.0))


def test_quartile_index_monotone():
    boundaries = (-1.0, 0.0, 3.0)
    index_list = [quartile_index(v, boundaries)
                  for v in np.linspace(-5, 5, 201)]

    assert index_list == sorted(index_list)


def test_synth_dataset_determinism_and_counts():
    ds = synth_dataset(42, 50, 10, 8)

    assert ds == synth_dataset(42, 50, 10, 8)
    assert format_letor(ds) == format_letor(synth_dataset(42, 50, 10, 8))
    assert len(ds) == 500
    assert len(split_queries(ds)) == 50
    assert len(set(ds.docids)) == 500
    assert set(ds.labels) <= {0, 1, 2}
    assert ds.feature_matrix.min() >= 0.0
    assert ds.feature_matrix.max() <= 1.0


def test_synth_dataset_label_range_across_seeds():
    for seed in range(10):
        assert set(synth_dataset(seed, 5, 6, 3).labels) <= {0, 1, 2}


def test_synth_dataset_rejects_zero_sizes():
    with pytest.raises(ValueError):
        synth_dataset(0, 0, 10, 5)
