import numpy as np
import pytest

from dsvmsim import (BadCovariance, InsufficientData, LabeledSet, MissingColumn,
                     NonNumericFeature, ParseError, SingleClassNode, augment,
                     gen_gaussian, gen_spambase_like, load_csv, make_topology,
                     minmax_scale, partition)


def test_gaussian_class_means_close_to_truth():
    data = gen_gaussian(1000, [1, 1], [3, 3], np.eye(2), seed=5)
    pos = data.features[data.labels > 0]
    neg = data.features[data.labels < 0]
    assert np.abs(pos.mean(axis=0) - [1, 1]).max() < 0.15
    assert np.abs(neg.mean(axis=0) - [3, 3]).max() < 0.15


def test_gaussian_rejects_empty_and_bad_covariance():
    with pytest.raises(InsufficientData):
        gen_gaussian(0, [0], [1], [[1.0]], seed=0)
    with pytest.raises(BadCovariance):
        gen_gaussian(10, [0, 0], [1, 1], [[1.0, 0.2], [0.3, 1.0]], seed=0)
    with pytest.raises(BadCovariance):
        gen_gaussian(10, [0, 0], [1, 1], [[1.0, 2.0], [2.0, 1.0]], seed=0)


def test_gaussian_deterministic():
    a = gen_gaussian(50, [1, 1], [3, 3], np.eye(2), seed=9)
    b = gen_gaussian(50, [1, 1], [3, 3], np.eye(2), seed=9)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_labeled_set_validation():
    with pytest.raises(ValueError):
        LabeledSet(np.ones((3, 2)), np.array([1.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        LabeledSet(np.array([[np.nan, 1.0]]), np.array([1.0]))


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_csv_label_mapping_and_header(tmp_path):
    p = _write(tmp_path, "a,b,label\n1,2,1\n3,4,0\n5,6,1\n")
    data = load_csv(p, label_column="label", positive_label=1)
    assert data.labels.tolist() == [1.0, -1.0, 1.0]
    assert data.features.shape == (3, 2)


def test_csv_index_column_no_header(tmp_path):
    p = _write(tmp_path, "1,2,1\n3,4,0\n")
    data = load_csv(p, label_column=-1, positive_label="1")
    assert data.labels.tolist() == [1.0, -1.0]


def test_csv_spambase_format(tmp_path):
    rng = np.random.default_rng(0)
    rows = []
    for i in range(8):
        feats = rng.random(57).round(3)
        rows.append(",".join(map(str, feats)) + f",{i % 2}")
    p = _write(tmp_path, "\n".join(rows) + "\n")
    data = load_csv(p, label_column=57, positive_label=1)
    assert data.dim == 57
    assert set(data.labels.tolist()) == {1.0, -1.0}


def test_csv_nonnumeric_cell_reports_row_and_column(tmp_path):
    p = _write(tmp_path, "a,b,y\n1,2,1\n3,oops,0\n")
    with pytest.raises(NonNumericFeature, match="row 1.*column 1"):
        load_csv(p, label_column="y", positive_label=1)


def test_csv_missing_column(tmp_path):
    p = _write(tmp_path, "a,b,y\n1,2,1\n")
    with pytest.raises(MissingColumn):
        load_csv(p, label_column="nope", positive_label=1)


def test_csv_blank_line_terminates(tmp_path):
    p = _write(tmp_path, "1,2,1\n3,4,0\n\n9,9,garbage\n")
    data = load_csv(p, label_column=2, positive_label=1)
    assert len(data) == 2


def test_csv_ragged_row_is_parse_error(tmp_path):
    p = _write(tmp_path, "1,2,1\n3,4\n")
    with pytest.raises(ParseError):
        load_csv(p, label_column=2, positive_label=1)


def test_partition_disjoint_and_sized():
    data = gen_gaussian(300, [1, 1], [3, 3], np.eye(2), seed=3)
    topo = make_topology("complete", 3)
    part = partition(data, topo, train_per_node=80, test_per_node=100, seed=4)
    assert [len(t) for t in part.train] == [80, 80, 80]
    rows = np.vstack([t.features for t in part.train])
    assert len(np.unique(rows, axis=0)) == len(rows)  # disjoint draws
    for t in part.train:
        assert set(np.unique(t.labels)) == {-1.0, 1.0}


def test_partition_per_node_counts():
    data = gen_gaussian(300, [1, 1], [3, 3], np.eye(2), seed=3)
    topo = make_topology("ring", 4)
    part = partition(data, topo, train_per_node=[60, 60, 60, 60],
                     test_per_node=50, seed=4)
    assert [len(t) for t in part.train] == [60, 60, 60, 60]


def test_partition_insufficient_data():
    data = gen_gaussian(50, [1, 1], [3, 3], np.eye(2), seed=3)
    topo = make_topology("complete", 3)
    with pytest.raises(InsufficientData):
        partition(data, topo, train_per_node=80, test_per_node=10, seed=0)


def test_partition_single_class_pool_rejected():
    feats = np.vstack([np.random.default_rng(0).random((40, 2)),
                       [[9.0, 9.0]]])
    labels = np.array([1.0] * 40 + [-1.0])
    data = LabeledSet(feats, labels)
    topo = make_topology("complete", 3)
    # only one negative sample exists: two of three nodes must be single-class
    with pytest.raises(SingleClassNode):
        partition(data, topo, train_per_node=10, test_per_node=2, seed=0)


def test_augment_definition_and_idempotence():
    data = gen_gaussian(100, [1, 1], [3, 3], np.eye(2), seed=6)
    topo = make_topology("complete", 3)
    part = partition(data, topo, train_per_node=20, test_per_node=10, seed=1)
    for v in range(3):
        a = part.augmented[v]
        assert a.shape == (20, 3)
        assert np.all(a[:, -1] == 1.0)
        assert np.array_equal(a[:, :-1], part.train[v].features)
        assert np.array_equal(part.label_diag[v], part.train[v].labels)
    before = [a.copy() for a in part.augmented]
    augment(augment(part))
    for a, b in zip(before, part.augmented):
        assert np.array_equal(a, b)


def test_augment_example_row():
    part = partition(
        LabeledSet(np.array([[1.0, 2.0], [0.0, 0.0], [3.0, 1.0],
                             [2.0, 2.0], [4.0, 0.0], [0.0, 4.0]]),
                   np.array([-1.0, 1.0, 1.0, -1.0, 1.0, -1.0])),
        make_topology("complete", 2), train_per_node=2, test_per_node=1, seed=2)
    for v in range(2):
        for row, feats in zip(part.augmented[v], part.train[v].features):
            assert row.tolist() == [*feats.tolist(), 1.0]


def test_spambase_like_shape_and_scales():
    data = gen_spambase_like(500, seed=1)
    assert data.dim == 57
    assert set(np.unique(data.labels)) == {-1.0, 1.0}
    col_means = data.features.mean(axis=0)
    assert col_means[:48].max() < 5.0
    assert col_means[56] > 10.0  # capital-run column dominates the scale


def test_minmax_scale_bounds():
    data = gen_spambase_like(200, seed=2)
    scaled = minmax_scale(data)
    assert scaled.features.min() >= 0.0
    assert scaled.features.max() <= 1.0
    assert np.array_equal(scaled.labels, data.labels)
