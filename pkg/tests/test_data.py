import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abstention import data as D


def test_libsvm_examples():
    ds = D.parse_libsvm("+1 1:0.5 3:2\n")
    assert ds.X.tolist() == [[0.5, 0.0, 2.0]]
    assert ds.labels == (1,)
    ds = D.parse_libsvm("-1 2:1\n-1\n")
    assert ds.X[1].tolist() == [0.0, 0.0]


@pytest.mark.parametrize("text,line", [
    ("+1 1:0.5\n-1 3:x\n", 2),
    ("+1 2:1 1:1\n", 1),
    ("+1 0:1\n", 1),
    ("+1 1-2\n", 1),
    ("+1 1:nan\n", 1),
])
def test_libsvm_errors(text, line):
    with pytest.raises(D.ParseError) as info:
        D.parse_libsvm(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: v != 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([-1, 1]), st.lists(finite | st.just(0.0), min_size=3,
                                                               max_size=3)),
                min_size=1, max_size=20))
def test_libsvm_round_trip(rows):
    X = np.array([r for _, r in rows])
    ds = D.RawDataset(X, tuple(lab for lab, _ in rows))
    back = D.parse_libsvm(D.serialize_libsvm(ds))
    assert back.labels == ds.labels
    assert np.array_equal(back.X, X[:, :back.X.shape[1]])
    assert not np.any(X[:, back.X.shape[1]:])


def test_csv_examples():
    ds = D.parse_csv('"a b",c,label\n1,2,0\n3,4,1\n5,6,0\n', "label")
    assert ds.X.shape == (3, 2)
    assert ds.feature_names == ("a b", "c")
    assert ds.labels == (0, 1, 0)
    with pytest.raises(D.ParseError):
        D.parse_csv("a,b\n1,\n", "b")
    with pytest.raises(D.ParseError):
        D.parse_csv("a,b\n1,2,3\n", "b")
    with pytest.raises(D.ParseError):
        D.parse_csv("", "b")


def test_minmax_examples():
    ds = D.RawDataset(np.array([[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]]), (0, 1, 0))
    scaled, t = D.normalize_minmax(ds)
    assert scaled.X[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert scaled.X[:, 1].tolist() == [0.0, 0.0, 0.0]
    assert t.apply(np.array([[1.0, 5.0]])).tolist() == [[0.0, 0.0]]
    again, _ = D.normalize_minmax(scaled)
    assert np.allclose(again.X[:, 0], scaled.X[:, 0], atol=1e-12)


def test_label_maps():
    assert D.parity_label_map([0, 1, 2, 7]) == {0: -1, 1: 1, 2: -1, 7: 1}
    assert D.binary_label_map(["b", "a", "b"]) == {"a": -1, "b": 1}
    with pytest.raises(ValueError):
        D.binary_label_map([1, 2, 3])


def _dataset(n=100):
    X = np.arange(2 * n, dtype=float).reshape(n, 2)
    return D.RawDataset(X, tuple(i % 2 for i in range(n)))


def test_split_sizes_and_partition():
    s = D.split(_dataset(), D.SplitSpec((0.5, 0.25, 0.25), seed=3))
    assert (len(s.labeled), len(s.unlabeled), len(s.test)) == (50, 25, 25)
    rows = np.concatenate([s.labeled.X[:, 0], s.unlabeled.X[:, 0], s.test.X[:, 0]]) / 2
    assert sorted(rows.astype(int).tolist()) == list(range(100))
    assert np.bincount(s.parts).tolist() == [50, 25, 25]
    assert s.manifest_csv().splitlines()[0] == "row,part"


def test_split_seeded():
    a = D.split(_dataset(), D.SplitSpec(seed=1))
    b = D.split(_dataset(), D.SplitSpec(seed=1))
    assert np.array_equal(a.parts, b.parts)


def test_split_errors():
    with pytest.raises(ValueError):
        D.SplitSpec((0.5, 0.5, 0.0))
    with pytest.raises(ValueError):
        D.split(_dataset(2), D.SplitSpec((0.6, 0.2, 0.2)))
    with pytest.raises(ValueError):
        D.split(_dataset(), D.SplitSpec(label_map={0: -1}))


def test_load_dataset_by_extension(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("f,y\n0.5,1\n0.2,0\n")
    assert D.load_dataset(str(p)).labels == (1, 0)
    q = tmp_path / "x.libsvm"
    q.write_text("+1 1:0.5\n")
    assert D.load_dataset(str(q)).X.tolist() == [[0.5]]
