import numpy as np
import pytest

from graphssl.data import (DataError, DataSet, EmptyFileError, NonFiniteError,
                           RaggedRowsError, load_dataset, normalize, save_dataset)


def test_csv_shape(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,b\n1,2,3\n4,5,6\n")
    ds = load_dataset(path)
    assert (ds.m, ds.n) == (2, 3)
    np.testing.assert_array_equal(ds.X, [[1, 2, 3], [4, 5, 6]])
    assert list(ds.labels) == ["a", "b", "b"]
    assert ds.class_count == 2
    assert ds.name == "d"


def test_non_finite(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n3,nan\n")
    with pytest.raises(NonFiniteError, match=r"non-finite entry at \(1,1\)"):
        load_dataset(path)


def test_inf(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\ninf,2\n")
    with pytest.raises(NonFiniteError):
        load_dataset(path)


def test_ragged(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,c\n1,2,3\n4,5\n")
    with pytest.raises(RaggedRowsError):
        load_dataset(path)


def test_empty(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("")
    with pytest.raises(EmptyFileError):
        load_dataset(path)


def test_error_codes_distinct():
    codes = {cls.code for cls in (EmptyFileError, RaggedRowsError, NonFiniteError)}
    assert len(codes) == 3
    assert all(issubclass(c, DataError) for c in (EmptyFileError, RaggedRowsError, NonFiniteError))


def test_garbage_value(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,x\n")
    with pytest.raises(DataError):
        load_dataset(path)


@pytest.mark.parametrize("fmt,name", [("csv", "d.csv"), ("dense-binary", "d.npz")])
def test_round_trip_bitwise(tmp_path, fmt, name):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(7, 9)) * 10.0 ** rng.integers(-5, 5, size=(7, 9))
    ds = DataSet(X, np.array(list("aabbbccdd")), 9, "x")
    save_dataset(ds, tmp_path / name, fmt)
    loaded = load_dataset(tmp_path / name, fmt)
    assert loaded.X.tobytes() == X.tobytes()
    assert list(loaded.labels) == list(ds.labels)


def test_normalize():
    ds = normalize(DataSet(np.array([[0.0, 2.0], [4.0, 1.0]]), np.array([0, 1]), 2))
    assert ds.X.max() == 1.0 and ds.X.min() >= 0.0
    np.testing.assert_array_equal(ds.X, [[0.0, 0.5], [1.0, 0.25]])


def test_label_count_mismatch():
    with pytest.raises(DataError):
        DataSet(np.ones((2, 3)), np.array([0, 1]), 2)
