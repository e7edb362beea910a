import numpy as np
import pytest

from spacepart.core import Dataset
from spacepart.dataio import MAGIC, DatasetFormatError, detect_format, load_dataset, save_dataset

from conftest import random_dataset


def test_binary_round_trip_bit_exact(tmp_path):
    ds = random_dataset(1, 37, 5)
    path = tmp_path / "data.bin"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert back.dims == ds.dims
    assert np.array_equal(back.coords, ds.coords)
    assert np.array_equal(back.ids, ds.ids)


def test_binary_drops_custom_ids(tmp_path):
    # Ids are the row index by definition of the binary layout.
    ds = Dataset([[1.0], [2.0]], ids=[7, 3])
    path = tmp_path / "data.bin"
    save_dataset(ds, path)
    assert load_dataset(path).ids.tolist() == [0, 1]


def test_csv_round_trip(tmp_path):
    ds = random_dataset(2, 23, 3)
    path = tmp_path / "data.csv"
    save_dataset(ds, path)
    back = load_dataset(path)
    # repr-based serialization round-trips doubles exactly
    assert np.array_equal(back.coords, ds.coords)


def test_format_auto_detection(tmp_path):
    ds = random_dataset(3, 4, 2)
    bin_path, csv_path = tmp_path / "a.bin", tmp_path / "a.csv"
    save_dataset(ds, bin_path)
    save_dataset(ds, csv_path)
    assert detect_format(bin_path) == "binary"
    assert detect_format(csv_path) == "csv"
    assert np.array_equal(load_dataset(bin_path).coords, load_dataset(csv_path).coords)


def test_csv_header_round_trip(tmp_path):
    ds = random_dataset(4, 6, 2)
    path = tmp_path / "h.csv"
    save_dataset(ds, path, header=True)
    assert open(path).readline().strip() == "x0,x1"
    back = load_dataset(path, header=True)
    assert np.array_equal(back.coords, ds.coords)


def test_csv_id_column(tmp_path):
    path = tmp_path / "ids.csv"
    path.write_text("10,1.5,2.5\n20,3.5,4.5\n")
    ds = load_dataset(path, id_column=0)
    assert ds.ids.tolist() == [10, 20]
    assert ds.coords.tolist() == [[1.5, 2.5], [3.5, 4.5]]


def test_csv_inconsistent_width_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3,4\n5,6,7,8\n9,10,11\n")
    with pytest.raises(DatasetFormatError, match="line 3"):
        load_dataset(path)


def test_csv_non_finite_names_line(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1,2\nnan,4\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_dataset(path)


def test_csv_unparseable_names_line(tmp_path):
    path = tmp_path / "junk.csv"
    path.write_text("1,2\n3,zebra\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_dataset(path)


def test_empty_file_is_an_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_binary_truncated_payload(tmp_path):
    ds = random_dataset(5, 8, 2)
    path = tmp_path / "cut.bin"
    save_dataset(ds, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(DatasetFormatError, match="expected"):
        load_dataset(path)


def test_binary_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + b"\x00" * 32)
    with pytest.raises(DatasetFormatError, match="magic"):
        load_dataset(path, format="binary")


def test_binary_layout_is_as_documented(tmp_path):
    ds = Dataset([[1.0, 2.0], [3.0, 4.0]])
    path = tmp_path / "layout.bin"
    save_dataset(ds, path)
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert int.from_bytes(raw[4:8], "little") == 2
    assert int.from_bytes(raw[8:12], "little") == 2
    assert np.frombuffer(raw[12:], dtype="<f8").tolist() == [1.0, 2.0, 3.0, 4.0]
