import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_array_equal

from hierlag import io
from hierlag.design import MultiSeriesDataset
from hierlag.errors import EmptySeries, ParseError
from hierlag.experiment import simulate_dataset
from hierlag.pipeline import run_pipeline


def write(path, text):
    path.write_text(text)
    return path


def test_long_format_unequal_lengths(tmp_path):
    rows = ["series_id,t,value"]
    rows += [f"a,{t},{t * 0.5}" for t in range(5)]
    rows += [f"b,{t},{-t}" for t in range(7)]
    ds = io.load_dataset(write(tmp_path / "x.csv", "\n".join(rows) + "\n"))
    assert ds.M == 2 and ds.lengths == [5, 7]
    assert ds.labels == ("a", "b")


def test_long_format_sorted_by_time(tmp_path):
    p = write(tmp_path / "x.csv", "series_id,t,value\na,2,3.0\na,0,1.0\na,1,2.0\n")
    assert_array_equal(io.load_dataset(p).series[0], [1.0, 2.0, 3.0])


def test_wide_format(tmp_path):
    write(tmp_path / "left.csv", "value\n1.5\n2.5\n")
    write(tmp_path / "right.csv", "value\n1\n2\n3\n")
    ds = io.load_dataset([tmp_path / "left.csv", tmp_path / "right.csv"])
    assert ds.labels == ("left", "right") and ds.lengths == [2, 3]


@pytest.mark.parametrize("text, line", [
    ("series_id,t,value\na,0,1.0\na,1,abc\n", 3),
    ("series_id,t,value\na,0,1.0\n\na,1.5,2.0\n", 4),
    ("series_id,t,value\na,0,1.0\na,0,2.0\n", 3),
    ("series_id,t,value\na,0\n", 2),
    ("value\n1.0\nnan\n", 3),
    ("value\n1.0\n2.0,3.0\n", 3),
    ("\ntime,x\n1,2\n", 2),
])
def test_parse_error_line_numbers(tmp_path, text, line):
    with pytest.raises(ParseError) as info:
        io.load_dataset(write(tmp_path / "bad.csv", text))
    assert info.value.line == line


def test_forced_format_header_mismatch(tmp_path):
    p = write(tmp_path / "x.csv", "value\n1.0\n")
    with pytest.raises(ParseError):
        io.load_dataset(p, format="long")
    with pytest.raises(ValueError):
        io.load_dataset(p, format="excel")


def test_empty_series(tmp_path):
    with pytest.raises(EmptySeries):
        io.load_dataset(write(tmp_path / "e.csv", "value\n"))
    with pytest.raises(EmptySeries):
        io.load_dataset(write(tmp_path / "blank.csv", ""))


def test_duplicate_labels(tmp_path):
    a = write(tmp_path / "a.csv", "series_id,t,value\ns,0,1\ns,1,2\n")
    b = write(tmp_path / "b.csv", "series_id,t,value\ns,0,1\ns,1,2\n")
    with pytest.raises(ValueError):
        io.load_dataset([a, b])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64),
                         min_size=2, max_size=20), min_size=1, max_size=4))
def test_round_trip_exact(tmp_path_factory, series):
    ds = MultiSeriesDataset(series)
    d = tmp_path_factory.mktemp("rt")
    back = io.load_dataset(io.save_long(ds, d / "long.csv"))
    assert back.labels == ds.labels
    for a, b in zip(ds.series, back.series):
        assert_array_equal(a, b)
    back = io.load_dataset(io.save_wide(ds, d / "wide"))
    for a, b in zip(ds.series, back.series):
        assert_array_equal(a, b)


def test_format_float_round_trip():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, 5e-324):
        assert float(io.format_float(x)) == x


def test_fit_result_json(tmp_path):
    ds = simulate_dataset((0.5, -0.3), [200, 200], 1.0, seed=0)
    fr = run_pipeline(ds, L=4)
    p = io.save_fit_result(fr, tmp_path / "fit.json", {"inputs": ["x.csv"]})
    d = io.load_json(p)
    assert d["L_input"] == 4 and d["inputs"] == ["x.csv"]
    assert np.asarray(d["beta_hat"]).shape == (2, 4)
    assert d["lambda_used"] == fr.lambda_used
    assert json.loads(io.fit_result_to_json(fr)) == {k: v for k, v in d.items() if k != "inputs"}


def test_dump_json_maps_nonfinite_to_null(tmp_path):
    text = io.dump_json({"a": np.float64(np.nan), "b": np.arange(2), "c": np.bool_(True)},
                        tmp_path / "o.json")
    assert json.loads(text) == {"a": None, "b": [0, 1], "c": True}
    assert io.load_json(tmp_path / "o.json")["b"] == [0, 1]
