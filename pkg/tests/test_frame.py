import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phmprep.errors import (
    ColumnNotFoundError,
    DuplicateTimestampError,
    EmptyTableError,
    InvertedIntervalError,
    MissingTimeColumnError,
    UnknownKindError,
    UnmappedCategoryError,
)
from phmprep.frame import (
    CategoricalEncoding,
    EventLog,
    EventRecord,
    SensorFrame,
    encode_categorical,
    load_event_log,
    load_sensor_frame,
    save_event_log,
    save_sensor_frame,
)


def test_sensor_frame_validates_monotone_timestamps():
    with pytest.raises(DuplicateTimestampError):
        SensorFrame(np.array([0, 60, 60]), ["a"], np.zeros((3, 1)))
    with pytest.raises(DuplicateTimestampError):
        SensorFrame(np.array([0, 120, 60]), ["a"], np.zeros((3, 1)))


def test_sensor_frame_rejects_bad_shapes_and_names():
    with pytest.raises(ValueError):
        SensorFrame(np.array([0, 60]), ["a"], np.zeros((3, 1)))
    with pytest.raises(ValueError):
        SensorFrame(np.array([0]), ["a", "a"], np.zeros((1, 2)))
    with pytest.raises(ValueError):
        SensorFrame(np.array([0]), ["a"], np.array([[np.inf]]))


def test_column_access_and_selection(simple_frame):
    assert simple_frame.column_index("b") == 1
    assert np.isnan(simple_frame.column("b")[2])
    with pytest.raises(ColumnNotFoundError):
        simple_frame.column("nope")
    sub = simple_frame.select_columns(["c", "a"])
    assert sub.feature_names == ["c", "a"]
    assert sub.values[0, 1] == 1.0
    rows = simple_frame.select_rows(simple_frame.timestamps >= 120)
    assert rows.n_rows == 3


def test_csv_round_trip_is_exact(tmp_path, simple_frame):
    # awkward float values must survive write/read bit for bit
    frame = simple_frame
    frame.values[0, 0] = 0.1 + 0.2
    frame.values[1, 0] = 1e-300
    path = tmp_path / "sensors.csv"
    save_sensor_frame(frame, path)
    back = load_sensor_frame(path)
    assert back.feature_names == frame.feature_names
    np.testing.assert_array_equal(back.timestamps, frame.timestamps)
    same = np.isnan(frame.values) == np.isnan(back.values)
    assert same.all()
    mask = ~np.isnan(frame.values)
    assert (back.values[mask] == frame.values[mask]).all()


def test_load_sorts_and_detects_duplicates(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,a\n120,2\n0,1\n60,3\n")
    frame = load_sensor_frame(path)
    np.testing.assert_array_equal(frame.timestamps, [0, 60, 120])
    np.testing.assert_array_equal(frame.values[:, 0], [1, 3, 2])
    path.write_text("t,a\n60,1\n60,2\n")
    with pytest.raises(DuplicateTimestampError):
        load_sensor_frame(path)


def test_load_missing_tokens_and_raw_text(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,a,state\n0,1.5,run\n60,NaN,stop\n120,,run\n")
    frame = load_sensor_frame(path)
    assert np.isnan(frame.values[1, 0]) and np.isnan(frame.values[2, 0])
    assert frame.raw_text["state"] == ["run", "stop", "run"]
    assert np.isnan(frame.column("state")).all()


def test_load_iso_timestamps(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,a\n1970-01-01T00:01:00Z,1\n1970-01-01T00:02:00Z,2\n")
    frame = load_sensor_frame(path)
    np.testing.assert_array_equal(frame.timestamps, [60, 120])


def test_load_errors(tmp_path):
    with pytest.raises(EmptyTableError):
        (tmp_path / "empty.csv").write_text("t,a\n")
        load_sensor_frame(tmp_path / "empty.csv")
    with pytest.raises(MissingTimeColumnError):
        (tmp_path / "no_t.csv").write_text("x,a\n0,1\n")
        load_sensor_frame(tmp_path / "no_t.csv")


def test_event_record_validation():
    with pytest.raises(UnknownKindError):
        EventRecord(0, 10, "explosion")
    with pytest.raises(InvertedIntervalError):
        EventRecord(10, 0, "pause")
    with pytest.raises(ValueError):
        EventRecord(0, 10, "pause", failure_mode="wear")
    with pytest.raises(ValueError):
        EventRecord(0, 10, "failure", failure_mode="wear")  # no component


def test_event_log_sorts_and_round_trips(tmp_path):
    log = EventLog([
        EventRecord(100, 200, "failure", component="pump", failure_mode="wear"),
        EventRecord(0, 50, "normal_stop"),
    ])
    assert log.records[0].start == 0
    assert [r.failure_mode for r in log.failures()] == ["wear"]
    path = tmp_path / "events.csv"
    save_event_log(log, path)
    back = load_event_log(path)
    assert back.records == log.records


def test_encode_categorical_ordinal(simple_frame):
    simple_frame.raw_text["a"] = ["x", "y", None, "x", "y"]
    enc = CategoricalEncoding("a", {"x": 0, "y": 1})
    out = encode_categorical(simple_frame, enc)
    np.testing.assert_array_equal(out.values[[0, 1, 3, 4], 0], [0, 1, 0, 1])
    assert np.isnan(out.values[2, 0])
    with pytest.raises(UnmappedCategoryError):
        simple_frame.raw_text["a"] = ["z"] * 5
        encode_categorical(simple_frame, enc)


def test_encode_categorical_one_hot(simple_frame):
    simple_frame.raw_text["b"] = ["lo", "hi", None, "hi", "lo"]
    enc = CategoricalEncoding("b", {"lo": 0, "hi": 1}, one_hot=True)
    out = encode_categorical(simple_frame, enc)
    assert out.feature_names == ["a", "b=lo", "b=hi", "c"]
    np.testing.assert_array_equal(out.values[0, 1:3], [1.0, 0.0])
    np.testing.assert_array_equal(out.values[1, 1:3], [0.0, 1.0])
    assert np.isnan(out.values[2, 1]) and np.isnan(out.values[2, 2])


def test_categorical_encoding_validation():
    with pytest.raises(ValueError):
        CategoricalEncoding("a", {"x": 0, "y": 0})
    with pytest.raises(ValueError):
        CategoricalEncoding("a", {"x": 1, "y": 2})


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False,
                          width=64), min_size=1, max_size=30))
def test_csv_float_round_trip_property(tmp_path_factory, floats):
    tmp = tmp_path_factory.mktemp("rt")
    frame = SensorFrame(np.arange(len(floats), dtype=np.int64) * 60, ["v"],
                        np.array(floats).reshape(-1, 1))
    path = tmp / "f.csv"
    save_sensor_frame(frame, path)
    back = load_sensor_frame(path)
    np.testing.assert_array_equal(back.values, frame.values)
