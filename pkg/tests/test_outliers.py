import csv

import numpy as np
import pytest

from oracles import quantile_oracle, std_oracle
from phmprep.errors import InvertedBoundsError, UnknownFeatureError
from phmprep.frame import SensorFrame
from phmprep.outliers import (
    CutoffSpec,
    apply_cutoffs,
    compute_feature_stats,
    emit_diagnostics,
)


@pytest.fixture
def stats_frame():
    rng = np.random.default_rng(3)
    values = rng.normal(10.0, 2.0, (200, 2))
    values[5, 1] = np.nan
    return SensorFrame(np.arange(200, dtype=np.int64) * 60, ["a", "b"], values)


def test_stats_match_oracles(stats_frame):
    stats = compute_feature_stats(stats_frame)
    for name in ("a", "b"):
        col = stats_frame.column(name)
        vals = [v for v in col if not np.isnan(v)]
        s = stats[name]
        assert abs(s.std - std_oracle(vals)) < 1e-12
        assert abs(s.q1 - quantile_oracle(vals, 0.25)) < 1e-12
        assert abs(s.median - quantile_oracle(vals, 0.5)) < 1e-12
        assert abs(s.q3 - quantile_oracle(vals, 0.75)) < 1e-12
        assert abs(s.p2_5 - quantile_oracle(vals, 0.025)) < 1e-12
        assert abs(s.p97_5 - quantile_oracle(vals, 0.975)) < 1e-12
        assert abs(s.iqr_high_whisker - (s.q3 + 1.5 * (s.q3 - s.q1))) < 1e-12
    assert stats["b"].missing_ratio == pytest.approx(1 / 200)


def test_stats_degenerate_single_value():
    frame = SensorFrame(np.array([0, 60]), ["a"],
                        np.array([[7.0], [np.nan]]))
    s = compute_feature_stats(frame)["a"]
    assert s.degenerate and s.mean == 7.0 and s.std == 0.0


def test_cutoff_spec_rejects_inverted_bounds():
    with pytest.raises(InvertedBoundsError):
        CutoffSpec({"a": (5.0, 5.0)})
    CutoffSpec({"a": (None, 5.0), "b": (1.0, None)})  # half-open is fine


def test_apply_cutoffs_removes_whole_rows():
    values = np.array([[1.0, 10.0],
                       [99.0, 20.0],     # a above upper: whole row goes
                       [3.0, -50.0],     # b below lower: whole row goes
                       [4.0, 40.0]])
    frame = SensorFrame(np.arange(4, dtype=np.int64) * 60, ["a", "b"], values)
    out, report = apply_cutoffs(frame, CutoffSpec({"a": (0.0, 50.0),
                                                   "b": (0.0, 45.0)}))
    np.testing.assert_array_equal(out.timestamps, [0, 180])
    assert report.rows_removed == 2
    assert report.above_upper["a"] == 1
    assert report.below_lower["b"] == 1


def test_apply_cutoffs_boundary_and_missing_never_trigger():
    values = np.array([[0.0], [50.0], [np.nan]])
    frame = SensorFrame(np.arange(3, dtype=np.int64) * 60, ["a"], values)
    out, report = apply_cutoffs(frame, CutoffSpec({"a": (0.0, 50.0)}))
    assert out.n_rows == 3
    assert report.rows_removed == 0


def test_apply_cutoffs_unknown_feature(simple_frame):
    with pytest.raises(UnknownFeatureError):
        apply_cutoffs(simple_frame, CutoffSpec({"ghost": (0.0, 1.0)}))


def test_apply_cutoffs_reports_before_after_stats():
    values = np.array([[1.0], [2.0], [3.0], [100.0]])
    frame = SensorFrame(np.arange(4, dtype=np.int64) * 60, ["a"], values)
    _, report = apply_cutoffs(frame, CutoffSpec({"a": (0.0, 10.0)}))
    assert report.stats_before["a"][0] == pytest.approx(26.5)
    assert report.stats_after["a"][0] == pytest.approx(2.0)


def test_emit_diagnostics_files(tmp_path, stats_frame):
    written = emit_diagnostics(stats_frame, tmp_path / "diag")
    names = {p.name for p in written}
    assert names == {"a.series.csv", "b.series.csv", "boxplot_summary.csv"}
    with open(tmp_path / "diag" / "b.series.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["timestamp", "value"]
    assert len(rows) - 1 == 199  # missing cell omitted
    with open(tmp_path / "diag" / "boxplot_summary.csv") as f:
        summary = list(csv.reader(f))
    assert [r[0] for r in summary[1:]] == ["a", "b"]
