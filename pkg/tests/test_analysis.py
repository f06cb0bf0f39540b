import math

import pandas as pd
import pytest

from mofu.analysis import SUMMARY_COLUMNS, summarize_parquet, summarize_traces, traces_frame
from mofu.etl.artifacts import save_trace_parquet
from mofu.scripting import MotionCondition
from mofu.simulator import Trace, net_yaw, run_condition


@pytest.fixture(scope="module")
def traces(sim_config, script_params):
    result = []
    for name, robots in (("EC", 1), ("RM+EC", 2), ("LOC", 1)):
        result.extend(run_condition(MotionCondition.parse(name, robots), script_params, sim_config))
    return result


def test_traces_frame_tags_rows(traces):
    df = traces_frame(traces)
    assert len(df) == sum(len(t) for t in traces)
    assert sorted(df["ordinal"].unique()) == [0, 1, 2, 3]
    assert set(df["condition"]) == {"EC", "RM+EC (2 robots)", "LOC"}


def test_summary_matches_trace_properties(traces):
    summary = summarize_traces(traces)
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert list(summary["condition"]) == [t.condition for t in traces]
    assert list(summary["robot"]) == [1, 1, 2, 1]

    for (_, row), trace in zip(summary.iterrows(), traces):
        assert row["samples"] == len(trace)
        assert row["stroke_mm"] == pytest.approx(trace.stroke, abs=1e-3)
        assert row["peak_height_mm"] == pytest.approx(trace.peak_overall_height, abs=1e-3)
        assert row["max_abs_yaw_rad"] == pytest.approx(trace.max_abs_yaw, abs=1e-6)
        assert row["final_yaw_rad"] == pytest.approx(net_yaw(trace), abs=1e-6)
        assert row["displacement_mm"] == pytest.approx(trace.displacement, abs=1e-3)

    loc = summary[summary["condition"] == "LOC"].iloc[0]
    assert loc["displacement_mm"] == pytest.approx(1500.0, abs=1e-3)


def test_summary_of_nothing():
    summary = summarize_traces([])
    assert summary.empty
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert summarize_parquet([]).empty


def test_summary_from_parquet_files(tmp_path, traces):
    paths = [
        save_trace_parquet(trace, tmp_path / f"{i:02d}_{trace.robot}.parquet")
        for i, trace in enumerate(traces)
    ]
    from_files = summarize_parquet(paths)
    in_memory = summarize_traces(traces)
    assert list(from_files["condition"]) == list(in_memory["condition"])
    assert list(from_files["samples"]) == list(in_memory["samples"])
    assert from_files["stroke_mm"].tolist() == pytest.approx(in_memory["stroke_mm"].tolist())
    assert from_files["displacement_mm"].tolist() == pytest.approx(in_memory["displacement_mm"].tolist())


def test_final_yaw_is_wrapped():
    frame = pd.DataFrame(
        {
            "t_s": [0.0, 1.0, 2.0, 3.0],
            "x_mm": 0.0,
            "y_mm": 0.0,
            "yaw_rad": [0.0, math.pi, 1.5 * math.pi, 2.5 * math.pi],
            "z_mm": 135.0,
            "theta_rad": 0.0,
            "overall_height_mm": 210.0,
        }
    )
    spun = Trace(frame=frame, condition="RM", robot=1, dt=1.0)
    row = summarize_traces([spun]).iloc[0]
    assert row["final_yaw_rad"] == pytest.approx(0.5 * math.pi, abs=1e-6)
    assert row["final_yaw_rad"] == pytest.approx(net_yaw(spun), abs=1e-6)
    assert row["max_abs_yaw_rad"] == pytest.approx(2.5 * math.pi, abs=1e-6)
