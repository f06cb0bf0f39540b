"""
Trace summaries with DuckDB.

Traces are registered as one in-memory table and summarized with SQL,
one row per (condition, robot).
"""

from pathlib import Path
from typing import Iterable, Sequence, Union
import logging

import duckdb
import pandas as pd

from mofu.simulator import TRACE_COLUMNS, Trace

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "condition",
    "robot",
    "samples",
    "stroke_mm",
    "peak_height_mm",
    "max_abs_yaw_rad",
    "final_yaw_rad",
    "displacement_mm",
]

SUMMARY_QUERY = """
WITH per_trace AS (
    SELECT
        ordinal,
        condition,
        robot,
        COUNT(*) AS samples,
        MAX(z_mm) - MIN(z_mm) AS stroke_mm,
        MAX(overall_height_mm) AS peak_height_mm,
        MAX(ABS(yaw_rad)) AS max_abs_yaw_rad,
        arg_max(yaw_rad, t_s) - arg_min(yaw_rad, t_s) AS net_yaw_rad,
        arg_max(x_mm, t_s) - arg_min(x_mm, t_s) AS dx_mm,
        arg_max(y_mm, t_s) - arg_min(y_mm, t_s) AS dy_mm
    FROM traces
    GROUP BY ordinal, condition, robot
)
SELECT
    condition,
    robot,
    samples,
    ROUND(stroke_mm, 3) AS stroke_mm,
    ROUND(peak_height_mm, 3) AS peak_height_mm,
    ROUND(max_abs_yaw_rad, 6) AS max_abs_yaw_rad,
    ROUND(atan2(sin(net_yaw_rad), cos(net_yaw_rad)), 6) AS final_yaw_rad,
    ROUND(SQRT(dx_mm * dx_mm + dy_mm * dy_mm), 3) AS displacement_mm
FROM per_trace
ORDER BY ordinal
"""


def traces_frame(traces: Iterable[Trace]) -> pd.DataFrame:
    """Long frame of all traces, tagged with condition, robot and input order"""
    frames = [
        trace.table.assign(ordinal=i, condition=trace.condition, robot=trace.robot)
        for i, trace in enumerate(traces)
    ]
    if not frames:
        return pd.DataFrame(columns=["ordinal", "condition", "robot"] + TRACE_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def summarize_traces(traces: Sequence[Trace]) -> pd.DataFrame:
    """
    Stroke, peak overall height, peak |yaw|, net yaw and displacement per trace.

    final_yaw_rad is the yaw at the last sample relative to the first,
    wrapped to (-pi, pi] like net_yaw.
    """
    df = traces_frame(traces)
    if df.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)

    conn = duckdb.connect(":memory:")
    try:
        conn.register("traces", df)
        summary = conn.execute(SUMMARY_QUERY).df()
    finally:
        conn.close()
    logger.info("Summarized %d trace(s)", len(summary))
    return summary[SUMMARY_COLUMNS]


def summarize_parquet(paths: Sequence[Union[str, Path]]) -> pd.DataFrame:
    """summarize_traces over trace parquet files written by save_trace_parquet"""
    files = [str(Path(p)) for p in paths]
    if not files:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    conn = duckdb.connect(":memory:")
    try:
        listing = ", ".join(f"'{f}'" for f in files)
        conn.execute(
            f"CREATE VIEW trace_files AS SELECT * FROM read_parquet([{listing}], filename = true)"
        )
        conn.execute(
            "CREATE VIEW traces AS SELECT *, dense_rank() OVER (ORDER BY filename) AS ordinal FROM trace_files"
        )
        summary = conn.execute(SUMMARY_QUERY).df()
    finally:
        conn.close()
    return summary[SUMMARY_COLUMNS]
