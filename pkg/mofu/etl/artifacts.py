"""
CSV and Parquet I/O for lookup tables, motion scripts and traces.

Scripts and traces carry a JSON sidecar `<file>.meta.json` (sorted keys,
format_version) with the settings that produced them. Output is written
with fixed float formats and '\\n' line endings so identical runs give
byte-identical files.
"""

from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, Union
import json
import logging

import numpy as np
import pandas as pd

from mofu.errors import DataFileError, MofuError
from mofu.jitterbug import LookupTable
from mofu.scripting import SCRIPT_COLUMNS, MotionCondition, MotionScript, ScriptParams
from mofu.simulator import SETPOINT_COLUMNS, TRACE_COLUMNS, TRACE_FORMAT_VERSION, Trace

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TABLE_COLUMNS = ["theta_rad", "z_mm"]
TABLE_FLOAT_FORMAT = "%.9g"
SERIES_FLOAT_FORMAT = "%.12g"
SCRIPT_FORMAT_VERSION = 1


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def robot_path(path: PathLike, robot: int, robots: int) -> Path:
    """Per-robot output file: the path itself for one robot, <stem>_robotN<suffix> otherwise"""
    path = Path(path)
    if robots == 1:
        return path
    return path.with_name(f"{path.stem}_robot{robot}{path.suffix}")


def write_sidecar(path: PathLike, metadata: Dict) -> Path:
    meta_path = sidecar_path(path)
    meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return meta_path


def read_sidecar(path: PathLike, required: bool = True) -> Optional[Dict]:
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        if required:
            raise DataFileError(meta_path, "metadata sidecar not found")
        return None
    try:
        return json.loads(meta_path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFileError(meta_path, f"invalid JSON: {exc}")


def _read_csv(path: PathLike, columns: List[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        df = pd.read_csv(path, encoding="utf-8")
    except (UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataFileError(path, f"unreadable CSV: {exc}")
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise DataFileError(path, f"missing column(s) {', '.join(missing)}", line=1)
    return df


def _write_csv(df: pd.DataFrame, path: PathLike, float_format: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=float_format, lineterminator="\n")


# Lookup tables

def save_table(table: LookupTable, path: PathLike) -> Path:
    df = pd.DataFrame({"theta_rad": table.theta, "z_mm": table.z})
    _write_csv(df, path, TABLE_FLOAT_FORMAT)
    logger.info("Saved %d-entry lookup table to %s", table.n, path)
    return Path(path)


def load_table(path: PathLike) -> LookupTable:
    """Table from a `theta_rad,z_mm` CSV; its last angle is taken as theta_max"""
    df = _read_csv(path, TABLE_COLUMNS)
    if df.empty:
        raise DataFileError(path, "table has no entries")
    try:
        theta = df["theta_rad"].astype(float).to_numpy()
        z = df["z_mm"].astype(float).to_numpy()
    except ValueError as exc:
        raise DataFileError(path, f"non-numeric table value: {exc}")
    try:
        return LookupTable(theta=theta, z=z, theta_max=float(theta[-1]))
    except MofuError as exc:
        raise DataFileError(path, str(exc))


# Motion scripts

def save_script(script: MotionScript, path: PathLike) -> Path:
    _write_csv(script.frame[SCRIPT_COLUMNS], path, SERIES_FLOAT_FORMAT)
    write_sidecar(
        path,
        {
            "format_version": SCRIPT_FORMAT_VERSION,
            "condition": script.condition.kind.value,
            "robots": script.condition.robots,
            "periods_s": list(script.periods),
            "params": asdict(script.params),
            "columns": SCRIPT_COLUMNS,
        },
    )
    logger.info("Saved %s script (%d rows) to %s", script.condition.name, len(script.frame), path)
    return Path(path)


def load_script(path: PathLike) -> MotionScript:
    df = _read_csv(path, SCRIPT_COLUMNS)
    meta = read_sidecar(path)
    try:
        condition = MotionCondition.parse(meta["condition"], int(meta["robots"]))
        params = ScriptParams(**meta["params"])
        periods = tuple(float(p) for p in meta.get("periods_s", ()))
    except (KeyError, TypeError) as exc:
        raise DataFileError(sidecar_path(path), f"incomplete script metadata: {exc}")
    except MofuError as exc:
        raise DataFileError(sidecar_path(path), str(exc))

    if df["compensation"].dtype != bool:
        df["compensation"] = df["compensation"].astype(str).str.lower().map({"true": True, "false": False})
        if df["compensation"].isna().any():
            raise DataFileError(path, "compensation must be True or False")
    for robot, rows in df.groupby("robot"):
        spacing = np.diff(rows["t_s"].to_numpy(dtype=float))
        if len(rows) != params.n_samples or not np.allclose(spacing, params.dt, atol=1e-9):
            raise DataFileError(path, f"robot {robot}: samples do not match {params.control_freq:g} Hz x {params.duration:g} s")

    return MotionScript(condition=condition, params=params, periods=periods, frame=df[SCRIPT_COLUMNS])


# Traces

def save_trace(trace: Trace, path: PathLike) -> Path:
    _write_csv(trace.table, path, SERIES_FLOAT_FORMAT)
    write_sidecar(path, trace.metadata)
    logger.info("Saved trace of %s robot %d to %s", trace.condition, trace.robot, path)
    return Path(path)


def save_trace_parquet(trace: Trace, path: PathLike) -> Path:
    """Full trace frame, setpoint columns included"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame = trace.frame.assign(condition=trace.condition, robot=trace.robot)
    frame.to_parquet(path, index=False, compression="snappy")
    logger.info("Saved trace parquet %s (%.1f KB)", path, Path(path).stat().st_size / 1024)
    return Path(path)


def load_trace(path: PathLike) -> Trace:
    df = _read_csv(path, TRACE_COLUMNS)
    meta = read_sidecar(path, required=False) or {"format_version": TRACE_FORMAT_VERSION}
    if meta.get("format_version", TRACE_FORMAT_VERSION) != TRACE_FORMAT_VERSION:
        raise DataFileError(sidecar_path(path), f"unsupported trace format_version {meta['format_version']}")
    for column in SETPOINT_COLUMNS:
        if column not in df.columns:
            df[column] = False if column in ("compensation", "clipped") else np.nan
    t = df["t_s"].to_numpy(dtype=float)
    dt = float(t[1] - t[0]) if len(t) > 1 else float(meta.get("dt_s", 0.0))
    return Trace(
        frame=df[TRACE_COLUMNS + SETPOINT_COLUMNS],
        condition=str(meta.get("condition", Path(path).stem)),
        robot=int(meta.get("robot", 1)),
        dt=dt,
        metadata=meta,
    )
