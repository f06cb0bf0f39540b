"""
Measurement CSV: `trial,z_mm,theta_rad`.

Header required, UTF-8, lines starting with '#' ignored. Errors point at
the offending file line.
"""

from io import StringIO
from pathlib import Path
from typing import List, Optional, Sequence, Union
import logging

import pandas as pd

from mofu.calibration import MeasurementSample, samples_frame
from mofu.errors import DataFileError, EmptyDatasetError, MofuError

logger = logging.getLogger(__name__)

MEASUREMENT_COLUMNS = ["trial", "z_mm", "theta_rad"]


def _data_lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataFileError(path, f"not valid UTF-8: {exc}")
    return [
        (number, line)
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]


def load_measurements(path: Union[str, Path]) -> List[MeasurementSample]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")

    lines = _data_lines(path)
    if not lines:
        raise DataFileError(path, "missing header trial,z_mm,theta_rad")
    header_line, header = lines[0]
    columns = [c.strip() for c in header.split(",")]
    if sorted(columns) != sorted(MEASUREMENT_COLUMNS):
        raise DataFileError(path, f"header must be trial,z_mm,theta_rad, got {header.strip()!r}", line=header_line)

    for number, line in lines[1:]:
        if line.count(",") != len(columns) - 1:
            raise DataFileError(path, f"expected {len(columns)} fields", line=number)

    df = pd.read_csv(StringIO("\n".join(line for _, line in lines)), dtype=str, skipinitialspace=True)
    df.columns = columns

    samples = []
    for (number, _), row in zip(lines[1:], df.itertuples(index=False)):
        try:
            trial = int(row.trial)
            z = float(row.z_mm)
            theta = float(row.theta_rad)
        except (TypeError, ValueError):
            raise DataFileError(path, f"non-numeric value in {tuple(row)}", line=number)
        try:
            samples.append(MeasurementSample(z, theta, trial))
        except MofuError as exc:
            raise DataFileError(path, str(exc), line=number)

    if not samples:
        raise EmptyDatasetError(f"{path}: no measurement rows")
    logger.info("Loaded %d measurements (%d trials) from %s", len(samples), len({s.trial for s in samples}), path)
    return samples


def save_measurements(
    samples: Sequence[MeasurementSample],
    path: Union[str, Path],
    comment: Optional[str] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = samples_frame(samples).to_csv(index=False, float_format="%.9g", lineterminator="\n")
    prefix = "".join(f"# {line}\n" for line in comment.splitlines()) if comment else ""
    path.write_text(prefix + body, encoding="utf-8")
    logger.info("Saved %d measurements to %s", len(samples), path)
    return path
