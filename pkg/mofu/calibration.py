"""
Model calibration and validation against (Z, Theta) measurements.

The clearance constant C enters the height model additively, so its
least-squares estimate is the mean height residual of the C = 0 model.
Angle RMSE reproduces the validation procedure: each measured height is
mapped to Theta through the nearest lookup entry and compared with the
measured angle, per trial and pooled.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd

from mofu.errors import EmptyDatasetError, InvalidParamsError
from mofu.jitterbug import (
    DEFAULT_TABLE_SIZE,
    DEFAULT_THETA_MAX,
    InverseMode,
    JitterbugParams,
    LookupTable,
    build_lookup,
    forward_height,
    inverse_angles,
)

logger = logging.getLogger(__name__)

Z_BOUNDS = (50.0, 400.0)  # mm
THETA_BOUNDS = (-0.2, 1.2)  # rad
OVERALL_HEIGHT_RANGE = (210.0, 280.0)  # mm
REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MeasurementSample:
    z_measured: float  # mm
    theta_measured: float  # rad, top-face angle
    trial: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.z_measured) and Z_BOUNDS[0] <= self.z_measured <= Z_BOUNDS[1]):
            raise InvalidParamsError(f"z_measured={self.z_measured} mm outside {Z_BOUNDS}")
        if not (math.isfinite(self.theta_measured) and THETA_BOUNDS[0] <= self.theta_measured <= THETA_BOUNDS[1]):
            raise InvalidParamsError(f"theta_measured={self.theta_measured} rad outside {THETA_BOUNDS}")


def samples_frame(samples: Iterable[MeasurementSample]) -> pd.DataFrame:
    """Samples as a `trial,z_mm,theta_rad` frame"""
    rows = [(s.trial, s.z_measured, s.theta_measured) for s in samples]
    return pd.DataFrame(rows, columns=["trial", "z_mm", "theta_rad"])


def _require(samples: Sequence[MeasurementSample], what: str):
    if len(samples) == 0:
        raise EmptyDatasetError(f"{what} needs at least one measurement sample")


def fit_clearance(samples: Sequence[MeasurementSample], params: JitterbugParams) -> float:
    """
    Least-squares clearance constant C (mm).

    The clearance of params is ignored; measured angles must lie in the
    model domain [0, theta_max].
    """
    samples = list(samples)
    _require(samples, "fit_clearance")

    theta = np.array([s.theta_measured for s in samples])
    z = np.array([s.z_measured for s in samples])
    residual = z - forward_height(params.with_clearance(0.0), theta)

    design = np.ones((len(samples), 1))
    (clearance,), *_ = np.linalg.lstsq(design, residual, rcond=None)
    logger.info("Fitted clearance C=%.4f mm from %d samples", clearance, len(samples))
    return float(clearance)


def predicted_angles(samples: Sequence[MeasurementSample], table: LookupTable) -> np.ndarray:
    z = np.array([s.z_measured for s in samples])
    theta, _ = inverse_angles(table, z, InverseMode.NEAREST)
    return theta


def _table_for(params: JitterbugParams, table: Optional[LookupTable]) -> LookupTable:
    return table if table is not None else build_lookup(params)


def rmse_angle(
    samples: Sequence[MeasurementSample],
    params: JitterbugParams,
    table: Optional[LookupTable] = None,
) -> float:
    """Pooled RMSE (rad) of the nearest-entry Theta against the measured Theta"""
    samples = list(samples)
    _require(samples, "rmse_angle")
    error = predicted_angles(samples, _table_for(params, table)) - np.array([s.theta_measured for s in samples])
    return math.sqrt(float(np.mean(error ** 2)))


def rmse_by_trial(
    samples: Sequence[MeasurementSample],
    params: JitterbugParams,
    table: Optional[LookupTable] = None,
) -> Dict[int, float]:
    """rmse_angle computed separately for every trial, keyed by trial number"""
    samples = list(samples)
    _require(samples, "rmse_by_trial")
    frame = samples_frame(samples)
    frame["error"] = predicted_angles(samples, _table_for(params, table)) - frame["theta_rad"]
    per_trial = frame.groupby("trial")["error"].apply(lambda e: math.sqrt(float(np.mean(e ** 2))))
    return {int(trial): float(value) for trial, value in per_trial.items()}


def fit_height_offset(
    z_min_model: float,
    z_max_model: float,
    overall_min: float = OVERALL_HEIGHT_RANGE[0],
    overall_max: float = OVERALL_HEIGHT_RANGE[1],
) -> Tuple[float, float]:
    """
    Offset between mechanism height and overall robot height.

    Returns (offset, residual): the mean of the offsets implied by the two
    ends, and half their difference (model stroke vs. overall stroke).
    """
    if not z_max_model > z_min_model:
        raise InvalidParamsError(f"need z_max_model > z_min_model, got {z_min_model}, {z_max_model}")
    if not overall_max > overall_min:
        raise InvalidParamsError(f"need overall_max > overall_min, got {overall_min}, {overall_max}")
    low = overall_min - z_min_model
    high = overall_max - z_max_model
    return (low + high) / 2.0, abs(low - high) / 2.0


def synthetic_measurements(
    params: JitterbugParams = JitterbugParams(),
    n: int = DEFAULT_TABLE_SIZE,
    trials: int = 3,
    sigma_theta: float = 0.0,
    sigma_z: float = 0.0,
    seed: int = 0,
    theta_max: float = DEFAULT_THETA_MAX,
    theta: Optional[Sequence[float]] = None,
) -> List[MeasurementSample]:
    """
    Synthetic (Z, Theta) samples on the model curve with Gaussian noise.

    By default every trial sweeps n evenly spaced angles over
    [0, theta_max], i.e. the nodes of the default lookup table. Noisy
    values are clipped into the sample bounds.
    """
    if n < 1 or trials < 1:
        raise InvalidParamsError(f"need n >= 1 and trials >= 1, got n={n}, trials={trials}")
    if sigma_theta < 0 or sigma_z < 0:
        raise InvalidParamsError("noise levels must be >= 0")

    truth = np.linspace(0.0, theta_max, n) if theta is None else np.asarray(theta, dtype=float)
    z_true = forward_height(params, truth, theta_max=theta_max)
    rng = np.random.default_rng(seed)

    samples = []
    for trial in range(1, trials + 1):
        theta_noise = rng.normal(0.0, sigma_theta, size=len(truth)) if sigma_theta else np.zeros(len(truth))
        z_noise = rng.normal(0.0, sigma_z, size=len(truth)) if sigma_z else np.zeros(len(truth))
        theta_meas = np.clip(truth + theta_noise, *THETA_BOUNDS)
        z_meas = np.clip(z_true + z_noise, *Z_BOUNDS)
        samples.extend(
            MeasurementSample(float(z), float(t), trial) for z, t in zip(z_meas, theta_meas)
        )
    logger.info(
        "Generated %d synthetic samples (%d trials, sigma_theta=%g, sigma_z=%g, seed=%d)",
        len(samples), trials, sigma_theta, sigma_z, seed,
    )
    return samples


@dataclass
class CalibrationReport:
    clearance_c: float
    height_offset: float
    offset_residual: float
    z_min_model: float
    z_max_model: float
    rmse_pooled: float
    rmse_per_trial: Dict[int, float]
    residual_mean: float
    residual_std: float
    residual_max_abs: float
    n_samples: int
    params: Dict[str, float] = field(default_factory=dict)
    format_version: int = REPORT_FORMAT_VERSION

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["rmse_per_trial"] = {str(k): v for k, v in sorted(self.rmse_per_trial.items())}
        return data


def calibrate(
    samples: Sequence[MeasurementSample],
    params: JitterbugParams = JitterbugParams(),
    theta_max: float = DEFAULT_THETA_MAX,
    n: int = DEFAULT_TABLE_SIZE,
    overall_range: Tuple[float, float] = OVERALL_HEIGHT_RANGE,
) -> CalibrationReport:
    """Fit C, rebuild the table with it, then fit the height offset and score the angles"""
    samples = list(samples)
    _require(samples, "calibrate")

    in_domain = [s for s in samples if 0.0 <= s.theta_measured <= theta_max]
    if len(in_domain) < len(samples):
        logger.warning(
            "%d of %d samples have Theta outside [0, %g] rad; excluded from the clearance fit",
            len(samples) - len(in_domain), len(samples), theta_max,
        )
    _require(in_domain, "fit_clearance")
    clearance = fit_clearance(in_domain, params)
    fitted = params.with_clearance(max(clearance, 0.0))
    if clearance < 0:
        logger.warning("Fitted clearance %.4f mm is negative; clamped to 0", clearance)
    table = build_lookup(fitted, theta_max, n)
    offset, offset_residual = fit_height_offset(table.z_min, table.z_max, *overall_range)

    theta = np.array([s.theta_measured for s in samples])
    z = np.array([s.z_measured for s in samples])
    residual = z - forward_height(fitted, np.clip(theta, 0.0, theta_max), theta_max=theta_max)

    report = CalibrationReport(
        clearance_c=clearance,
        height_offset=offset,
        offset_residual=offset_residual,
        z_min_model=table.z_min,
        z_max_model=table.z_max,
        rmse_pooled=rmse_angle(samples, fitted, table),
        rmse_per_trial=rmse_by_trial(samples, fitted, table),
        residual_mean=float(residual.mean()),
        residual_std=float(residual.std()),
        residual_max_abs=float(np.abs(residual).max()),
        n_samples=len(samples),
        params=asdict(fitted),
    )
    if offset_residual > 1.0:
        logger.warning(
            "Model stroke %.2f mm differs from overall stroke %.2f mm (residual %.2f mm)",
            table.z_max - table.z_min, overall_range[1] - overall_range[0], offset_residual,
        )
    return report
