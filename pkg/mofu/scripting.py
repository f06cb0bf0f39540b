"""
Motion scripts for the ten experimental conditions.

A script is a per-robot table of setpoints sampled at the control
frequency. Sample k is held over [t_k, t_k + 1/f); the last sample
(t = duration) is terminal.

Conditions (robots / rotation / expansion-contraction / locomotion):

    NBM        1|2   -   -   -
    RM         1|2   x   -   -
    EC         1|2   -   x   -
    RM+EC      1|2   x   x   -
    LOC        1     -   -   x
    LOC+RM+EC  1     x   x   x
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Tuple
import logging
import math

import numpy as np
import pandas as pd

from mofu.actuation import LiftMechanism
from mofu.errors import InvalidConditionError, InvalidParamsError
from mofu.jitterbug import JitterbugParams

logger = logging.getLogger(__name__)

SCRIPT_COLUMNS = [
    "t_s",
    "robot",
    "motor_target_rad",
    "v_mm_s",
    "omega_extra_rad_s",
    "compensation",
]


class ConditionKind(str, Enum):
    NBM = "NBM"
    RM = "RM"
    EC = "EC"
    RM_EC = "RM+EC"
    LOC = "LOC"
    LOC_RM_EC = "LOC+RM+EC"

    @classmethod
    def parse(cls, name: str) -> "ConditionKind":
        key = name.strip().upper().replace("_", "+").replace(" ", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise InvalidConditionError(
            f"unknown condition {name!r}; expected one of {', '.join(k.value for k in cls)}"
        )


LOCOMOTION_KINDS = {ConditionKind.LOC, ConditionKind.LOC_RM_EC}


@dataclass(frozen=True)
class MotionCondition:
    kind: ConditionKind
    robots: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ConditionKind(self.kind))
        if self.robots not in (1, 2):
            raise InvalidConditionError(f"robots must be 1 or 2, got {self.robots}")
        if self.kind in LOCOMOTION_KINDS and self.robots != 1:
            raise InvalidConditionError(f"{self.kind.value} is defined for a single robot only")

    @classmethod
    def parse(cls, name: str, robots: int = 1) -> "MotionCondition":
        return cls(ConditionKind.parse(name), robots)

    @property
    def name(self) -> str:
        return self.kind.value if self.robots == 1 else f"{self.kind.value} (2 robots)"

    @property
    def slug(self) -> str:
        base = self.kind.value.replace("+", "_")
        return base if self.robots == 1 else f"{base}_x2"

    @property
    def rotation(self) -> bool:
        return self.kind in (ConditionKind.RM, ConditionKind.RM_EC, ConditionKind.LOC_RM_EC)

    @property
    def expansion(self) -> bool:
        return self.kind in (ConditionKind.EC, ConditionKind.RM_EC, ConditionKind.LOC_RM_EC)

    @property
    def locomotion(self) -> bool:
        return self.kind in LOCOMOTION_KINDS


CONDITIONS = tuple(
    [MotionCondition(kind, 1) for kind in (ConditionKind.NBM, ConditionKind.RM, ConditionKind.EC, ConditionKind.RM_EC)]
    + [MotionCondition(kind, 2) for kind in (ConditionKind.NBM, ConditionKind.RM, ConditionKind.EC, ConditionKind.RM_EC)]
    + [MotionCondition(ConditionKind.LOC, 1), MotionCondition(ConditionKind.LOC_RM_EC, 1)]
)


@dataclass(frozen=True)
class ScriptParams:
    period: float = 6.0  # s
    amplitude: float = 7 * math.pi  # rad of lift motor
    control_freq: float = 10.0  # Hz
    duration: float = 20.0  # s
    dual_period_range: Tuple[float, float] = (5.0, 7.0)
    loc_move: float = 1.5  # s
    loc_stop: float = 0.5  # s
    cruise_speed: float = 100.0  # mm/s
    seed: int = 0
    yaw_direction: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dual_period_range", tuple(float(v) for v in self.dual_period_range))
        if not self.period > 0:
            raise InvalidParamsError(f"period must be > 0, got {self.period}")
        if not self.amplitude >= 0:
            raise InvalidParamsError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.control_freq > 0:
            raise InvalidParamsError(f"control_freq must be > 0, got {self.control_freq}")
        if not self.duration > 0:
            raise InvalidParamsError(f"duration must be > 0, got {self.duration}")
        lo, hi = self.dual_period_range
        if not 0 < lo < hi:
            raise InvalidParamsError(f"dual_period_range needs 0 < min < max, got {self.dual_period_range}")
        if not (self.loc_move > 0 and self.loc_stop >= 0):
            raise InvalidParamsError("loc_move must be > 0 and loc_stop >= 0")
        if self.yaw_direction not in (1.0, -1.0):
            raise InvalidParamsError(f"yaw_direction must be +1 or -1, got {self.yaw_direction}")

        steps = self.duration * self.control_freq
        if abs(steps - round(steps)) > 1e-9:
            raise InvalidParamsError("duration must be a whole number of control periods")
        move = self.loc_move * self.control_freq
        cycle = self.loc_cycle * self.control_freq
        if abs(move - round(move)) > 1e-9 or abs(cycle - round(cycle)) > 1e-9:
            raise InvalidParamsError("locomotion phases must be whole numbers of control periods")

    @property
    def dt(self) -> float:
        return 1.0 / self.control_freq

    @property
    def loc_cycle(self) -> float:
        return self.loc_move + self.loc_stop

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.control_freq)) + 1


@dataclass(frozen=True)
class Setpoint:
    t: float
    motor_target: float = 0.0
    v: float = 0.0
    omega_extra: float = 0.0
    compensation_on: bool = False


@dataclass(frozen=True, eq=False)
class MotionScript:
    condition: MotionCondition
    params: ScriptParams
    periods: Tuple[float, ...]
    frame: pd.DataFrame = field(repr=False)

    @property
    def robots(self) -> Tuple[int, ...]:
        return tuple(int(r) for r in sorted(self.frame["robot"].unique()))

    @property
    def spacing(self) -> float:
        return self.params.dt

    def robot_frame(self, robot: int = 1) -> pd.DataFrame:
        if robot not in self.robots:
            raise InvalidConditionError(f"script has no robot {robot}; robots are {self.robots}")
        return self.frame[self.frame["robot"] == robot].reset_index(drop=True)

    def samples(self, robot: int = 1) -> Iterator[Setpoint]:
        rows = self.robot_frame(robot)
        for t, target, v, omega, comp in zip(
            rows["t_s"], rows["motor_target_rad"], rows["v_mm_s"], rows["omega_extra_rad_s"], rows["compensation"]
        ):
            yield Setpoint(float(t), float(target), float(v), float(omega), bool(comp))


def triangular_wave(t, period: float, amplitude: float):
    """
    Triangle starting at 0, peaking at period/2, back to 0 at period.

    Works on scalars and arrays.
    """
    if not period > 0:
        raise InvalidParamsError(f"period must be > 0, got {period}")
    phase = np.mod(np.asarray(t, dtype=float), period) / period
    value = amplitude * np.where(phase <= 0.5, 2.0 * phase, 2.0 * (1.0 - phase))
    if np.ndim(t) == 0:
        return float(value)
    return value


def dual_periods(period_range: Tuple[float, float] = (5.0, 7.0), seed: int = 0) -> Tuple[float, float]:
    """
    Two triangular periods drawn uniformly from period_range.

    Uses numpy's PCG64 generator (default_rng), so a seed reproduces the
    same pair on every platform.
    """
    lo, hi = period_range
    if not 0 < lo < hi:
        raise InvalidParamsError(f"period range needs 0 < min < max, got {period_range}")
    rng = np.random.default_rng(seed)
    first, second = rng.uniform(lo, hi, size=2)
    return float(first), float(second)


def _locomotion_profile(params: ScriptParams, k: np.ndarray):
    move_n = int(round(params.loc_move * params.control_freq))
    cycle_n = int(round(params.loc_cycle * params.control_freq))
    position = k % cycle_n
    moving = position < move_n
    v = np.where(moving, params.cruise_speed, 0.0)

    # expand on even cycles, contract on odd ones; hold through the stop
    ramp = np.minimum(position, move_n) / move_n
    expanding = (k // cycle_n) % 2 == 0
    target = params.amplitude * np.where(expanding, ramp, 1.0 - ramp)
    return v, target


def generate_script(
    condition: MotionCondition,
    params: ScriptParams = ScriptParams(),
    lift: Optional[LiftMechanism] = None,
) -> MotionScript:
    """Build the setpoint script of one condition; deterministic in (condition, params)"""
    if not isinstance(condition, MotionCondition):
        raise InvalidConditionError(f"expected a MotionCondition, got {condition!r}")

    kind = condition.kind
    if kind in LOCOMOTION_KINDS:
        periods: Tuple[float, ...] = ()
    elif condition.robots == 2:
        periods = dual_periods(params.dual_period_range, params.seed)
    else:
        periods = (params.period,)

    k = np.arange(params.n_samples)
    t = k / params.control_freq
    zeros = np.zeros(params.n_samples)

    frames = []
    for robot in range(1, condition.robots + 1):
        target, v, omega, compensation = zeros, zeros, zeros, False

        if kind in (ConditionKind.RM, ConditionKind.EC, ConditionKind.RM_EC):
            period = periods[robot - 1]
            triangle = triangular_wave(t, period, params.amplitude)
            if kind is ConditionKind.RM:
                if lift is None:
                    lift = LiftMechanism.from_params(JitterbugParams())
                # the yaw RM+EC would produce, executed by the wheels
                t_next = (k + 1) / params.control_freq
                yaw_now = params.yaw_direction * lift.theta_profile(triangle) / 2.0
                yaw_next = params.yaw_direction * lift.theta_profile(
                    triangular_wave(t_next, period, params.amplitude)
                ) / 2.0
                omega = (yaw_next - yaw_now) * params.control_freq
            else:
                target = triangle
                compensation = kind is ConditionKind.EC
        elif kind in LOCOMOTION_KINDS:
            v, ramp_target = _locomotion_profile(params, k)
            if kind is ConditionKind.LOC_RM_EC:
                target = ramp_target

        frames.append(
            pd.DataFrame(
                {
                    "t_s": t,
                    "robot": robot,
                    "motor_target_rad": target,
                    "v_mm_s": v,
                    "omega_extra_rad_s": omega,
                    "compensation": compensation,
                }
            )
        )

    frame = pd.concat(frames, ignore_index=True)[SCRIPT_COLUMNS]
    frame["compensation"] = frame["compensation"].astype(bool)
    logger.info(
        "Generated %s script: %d robot(s) x %d samples, periods=%s",
        condition.name, condition.robots, params.n_samples, periods,
    )
    return MotionScript(condition=condition, params=params, periods=periods, frame=frame)
