"""
Motor and lead-screw simulation for the lift actuator and the wheels.

The motors are modeled as ideal velocity sources with rate saturation,
driven by a discrete PID on position error. Gains are read as a
velocity-command PID: kp in 1/s, ki in 1/s^2, kd dimensionless.
"""

from dataclasses import dataclass
from typing import Tuple
import logging
import math

import numpy as np

from mofu.errors import InvalidParamsError, OutOfDomainError
from mofu.jitterbug import (
    DEFAULT_TABLE_SIZE,
    DEFAULT_THETA_MAX,
    InverseMode,
    JitterbugParams,
    LookupTable,
    build_lookup,
    inverse_angles,
)

logger = logging.getLogger(__name__)

DEFAULT_RATE_LIMIT = 50.0  # rad/s
DEFAULT_INTEGRAL_LIMIT = 10.0  # rad*s
HEIGHT_TOLERANCE = 1e-6  # mm


@dataclass(frozen=True)
class PidGains:
    kp: float = 5.0
    ki: float = 10.0
    kd: float = 0.0

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParamsError(f"PID gain {name} must be >= 0, got {value}")


@dataclass(frozen=True)
class MotorState:
    angle: float = 0.0
    integral_error: float = 0.0
    prev_error: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.angle, self.integral_error, self.prev_error)):
            raise InvalidParamsError(f"non-finite motor state {self}")


@dataclass(frozen=True)
class LeadScrew:
    lead: float = 20.0  # mm per revolution

    def __post_init__(self):
        if not (math.isfinite(self.lead) and self.lead > 0):
            raise InvalidParamsError(f"lead must be > 0, got {self.lead}")


def pid_step(
    gains: PidGains,
    state: MotorState,
    target: float,
    dt: float,
    rate_limit: float = DEFAULT_RATE_LIMIT,
    integral_limit: float = DEFAULT_INTEGRAL_LIMIT,
) -> Tuple[MotorState, float]:
    """
    One control period of the position loop.

    Returns the advanced motor state and the velocity command (rad/s)
    that moved it. The integral is clamped to +/- integral_limit.
    """
    if not dt > 0:
        raise InvalidParamsError(f"dt must be > 0, got {dt}")

    error = target - state.angle
    integral = min(max(state.integral_error + error * dt, -integral_limit), integral_limit)

    command = gains.kp * error + gains.ki * integral
    if gains.kd:
        command += gains.kd * (error - state.prev_error) / dt
    command = min(max(command, -rate_limit), rate_limit)

    new_state = MotorState(
        angle=state.angle + command * dt,
        integral_error=integral,
        prev_error=error,
    )
    return new_state, command


def screw_displacement(screw: LeadScrew, motor_angle: float) -> float:
    """Carriage travel (mm) for a motor rotation (rad)"""
    return screw.lead * motor_angle / (2.0 * math.pi)


def height_to_motor_angle(screw: LeadScrew, z: float, z_min: float) -> float:
    """Motor angle (rad) that lifts the structure from z_min to z"""
    if z < z_min - HEIGHT_TOLERANCE:
        raise OutOfDomainError(f"height {z:.6g} mm below contracted height {z_min:.6g} mm", value=z)
    return 2.0 * math.pi * (z - z_min) / screw.lead


@dataclass(frozen=True, eq=False)
class LiftMechanism:
    """
    Lift motor -> carriage height -> Theta, anchored at the contracted height.

    Motor angles are clipped to [0, angle_max] so the height stays inside
    the lookup table domain.
    """

    screw: LeadScrew
    table: LookupTable

    @classmethod
    def from_params(
        cls,
        params: JitterbugParams,
        screw: LeadScrew = LeadScrew(),
        theta_max: float = DEFAULT_THETA_MAX,
        n: int = DEFAULT_TABLE_SIZE,
    ) -> "LiftMechanism":
        return cls(screw=screw, table=build_lookup(params, theta_max, n))

    @property
    def z_min(self) -> float:
        return self.table.z_min

    @property
    def z_max(self) -> float:
        return self.table.z_max

    @property
    def angle_max(self) -> float:
        return height_to_motor_angle(self.screw, self.z_max, self.z_min)

    def clip_angle(self, motor_angle: float) -> Tuple[float, bool]:
        clipped = min(max(motor_angle, 0.0), self.angle_max)
        return clipped, clipped != motor_angle

    def height(self, motor_angle: float) -> Tuple[float, bool]:
        """Structure height (mm) for a lift motor angle, and whether it was clipped"""
        angle, clipped = self.clip_angle(motor_angle)
        z = min(self.z_min + screw_displacement(self.screw, angle), self.z_max)
        return z, clipped

    def theta(self, motor_angle: float) -> float:
        z, _ = self.height(motor_angle)
        theta, _ = inverse_angles(self.table, z, InverseMode.INTERPOLATED)
        return float(theta[0])

    def theta_profile(self, motor_angles) -> np.ndarray:
        """Vectorized theta() for a whole command profile"""
        angles = np.clip(np.asarray(motor_angles, dtype=float), 0.0, self.angle_max)
        z = np.minimum(self.z_min + self.screw.lead * angles / (2.0 * math.pi), self.z_max)
        theta, _ = inverse_angles(self.table, z, InverseMode.INTERPOLATED)
        return theta
