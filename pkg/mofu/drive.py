"""
Differential two-wheel drive kinematics.

Lengths in mm, angles in rad, rates per second. Wheels roll without slip.
"""

from dataclasses import dataclass
from typing import Tuple
import math

from mofu.errors import InvalidParamsError

STRAIGHT_LINE_THRESHOLD = 1e-9  # rad turned per step


def normalize_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]"""
    return math.pi - (math.pi - angle) % (2.0 * math.pi)


@dataclass(frozen=True)
class DriveGeometry:
    wheel_radius: float = 29.0  # 58 mm wheels
    track: float = 90.0  # distance between wheel contact points

    def __post_init__(self):
        if not (math.isfinite(self.wheel_radius) and self.wheel_radius > 0):
            raise InvalidParamsError(f"wheel_radius must be > 0, got {self.wheel_radius}")
        if not (math.isfinite(self.track) and self.track > 0):
            raise InvalidParamsError(f"track must be > 0, got {self.track}")


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_angle(self.yaw))


@dataclass(frozen=True)
class WheelRates:
    omega_left: float
    omega_right: float

    def __post_init__(self):
        if not (math.isfinite(self.omega_left) and math.isfinite(self.omega_right)):
            raise InvalidParamsError(f"non-finite wheel rates ({self.omega_left}, {self.omega_right})")


def body_to_wheels(geom: DriveGeometry, v: float, omega: float) -> WheelRates:
    """Body twist (mm/s, rad/s) -> wheel angular rates (rad/s)"""
    half_track = omega * geom.track / 2.0
    return WheelRates(
        omega_left=(v - half_track) / geom.wheel_radius,
        omega_right=(v + half_track) / geom.wheel_radius,
    )


def wheels_to_body(geom: DriveGeometry, rates: WheelRates) -> Tuple[float, float]:
    """Wheel angular rates (rad/s) -> body twist (mm/s, rad/s)"""
    v = geom.wheel_radius * (rates.omega_left + rates.omega_right) / 2.0
    omega = geom.wheel_radius * (rates.omega_right - rates.omega_left) / geom.track
    return v, omega


def integrate_pose(pose: Pose, v: float, omega: float, dt: float) -> Pose:
    """
    Advance a pose under a constant twist for dt seconds.

    Integration follows the exact circular arc, so splitting a step into
    shorter steps with the same twist gives the same result.
    """
    if not dt > 0:
        raise InvalidParamsError(f"dt must be > 0, got {dt}")

    turn = omega * dt
    if abs(turn) < STRAIGHT_LINE_THRESHOLD:
        return Pose(
            x=pose.x + v * dt * math.cos(pose.yaw),
            y=pose.y + v * dt * math.sin(pose.yaw),
            yaw=pose.yaw + turn,
        )

    radius = v / omega
    yaw_next = pose.yaw + turn
    return Pose(
        x=pose.x + radius * (math.sin(yaw_next) - math.sin(pose.yaw)),
        y=pose.y - radius * (math.cos(yaw_next) - math.cos(pose.yaw)),
        yaw=yaw_next,
    )


def compensation_yaw_rate(dtheta_cap_dt: float, direction: float = 1.0) -> float:
    """Body yaw rate that cancels the base rotation rate direction * dTheta/dt / 2"""
    return -direction * dtheta_cap_dt / 2.0
