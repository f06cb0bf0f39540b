"""
Deterministic robot simulator.

Executes a MotionScript through the lift actuator, the Jitterbug height
map and the differential drive, and records one trace row per script
sample. Row k holds the state at t_k together with sample k; sample k is
held over [t_k, t_k + spacing) and the last sample is terminal.

The lift controller ticks once per script sample. The PID lift computes
a velocity command toward the held target and keeps it until the next
tick; the ideal lift moves linearly to the target of sample k+1. Sub-steps
(dt below the spacing) only refine the motor and pose integration.

Rotation compensation is a feedforward of the commanded lift motion: the
Theta change of the motor angle the lift is commanded to in each step.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional
import logging
import math

import pandas as pd

from mofu.actuation import (
    DEFAULT_INTEGRAL_LIMIT,
    DEFAULT_RATE_LIMIT,
    LeadScrew,
    LiftMechanism,
    MotorState,
    PidGains,
    pid_step,
)
from mofu.drive import (
    DriveGeometry,
    Pose,
    body_to_wheels,
    compensation_yaw_rate,
    integrate_pose,
    normalize_angle,
)
from mofu.errors import EmptyDatasetError, InvalidParamsError, MofuError, SimulationError
from mofu.jitterbug import DEFAULT_TABLE_SIZE, DEFAULT_THETA_MAX, JitterbugParams
from mofu.scripting import MotionScript, ScriptParams, Setpoint, generate_script

logger = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "t_s",
    "x_mm",
    "y_mm",
    "yaw_rad",
    "z_mm",
    "theta_rad",
    "overall_height_mm",
]
SETPOINT_COLUMNS = ["motor_target_rad", "v_mm_s", "omega_extra_rad_s", "compensation", "clipped"]
TRACE_FORMAT_VERSION = 1

OVERALL_HEIGHT_MIN = 210.0  # mm, wheels and frame included
SUBSTEP_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RobotState:
    pose: Pose
    z: float
    theta_cap: float
    lift_motor: MotorState
    left_motor: MotorState
    right_motor: MotorState
    t: float = 0.0
    lift_command: float = 0.0  # rad/s, held between controller ticks
    clipped: bool = False


@dataclass(frozen=True, eq=False)
class SimConfig:
    """
    Simulation settings.

    dt must divide the script spacing; each sample is then held over
    spacing / dt steps. height_offset=None anchors the contracted robot at
    overall_min (210 mm).
    """

    dt: float = 0.1
    height_offset: Optional[float] = None
    overall_min: float = OVERALL_HEIGHT_MIN
    geometry: DriveGeometry = DriveGeometry()
    params: JitterbugParams = JitterbugParams()
    gains: PidGains = PidGains()
    screw: LeadScrew = LeadScrew()
    rate_limit: float = DEFAULT_RATE_LIMIT
    integral_limit: float = DEFAULT_INTEGRAL_LIMIT
    ideal_lift: bool = False
    yaw_direction: float = 1.0
    theta_max: float = DEFAULT_THETA_MAX
    table_size: int = DEFAULT_TABLE_SIZE

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParamsError(f"dt must be > 0, got {self.dt}")
        if self.height_offset is not None and not self.height_offset >= 0:
            raise InvalidParamsError(f"height_offset must be >= 0, got {self.height_offset}")
        if not (self.rate_limit > 0 and self.integral_limit > 0):
            raise InvalidParamsError("rate_limit and integral_limit must be > 0")
        if self.yaw_direction not in (1.0, -1.0):
            raise InvalidParamsError(f"yaw_direction must be +1 or -1, got {self.yaw_direction}")

    @cached_property
    def lift(self) -> LiftMechanism:
        return LiftMechanism.from_params(self.params, self.screw, self.theta_max, self.table_size)

    @property
    def offset(self) -> float:
        if self.height_offset is not None:
            return self.height_offset
        return self.overall_min - self.lift.z_min


def initial_state(config: SimConfig, pose: Pose = Pose(), motor_target: float = 0.0) -> RobotState:
    """Robot at rest with the lift already at motor_target (clipped)"""
    lift = config.lift
    angle, clipped = lift.clip_angle(motor_target)
    z, _ = lift.height(angle)
    theta = lift.theta(angle)
    return RobotState(
        pose=pose,
        z=z,
        theta_cap=theta,
        lift_motor=MotorState(angle=angle),
        left_motor=MotorState(),
        right_motor=MotorState(),
        t=0.0,
        clipped=clipped,
    )


def step(
    state: RobotState,
    setpoint: Setpoint,
    config: SimConfig,
    feedforward_target: Optional[float] = None,
    control_period: Optional[float] = None,
    tick: bool = True,
) -> RobotState:
    """
    Advance the robot by config.dt while holding setpoint.

    PID lift: on a tick the position loop runs once over control_period
    (default config.dt) toward the held target, and the motor then turns
    at the resulting velocity command. Later sub-steps of the same period
    pass tick=False and reuse state.lift_command.

    Ideal lift: the motor goes to feedforward_target, the angle the script
    reaches at the end of this step (default: the held target).
    """
    dt = config.dt
    lift = config.lift

    held_target, held_clipped = lift.clip_angle(setpoint.motor_target)
    ref_clipped = False
    command = state.lift_command
    if config.ideal_lift:
        if feedforward_target is None:
            reference, ref_clipped = held_target, held_clipped
        else:
            reference, ref_clipped = lift.clip_angle(feedforward_target)
        lift_motor = MotorState(angle=reference)
    else:
        lift_motor = state.lift_motor
        if tick:
            ticked, command = pid_step(
                config.gains,
                lift_motor,
                held_target,
                control_period or dt,
                config.rate_limit,
                config.integral_limit,
            )
            lift_motor = replace(ticked, angle=lift_motor.angle)
        lift_motor = replace(lift_motor, angle=lift_motor.angle + command * dt)

    z, z_clipped = lift.height(lift_motor.angle)
    theta = lift.theta(lift_motor.angle)

    dtheta = theta - state.theta_cap
    omega_base = config.yaw_direction * dtheta / 2.0 / dt
    omega_comp = 0.0
    if setpoint.compensation_on:
        omega_comp = compensation_yaw_rate(dtheta / dt, config.yaw_direction)

    # wheels carry the commanded twist; the base rotation comes from the linkage
    omega_wheels = setpoint.omega_extra + omega_comp
    rates = body_to_wheels(config.geometry, setpoint.v, omega_wheels)
    pose = integrate_pose(state.pose, setpoint.v, omega_wheels + omega_base, dt)

    return RobotState(
        pose=pose,
        z=z,
        theta_cap=theta,
        lift_motor=lift_motor,
        left_motor=MotorState(angle=state.left_motor.angle + rates.omega_left * dt),
        right_motor=MotorState(angle=state.right_motor.angle + rates.omega_right * dt),
        t=state.t + dt,
        lift_command=command,
        clipped=held_clipped or ref_clipped or z_clipped,
    )


@dataclass(frozen=True, eq=False)
class Trace:
    """Simulated time series of one robot; frame holds TRACE_COLUMNS plus the held setpoints"""

    frame: pd.DataFrame = field(repr=False)
    condition: str
    robot: int
    dt: float
    metadata: Dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def table(self) -> pd.DataFrame:
        return self.frame[TRACE_COLUMNS]

    @property
    def stroke(self) -> float:
        return float(self.frame["z_mm"].max() - self.frame["z_mm"].min())

    @property
    def peak_overall_height(self) -> float:
        return float(self.frame["overall_height_mm"].max())

    @property
    def max_abs_yaw(self) -> float:
        return float(self.frame["yaw_rad"].abs().max())

    @property
    def final_pose(self) -> Pose:
        last = self.frame.iloc[-1]
        return Pose(float(last["x_mm"]), float(last["y_mm"]), float(last["yaw_rad"]))

    @property
    def displacement(self) -> float:
        first, last = self.frame.iloc[0], self.frame.iloc[-1]
        return math.hypot(last["x_mm"] - first["x_mm"], last["y_mm"] - first["y_mm"])

    @property
    def clip_count(self) -> int:
        return int(self.frame["clipped"].sum())


def _substeps(spacing: float, dt: float) -> int:
    count = round(spacing / dt)
    if count < 1 or abs(count * dt - spacing) > SUBSTEP_TOLERANCE:
        raise InvalidParamsError(f"dt={dt:g} s does not divide the script spacing {spacing:g} s")
    return int(count)


def _row(state: RobotState, setpoint: Setpoint, offset: float) -> Dict:
    return {
        "t_s": setpoint.t,
        "x_mm": state.pose.x,
        "y_mm": state.pose.y,
        "yaw_rad": state.pose.yaw,
        "z_mm": state.z,
        "theta_rad": state.theta_cap,
        "overall_height_mm": state.z + offset,
        "motor_target_rad": setpoint.motor_target,
        "v_mm_s": setpoint.v,
        "omega_extra_rad_s": setpoint.omega_extra,
        "compensation": setpoint.compensation_on,
        "clipped": state.clipped,
    }


def run(
    script: MotionScript,
    config: SimConfig = SimConfig(),
    robot: int = 1,
    initial_pose: Pose = Pose(),
) -> Trace:
    """Fold step over the samples of one robot of the script"""
    samples: List[Setpoint] = list(script.samples(robot))
    if not samples:
        raise EmptyDatasetError(f"script {script.condition.name} has no samples for robot {robot}")
    substeps = _substeps(script.spacing, config.dt)
    lift = config.lift
    offset = config.offset

    state = initial_state(config, initial_pose, samples[0].motor_target)
    rows = []
    for k, setpoint in enumerate(samples):
        rows.append(_row(state, setpoint, offset))
        if k == len(samples) - 1:
            break

        start = state.lift_motor.angle
        end, _ = lift.clip_angle(samples[k + 1].motor_target)
        try:
            for j in range(substeps):
                feedforward = start + (end - start) * (j + 1) / substeps
                state = step(state, setpoint, config, feedforward, script.spacing, tick=j == 0)
        except MofuError as exc:
            raise SimulationError(setpoint.t, exc) from exc
        logger.debug("t=%.3f z=%.3f theta=%.4f yaw=%.4f", state.t, state.z, state.theta_cap, state.pose.yaw)

    frame = pd.DataFrame(rows, columns=TRACE_COLUMNS + SETPOINT_COLUMNS)
    trace = Trace(
        frame=frame,
        condition=script.condition.name,
        robot=robot,
        dt=config.dt,
        metadata=_metadata(script, config, robot),
    )

    if trace.clip_count:
        logger.warning(
            "%s robot %d: lift clipped to the table domain on %d of %d samples",
            trace.condition, robot, trace.clip_count, len(trace),
        )
    logger.info(
        "Simulated %s robot %d: %d samples, net yaw %.4f rad, stroke %.2f mm",
        trace.condition, robot, len(trace), net_yaw(trace), trace.stroke,
    )
    return trace


def _metadata(script: MotionScript, config: SimConfig, robot: int) -> Dict:
    return {
        "format_version": TRACE_FORMAT_VERSION,
        "condition": script.condition.name,
        "robot": robot,
        "robots": script.condition.robots,
        "periods_s": list(script.periods),
        "seed": script.params.seed,
        "script_spacing_s": script.spacing,
        "dt_s": config.dt,
        "ideal_lift": config.ideal_lift,
        "height_offset_mm": config.offset,
        "params": {
            "r_a": config.params.r_a,
            "r_b": config.params.r_b,
            "theta_dh": config.params.theta_dh,
            "clearance_c": config.params.clearance_c,
        },
        "gains": {"kp": config.gains.kp, "ki": config.gains.ki, "kd": config.gains.kd},
        "screw_lead_mm": config.screw.lead,
        "wheel_radius_mm": config.geometry.wheel_radius,
        "track_mm": config.geometry.track,
        "columns": TRACE_COLUMNS,
    }


def net_yaw(trace: Trace) -> float:
    """Final minus initial yaw, wrapped to (-pi, pi]"""
    if len(trace) == 0:
        raise EmptyDatasetError("net_yaw needs a non-empty trace")
    yaw = trace.frame["yaw_rad"]
    return normalize_angle(float(yaw.iloc[-1]) - float(yaw.iloc[0]))


def run_condition(
    condition,
    script_params: ScriptParams = ScriptParams(),
    config: SimConfig = SimConfig(),
) -> List[Trace]:
    """Generate the script of a condition and simulate every robot in it"""
    script = generate_script(condition, script_params, lift=config.lift)
    return [run(script, config, robot) for robot in script.robots]
