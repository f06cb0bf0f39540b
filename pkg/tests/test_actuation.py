import math

import numpy as np
import pytest

from mofu.actuation import (
    DEFAULT_INTEGRAL_LIMIT,
    DEFAULT_RATE_LIMIT,
    LeadScrew,
    MotorState,
    PidGains,
    height_to_motor_angle,
    pid_step,
    screw_displacement,
)
from mofu.errors import InvalidParamsError, OutOfDomainError


def reference_loop(target, steps, kp=5.0, ki=10.0, dt=0.1):
    """Position loop written out by hand: velocity command = kp*e + ki*sum(e*dt)"""
    angle, integral = 0.0, 0.0
    history = []
    for _ in range(steps):
        error = target - angle
        integral += error * dt
        angle += (kp * error + ki * integral) * dt
        history.append(angle)
    return history


def test_step_response_settles_within_two_seconds():
    gains = PidGains()
    state = MotorState()
    angles = []
    for _ in range(40):
        state, _ = pid_step(gains, state, 1.0, 0.1)
        angles.append(state.angle)

    assert np.allclose(angles, reference_loop(1.0, 40), atol=1e-9)
    assert all(abs(1.0 - a) < 0.01 for a in angles[19:])


def test_rate_limit_saturates_command():
    state, command = pid_step(PidGains(), MotorState(), 100.0, 0.1)
    assert command == 50.0
    assert state.angle == pytest.approx(5.0)


def test_integral_is_clamped():
    state = MotorState()
    for _ in range(200):
        state, _ = pid_step(PidGains(kp=0.0, ki=0.01), state, 1000.0, 0.1)
    assert state.integral_error == 10.0


@pytest.mark.parametrize("target", [-5.0, 0.3, 1.0, 5.0])
def test_constant_target_converges_within_five_seconds(target):
    gains = PidGains()
    state = MotorState()
    for _ in range(50):
        state, command = pid_step(gains, state, target, 0.1)
        assert abs(command) < DEFAULT_RATE_LIMIT
    assert abs(state.angle - target) < 1e-3


@pytest.mark.parametrize("target", [1000.0, -1000.0])
def test_integral_stays_clamped_while_saturated(target):
    state = MotorState()
    for _ in range(100):
        state, command = pid_step(PidGains(), state, target, 0.1)
        assert command == math.copysign(DEFAULT_RATE_LIMIT, target)
        assert abs(state.integral_error) <= DEFAULT_INTEGRAL_LIMIT
    assert state.integral_error == math.copysign(DEFAULT_INTEGRAL_LIMIT, target)
    assert state.angle == pytest.approx(math.copysign(500.0, target))


def test_derivative_term_only_with_kd():
    state = MotorState(angle=0.0, prev_error=0.2)
    _, plain = pid_step(PidGains(kp=1.0, ki=0.0, kd=0.0), state, 1.0, 0.1)
    _, damped = pid_step(PidGains(kp=1.0, ki=0.0, kd=0.5), state, 1.0, 0.1)
    assert plain == pytest.approx(1.0)
    assert damped == pytest.approx(1.0 + 0.5 * (1.0 - 0.2) / 0.1)


def test_invalid_pid_inputs():
    with pytest.raises(InvalidParamsError):
        PidGains(kp=-1.0)
    with pytest.raises(InvalidParamsError):
        pid_step(PidGains(), MotorState(), 1.0, 0.0)


def test_screw_displacement():
    screw = LeadScrew()
    assert screw_displacement(screw, 2 * math.pi) == pytest.approx(20.0)
    assert screw_displacement(screw, 7 * math.pi) == pytest.approx(70.0)
    assert height_to_motor_angle(screw, 170.0, 100.0) == pytest.approx(7 * math.pi)
    with pytest.raises(OutOfDomainError):
        height_to_motor_angle(screw, 99.0, 100.0)
    with pytest.raises(InvalidParamsError):
        LeadScrew(lead=0.0)


def test_lift_domain(lift, table):
    assert lift.angle_max == pytest.approx(2 * math.pi * (table.z_max - table.z_min) / 20.0)
    assert lift.height(0.0) == (table.z_min, False)

    z, clipped = lift.height(lift.angle_max + 3.0)
    assert clipped
    assert z == pytest.approx(table.z_max)

    z, clipped = lift.height(-1.0)
    assert clipped
    assert z == table.z_min


def test_lift_theta(lift):
    assert lift.theta(0.0) == 0.0
    assert lift.theta(lift.angle_max) == pytest.approx(1.0)
    profile = lift.theta_profile([0.0, 3.0, 7 * math.pi, 100.0])
    assert profile[1] == pytest.approx(lift.theta(3.0), abs=1e-12)
    assert profile[3] == pytest.approx(1.0)
    assert np.all(np.diff(profile) >= 0)


def test_default_amplitude_lifts_seventy_millimetres(lift):
    z, clipped = lift.height(7 * math.pi)
    assert not clipped
    assert z - lift.z_min == pytest.approx(70.0)
