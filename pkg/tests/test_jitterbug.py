import math

import numpy as np
import pytest

from conftest import reference_height
from mofu.errors import InvalidParamsError, OutOfDomainError
from mofu.jitterbug import (
    InverseMode,
    JitterbugParams,
    LookupTable,
    base_yaw,
    build_lookup,
    forward_height,
    intermediate_radii,
    inverse_angle,
    inverse_angles,
    mu_zero,
)


def test_endpoint_heights_match_reference(params):
    assert forward_height(params, 0.0) == pytest.approx(reference_height(0.0), abs=1e-9)
    assert forward_height(params, 1.0) == pytest.approx(reference_height(1.0), abs=1e-9)
    assert forward_height(params, 0.0) == pytest.approx(135.2, abs=0.1)
    assert forward_height(params, 1.0) == pytest.approx(214.9, abs=0.1)


def test_stroke_in_expected_range(params):
    stroke = forward_height(params, 1.0) - forward_height(params, 0.0)
    assert 60.0 <= stroke <= 85.0


def test_height_is_strictly_increasing(params):
    z = forward_height(params, np.linspace(0.0, 1.0, 2001))
    assert np.all(np.diff(z) > 0)


def test_vectorized_matches_scalar(params):
    theta = np.array([0.0, 0.1, 0.37, 0.9, 1.0])
    z = forward_height(params, theta)
    assert z.shape == theta.shape
    for t, value in zip(theta, z):
        assert value == pytest.approx(forward_height(params, float(t)), abs=1e-12)


def test_clearance_is_additive(params):
    theta = np.linspace(0.0, 1.0, 11)
    shifted = forward_height(params.with_clearance(20.0), theta) - forward_height(params, theta)
    assert np.allclose(shifted, 7.0, atol=1e-12)


@pytest.mark.parametrize("theta", [-0.1, 1.2, 2.0, float("nan")])
def test_outside_domain_raises(params, theta):
    with pytest.raises(OutOfDomainError):
        forward_height(params, theta)


def test_opposite_sign_convention_has_no_real_height(params):
    # mu0 + theta pushes sin(mu) past r_b / r_a
    with pytest.raises(OutOfDomainError):
        intermediate_radii(params, mu_zero(params) + 0.1)


def test_radii_at_contracted_state(params):
    r_x, r_y, r_z = intermediate_radii(params, mu_zero(params))
    assert math.hypot(r_x, r_y) == pytest.approx(params.r_a)
    assert r_z > 0


def test_base_yaw_full_stroke():
    assert base_yaw(1.0) == pytest.approx(0.5)
    assert math.degrees(base_yaw(1.0)) == pytest.approx(28.6, abs=0.2)
    assert base_yaw(1.0, direction=-1.0) == pytest.approx(-0.5)
    assert np.allclose(base_yaw(np.array([0.0, 0.4])), [0.0, 0.2])


@pytest.mark.parametrize(
    "kwargs",
    [
        {"r_b": 60.0},
        {"r_a": -1.0},
        {"theta_dh": 1.6},
        {"clearance_c": -1.0},
        {"r_a": float("inf")},
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParamsError):
        JitterbugParams(**kwargs)


def test_table_shape(table, params):
    assert table.n == 45
    assert table.step == pytest.approx(1.0 / 44)
    assert table.entries[0] == (0.0, pytest.approx(forward_height(params, 0.0)))
    assert table.theta[-1] == pytest.approx(1.0)
    assert np.all(np.diff(table.z) > 0)


def test_table_is_read_only(table):
    with pytest.raises(ValueError):
        table.z[0] = 0.0


def test_build_lookup_rejects_small_tables(params):
    with pytest.raises(InvalidParamsError):
        build_lookup(params, n=1)


def test_nearest_roundtrip_within_half_step(table, params):
    theta = np.linspace(0.0, 1.0, 1000)
    estimate, saturated = inverse_angles(table, forward_height(params, theta), InverseMode.NEAREST)
    assert not saturated.any()
    assert np.max(np.abs(estimate - theta)) <= table.step / 2 + 1e-12
    assert table.step / 2 == pytest.approx(0.01137, abs=1e-5)


def test_nearest_returns_exact_nodes(table):
    estimate, _ = inverse_angles(table, table.z, InverseMode.NEAREST)
    assert np.array_equal(estimate, table.theta)


def test_nearest_ties_resolve_to_lower_index(table):
    k = 10
    result = inverse_angle(table, float(table.boundary_z[k]), InverseMode.NEAREST)
    assert result.theta_cap == table.theta[k]
    assert not result.saturated


def test_interpolated_height_roundtrip(table, params):
    targets = np.linspace(table.z_min, table.z_max, 1000)
    theta, _ = inverse_angles(table, targets, InverseMode.INTERPOLATED)
    assert np.max(np.abs(forward_height(params, theta) - targets)) <= 0.25


def test_interpolated_inverse_is_monotonic(table):
    theta, _ = inverse_angles(table, np.linspace(table.z_min, table.z_max, 500), "interpolated")
    assert np.all(np.diff(theta) >= 0)


def test_saturation_clamps_to_endpoints(table):
    low = inverse_angle(table, table.z_min - 5.0)
    high = inverse_angle(table, table.z_max + 5.0, InverseMode.INTERPOLATED)
    assert low == (0.0, True)
    assert high.theta_cap == pytest.approx(1.0)
    assert high.saturated


def test_non_finite_target_raises(table):
    with pytest.raises(OutOfDomainError):
        inverse_angle(table, float("nan"))


def test_table_without_model_uses_height_midpoints():
    table = LookupTable(theta=[0.0, 0.5, 1.0], z=[100.0, 110.0, 130.0], theta_max=1.0)
    assert table.params is None
    assert inverse_angle(table, 104.9).theta_cap == 0.0
    assert inverse_angle(table, 105.1).theta_cap == 0.5
    assert inverse_angle(table, 120.0).theta_cap == 0.5
    assert inverse_angle(table, 121.0).theta_cap == 1.0
    # plain piecewise-linear without a model
    assert inverse_angle(table, 120.0, InverseMode.INTERPOLATED).theta_cap == pytest.approx(0.75)


@pytest.mark.parametrize(
    "theta, z",
    [
        ([0.0, 0.4, 1.0], [1.0, 2.0, 3.0]),
        ([0.0, 0.5, 1.0], [1.0, 3.0, 2.0]),
        ([0.0, 0.5, 0.9], [1.0, 2.0, 3.0]),
        ([0.0], [1.0]),
    ],
)
def test_invalid_tables(theta, z):
    with pytest.raises(InvalidParamsError):
        LookupTable(theta=theta, z=z, theta_max=1.0)
