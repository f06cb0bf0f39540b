"""
Forward and inverse kinematics of the Jitterbug expansion mechanism.

Height Z of the structure as a function of the top-face rotation Theta:

    Z(Theta) = 2 * sqrt(r_x^2 + r_y^2 + r_z^2) + C
    r_x = R_A cos(mu),  r_y = R_A sin(mu)
    r_z = (R_A cos(theta_dh) cos(mu) + sqrt(R_B^2 - R_A^2 sin^2(mu))) / sin(theta_dh)
    mu_0 = arcsin(R_B / R_A),  theta = Theta / 2

Sign convention: mu = mu_0 - theta. With mu = mu_0 + theta the square root
in r_z is imaginary for every theta > 0, because sin(mu_0) = R_B / R_A is
already its zero. Subtracting keeps the radicand non-negative on
Theta in [0, 1.0] rad and makes Z increase from contracted to expanded.

The closed-form inverse is intractable, so control goes through a sampled
lookup table (45 points over 0..1.0 rad by default).
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Optional, Tuple
import logging
import math

import numpy as np
from scipy.optimize import brentq

from mofu.errors import InvalidParamsError, OutOfDomainError

logger = logging.getLogger(__name__)

RADICAND_TOLERANCE = 1e-9  # mm^2
DOMAIN_TOLERANCE = 1e-12  # rad
DEFAULT_THETA_MAX = 1.0
DEFAULT_TABLE_SIZE = 45


@dataclass(frozen=True)
class JitterbugParams:
    """Geometric constants of the mechanism (lengths in mm, angle in rad)"""

    r_a: float = 56.6
    r_b: float = 46.2
    theta_dh: float = 0.956
    clearance_c: float = 13.0

    def __post_init__(self):
        values = (self.r_a, self.r_b, self.theta_dh, self.clearance_c)
        if not all(math.isfinite(v) for v in values):
            raise InvalidParamsError(f"non-finite Jitterbug parameter in {values}")
        if not 0 < self.r_b < self.r_a:
            raise InvalidParamsError(
                f"need 0 < r_b < r_a, got r_a={self.r_a}, r_b={self.r_b}"
            )
        if not 0 < self.theta_dh < math.pi / 2:
            raise InvalidParamsError(f"theta_dh must lie in (0, pi/2), got {self.theta_dh}")
        if self.clearance_c < 0:
            raise InvalidParamsError(f"clearance_c must be >= 0, got {self.clearance_c}")

    def with_clearance(self, clearance_c: float) -> "JitterbugParams":
        return replace(self, clearance_c=clearance_c)


class InverseMode(str, Enum):
    NEAREST = "nearest"
    INTERPOLATED = "interpolated"


class InverseResult(NamedTuple):
    theta_cap: float
    saturated: bool


def mu_zero(params: JitterbugParams) -> float:
    """Angle at which the r_z square root vanishes: arcsin(R_B / R_A)"""
    if params.r_b >= params.r_a:
        raise InvalidParamsError(f"arcsin undefined for r_b/r_a = {params.r_b / params.r_a}")
    return math.asin(params.r_b / params.r_a)


def _radii(params: JitterbugParams, mu):
    mu = np.asarray(mu, dtype=float)
    sin_mu = np.sin(mu)
    cos_mu = np.cos(mu)
    radicand = params.r_b ** 2 - params.r_a ** 2 * sin_mu ** 2

    bad = radicand < -RADICAND_TOLERANCE
    if np.any(bad):
        offending = float(np.atleast_1d(mu)[np.atleast_1d(bad)][0])
        raise OutOfDomainError(
            f"r_z radicand negative at mu={offending:.6g} rad", value=offending
        )
    radicand = np.clip(radicand, 0.0, None)

    r_x = params.r_a * cos_mu
    r_y = params.r_a * sin_mu
    r_z = (
        params.r_a * math.cos(params.theta_dh) * cos_mu + np.sqrt(radicand)
    ) / math.sin(params.theta_dh)
    return r_x, r_y, r_z


def intermediate_radii(params: JitterbugParams, mu: float) -> Tuple[float, float, float]:
    """Component radii (r_x, r_y, r_z) in mm at linkage angle mu"""
    r_x, r_y, r_z = _radii(params, mu)
    return float(r_x), float(r_y), float(r_z)


def forward_height(params: JitterbugParams, theta_cap, theta_max: float = DEFAULT_THETA_MAX):
    """
    Structure height Z (mm) for top-face rotation Theta (rad).

    Accepts a scalar or an array; returns the same shape.
    Raises OutOfDomainError outside [0, theta_max].
    """
    theta = np.asarray(theta_cap, dtype=float)
    bad = ~np.isfinite(theta) | (theta < -DOMAIN_TOLERANCE) | (theta > theta_max + DOMAIN_TOLERANCE)
    if np.any(bad):
        offending = float(np.atleast_1d(theta)[np.atleast_1d(bad)][0])
        raise OutOfDomainError(
            f"Theta={offending:.6g} rad outside model domain [0, {theta_max:g}]",
            value=offending,
        )
    theta = np.clip(theta, 0.0, theta_max)

    mu = mu_zero(params) - theta / 2.0
    r_x, r_y, r_z = _radii(params, mu)
    z = 2.0 * np.sqrt(r_x ** 2 + r_y ** 2 + r_z ** 2) + params.clearance_c

    if np.ndim(theta_cap) == 0:
        return float(z)
    return z


def _height_scalar(params: JitterbugParams, theta_cap: float) -> float:
    # math-only forward_height for root finding; caller guarantees the domain
    mu = mu_zero(params) - theta_cap / 2.0
    sin_mu = math.sin(mu)
    radicand = max(params.r_b ** 2 - params.r_a ** 2 * sin_mu ** 2, 0.0)
    r_z = (params.r_a * math.cos(params.theta_dh) * math.cos(mu) + math.sqrt(radicand)) / math.sin(params.theta_dh)
    # r_x^2 + r_y^2 = r_a^2
    return 2.0 * math.sqrt(params.r_a ** 2 + r_z ** 2) + params.clearance_c


def base_yaw(theta_cap, direction: float = 1.0):
    """Base rotation induced by the deformation: Theta / 2, signed by direction"""
    if np.ndim(theta_cap):
        return direction * np.asarray(theta_cap, dtype=float) / 2.0
    return direction * theta_cap / 2.0


@dataclass(frozen=True, eq=False)
class LookupTable:
    """
    Evenly sampled (Theta, Z) pairs used as the invertible control map.

    boundary_z[k] is the height at which the nearest-mode lookup switches
    from entry k to entry k+1. Tables built from a model place it at the
    height of the angular midpoint; otherwise it is the height midpoint.
    """

    theta: np.ndarray
    z: np.ndarray
    theta_max: float
    params: Optional[JitterbugParams] = None
    boundary_z: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        z = np.array(self.z, dtype=float)
        n = len(theta)
        if n < 2 or len(z) != n:
            raise InvalidParamsError(f"lookup table needs >= 2 matching entries, got {n} and {len(z)}")
        if abs(theta[0]) > 1e-9 or abs(theta[-1] - self.theta_max) > 1e-7:
            raise InvalidParamsError(
                f"table must span [0, {self.theta_max:g}], got [{theta[0]:g}, {theta[-1]:g}]"
            )
        step = self.theta_max / (n - 1)
        if np.any(np.abs(np.diff(theta) - step) > 1e-7):
            raise InvalidParamsError("table angles are not evenly spaced")
        if np.any(np.diff(z) <= 0):
            raise InvalidParamsError("table heights are not strictly increasing")

        boundary = (z[:-1] + z[1:]) / 2.0 if self.boundary_z is None else np.array(self.boundary_z, dtype=float)
        if len(boundary) != n - 1:
            raise InvalidParamsError("boundary_z must have one entry per table interval")

        for arr in (theta, z, boundary):
            arr.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "boundary_z", boundary)

    @property
    def n(self) -> int:
        return len(self.theta)

    @property
    def step(self) -> float:
        return self.theta_max / (self.n - 1)

    @property
    def z_min(self) -> float:
        return float(self.z[0])

    @property
    def z_max(self) -> float:
        return float(self.z[-1])

    @property
    def entries(self):
        return list(zip(self.theta.tolist(), self.z.tolist()))


def build_lookup(
    params: JitterbugParams,
    theta_max: float = DEFAULT_THETA_MAX,
    n: int = DEFAULT_TABLE_SIZE,
) -> LookupTable:
    """Sample forward_height at n evenly spaced angles over [0, theta_max]"""
    if n < 2:
        raise InvalidParamsError(f"lookup table needs n >= 2, got {n}")
    if not theta_max > 0:
        raise InvalidParamsError(f"theta_max must be positive, got {theta_max}")

    theta = np.linspace(0.0, theta_max, n)
    z = forward_height(params, theta, theta_max=theta_max)
    midpoints = forward_height(params, (theta[:-1] + theta[1:]) / 2.0, theta_max=theta_max)

    table = LookupTable(theta=theta, z=z, theta_max=theta_max, params=params, boundary_z=midpoints)
    logger.info(
        "Built lookup table: %d entries over [0, %g] rad, Z %.3f..%.3f mm",
        n, theta_max, table.z_min, table.z_max,
    )
    return table


def inverse_angles(table: LookupTable, z_targets, mode=InverseMode.NEAREST):
    """
    Vectorized inverse: heights (mm) -> (Theta array, saturated array).

    Targets outside [z_min, z_max] clamp to the nearer endpoint and are
    flagged as saturated.
    """
    mode = InverseMode(mode)
    z = np.atleast_1d(np.asarray(z_targets, dtype=float))
    if not np.all(np.isfinite(z)):
        raise OutOfDomainError("non-finite target height")

    saturated = (z < table.z_min) | (z > table.z_max)
    zc = np.clip(z, table.z_min, table.z_max)
    k = np.clip(np.searchsorted(table.z, zc, side="right") - 1, 0, table.n - 2)

    if mode is InverseMode.NEAREST:
        # ties on the boundary resolve to the lower index
        idx = k + (zc > table.boundary_z[k])
        return table.theta[idx].copy(), saturated

    z_lo = table.z[k]
    z_hi = table.z[k + 1]
    frac = (zc - z_lo) / (z_hi - z_lo)
    theta = np.where(frac >= 1.0, table.theta[k + 1], table.theta[k] + frac * (table.theta[k + 1] - table.theta[k]))

    if table.params is not None:
        inside = np.flatnonzero((frac > 0.0) & (frac < 1.0))
        for i in inside:
            theta[i] = _refine(table.params, float(zc[i]), float(table.theta[k[i]]), float(table.theta[k[i] + 1]))
    return theta, saturated


def _refine(params: JitterbugParams, target: float, lo: float, hi: float) -> float:
    # bracket ends can disagree with the table heights by a few ulp
    f_lo = _height_scalar(params, lo) - target
    if f_lo >= 0:
        return lo
    f_hi = _height_scalar(params, hi) - target
    if f_hi <= 0:
        return hi
    return brentq(lambda t: _height_scalar(params, t) - target, lo, hi, xtol=1e-13)


def inverse_angle(table: LookupTable, z_target: float, mode=InverseMode.NEAREST) -> InverseResult:
    """Theta (rad) for a target height (mm); see inverse_angles"""
    theta, saturated = inverse_angles(table, z_target, mode)
    return InverseResult(float(theta[0]), bool(saturated[0]))
