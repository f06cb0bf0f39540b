"""
Layered configuration: built-in defaults < JSON config file < CLI flags.

The config file comes from --config or the MOFU_CONFIG environment
variable; a .env file in the working directory is loaded first.
Unknown keys are rejected.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union
import json
import logging
import math
import os

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from mofu.actuation import LeadScrew, PidGains
from mofu.drive import DriveGeometry
from mofu.errors import ConfigError, MofuError
from mofu.jitterbug import JitterbugParams
from mofu.scripting import ScriptParams
from mofu.simulator import SimConfig

logger = logging.getLogger(__name__)

CONFIG_ENV = "MOFU_CONFIG"
LOG_LEVEL_ENV = "MOFU_LOG_LEVEL"


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class JitterbugSection(Section):
    r_a: float = 56.6
    r_b: float = 46.2
    theta_dh: float = 0.956
    clearance_c: float = 13.0


class LookupSection(Section):
    theta_max: float = 1.0
    table_size: int = 45


class DriveSection(Section):
    wheel_radius: float = 29.0
    track: float = 90.0


class PidSection(Section):
    kp: float = 5.0
    ki: float = 10.0
    kd: float = 0.0
    rate_limit: float = 50.0
    integral_limit: float = 10.0


class ScrewSection(Section):
    lead: float = 20.0


class ScriptSection(Section):
    period: float = 6.0
    amplitude: float = 7 * math.pi
    control_freq: float = 10.0
    duration: float = 20.0
    dual_period_range: Tuple[float, float] = (5.0, 7.0)
    loc_move: float = 1.5
    loc_stop: float = 0.5
    cruise_speed: float = 100.0
    seed: int = 0
    yaw_direction: float = 1.0


class SimSection(Section):
    dt: float = 0.1
    height_offset: Optional[float] = None
    overall_min: float = 210.0
    overall_max: float = 280.0
    ideal_lift: bool = False


class MofuConfig(Section):
    jitterbug: JitterbugSection = Field(default_factory=JitterbugSection)
    lookup: LookupSection = Field(default_factory=LookupSection)
    drive: DriveSection = Field(default_factory=DriveSection)
    pid: PidSection = Field(default_factory=PidSection)
    screw: ScrewSection = Field(default_factory=ScrewSection)
    script: ScriptSection = Field(default_factory=ScriptSection)
    sim: SimSection = Field(default_factory=SimSection)

    def jitterbug_params(self) -> JitterbugParams:
        return _build(JitterbugParams, **self.jitterbug.model_dump())

    def drive_geometry(self) -> DriveGeometry:
        return _build(DriveGeometry, **self.drive.model_dump())

    def pid_gains(self) -> PidGains:
        return _build(PidGains, kp=self.pid.kp, ki=self.pid.ki, kd=self.pid.kd)

    def lead_screw(self) -> LeadScrew:
        return _build(LeadScrew, lead=self.screw.lead)

    def script_params(self) -> ScriptParams:
        return _build(ScriptParams, **self.script.model_dump())

    def sim_config(self) -> SimConfig:
        return _build(
            SimConfig,
            dt=self.sim.dt,
            height_offset=self.sim.height_offset,
            overall_min=self.sim.overall_min,
            geometry=self.drive_geometry(),
            params=self.jitterbug_params(),
            gains=self.pid_gains(),
            screw=self.lead_screw(),
            rate_limit=self.pid.rate_limit,
            integral_limit=self.pid.integral_limit,
            ideal_lift=self.sim.ideal_lift,
            yaw_direction=self.script.yaw_direction,
            theta_max=self.lookup.theta_max,
            table_size=self.lookup.table_size,
        )

    def with_overrides(self, overrides: Dict[str, Any]) -> "MofuConfig":
        """Copy with dotted-key overrides applied, e.g. {"script.seed": 3}; None values are skipped"""
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            section, _, name = key.partition(".")
            if section not in data or not name:
                raise ConfigError(f"unknown config key {key!r}")
            data[section][name] = value
        return _validate(data, "overrides")


def _build(cls, **kwargs):
    try:
        return cls(**kwargs)
    except MofuError as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


def _validate(data: Dict, source: str) -> MofuConfig:
    try:
        return MofuConfig.model_validate(data)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise ConfigError(f"{source}: {problems}") from exc


def load_config(path: Optional[Union[str, Path]] = None) -> MofuConfig:
    """Defaults, overlaid with the JSON file at path (or $MOFU_CONFIG) when one is given"""
    load_dotenv(find_dotenv(usecwd=True))
    path = path or os.getenv(CONFIG_ENV)
    if not path:
        return MofuConfig()

    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{path}: config file not found")
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")

    config = _validate(data, str(path))
    logger.info("Loaded config from %s", path)
    return config
