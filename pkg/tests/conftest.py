import math

import pytest

from mofu.actuation import LiftMechanism
from mofu.jitterbug import JitterbugParams, build_lookup
from mofu.scripting import ScriptParams
from mofu.simulator import SimConfig


@pytest.fixture(scope="session")
def params():
    return JitterbugParams()


@pytest.fixture(scope="session")
def table(params):
    return build_lookup(params)


@pytest.fixture(scope="session")
def lift(params):
    return LiftMechanism.from_params(params)


@pytest.fixture(scope="session")
def sim_config():
    return SimConfig()


@pytest.fixture(scope="session")
def ideal_config():
    return SimConfig(ideal_lift=True)


@pytest.fixture(scope="session")
def script_params():
    return ScriptParams()


def reference_height(theta_cap, r_a=56.6, r_b=46.2, theta_dh=0.956, c=13.0):
    """Height model coded directly from the closed form, with mu = mu0 - Theta/2"""
    mu = math.asin(r_b / r_a) - theta_cap / 2.0
    r_x = r_a * math.cos(mu)
    r_y = r_a * math.sin(mu)
    root = math.sqrt(max(r_b ** 2 - (r_a * math.sin(mu)) ** 2, 0.0))
    r_z = (r_a * math.cos(theta_dh) * math.cos(mu) + root) / math.sin(theta_dh)
    return 2.0 * math.sqrt(r_x ** 2 + r_y ** 2 + r_z ** 2) + c
