from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from typing import Optional
import logging
import math
import os
import traceback

import pandas as pd

from mofu import __version__
from mofu.analysis import summarize_traces
from mofu.config import load_config
from mofu.errors import MofuError
from mofu.jitterbug import InverseMode, base_yaw, build_lookup, forward_height, inverse_angle
from mofu.scripting import CONDITIONS, MotionCondition, generate_script
from mofu.simulator import run

logger = logging.getLogger("mofu.webapp")

app = FastAPI(title="MOFU Kinematics and Simulation API")

# Config comes from MOFU_CONFIG (or .env); built-in defaults otherwise
CONFIG = load_config(os.getenv("MOFU_CONFIG"))
PARAMS = CONFIG.jitterbug_params()
SIM = CONFIG.sim_config()
TABLE = SIM.lift.table
MAX_TABLE_SIZE = 10000  # entries per /api/table request


def records(df: pd.DataFrame):
    return df.to_dict(orient="records")


@app.exception_handler(MofuError)
async def mofu_error_handler(request: Request, exc: MofuError):
    return JSONResponse(status_code=422, content={"error": str(exc), "type": type(exc).__name__})


# ============================================================================
# KINEMATICS
# ============================================================================

@app.get("/api/fk")
async def get_forward(theta: float, degrees: bool = False):
    """Height and base yaw for a top-face rotation"""
    theta_cap = math.radians(theta) if degrees else theta
    z = forward_height(PARAMS, theta_cap, theta_max=CONFIG.lookup.theta_max)
    return {
        "theta_rad": theta_cap,
        "z_mm": z,
        "base_yaw_rad": base_yaw(theta_cap, CONFIG.script.yaw_direction),
    }


@app.get("/api/ik")
async def get_inverse(z: float, mode: InverseMode = InverseMode.NEAREST):
    """Top-face rotation for a target height"""
    result = inverse_angle(TABLE, z, mode)
    return {"z_mm": z, "theta_rad": result.theta_cap, "saturated": result.saturated, "mode": mode.value}


@app.get("/api/table")
async def get_table(n: Optional[int] = Query(None, ge=2, le=MAX_TABLE_SIZE)):
    """Lookup table entries; n rebuilds it with another size"""
    table = TABLE if n is None else build_lookup(PARAMS, CONFIG.lookup.theta_max, n)
    return {
        "entries": records(pd.DataFrame({"theta_rad": table.theta, "z_mm": table.z})),
        "z_min_mm": table.z_min,
        "z_max_mm": table.z_max,
        "step_rad": table.step,
    }


# ============================================================================
# SCRIPTS AND SIMULATION
# ============================================================================

@app.get("/api/conditions")
async def get_conditions():
    return [
        {
            "condition": c.name,
            "slug": c.slug,
            "robots": c.robots,
            "rotation": c.rotation,
            "expansion": c.expansion,
            "locomotion": c.locomotion,
        }
        for c in CONDITIONS
    ]


@app.get("/api/script/{condition}")
def get_script(condition: str, robots: int = 1, seed: Optional[int] = None):
    """Setpoint table of one condition"""
    params = CONFIG.with_overrides({"script.seed": seed}).script_params()
    script = generate_script(MotionCondition.parse(condition, robots), params, lift=SIM.lift)
    return {
        "condition": script.condition.name,
        "periods_s": list(script.periods),
        "samples": records(script.frame),
    }


@app.get("/api/simulate/{condition}")
def get_simulation(condition: str, robots: int = 1, seed: Optional[int] = None, ideal_lift: bool = False):
    """Simulate a condition and return its summary and traces"""
    try:
        config = CONFIG.with_overrides({"script.seed": seed, "sim.ideal_lift": ideal_lift or None})
        sim = config.sim_config() if ideal_lift else SIM
        script = generate_script(MotionCondition.parse(condition, robots), config.script_params(), lift=sim.lift)
        traces = [run(script, sim, robot) for robot in script.robots]
    except MofuError:
        raise
    except Exception as e:
        error_msg = f"Error in get_simulation: {str(e)}\n{traceback.format_exc()}"
        logger.error(error_msg)
        return JSONResponse(status_code=500, content={"error": str(e), "details": error_msg})

    return {
        "condition": script.condition.name,
        "summary": records(summarize_traces(traces)),
        "traces": [
            {"robot": trace.robot, "metadata": trace.metadata, "samples": records(trace.table)}
            for trace in traces
        ],
    }


# ============================================================================
# HEALTH CHECK
# ============================================================================

@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": "mofu-api", "version": __version__}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=int(os.getenv("PORT", "8000")))
