#!/usr/bin/env python3
"""
MOFU command line.

    mofu fk 0.5                      height and base yaw for Theta = 0.5 rad
    mofu ik 180 --mode interpolated  Theta for a target height
    mofu table --out table.csv       45-entry lookup table
    mofu script --condition RM+EC    motion script CSV (+ .meta.json)
    mofu simulate --script RM_EC.csv trace CSV, net yaw, stroke, final pose
    mofu simulate --all-conditions   all ten conditions, DuckDB summary
    mofu synth --out data.csv        synthetic measurements
    mofu calibrate --data data.csv   fitted C, height offset, RMSE report
    mofu validate --data data.csv    per-trial angle RMSE

Exit codes: 0 ok, 1 data error, 2 usage error.
"""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence
import argparse
import json
import logging
import math
import os
import sys

import pandas as pd
from dotenv import find_dotenv, load_dotenv

from mofu import analysis, calibration
from mofu.config import LOG_LEVEL_ENV, MofuConfig, load_config
from mofu.errors import ConfigError, InvalidConditionError, MofuError
from mofu.etl import artifacts, measurements
from mofu.jitterbug import InverseMode, base_yaw, build_lookup, forward_height, inverse_angle
from mofu.scripting import CONDITIONS, MotionCondition, generate_script
from mofu.simulator import Trace, net_yaw, run, run_condition

logger = logging.getLogger("mofu.cli")

BANNER = "=" * 60


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _angle_in(args, value: float) -> float:
    return math.radians(value) if args.degrees else value


# Subcommands

def cmd_fk(args, config: MofuConfig) -> int:
    theta = _angle_in(args, args.theta)
    params = config.jitterbug_params()
    z = forward_height(params, theta, theta_max=config.lookup.theta_max)
    line = f"theta_rad={_fmt(theta)} z_mm={_fmt(z)} base_yaw_rad={_fmt(base_yaw(theta, config.script.yaw_direction))}"
    print(line)
    return 0


def cmd_ik(args, config: MofuConfig) -> int:
    if args.table:
        table = artifacts.load_table(args.table)
    else:
        table = build_lookup(config.jitterbug_params(), config.lookup.theta_max, config.lookup.table_size)
    result = inverse_angle(table, args.z, InverseMode(args.mode))
    line = f"z_mm={_fmt(args.z)} theta_rad={_fmt(result.theta_cap)} saturated={_bool(result.saturated)} mode={args.mode}"
    if args.degrees:
        line += f" theta_deg={_fmt(math.degrees(result.theta_cap))}"
    print(line)
    return 0


def cmd_table(args, config: MofuConfig) -> int:
    table = build_lookup(config.jitterbug_params(), config.lookup.theta_max, config.lookup.table_size)
    if args.out:
        artifacts.save_table(table, args.out)
    else:
        frame = pd.DataFrame({"theta_rad": table.theta, "z_mm": table.z})
        sys.stdout.write(frame.to_csv(index=False, float_format=artifacts.TABLE_FLOAT_FORMAT, lineterminator="\n"))
    print(
        f"entries={table.n} z_min_mm={_fmt(table.z_min)} z_max_mm={_fmt(table.z_max)} "
        f"stroke_mm={_fmt(table.z_max - table.z_min)}",
        file=sys.stderr if not args.out else sys.stdout,
    )
    return 0


def _mark(flag: bool) -> str:
    return "x" if flag else "-"


def _conditions_frame() -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "condition": c.name,
                "slug": c.slug,
                "robots": c.robots,
                "rotation": _mark(c.rotation),
                "exp_cont": _mark(c.expansion),
                "locomotion": _mark(c.locomotion),
            }
            for c in CONDITIONS
        ]
    )


def cmd_script(args, config: MofuConfig) -> int:
    if args.list:
        print(_conditions_frame().to_string(index=False))
        return 0
    if not args.condition:
        raise InvalidConditionError("script needs --condition NAME (or --list)")

    condition = MotionCondition.parse(args.condition, args.robots)
    sim = config.sim_config()
    script = generate_script(condition, config.script_params(), lift=sim.lift)
    out = Path(args.out or f"{condition.slug}.csv")
    artifacts.save_script(script, out)
    periods = ",".join(f"{p:.6f}" for p in script.periods) or "-"
    print(
        f"condition={condition.kind.value} robots={condition.robots} "
        f"samples={script.params.n_samples} periods_s={periods} out={out}"
    )
    return 0


def _report_trace(trace: Trace):
    pose = trace.final_pose
    print(
        f"robot={trace.robot} net_yaw_rad={_fmt(net_yaw(trace))} stroke_mm={_fmt(trace.stroke)} "
        f"peak_height_mm={_fmt(trace.peak_overall_height)} displacement_mm={_fmt(trace.displacement)} "
        f"final_x_mm={_fmt(pose.x)} final_y_mm={_fmt(pose.y)} final_yaw_rad={_fmt(pose.yaw)}"
    )


def _write_traces(traces: Sequence[Trace], out: Path, parquet: bool) -> List[Path]:
    written = []
    for trace in traces:
        path = artifacts.robot_path(out, trace.robot, len(traces))
        artifacts.save_trace(trace, path)
        written.append(path)
        if parquet:
            artifacts.save_trace_parquet(trace, path.with_suffix(".parquet"))
    return written


def _simulate_job(job):
    condition, script_params, sim_config = job
    return run_condition(condition, script_params, sim_config)


def cmd_simulate(args, config: MofuConfig) -> int:
    sim = config.sim_config()

    if args.all_conditions:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        jobs = [(condition, config.script_params(), sim) for condition in CONDITIONS]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_simulate_job, jobs))
        else:
            results = [_simulate_job(job) for job in jobs]

        all_traces = []
        parquet_files = []
        for condition, traces in zip(CONDITIONS, results):
            paths = _write_traces(traces, out_dir / f"{condition.slug}.csv", args.parquet)
            parquet_files.extend(path.with_suffix(".parquet") for path in paths if args.parquet)
            all_traces.extend(traces)

        print(BANNER)
        print(f"SIMULATED {len(CONDITIONS)} CONDITIONS -> {out_dir}")
        print(BANNER)
        if parquet_files:
            # summary read back from the files just written
            summary = analysis.summarize_parquet(parquet_files)
        else:
            summary = analysis.summarize_traces(all_traces)
        print(summary.to_string(index=False))
        return 0

    if args.script:
        script = artifacts.load_script(args.script)
        default_out = Path(args.script).with_name(f"{Path(args.script).stem}_trace.csv")
    elif args.condition:
        condition = MotionCondition.parse(args.condition, args.robots)
        script = generate_script(condition, config.script_params(), lift=sim.lift)
        default_out = Path(f"{condition.slug}_trace.csv")
    else:
        raise InvalidConditionError("simulate needs --script PATH, --condition NAME or --all-conditions")

    traces = [run(script, sim, robot) for robot in script.robots]
    paths = _write_traces(traces, Path(args.out) if args.out else default_out, args.parquet)
    print(f"condition={script.condition.name} dt_s={sim.dt:g} ideal_lift={_bool(sim.ideal_lift)}")
    for trace, path in zip(traces, paths):
        _report_trace(trace)
        print(f"out={path}")
    return 0


def cmd_synth(args, config: MofuConfig) -> int:
    params = config.jitterbug_params()
    n = config.lookup.table_size if args.n is None else args.n
    theta = None
    if args.off_node:
        if n < 2:
            raise ConfigError(f"--off-node needs --n >= 2, got {n}")
        step =config.lookup.theta_max / (n - 1)
        theta = [min((i + 0.37) * step, config.lookup.theta_max) for i in range(n - 1)]
    samples = calibration.synthetic_measurements(
        params,
        n=n,
        trials=args.trials,
        sigma_theta=args.sigma_theta,
        sigma_z=args.sigma_z,
        seed=config.script.seed if args.seed is None else args.seed,
        theta_max=config.lookup.theta_max,
        theta=theta,
    )
    comment = (
        f"synthetic measurements: model curve plus Gaussian noise "
        f"(sigma_theta={args.sigma_theta:g} rad, sigma_z={args.sigma_z:g} mm)"
    )
    measurements.save_measurements(samples, args.out, comment=comment)
    print(f"samples={len(samples)} trials={args.trials} out={args.out}")
    return 0


def cmd_calibrate(args, config: MofuConfig) -> int:
    samples = measurements.load_measurements(args.data)
    report = calibration.calibrate(
        samples,
        config.jitterbug_params(),
        config.lookup.theta_max,
        config.lookup.table_size,
        (config.sim.overall_min, config.sim.overall_max),
    )
    print(BANNER)
    print(f"CALIBRATION: {args.data}")
    print(BANNER)
    print(f"clearance_mm={_fmt(report.clearance_c)}")
    print(f"height_offset_mm={_fmt(report.height_offset)} offset_residual_mm={_fmt(report.offset_residual)}")
    for trial, value in sorted(report.rmse_per_trial.items()):
        print(f"trial={trial} rmse_rad={_fmt(value)}")
    print(f"pooled rmse_rad={_fmt(report.rmse_pooled)}")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"out={args.out}")
    return 0


def cmd_validate(args, config: MofuConfig) -> int:
    samples = measurements.load_measurements(args.data)
    params = config.jitterbug_params()
    if args.table:
        table = artifacts.load_table(args.table)
    else:
        table = build_lookup(params, config.lookup.theta_max, config.lookup.table_size)
    for trial, value in sorted(calibration.rmse_by_trial(samples, params, table).items()):
        print(f"trial={trial} rmse_rad={_fmt(value)}")
    print(f"pooled rmse_rad={_fmt(calibration.rmse_angle(samples, params, table))}")
    print(f"half_step_rad={_fmt(table.step / 2.0)}")
    return 0


# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mofu", description="MOFU Jitterbug robot kinematics and simulation")
    parser.add_argument("--config", help="JSON config file (default: $MOFU_CONFIG)")
    parser.add_argument("--degrees", action="store_true", help="read input angles in degrees")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fk", help="forward kinematics: Theta -> Z")
    p.add_argument("theta", type=float)
    p.set_defaults(handler=cmd_fk)

    p = sub.add_parser("ik", help="inverse kinematics: Z -> Theta")
    p.add_argument("z", type=float)
    p.add_argument("--mode", choices=[m.value for m in InverseMode], default=InverseMode.NEAREST.value)
    p.add_argument("--table", help="lookup table CSV (default: built from the model)")
    p.set_defaults(handler=cmd_ik)

    p = sub.add_parser("table", help="build the lookup table")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--n", type=int, help="number of entries")
    p.add_argument("--theta-max", type=float, help="table span in rad")
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("script", help="generate a motion script")
    p.add_argument("--condition", help="NBM, RM, EC, RM+EC, LOC or LOC+RM+EC")
    p.add_argument("--robots", type=int, default=1, choices=[1, 2])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path (default: <condition>.csv)")
    p.add_argument("--list", action="store_true", help="list the ten conditions")
    p.set_defaults(handler=cmd_script)

    p = sub.add_parser("simulate", help="simulate a script")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--script", help="script CSV written by `mofu script`")
    source.add_argument("--condition")
    source.add_argument("--all-conditions", action="store_true")
    p.add_argument("--robots", type=int, default=1, choices=[1, 2])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="trace CSV path")
    p.add_argument("--out-dir", default="traces", help="output directory for --all-conditions")
    p.add_argument("--dt", type=float, help="simulation step; must divide the script spacing")
    p.add_argument("--height-offset", type=float)
    p.add_argument("--ideal-lift", action="store_true", help="zero-lag lift actuator")
    p.add_argument("--parquet", action="store_true", help="also write .parquet traces")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for --all-conditions")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("synth", help="write synthetic measurements")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, help="points per trial (default: table size)")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--sigma-theta", type=float, default=0.0)
    p.add_argument("--sigma-z", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--off-node", action="store_true", help="sample between table nodes")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("calibrate", help="fit clearance and height offset")
    p.add_argument("--data", required=True, help="measurement CSV trial,z_mm,theta_rad")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("validate", help="angle RMSE of the lookup inverse")
    p.add_argument("--data", required=True)
    p.add_argument("--table", help="lookup table CSV (default: built from the model)")
    p.set_defaults(handler=cmd_validate)

    return parser


def _overrides(args) -> dict:
    return {
        "script.seed": getattr(args, "seed", None),
        "sim.dt": getattr(args, "dt", None),
        "sim.height_offset": getattr(args, "height_offset", None),
        "sim.ideal_lift": True if getattr(args, "ideal_lift", False) else None,
        "lookup.table_size": getattr(args, "n", None) if args.command == "table" else None,
        "lookup.theta_max": getattr(args, "theta_max", None),
    }


def configure_logging(verbosity: int = 0):
    level = os.getenv(LOG_LEVEL_ENV, "WARNING").upper()
    if verbosity == 1:
        level = "INFO"
    elif verbosity >= 2:
        level = "DEBUG"
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    load_dotenv(find_dotenv(usecwd=True))
    configure_logging(args.verbose)

    try:
        config = load_config(args.config).with_overrides(_overrides(args))
        logger.debug("Running %s", args.command)
        return args.handler(args, config)
    except (ConfigError, InvalidConditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MofuError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
