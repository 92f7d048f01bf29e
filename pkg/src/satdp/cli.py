"""Command-line entry point.

Subcommands map one-to-one onto the module pipelines: solve-policy (policy
solver), simulate (closed-loop run), sweep/compare (paired studies),
tune-baseline / tune-fault-table (tuners), export-feasible (allocation
tables).  Exit codes: 0 ok, 1 input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import allocation, baseline as bl, fault as flt, fileio, sim, solve
from .dp import DPNumericalError
from .params import CHANNELS, SatelliteParams
from .sim import Scenario, SimulationError


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_solve_policy(args) -> int:
    cfg = solve.load_config(args.config)
    params = SatelliteParams(**cfg.get("satellite", {}))
    bundle = solve.solve_policy_set(cfg, params, args.fail, log=_log)
    written = solve.save_policy_set(args.out, bundle)
    for path in written:
        _log(f"wrote {path}")
    return 0


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    if getattr(args, "controller", None):
        scenario.controller = args.controller
    if getattr(args, "fail", None) is not None:
        scenario.failed_thruster = args.fail
        scenario.fault = flt.FaultConfig(failed_thruster=args.fail,
                                         side_deadband=scenario.pos_band_m)
    if getattr(args, "horizon", None) is not None:
        scenario.horizon_s = float(args.horizon)
    if getattr(args, "seed", None) is not None:
        scenario.seed = args.seed
    return scenario


def _load_gains(args) -> bl.BaselineGains:
    if getattr(args, "gains", None):
        return fileio.read_gains_json(args.gains)
    return bl.BaselineGains()


def cmd_simulate(args) -> int:
    scenario = _apply_overrides(fileio.load_scenario(args.scenario), args)
    policies = None
    if scenario.controller == "dp":
        policies = solve.load_policy_set(args.policies)
    traj, metrics = sim.run(scenario, policies=policies, gains=_load_gains(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fp = scenario.fingerprint()
    fileio.write_trajectory_csv(out / "trajectory.csv", traj, fp, scenario.name)
    fileio.write_metrics_json(out / "metrics.json", metrics, scenario)
    _log(f"settling {metrics.settling_max_s:.1f} s, "
         f"impulse {metrics.total_impulse_ns:.3f} N s")
    return 0


def cmd_sweep(args) -> int:
    scenario = fileio.load_scenario(args.scenario)
    policies = solve.load_policy_set(args.policies)
    gains = _load_gains(args)
    rows = sim.sweep(scenario, policies, gains,
                     r_values=range(args.r_min, args.r_max + 1))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_sweep_csv(out / "sweep.csv", rows, scenario.fingerprint())
    _log(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    return 0


def cmd_compare(args) -> int:
    scenario = fileio.load_scenario(args.scenario)
    policies = solve.load_policy_set(args.policies)
    report = sim.compare(scenario, policies, _load_gains(args))
    report["fingerprint"] = scenario.fingerprint()
    report["format"] = "satdp-compare"
    report["version"] = 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "compare.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _log(f"impulse ratio {report['impulse_ratio']:.2f} "
         f"(surrogate baseline / policy controller)")
    return 0


def trajectory_mismatch(ref: sim.Trajectory, got: sim.Trajectory,
                        att_weight: float = 300.0) -> float:
    """Integrated squared position plus weighted attitude mismatch, 1 Hz."""
    n = min(len(ref), len(got))
    step = sim.SUBSTEPS_PER_PERIOD
    dp_pos = ref.rho[:n:step] - got.rho[:n:step]
    dp_att = np.deg2rad(ref.theta_deg[:n:step] - got.theta_deg[:n:step])
    return float(np.sum(dp_pos ** 2) + att_weight * np.sum(dp_att ** 2))


def cmd_tune_baseline(args) -> int:
    scenario = fileio.load_scenario(args.scenario)
    policies = solve.load_policy_set(args.policies)
    sc_dp = Scenario(**{**scenario.__dict__, "controller": "dp"})
    ref_traj, ref_metrics = sim.run(sc_dp, policies=policies)
    _log(f"reference settling {ref_metrics.settling_max_s:.1f} s")

    def objective(gains: bl.BaselineGains) -> float:
        sc = Scenario(**{**scenario.__dict__, "controller": "baseline"})
        try:
            traj, _ = sim.run(sc, gains=gains)
        except SimulationError:
            return float("inf")
        return trajectory_mismatch(ref_traj, traj)

    gains, result = bl.tune_baseline(objective, step0=args.step0,
                                     tolerance=args.tol,
                                     max_evaluations=args.budget)
    fileio.write_gains_json(args.out, gains, {
        "objective": result.fun, "evaluations": result.evaluations,
        "converged": result.converged, "scenario": scenario.name,
        "fingerprint": scenario.fingerprint()})
    _log(f"wrote {args.out} (objective {result.fun:.4g}, "
         f"{result.evaluations} evaluations)")
    return 0


def cmd_tune_fault_table(args) -> int:
    scenario = fileio.load_scenario(args.scenario)
    if scenario.fault is None:
        raise ValueError("tune-fault-table needs a failure scenario")
    policies = solve.load_policy_set(args.policies)
    base_fault = scenario.fault

    def run_at(r: float, w: float) -> tuple[bool, float]:
        sc = sim.scale_scenario(scenario, r)
        sc.horizon_s = min(scenario.horizon_s, args.horizon)
        sc.fault = flt.FaultConfig(
            failed_thruster=base_fault.failed_thruster,
            w_mf_stable=min(max(w, 0.9), 1.1),
            w_mf_attitude_priority=base_fault.w_mf_attitude_priority,
            distance_table=((0.0, w), (50.0, w)),
            side_deadband=base_fault.side_deadband)
        channel, _, _ = flt.channel_of_thruster(base_fault.failed_thruster)
        axis = channel.force_axis
        sign0 = np.sign(sc.rho0[axis]) or 1.0
        try:
            traj, metrics = sim.run(sc, policies=policies)
        except SimulationError:
            return False, float("inf")
        stable = (not metrics.never_settled
                  and np.max(np.abs(traj.omega)) < 2.6)
        overshoot = float(max(0.0, np.max(-sign0 * traj.rho[:, axis])))
        return stable, overshoot

    distances = [float(r) for r in args.distances.split(",")]
    knots = flt.tune_distance_table(run_at, distances=distances)
    doc = {
        "format": "satdp-distance-table",
        "version": 1,
        "failed_thruster": base_fault.failed_thruster,
        "fingerprint": scenario.fingerprint(),
        "knots": [[k.range_m, k.w_mf] for k in knots],
        "converged": [k.converged for k in knots],
        "overshoot_m": [None if np.isnan(k.overshoot_m) else k.overshoot_m
                        for k in knots],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _log(f"wrote {args.out} ({len(knots)} knots)")
    return 0


def cmd_export_feasible(args) -> int:
    params = SatelliteParams()
    mask = np.zeros(12, dtype=bool)
    if args.fail is not None:
        mask[args.fail - 1] = True
    doc = {"format": "satdp-feasible", "version": 1,
           "failed_thruster": args.fail, "channels": {}}
    for ch in CHANNELS:
        fs = allocation.build_feasible(ch, mask, params)
        doc["channels"][ch.name] = {
            "count": int(fs.size),
            "degenerate": fs.degenerate,
            "pair_a_n": fs.fA.tolist(),
            "pair_b_n": fs.fB.tolist(),
            "force_n": fs.F.tolist(),
            "torque_nm": fs.M.tolist(),
        }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    _log(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satdp")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-policy", help="solve the six channel policies")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fail", type=int, choices=range(1, 13))
    p.set_defaults(func=cmd_solve_policy)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--policies")
    p.add_argument("--gains")
    p.add_argument("--controller", choices=["dp", "baseline"])
    p.add_argument("--fail", type=int, choices=range(1, 13))
    p.add_argument("--horizon", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="settling/impulse study over distance")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policies", required=True)
    p.add_argument("--gains")
    p.add_argument("--out", required=True)
    p.add_argument("--r-min", type=int, default=5)
    p.add_argument("--r-max", type=int, default=15)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="policy vs surrogate-baseline report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policies", required=True)
    p.add_argument("--gains")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("tune-baseline", help="fit baseline gains to a run")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policies", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=120)
    p.add_argument("--step0", type=float, default=0.30)
    p.add_argument("--tol", type=float, default=0.05)
    p.set_defaults(func=cmd_tune_baseline)

    p = sub.add_parser("tune-fault-table", help="tune stable-side weights")
    p.add_argument("--scenario", required=True)
    p.add_argument("--policies", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--distances", default="1,2,3,4,5,6,7,8,9,10")
    p.add_argument("--horizon", type=float, default=400.0)
    p.set_defaults(func=cmd_tune_fault_table)

    p = sub.add_parser("export-feasible", help="dump allocation candidates")
    p.add_argument("--out", required=True)
    p.add_argument("--fail", type=int, choices=range(1, 13))
    p.set_defaults(func=cmd_export_feasible)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SimulationError, DPNumericalError, FloatingPointError) as exc:
        _log(f"numerical failure: {exc}")
        return 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _log(f"input error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
