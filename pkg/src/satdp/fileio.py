"""Versioned file formats: scenario JSON, trajectory CSV, metrics/gains/sweep
reports.  Policy containers live in :mod:`satdp.dp`.

Every emitted document carries a format tag, a version, and the scenario
configuration fingerprint so outputs can be traced to their inputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .baseline import BaselineGains
from .sim import ManeuverMetrics, Scenario, Trajectory, scenario_from_dict, scenario_to_dict

TRAJECTORY_COLUMNS = (
    ["t_s"]
    + [f"rho_{a}_m" for a in "xyz"]
    + [f"v_{a}_mps" for a in "xyz"]
    + [f"theta_{a}_deg" for a in "xyz"]
    + [f"omega_{a}_radps" for a in "xyz"]
    + [f"F_b{a}_n" for a in "xyz"]
    + [f"M_b{a}_nm" for a in "xyz"]
    + [f"thr_{i:02d}" for i in range(1, 13)]
    + ["wmf"]
)


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(path: str | Path, scenario: Scenario) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trajectory_csv(path: str | Path, traj: Trajectory,
                         fingerprint: str = "", name: str = "") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# format=satdp-trajectory version=1 fingerprint={fingerprint}"
                 f" scenario={name}\n")
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for i in range(len(traj)):
            row = ([f"{traj.t[i]:.2f}"]
                   + [repr(float(v)) for v in traj.rho[i]]
                   + [repr(float(v)) for v in traj.rho_dot[i]]
                   + [repr(float(v)) for v in traj.theta_deg[i]]
                   + [repr(float(v)) for v in traj.omega[i]]
                   + [repr(float(v)) for v in traj.F_body[i]]
                   + [repr(float(v)) for v in traj.M_body[i]]
                   + [str(int(v)) for v in traj.thrusters[i]]
                   + [repr(float(traj.wmf[i]))])
            writer.writerow(row)


def read_trajectory_csv(path: str | Path) -> Trajectory:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# format=satdp-trajectory version=1"):
            raise ValueError(f"{path}: not a version-1 trajectory file")
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRAJECTORY_COLUMNS:
            raise ValueError(f"{path}: unexpected column set")
        data = np.array([[float(v) for v in row] for row in reader])
    if data.size == 0:
        data = data.reshape(0, len(TRAJECTORY_COLUMNS))
    return Trajectory(
        t=data[:, 0], rho=data[:, 1:4], rho_dot=data[:, 4:7],
        theta_deg=data[:, 7:10], omega=data[:, 10:13],
        F_body=data[:, 13:16], M_body=data[:, 16:19],
        thrusters=data[:, 19:31].astype(int), wmf=data[:, 31],
    )


def write_metrics_json(path: str | Path, metrics: ManeuverMetrics,
                       scenario: Scenario) -> None:
    doc = {
        "format": "satdp-metrics",
        "version": 1,
        "scenario": scenario.name,
        "controller": scenario.controller,
        "fingerprint": scenario.fingerprint(),
        "metrics": metrics.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_gains_json(path: str | Path, gains: BaselineGains,
                     tuning_info: dict | None = None) -> None:
    doc = {
        "format": "satdp-gains",
        "version": 1,
        "surrogate": True,
        "K1_diag": np.diag(gains.K1).tolist(),
        "K2_diag": np.diag(gains.K2).tolist(),
        "K3_diag": np.diag(gains.K3).tolist(),
        "K4_diag": np.diag(gains.K4).tolist(),
        "Q1L": gains.Q1L,
        "Q2L": gains.Q2L,
    }
    if tuning_info:
        doc["tuning"] = tuning_info
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_gains_json(path: str | Path) -> BaselineGains:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "satdp-gains" or int(doc.get("version", 0)) != 1:
        raise ValueError(f"{path}: not a version-1 gains file")
    return BaselineGains(
        K1=np.diag(doc["K1_diag"]), K2=np.diag(doc["K2_diag"]),
        K3=np.diag(doc["K3_diag"]), K4=np.diag(doc["K4_diag"]),
        Q1L=float(doc["Q1L"]), Q2L=float(doc["Q2L"]))


SWEEP_COLUMNS = ["r_m", "dp_settling_s", "dp_impulse_ns", "baseline_settling_s",
                 "baseline_impulse_ns", "impulse_ratio", "error"]


def write_sweep_csv(path: str | Path, rows: list[dict],
                    fingerprint: str = "") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# format=satdp-sweep version=1 fingerprint={fingerprint}\n")
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in SWEEP_COLUMNS})


def read_sweep_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# format=satdp-sweep version=1"):
            raise ValueError(f"{path}: not a version-1 sweep file")
        for row in csv.DictReader(fh):
            out = dict(row)
            for key in SWEEP_COLUMNS[:-1]:
                if out.get(key):
                    out[key] = float(out[key])
            rows.append(out)
    return rows
