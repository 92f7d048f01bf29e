"""Parsers for the versioned simulation output files.

These read the documented file formats only; the simulator package is not a
dependency.  Schema violations raise ValueError naming the offending column.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

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

SWEEP_COLUMNS = ["r_m", "dp_settling_s", "dp_impulse_ns", "baseline_settling_s",
                 "baseline_impulse_ns", "impulse_ratio", "error"]


@dataclass
class TrajectoryData:
    t: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray
    theta_deg: np.ndarray
    omega: np.ndarray
    F_body: np.ndarray
    M_body: np.ndarray
    thrusters: np.ndarray
    wmf: np.ndarray

    def __len__(self):
        return self.t.size


def read_trajectory(path: str | Path) -> TrajectoryData:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# format=satdp-trajectory version=1"):
            raise ValueError(f"{path}: not a version-1 satdp trajectory file")
        reader = csv.reader(fh)
        header = next(reader)
        missing = [c for c in TRAJECTORY_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        idx = [header.index(c) for c in TRAJECTORY_COLUMNS]
        rows = [[float(row[i]) for i in idx] for row in reader]
    data = np.array(rows) if rows else np.empty((0, len(TRAJECTORY_COLUMNS)))
    return TrajectoryData(
        t=data[:, 0], rho=data[:, 1:4], rho_dot=data[:, 4:7],
        theta_deg=data[:, 7:10], omega=data[:, 10:13],
        F_body=data[:, 13:16], M_body=data[:, 16:19],
        thrusters=data[:, 19:31].astype(int), wmf=data[:, 31],
    )


def read_metrics(path: str | Path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "satdp-metrics" or int(doc.get("version", 0)) != 1:
        raise ValueError(f"{path}: not a version-1 satdp metrics file")
    return doc


def read_sweep(path: str | Path) -> list[dict]:
    rows = []
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# format=satdp-sweep version=1"):
            raise ValueError(f"{path}: not a version-1 satdp sweep file")
        reader = csv.DictReader(fh)
        missing = [c for c in SWEEP_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for row in reader:
            out = dict(row)
            for key in SWEEP_COLUMNS[:-1]:
                out[key] = float(out[key]) if out.get(key) else float("nan")
            rows.append(out)
    return rows
