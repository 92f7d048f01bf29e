"""Policy-set construction: DP configuration files to solved channel policies.

A solve configuration describes the translation and rotation channel problems
(grids, weights, horizon).  Fully actuated, the three translation channels
share one problem (same mass, same bounds) and are solved once; the rotation
channels differ through the principal moments of inertia.  With a failed
thruster the affected channel switches to the relaxed weight set and its
action bounds are reduced before re-solving.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import dp, fault as flt
from .params import SatelliteParams, channel_of_thruster
from .sim import PolicyBundle

CONFIG_FORMAT = "satdp-dpconfig"

# Fully-actuated weights and ranges (position/attitude channel defaults)
DEFAULT_CONFIG = {
    "format": CONFIG_FORMAT,
    "version": 1,
    "dtype": "float32",
    "n_states": 701,
    "n_actions": 41,
    "spacing": "log",
    "dt_s": 1.0,
    "translation": {
        "s1_range_m": 40.0,
        "s2_range_mps": 1.5,
        "Q": [3e-6, 0.0, 2.1e-3],
        "R": 1.0,
        "T_final_s": 500.0,
    },
    "rotation": {
        "s1_range_deg": 400.0,
        "s2_range_radps": 2.6,
        "Q": [0.1, 0.0, 0.5],
        "R": 1.0,
        "T_final_s": 200.0,
    },
}

# Failure-mode weights: normal channels tightened, faulty channel relaxed
FAULT_CONFIG = {
    **DEFAULT_CONFIG,
    "translation": {
        "s1_range_m": 40.0,
        "s2_range_mps": 1.5,
        "Q": [1.0, 0.0, 200.0],
        "R": 1.0,
        "T_final_s": 500.0,
    },
    "rotation": {
        "s1_range_deg": 400.0,
        "s2_range_radps": 2.6,
        "Q": [1.0, 0.0, 5.0],
        "R": 1.0,
        "T_final_s": 200.0,
    },
    "faulty_translation": {"Q": [0.01, 0.0, 5.0], "R": 1.0},
    "faulty_rotation": {"Q": [1.0, 0.0, 5.0], "R": 1.0},
}


class ConfigError(ValueError):
    """Invalid solve configuration; the message names the offending field."""


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    if cfg.get("format") != CONFIG_FORMAT:
        raise ConfigError(f"{path}: format must be {CONFIG_FORMAT!r}")
    if int(cfg.get("version", 0)) != 1:
        raise ConfigError(f"{path}: unsupported version {cfg.get('version')}")
    for section in ("translation", "rotation"):
        if section not in cfg:
            raise ConfigError(f"{path}: missing section {section!r}")
    return cfg


def _q_matrix(spec, where: str) -> np.ndarray:
    q = np.asarray(spec, dtype=float)
    if q.shape == (3,):
        Q = np.array([[q[0], q[1]], [q[1], q[2]]])
    elif q.shape == (2, 2):
        Q = q
    else:
        raise ConfigError(f"{where}.Q must be [Q11, Q12, Q22] or 2x2")
    if np.any(np.linalg.eigvalsh(Q) < -1e-12):
        raise ConfigError(f"{where}.Q must be positive semidefinite")
    return Q


def translation_problem(cfg: dict, params: SatelliteParams,
                        section: str = "translation",
                        body_bounds: bool = True) -> dp.DPProblem:
    """Channel force-policy problem.

    The action grid spans the per-body-channel capability 2*u_max, which at
    41 points quantizes forces in whole pulse pairs and is what the
    allocator can actually serve; the RSW-composite envelope 2*sqrt(3)*u_max
    (three aligned channel pairs) is available via ``body_bounds=False`` but
    overdrives the channels and widens the policy dead zones.
    """
    sec = cfg[section]
    u_hi = 2.0 * params.u_max if body_bounds else 2.0 * math.sqrt(3.0) * params.u_max
    r = float(sec.get("R", 1.0))
    if r <= 0:
        raise ConfigError(f"{section}.R must be positive")
    return dp.DPProblem(
        kind="translation", inertia=params.mass,
        s1_range=float(sec["s1_range_m"]), s2_range=float(sec["s2_range_mps"]),
        u_lo=-u_hi, u_hi=u_hi,
        n1=int(cfg["n_states"]), n2=int(cfg["n_states"]), p=int(cfg["n_actions"]),
        Q=_q_matrix(sec["Q"], section), R=r,
        N=int(round(sec["T_final_s"] / cfg["dt_s"])),
        dt=float(cfg["dt_s"]), error_kind="plain",
        spacing=cfg.get("spacing", "log"), dtype=cfg.get("dtype", "float64"),
    )


def rotation_problem(cfg: dict, params: SatelliteParams, axis: int,
                     section: str = "rotation") -> dp.DPProblem:
    sec = cfg[section]
    u_hi = 2.0 * params.u_max * params.d
    r = float(sec.get("R", 1.0))
    if r <= 0:
        raise ConfigError(f"{section}.R must be positive")
    return dp.DPProblem(
        kind="rotation", inertia=float(params.J_diag[axis]),
        s1_range=math.radians(float(sec["s1_range_deg"])),
        s2_range=float(sec["s2_range_radps"]),
        u_lo=-u_hi, u_hi=u_hi,
        n1=int(cfg["n_states"]), n2=int(cfg["n_states"]), p=int(cfg["n_actions"]),
        Q=_q_matrix(sec["Q"], section), R=r,
        N=int(round(sec["T_final_s"] / cfg["dt_s"])),
        dt=float(cfg["dt_s"]), error_kind="sine",
        spacing=cfg.get("spacing", "log"), dtype=cfg.get("dtype", "float64"),
    )


def _merged_section(cfg: dict, base_name: str, override_name: str) -> dict:
    merged = dict(cfg[base_name])
    merged.update(cfg.get(override_name, {}))
    return {**cfg, base_name: merged}


def build_problems(cfg: dict, params: SatelliteParams,
                   failed_thruster: int | None = None
                   ) -> dict[str, dict[str, dp.DPProblem]]:
    """Per-channel problems, with fault weight overrides and reduced bounds.

    In failure mode the translation channels switch to the body-channel
    capability bounds and the affected channel's failed direction halves.
    The affected rotation channel takes the relaxed weight set but keeps its
    symmetric request bound: the allocator already shaves torque served
    against the position-weighted cost, and halving the request as well
    leaves the braking direction too weak to ever recover a spin (the
    feasible set, not the request grid, enforces true capability).
    """
    problems = {
        "translation": {ax: translation_problem(cfg, params) for ax in "xyz"},
        "rotation": {ax: rotation_problem(cfg, params, i)
                     for i, ax in enumerate("xyz")},
    }
    if failed_thruster is not None:
        channel, _, _ = channel_of_thruster(failed_thruster)
        t_cfg = _merged_section(cfg, "translation", "faulty_translation")
        r_cfg = _merged_section(cfg, "rotation", "faulty_rotation")
        t_axis = "xyz"[channel.force_axis]
        r_axis = "xyz"[channel.torque_axis]
        problems["translation"][t_axis] = flt.reconfigure_bounds(
            translation_problem(t_cfg, params), failed_thruster, "force")
        problems["rotation"][r_axis] = rotation_problem(
            r_cfg, params, channel.torque_axis)
    return problems


# identical channel problems (same dynamics, bounds, weights, grid) solve to
# identical tables; the process-level memo lets policy sets share them, e.g.
# the three fully-actuated translation channels or the channels common to
# different single-failure configurations
_solve_memo: dict[str, dp.PolicyTable] = {}


def _problem_key(prob: dp.DPProblem) -> str:
    return json.dumps({
        k: (v.tolist() if isinstance(v, np.ndarray) else v)
        for k, v in prob.__dict__.items()}, sort_keys=True)


def solve_policy_set(cfg: dict, params: SatelliteParams | None = None,
                     failed_thruster: int | None = None,
                     log=None) -> PolicyBundle:
    """Solve all six channel policies, reusing identical problems."""
    params = params if params is not None else SatelliteParams()
    problems = build_problems(cfg, params, failed_thruster)
    bundle = PolicyBundle(translation={}, rotation={})
    for group in ("translation", "rotation"):
        for ax, prob in problems[group].items():
            key = _problem_key(prob)
            if key not in _solve_memo:
                if log:
                    log(f"solving {group} {ax} (N={prob.N}, "
                        f"{prob.n1}x{prob.n2}x{prob.p}, {prob.dtype})")
                _solve_memo[key] = dp.value_iterate(prob)
            getattr(bundle, group)[ax] = _solve_memo[key]
    return bundle


POLICY_FILES = {("translation", ax): f"translation_{ax}.policy" for ax in "xyz"}
POLICY_FILES.update({("rotation", ax): f"rotation_{ax}.policy" for ax in "xyz"})


def save_policy_set(out_dir: str | Path, bundle: PolicyBundle) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (group, ax), fname in POLICY_FILES.items():
        path = out_dir / fname
        dp.save_policy(path, getattr(bundle, group)[ax])
        written.append(path)
    return written


def load_policy_set(directory: str | Path) -> PolicyBundle:
    directory = Path(directory)
    bundle = PolicyBundle(translation={}, rotation={})
    for (group, ax), fname in POLICY_FILES.items():
        path = directory / fname
        if not path.exists():
            raise FileNotFoundError(f"missing policy file: {path}")
        getattr(bundle, group)[ax] = dp.load_policy(path)
    return bundle
