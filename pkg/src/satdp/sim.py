"""Closed-loop maneuver simulator.

Timing structure: 1 s control periods, thrusting allowed only in the first
200 ms of each period, 10 ms integration substeps throughout.  At each period
boundary the controller reads the true state (perfect knowledge), produces a
desired wrench, and the allocator turns it into a left-aligned pulse schedule.
The policy controller does one table lookup per channel; the baseline
controller re-selects thrusters every 10 ms tick inside the window.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import allocation, baseline as bl, dp, dynamics, fault as flt
from .params import (CHANNELS, ISS_ELEMENTS, OrbitModel, SatelliteParams,
                     SatelliteState, ThrusterConfig, make_orbit)

SUBSTEP_S = 0.01
PERIOD_S = 1.0
SUBSTEPS_PER_PERIOD = 100
WINDOW_SUBSTEPS = 20  # 200 ms


class SimulationError(RuntimeError):
    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time {last_good_time:.2f} s)")
        self.last_good_time = last_good_time


@dataclass
class Scenario:
    """Initial conditions, orbit, controller selection, and bands for one run."""

    name: str = "scenario"
    rho0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rho_dot0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angles0_deg: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orbit: dict = field(default_factory=lambda: dict(ISS_ELEMENTS))
    controller: str = "dp"
    failed_thruster: int | None = None
    wmf: float = 1.0
    fault: flt.FaultConfig | None = None
    horizon_s: float = 400.0
    pos_band_m: float = 0.2
    att_band_deg: float = 2.0
    seed: int = 0
    attitude_ref: str = "rsw0"
    satellite: dict = field(default_factory=dict)
    policies: dict = field(default_factory=dict)  # channel name -> file path

    def __post_init__(self):
        for name in ("rho0", "rho_dot0", "angles0_deg", "omega0"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.controller not in ("dp", "baseline"):
            raise ValueError(f"unknown controller {self.controller!r}")
        if self.attitude_ref not in ("rsw0", "eci"):
            raise ValueError(f"unknown attitude reference {self.attitude_ref!r}")
        if self.horizon_s < 0 or self.horizon_s % PERIOD_S != 0:
            raise ValueError("horizon must be a nonnegative multiple of the 1 s period")
        if self.failed_thruster is not None and self.fault is None:
            self.fault = flt.FaultConfig(failed_thruster=self.failed_thruster,
                                         side_deadband=self.pos_band_m)
        if self.fault is not None:
            self.failed_thruster = self.fault.failed_thruster

    def params(self) -> SatelliteParams:
        return SatelliteParams(**self.satellite) if self.satellite else SatelliteParams()

    def reference_attitude(self, orbit: OrbitModel) -> np.ndarray:
        """Attitude the angle channels regulate to (inertially fixed).

        ``rsw0`` aligns the reference with the RSW triad at scenario start, so
        the body channels coincide with the relative-motion axes at t = 0 (the
        premise of the per-channel decomposition); ``eci`` uses the inertial
        axes.  Initial angles are per-axis offsets from this reference.
        """
        if self.attitude_ref == "eci":
            return np.array([0.0, 0.0, 0.0, 1.0])
        return dynamics.quat_from_dcm(dynamics.rsw_from_rv(orbit.R, orbit.V).T)

    def initial_state(self, q_ref: np.ndarray | None = None) -> SatelliteState:
        offset = dynamics.quat_from_per_axis_angles(np.deg2rad(self.angles0_deg))
        if q_ref is None:
            q_ref = np.array([0.0, 0.0, 0.0, 1.0])
        q0 = dynamics.quat_normalize(dynamics.quat_multiply(offset, q_ref))
        return SatelliteState(rho=self.rho0.copy(), rho_dot=self.rho_dot0.copy(),
                              q=q0, omega=self.omega0.copy())

    def fingerprint(self) -> str:
        blob = json.dumps(scenario_to_dict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def scenario_to_dict(sc: Scenario) -> dict:
    d = {
        "format": "satdp-scenario",
        "version": 1,
        "name": sc.name,
        "initial": {
            "rho_m": sc.rho0.tolist(),
            "rho_dot_mps": sc.rho_dot0.tolist(),
            "angles_deg": sc.angles0_deg.tolist(),
            "omega_radps": sc.omega0.tolist(),
        },
        "orbit": dict(sc.orbit),
        "controller": sc.controller,
        "failed_thruster": sc.failed_thruster,
        "wmf": sc.wmf,
        "horizon_s": sc.horizon_s,
        "bands": {"position_m": sc.pos_band_m, "attitude_deg": sc.att_band_deg},
        "seed": sc.seed,
        "attitude_ref": sc.attitude_ref,
    }
    if sc.fault is not None:
        d["fault"] = {
            "wmf_stable": sc.fault.w_mf_stable,
            "wmf_attitude_priority": sc.fault.w_mf_attitude_priority,
            "distance_table": [list(k) for k in sc.fault.distance_table],
            "side_deadband": sc.fault.side_deadband,
        }
    if sc.satellite:
        d["satellite"] = dict(sc.satellite)
    if sc.policies:
        d["policies"] = dict(sc.policies)
    return d


def scenario_from_dict(d: dict) -> Scenario:
    if d.get("format") != "satdp-scenario":
        raise ValueError("not a scenario document")
    if int(d.get("version", 0)) != 1:
        raise ValueError(f"unsupported scenario version {d.get('version')}")
    ini = d["initial"]
    fault_cfg = None
    if d.get("fault") is not None and d.get("failed_thruster") is not None:
        f = d["fault"]
        fault_cfg = flt.FaultConfig(
            failed_thruster=int(d["failed_thruster"]),
            w_mf_stable=float(f.get("wmf_stable", 0.93)),
            w_mf_attitude_priority=float(f.get("wmf_attitude_priority", 10.0)),
            distance_table=tuple(tuple(k) for k in f.get(
                "distance_table", [[0.0, 0.93], [10.0, 0.93]])),
            side_deadband=float(f.get("side_deadband",
                                      d["bands"]["position_m"])),
        )
    return Scenario(
        name=d.get("name", "scenario"),
        rho0=ini["rho_m"], rho_dot0=ini["rho_dot_mps"],
        angles0_deg=ini["angles_deg"], omega0=ini["omega_radps"],
        orbit=dict(d.get("orbit", ISS_ELEMENTS)),
        controller=d["controller"],
        failed_thruster=d.get("failed_thruster"),
        wmf=float(d.get("wmf", 1.0)),
        fault=fault_cfg,
        horizon_s=float(d["horizon_s"]),
        pos_band_m=float(d["bands"]["position_m"]),
        att_band_deg=float(d["bands"]["attitude_deg"]),
        seed=int(d.get("seed", 0)),
        attitude_ref=d.get("attitude_ref", "rsw0"),
        satellite=dict(d.get("satellite", {})),
        policies=dict(d.get("policies", {})),
    )


@dataclass
class PolicyBundle:
    """Per-channel solved policies: translation keyed by RSW axis, rotation by
    body axis."""

    translation: dict[str, dp.PolicyTable]
    rotation: dict[str, dp.PolicyTable]

    def lookup_wrench(self, state: SatelliteState) -> tuple[np.ndarray, np.ndarray]:
        theta = dynamics.controller_angles(state.q)
        F_rsw = np.array([
            dp.lookup(self.translation[ax], state.rho[i], state.rho_dot[i])
            for i, ax in enumerate("xyz")])
        M_body = np.array([
            dp.lookup(self.rotation[ax], theta[i], state.omega[i])
            for i, ax in enumerate("xyz")])
        return F_rsw, M_body


@dataclass
class Trajectory:
    """10 ms time series of the run (row i covers the substep ending at t[i])."""

    t: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray
    theta_deg: np.ndarray
    omega: np.ndarray
    F_body: np.ndarray
    M_body: np.ndarray
    thrusters: np.ndarray  # (n, 12) 0/1
    wmf: np.ndarray

    def __len__(self) -> int:
        return self.t.size


@dataclass
class ManeuverMetrics:
    settling_pos_s: np.ndarray
    settling_att_s: np.ndarray
    settling_max_s: float
    total_impulse_ns: float
    pos_max_sse_m: float
    att_max_sse_deg: float
    never_settled: list[str]
    impulse_cutoff_s: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["settling_pos_s"] = self.settling_pos_s.tolist()
        d["settling_att_s"] = self.settling_att_s.tolist()
        return d


def run(scenario: Scenario, policies: PolicyBundle | None = None,
        gains: bl.BaselineGains | None = None,
        params: SatelliteParams | None = None,
        ) -> tuple[Trajectory, ManeuverMetrics]:
    """Simulate one scenario and compute its maneuver metrics.

    Deterministic: identical scenarios produce bit-identical trajectories.
    Raises :class:`SimulationError` with the last good time if the state
    turns non-finite.
    """
    params = params if params is not None else scenario.params()
    if scenario.controller == "dp" and policies is None:
        raise ValueError("dp scenarios need a policy bundle")
    if scenario.controller == "baseline" and gains is None:
        gains = bl.BaselineGains()

    cfg = ThrusterConfig.for_satellite(params, scenario.failed_thruster)
    feasible = {ch.name: allocation.build_feasible(ch, cfg.failure_mask, params)
                for ch in CHANNELS}
    orbit = make_orbit(scenario.orbit)
    q_ref = scenario.reference_attitude(orbit)
    state = scenario.initial_state(q_ref)
    y = dynamics.pack_state(state, orbit)
    mu = orbit.mu
    J, J_inv, mass = params.J, params.J_inv, params.mass

    n_periods = int(round(scenario.horizon_s / PERIOD_S))
    n_rows = n_periods * SUBSTEPS_PER_PERIOD
    traj = Trajectory(
        t=np.zeros(n_rows), rho=np.zeros((n_rows, 3)),
        rho_dot=np.zeros((n_rows, 3)), theta_deg=np.zeros((n_rows, 3)),
        omega=np.zeros((n_rows, 3)), F_body=np.zeros((n_rows, 3)),
        M_body=np.zeros((n_rows, 3)), thrusters=np.zeros((n_rows, 12), dtype=int),
        wmf=np.zeros(n_rows),
    )

    def ctrl_state(y_now: np.ndarray) -> SatelliteState:
        # controllers see the attitude relative to the reference
        s = dynamics.unpack_state(y_now)
        s.q = dynamics.quat_error(s.q, q_ref)
        return s

    models = None
    if scenario.controller == "baseline":
        models = bl.ReferenceModels.from_state(ctrl_state(y), gains)

    row = 0
    for period in range(n_periods):
        if not np.all(np.isfinite(y)):
            raise SimulationError("non-finite state", float(period) * PERIOD_S)
        state = ctrl_state(y)
        cur_orbit = OrbitModel(mu=mu, R=y[13:16].copy(), V=y[16:19].copy())

        if scenario.controller == "dp":
            F_rsw, M_star = policies.lookup_wrench(state)
            F_star_body = allocation.desired_wrench_to_body(F_rsw, y[6:10],
                                                            cur_orbit)
            if scenario.fault is not None:
                wmf = flt.schedule_wmf(state.rho, scenario.fault)
            else:
                wmf = scenario.wmf
            schedule = allocation.allocate_all(F_star_body, M_star, wmf, cfg,
                                               params, feasible)
            t_on = schedule.t_on
        else:
            wmf = scenario.wmf
            t_on = None  # selection happens per tick

        for sub in range(SUBSTEPS_PER_PERIOD):
            t_ms = sub * 10.0
            if scenario.controller == "dp":
                active = t_ms < t_on
            else:
                if sub < WINDOW_SUBSTEPS:
                    w_F, w_M, _ = bl.ideal_controls(ctrl_state(y), models, params)
                    w_F_body = allocation.desired_wrench_to_body(
                        w_F, y[6:10], OrbitModel(mu=mu, R=y[13:16], V=y[16:19]))
                    active = bl.baseline_select(w_F_body, w_M, cfg, params, gains)
                else:
                    active = np.zeros(12, dtype=bool)
                models = bl.reference_step(models, SUBSTEP_S)
            u = np.where(active, params.u_on, 0.0)
            F_B = cfg.H_F @ u
            M_B = cfg.H_M @ u
            y = dynamics._rk4_flat(y, F_B, M_B, mass, J, J_inv, mu, True, SUBSTEP_S)
            traj.t[row] = (period * SUBSTEPS_PER_PERIOD + sub + 1) * SUBSTEP_S
            traj.rho[row] = y[0:3]
            traj.rho_dot[row] = y[3:6]
            traj.theta_deg[row] = np.rad2deg(dynamics.controller_angles(
                dynamics.quat_error(y[6:10], q_ref)))
            traj.omega[row] = y[10:13]
            traj.F_body[row] = F_B
            traj.M_body[row] = M_B
            traj.thrusters[row] = active.astype(int)
            traj.wmf[row] = wmf
            row += 1
    if not np.all(np.isfinite(y)):
        raise SimulationError("non-finite state", scenario.horizon_s - PERIOD_S)

    metrics = compute_metrics(traj, scenario.pos_band_m, scenario.att_band_deg,
                              params.u_on, scenario.horizon_s)
    return traj, metrics


def _settling_time(t: np.ndarray, err: np.ndarray, band: float,
                   horizon: float) -> tuple[float, bool]:
    """Time of the last entry into the band with no subsequent exit."""
    outside = err > band
    if not outside.any():
        return 0.0, True
    last_out = int(np.flatnonzero(outside)[-1])
    if last_out == len(t) - 1:
        return horizon, False
    return float(t[last_out + 1]), True


def attitude_error_deg(theta_deg: np.ndarray) -> np.ndarray:
    """Angle error to the nearest whole turn (a completed flip counts as
    zero, matching the sine-wrapped channel cost)."""
    return np.abs((theta_deg + 180.0) % 360.0 - 180.0)


def compute_metrics(traj: Trajectory, pos_band_m: float, att_band_deg: float,
                    u_on: float, horizon_s: float) -> ManeuverMetrics:
    """Settling per channel, impulse truncated 10 s past max settling, and
    steady-state error maxima measured after settling."""
    if len(traj) == 0:
        return ManeuverMetrics(np.zeros(3), np.zeros(3), 0.0, 0.0, 0.0, 0.0,
                               [], 0.0)
    settling_pos = np.zeros(3)
    settling_att = np.zeros(3)
    never = []
    for i in range(3):
        settling_pos[i], ok = _settling_time(
            traj.t, np.abs(traj.rho[:, i]), pos_band_m, horizon_s)
        if not ok:
            never.append(f"position_{'xyz'[i]}")
        settling_att[i], ok = _settling_time(
            traj.t, attitude_error_deg(traj.theta_deg[:, i]), att_band_deg,
            horizon_s)
        if not ok:
            never.append(f"attitude_{'xyz'[i]}")
    settling_max = float(max(settling_pos.max(), settling_att.max()))

    cutoff = settling_max + 10.0
    in_window = traj.t <= cutoff + 1e-9
    impulse = u_on * 0.01 * float(traj.thrusters[in_window].sum())

    if never:
        tail = traj.t >= traj.t[-1] - 10.0
    else:
        tail = traj.t >= settling_max - 1e-9
    pos_sse = float(np.abs(traj.rho[tail]).max()) if tail.any() else 0.0
    att_sse = float(attitude_error_deg(traj.theta_deg[tail]).max()) \
        if tail.any() else 0.0

    return ManeuverMetrics(
        settling_pos_s=settling_pos, settling_att_s=settling_att,
        settling_max_s=settling_max, total_impulse_ns=impulse,
        pos_max_sse_m=pos_sse, att_max_sse_deg=att_sse,
        never_settled=never, impulse_cutoff_s=cutoff,
    )


def scale_scenario(base: Scenario, r: float) -> Scenario:
    """Initial position with per-component magnitude r, keeping the base
    direction pattern (the r = |base| row reproduces the base scenario)."""
    signs = np.sign(base.rho0)
    signs[signs == 0] = 1.0
    sc = Scenario(**{**base.__dict__, "rho0": r * signs,
                     "name": f"{base.name}_r{r:g}"})
    return sc


def sweep(base: Scenario, policies: PolicyBundle, gains: bl.BaselineGains,
          r_values=tuple(range(5, 16)),
          params: SatelliteParams | None = None) -> list[dict]:
    """Paired runs over initial distance: settling and impulse ratio per r."""
    rows = []
    for r in r_values:
        row = {"r_m": float(r)}
        try:
            sc_dp = scale_scenario(base, float(r))
            sc_dp.controller = "dp"
            _, m_dp = run(sc_dp, policies=policies, params=params)
            sc_bl = scale_scenario(base, float(r))
            sc_bl.controller = "baseline"
            _, m_bl = run(sc_bl, gains=gains, params=params)
            row.update(
                dp_settling_s=m_dp.settling_max_s,
                dp_impulse_ns=m_dp.total_impulse_ns,
                baseline_settling_s=m_bl.settling_max_s,
                baseline_impulse_ns=m_bl.total_impulse_ns,
                impulse_ratio=(m_bl.total_impulse_ns / m_dp.total_impulse_ns
                               if m_dp.total_impulse_ns > 0 else float("inf")),
                error="",
            )
        except (SimulationError, ValueError) as exc:  # record, keep sweeping
            row["error"] = str(exc)
        rows.append(row)
    return rows


def compare(scenario: Scenario, policies: PolicyBundle,
            gains: bl.BaselineGains,
            params: SatelliteParams | None = None) -> dict:
    """Fuel/accuracy comparison of the two controllers on one scenario."""
    sc_dp = Scenario(**{**scenario.__dict__, "controller": "dp"})
    sc_bl = Scenario(**{**scenario.__dict__, "controller": "baseline"})
    _, m_dp = run(sc_dp, policies=policies, params=params)
    _, m_bl = run(sc_bl, gains=gains, params=params)
    return {
        "baseline_kind": "surrogate",
        "dp": m_dp.to_dict(),
        "baseline": m_bl.to_dict(),
        "impulse_ratio": (m_bl.total_impulse_ns / m_dp.total_impulse_ns
                          if m_dp.total_impulse_ns > 0 else float("inf")),
        "settling_mismatch": (
            abs(m_bl.settling_max_s - m_dp.settling_max_s)
            / m_dp.settling_max_s if m_dp.settling_max_s > 0 else 0.0),
    }
