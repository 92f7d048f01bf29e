"""Reference-model baseline controller used for the fuel comparison.

SURROGATE NOTICE: the published selection method this stands in for lives in
an external reference whose activation algorithm and auxiliary switching
variables are not reproduced here.  This module keeps the documented outer
structure (decoupled second-order reference models, ideal-control bounds,
per-channel minimum-thruster selection at a 10 ms update rate inside the
200 ms window) and substitutes a tracking-error PD law for the ideal
controls.  Every artifact produced from it is labeled "surrogate".

The pattern-search tuner fits the reference-model gains so the baseline
response matches a given trajectory, which is what makes the fuel
comparison meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .params import CHANNELS, SatelliteParams, SatelliteState, ThrusterConfig


@dataclass
class BaselineGains:
    """Diagonal gains of the two reference models and the selection weights."""

    K1: np.ndarray = field(default_factory=lambda: 1e-2 * np.diag([3.44, 3.20, 3.39]))
    K2: np.ndarray = field(default_factory=lambda: 3.7e-4 * np.eye(3))
    K3: np.ndarray = field(default_factory=lambda: np.diag([3.31, 4.60, 3.23]))
    K4: np.ndarray = field(default_factory=lambda: np.diag([0.47, 0.69, 0.48]))
    Q1L: float = 5e4
    Q2L: float = 5e5

    def diagonals(self) -> np.ndarray:
        """The 12 tunable diagonal entries (K1..K4 in order)."""
        return np.concatenate([np.diag(self.K1), np.diag(self.K2),
                               np.diag(self.K3), np.diag(self.K4)])

    @classmethod
    def from_diagonals(cls, x: np.ndarray, q1l: float = 5e4,
                       q2l: float = 5e5) -> "BaselineGains":
        x = np.asarray(x, dtype=float)
        if x.shape != (12,):
            raise ValueError("expected 12 diagonal gain entries")
        return cls(K1=np.diag(x[0:3]), K2=np.diag(x[3:6]),
                   K3=np.diag(x[6:9]), K4=np.diag(x[9:12]), Q1L=q1l, Q2L=q2l)

    def selection_weight(self, d: float) -> float:
        """Torque-vs-force weight of the selection metric, Q2L / (d * Q1L)."""
        return self.Q2L / (d * self.Q1L)


def mrp_from_quat(q: np.ndarray) -> np.ndarray:
    """Attitude parameter vector sigma = q_vec / q4 (q4 != 0).

    This is the stated reference-model convention; it equals
    tan(theta/2) * e_hat, so maneuvers must stay below 180 degrees.
    """
    if abs(q[3]) < 1e-9:
        raise ValueError("sigma undefined at 180 degrees (q4 = 0)")
    return np.asarray(q[:3], dtype=float) / float(q[3])


def mrp_rate(sigma: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Attitude-parameter kinematics for sigma = q_vec/q4 (scales as
    tan(theta/2)): sigma_dot = 0.5 * (I + [sigma x] + sigma sigma^T) * omega."""
    s = np.asarray(sigma, dtype=float)
    B = np.eye(3) + _skew(s) + np.outer(s, s)
    return 0.5 * (B @ omega)


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])


@dataclass
class ReferenceModels:
    """States of the decoupled second-order position and attitude models."""

    gains: BaselineGains
    rho_m: np.ndarray
    rho_m_dot: np.ndarray
    sigma_m: np.ndarray
    sigma_m_dot: np.ndarray
    v_rho_c: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v_sigma_c: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def from_state(cls, state: SatelliteState,
                   gains: BaselineGains) -> "ReferenceModels":
        return cls(gains=gains, rho_m=state.rho.copy(),
                   rho_m_dot=state.rho_dot.copy(),
                   sigma_m=mrp_from_quat(state.q),
                   sigma_m_dot=mrp_rate(mrp_from_quat(state.q), state.omega))

    def accelerations(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.gains
        rho_acc = self.v_rho_c - g.K1 @ self.rho_m_dot - g.K2 @ self.rho_m
        sig_acc = self.v_sigma_c - g.K3 @ self.sigma_m_dot - g.K4 @ self.sigma_m
        return rho_acc, sig_acc


def reference_step(models: ReferenceModels, dt: float) -> ReferenceModels:
    """One RK4 step of both linear reference models."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    g = models.gains

    def deriv(y):
        rho, rho_dot, sig, sig_dot = y[0:3], y[3:6], y[6:9], y[9:12]
        return np.concatenate([
            rho_dot,
            models.v_rho_c - g.K1 @ rho_dot - g.K2 @ rho,
            sig_dot,
            models.v_sigma_c - g.K3 @ sig_dot - g.K4 @ sig,
        ])

    y = np.concatenate([models.rho_m, models.rho_m_dot,
                        models.sigma_m, models.sigma_m_dot])
    k1 = deriv(y)
    k2 = deriv(y + 0.5 * dt * k1)
    k3 = deriv(y + 0.5 * dt * k2)
    k4 = deriv(y + dt * k3)
    y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return replace(models, rho_m=y[0:3], rho_m_dot=y[3:6],
                   sigma_m=y[6:9], sigma_m_dot=y[9:12])


def ideal_controls(state: SatelliteState, models: ReferenceModels,
                   params: SatelliteParams) -> tuple[np.ndarray, np.ndarray, bool]:
    """Surrogate ideal wrench driving the tracking error to zero.

    Proportional-derivative on the tracking error, weighted by the stiff
    penalties Q1L (position) and Q2L (attitude) and scaled into the bounds
    |w_Fi| <= u_on, |w_Mi| <= d*u_on.  The derivative time constants come
    from the reference-gain ratios (K1/K2, K3/K4), so the error slides to
    zero at the reference models' own pace while any appreciable error
    saturates the wrench, which is what lets the on/off pattern matching in
    :func:`baseline_select` engage.  Returns (w_F, w_M, saturated).
    """
    g = models.gains
    rho_acc, sig_acc = models.accelerations()
    e_rho = state.rho - models.rho_m
    e_rho_dot = state.rho_dot - models.rho_m_dot
    sigma = mrp_from_quat(state.q)
    e_sig = sigma - models.sigma_m
    e_sig_dot = mrp_rate(sigma, state.omega) - models.sigma_m_dot

    lam_f = np.diag(g.K1) / np.diag(g.K2)
    lam_m = np.diag(g.K3) / np.diag(g.K4)
    w_F = params.mass * rho_acc - g.Q1L * (e_rho + lam_f * e_rho_dot)
    # small-angle scaling: sigma ~ theta/2, so torque ~ 2 J sigma_ddot
    w_M = 2.0 * params.J_diag * sig_acc - g.Q2L * (e_sig + lam_m * e_sig_dot)

    f_bound = params.u_on
    m_bound = params.d * params.u_on
    saturated = bool(np.any(np.abs(w_F) > f_bound) or np.any(np.abs(w_M) > m_bound))
    return (np.clip(w_F, -f_bound, f_bound),
            np.clip(w_M, -m_bound, m_bound), saturated)


# the nine per-channel on/off patterns: each pair fires +, off, or -
_PATTERNS = [(a, b) for a in (0, 1, -1) for b in (0, 1, -1)]


def baseline_select(w_F_body: np.ndarray, w_M_body: np.ndarray,
                    cfg: ThrusterConfig, params: SatelliteParams,
                    gains: BaselineGains) -> np.ndarray:
    """Minimum-thruster on/off pattern best matching the ideal wrench.

    For each channel the nine pair patterns are scored with the same
    lever-normalized metric as the allocator, weighted by Q2L/(d*Q1L); exact
    ties prefer fewer active thrusters, then the earlier pattern.  Applies to
    one 10 ms tick; the caller enforces the 200 ms window schedule.
    """
    w_sel = gains.selection_weight(params.d)
    active = np.zeros(12, dtype=bool)
    for ch in CHANNELS:
        wf = float(w_F_body[ch.force_axis])
        wm = float(w_M_body[ch.torque_axis])
        best = None
        for a, b in _PATTERNS:
            thr_a = ch.pair_a[0] if a > 0 else ch.pair_a[1]
            thr_b = ch.pair_b[0] if b > 0 else ch.pair_b[1]
            if a != 0 and cfg.failure_mask[thr_a]:
                continue
            if b != 0 and cfg.failure_mask[thr_b]:
                continue
            fa = a * params.u_on
            fb = b * params.u_on
            e_f = (fa + fb) - wf
            e_m = ((fa - fb) * params.d - wm) / params.d
            cost = e_f * e_f + w_sel * (e_m * e_m)
            n_active = (a != 0) + (b != 0)
            key = (cost, n_active)
            if best is None or key < best[0]:
                best = (key, a, b)
        _, a, b = best
        if a != 0:
            active[ch.pair_a[0] if a > 0 else ch.pair_a[1]] = True
        if b != 0:
            active[ch.pair_b[0] if b > 0 else ch.pair_b[1]] = True
    return active


@dataclass
class PatternSearchResult:
    x: np.ndarray
    fun: float
    evaluations: int
    converged: bool


def pattern_search(objective, x0: np.ndarray, step0: float,
                   tolerance: float, max_evaluations: int = 10_000,
                   ) -> PatternSearchResult:
    """Coordinate pattern search with step halving.

    Polls +/- step along every coordinate in fixed order, moves to the best
    improving point, and halves the step when no poll improves.  Terminates
    when the step drops below ``tolerance``; if the evaluation budget runs
    out first, the best point so far is returned with ``converged=False``.
    """
    if step0 <= 0 or tolerance <= 0:
        raise ValueError("step0 and tolerance must be positive")
    x = np.asarray(x0, dtype=float).copy()
    f = float(objective(x))
    evals = 1
    step = float(step0)
    while step >= tolerance:
        best_x, best_f = None, f
        for i in range(x.size):
            for sign in (1.0, -1.0):
                if evals >= max_evaluations:
                    return PatternSearchResult(x, f, evals, False)
                trial = x.copy()
                trial[i] += sign * step
                ft = float(objective(trial))
                evals += 1
                if ft < best_f:
                    best_x, best_f = trial, ft
        if best_x is None:
            step *= 0.5
        else:
            x, f = best_x, best_f
    return PatternSearchResult(x, f, evals, True)


def tune_baseline(objective, seed_gains: BaselineGains | None = None,
                  step0: float = 0.30, tolerance: float = 0.05,
                  max_evaluations: int = 400) -> tuple[BaselineGains, PatternSearchResult]:
    """Fit the 12 diagonal gains by pattern search in log space.

    ``objective(gains)`` must return the scalar trajectory mismatch to
    minimize (typically integrated squared position/attitude error against a
    reference trajectory).  Searching log-gains keeps every poll positive and
    makes the step a multiplicative factor.
    """
    seed = seed_gains if seed_gains is not None else BaselineGains()

    def wrapped(logx: np.ndarray) -> float:
        return float(objective(BaselineGains.from_diagonals(
            np.exp(logx), seed.Q1L, seed.Q2L)))

    result = pattern_search(wrapped, np.log(seed.diagonals()), step0,
                            tolerance, max_evaluations)
    gains = BaselineGains.from_diagonals(np.exp(result.x), seed.Q1L, seed.Q2L)
    return gains, result
