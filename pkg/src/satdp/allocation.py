"""Per-channel thruster mapping by exhaustive weighted-quadratic minimization,
plus pulse modulation onto the 200 ms thrusting window.

A channel has two opposing thruster pairs.  Each pair's average force over
one 1 s control period is quantized to multiples of u_on/100 (10 ms pulses of
u_on within 1000 ms) in [-u_max, u_max], so a healthy pair offers 41 values
and a pair with a failed thruster 21.  Back-to-back simultaneous firing never
appears: the sign of a pair force selects which thruster fires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import dcm_from_quat, rsw_from_rv
from .params import CHANNELS, Channel, OrbitModel, SatelliteParams, ThrusterConfig

PULSE_STEPS = 20          # 10 ms increments available in the 200 ms window
PERIOD_MS = 1000
WINDOW_MS = 200


def _pair_values(params: SatelliteParams, plus_failed: bool,
                 minus_failed: bool) -> np.ndarray:
    """Quantized signed average forces one pair can produce in a period."""
    steps = np.arange(-PULSE_STEPS, PULSE_STEPS + 1)
    if plus_failed:
        steps = steps[steps <= 0]
    if minus_failed:
        steps = steps[steps >= 0]
    # u_on * (k/100) so the extremes equal u_max = 0.2 * u_on bit-exactly
    return params.u_on * (steps / 100.0)


@dataclass(frozen=True)
class FeasibleSet:
    """All admissible (pair A, pair B) force candidates for one channel with
    their channel wrench precomputed through H_c.

    ``tie_torque_sign`` is 0 for a healthy channel.  With a failed thruster
    it is the sign of the dead thruster's torque coefficient: force pulses in
    the direction the dead thruster served are forced through the opposite
    pair's survivor, whose torque kick has the opposite sign, so exact-cost
    allocation ties are broken toward this sign to keep the channel's angular
    momentum ledger balanced over position jitter cycles.
    """

    channel: Channel
    fA: np.ndarray        # (n_cand,) pair-A force per candidate, N
    fB: np.ndarray
    F: np.ndarray         # channel force fA + fB
    M: np.ndarray         # channel torque d * (fA - fB)
    fuel: np.ndarray      # |fA| + |fB|, proportional to total on-time
    degenerate: bool      # True when a whole pair is lost
    tie_torque_sign: int = 0

    @property
    def size(self) -> int:
        return self.F.size


def build_feasible(channel: Channel, failure_mask: np.ndarray,
                   params: SatelliteParams) -> FeasibleSet:
    """Enumerate the channel's candidate set given the failure mask."""
    failure_mask = np.asarray(failure_mask, dtype=bool)
    a_plus, a_minus = channel.pair_a
    b_plus, b_minus = channel.pair_b
    va = _pair_values(params, failure_mask[a_plus], failure_mask[a_minus])
    vb = _pair_values(params, failure_mask[b_plus], failure_mask[b_minus])
    fA = np.repeat(va, vb.size)
    fB = np.tile(vb, va.size)
    degenerate = va.size == 1 or vb.size == 1
    # torque signs of the channel's thrusters in H_c order: A+, B+, A-, B-
    # have signs +, -, -, + times d; the dead thruster's sign sets the
    # repayment preference
    tie_sign = 0
    signs = {a_plus: 1, b_plus: -1, a_minus: -1, b_minus: 1}
    failed_here = [j for j in signs if failure_mask[j]]
    if len(failed_here) == 1:
        tie_sign = signs[failed_here[0]]
    return FeasibleSet(
        channel=channel, fA=fA, fB=fB,
        F=fA + fB, M=params.d * (fA - fB),
        fuel=np.abs(fA) + np.abs(fB), degenerate=degenerate,
        tie_torque_sign=tie_sign,
    )


def allocate(F_star: float, M_star: float, w_mf: float,
             feasible: FeasibleSet, d: float) -> tuple[float, float]:
    """Pick the candidate minimizing eF^2 + W_mf * (eM/d)^2.

    The torque error is normalized by the lever arm so the weight acts on
    commensurate units.  Exact cost ties break toward lowest fuel, then (in
    a thruster-out channel) toward torque of the repayment sign so jitter
    cycles do not wind up the attitude, then lexicographically on (fA, fB).
    """
    if not (np.isfinite(F_star) and np.isfinite(M_star)):
        raise ValueError("wrench request must be finite")
    if w_mf <= 0:
        raise ValueError("W_mf must be positive")
    eF = feasible.F - F_star
    eM = (feasible.M - M_star) / d
    cost = eF * eF + w_mf * (eM * eM)
    cmin = cost.min()
    tied = np.flatnonzero(cost == cmin)
    if tied.size > 1:
        fuel = feasible.fuel[tied]
        tied = tied[fuel == fuel.min()]
        if tied.size > 1 and feasible.tie_torque_sign != 0:
            m_pref = feasible.tie_torque_sign * feasible.M[tied]
            tied = tied[m_pref == m_pref.max()]
        if tied.size > 1:
            key = np.lexsort((feasible.fB[tied], feasible.fA[tied]))
            tied = tied[key[:1]]
    i = int(tied[0])
    return float(feasible.fA[i]), float(feasible.fB[i])


@dataclass
class ThrusterSchedule:
    """Per-thruster on-durations (ms) for one 1 s control period."""

    t_on: np.ndarray  # (12,) int, multiples of 10 in [0, 200]

    def __post_init__(self):
        self.t_on = np.asarray(self.t_on, dtype=int)
        if self.t_on.shape != (12,):
            raise ValueError("schedule needs 12 on-times")
        if np.any((self.t_on < 0) | (self.t_on > WINDOW_MS)):
            raise ValueError("on-times must lie in [0, 200] ms")
        if np.any(self.t_on % 10 != 0):
            raise ValueError("on-times must be multiples of 10 ms")

    def thrusters_active(self, t_ms: float) -> np.ndarray:
        """Boolean activity at a time offset within the period (left-aligned)."""
        return t_ms < self.t_on

    def impulse(self, u_on: float) -> float:
        return u_on * float(self.t_on.sum()) / 1000.0


def pulse_modulate(u_control: np.ndarray, params: SatelliteParams) -> np.ndarray:
    """Per-thruster on-times t_on = 200 * u_control / u_max, in ms.

    ``u_control`` holds nonnegative per-thruster average forces over the
    period, already quantized to multiples of u_on/100; the pulse conserves
    the impulse exactly: u_on * t_on / 1000 = u_control * 1 s.
    """
    u_control = np.asarray(u_control, dtype=float)
    if np.any(u_control < -1e-15):
        raise ValueError("per-thruster forces must be nonnegative")
    if np.any(u_control > params.u_max * (1 + 1e-12)):
        raise ValueError("u_control exceeds the effective thrust bound")
    quantum = params.u_on / 100.0
    steps = u_control / quantum
    rounded = np.rint(steps)
    if np.any(np.abs(steps - rounded) > 1e-6):
        raise ValueError("u_control is not quantized to 10 ms pulse steps")
    return (rounded.astype(int) * 10).astype(int)


def schedule_from_pairs(pairs: dict[str, tuple[float, float]],
                        params: SatelliteParams) -> ThrusterSchedule:
    """Assemble signed pair forces into the 12-thruster pulse schedule."""
    u_control = np.zeros(12)
    for ch in CHANNELS:
        fA, fB = pairs[ch.name]
        for (plus, minus), f in ((ch.pair_a, fA), (ch.pair_b, fB)):
            if f >= 0:
                u_control[plus] = f
            else:
                u_control[minus] = -f
    return ThrusterSchedule(t_on=pulse_modulate(u_control, params))


def allocate_all(F_star_body: np.ndarray, M_star_body: np.ndarray,
                 w_mf: float, cfg: ThrusterConfig,
                 params: SatelliteParams,
                 feasible: dict[str, FeasibleSet] | None = None) -> ThrusterSchedule:
    """Three independent channel allocations assembled into one schedule."""
    if feasible is None:
        feasible = {ch.name: build_feasible(ch, cfg.failure_mask, params)
                    for ch in CHANNELS}
    pairs = {}
    for ch in CHANNELS:
        pairs[ch.name] = allocate(
            float(F_star_body[ch.force_axis]), float(M_star_body[ch.torque_axis]),
            w_mf, feasible[ch.name], params.d)
    return schedule_from_pairs(pairs, params)


def desired_wrench_to_body(F_star_rsw: np.ndarray, q: np.ndarray,
                           orbit: OrbitModel | None) -> np.ndarray:
    """Rotate a desired RSW force into the body frame: (C_B^R)^T F*_rsw."""
    C_bi = dcm_from_quat(q)
    if orbit is None:
        C_br = C_bi
    else:
        C_br = rsw_from_rv(orbit.R, orbit.V) @ C_bi
    return C_br.T @ np.asarray(F_star_rsw, dtype=float)
