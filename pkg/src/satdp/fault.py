"""Thruster-failure reconfiguration: reduced action bounds for the policy
solver, approach-side classification, and the dynamic allocation weight.

Failure identification is assumed external; the scenario supplies the failed
thruster index.  With one thruster out, the affected channel keeps full
authority in one direction and half in the other, and the spacecraft can
brake reliably only when it approaches the target from the side served by
the intact pair.  On the opposite (unstable) side the allocation weight is
raised so attitude keeps priority and position control is suspended until
the spacecraft drifts past the target.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dp import DPProblem
from .params import SatelliteParams, channel_of_thruster


class SideClassification(enum.Enum):
    STABLE_SIDE = "stable_side"
    UNSTABLE_SIDE = "unstable_side"


@dataclass
class FaultConfig:
    """Failure description plus the allocation-weight schedule.

    ``distance_table`` holds (range m, W_mf) knots interpolated linearly on
    the stable side; the default is the constant 0.93 that performs best for
    single failures.  ``w_mf_attitude_priority`` applies on the unstable side.
    ``side_deadband`` keeps the classification on the stable branch once the
    position error along the faulty axis is inside the settling band, so the
    weight trace does not chatter on steady-state jitter.
    """

    failed_thruster: int
    w_mf_stable: float = 0.93
    w_mf_attitude_priority: float = 10.0
    distance_table: tuple[tuple[float, float], ...] = ((0.0, 0.93), (10.0, 0.93))
    side_deadband: float = 0.2

    def __post_init__(self):
        if not 1 <= self.failed_thruster <= 12:
            raise ValueError("failed thruster index must be in 1..12")
        if not 0.9 <= self.w_mf_stable <= 1.1:
            raise ValueError("stable-side W_mf should lie in [0.9, 1.1]")
        if self.w_mf_attitude_priority <= 0:
            raise ValueError("attitude-priority W_mf must be positive")
        knots = tuple((float(r), float(w)) for r, w in self.distance_table)
        if any(r1 <= r0 for (r0, _), (r1, _) in zip(knots, knots[1:])):
            raise ValueError("distance table ranges must be strictly increasing")
        self.distance_table = knots

    @property
    def failure_mask(self) -> np.ndarray:
        mask = np.zeros(12, dtype=bool)
        mask[self.failed_thruster - 1] = True
        return mask


def reconfigure_bounds(base: DPProblem, failed_thruster: int,
                       which: str) -> DPProblem:
    """Halve the failed direction of the affected channel's action bound.

    ``which`` selects the 'force' or 'torque' role of the channel containing
    the failed thruster.  Losing one thruster of a pair halves the extreme
    average force (one thruster instead of two) in the direction it served,
    and likewise the torque extreme of the same sign.  The opposite bound is
    unchanged.  The caller re-solves the policy on the new action grid.
    """
    _, force_sign, torque_sign = channel_of_thruster(failed_thruster)
    sign = force_sign if which == "force" else torque_sign
    if which not in ("force", "torque"):
        raise ValueError("which must be 'force' or 'torque'")
    u_lo, u_hi = base.u_lo, base.u_hi
    if sign > 0:
        u_hi = 0.5 * u_hi
    else:
        u_lo = 0.5 * u_lo
    kwargs = {k: getattr(base, k) for k in (
        "kind", "inertia", "s1_range", "s2_range", "n1", "n2", "p", "Q", "R",
        "N", "H_term", "dt", "error_kind", "theta_ref", "spacing", "dtype")}
    return DPProblem(u_lo=u_lo, u_hi=u_hi, **kwargs)


def classify_side(rho: np.ndarray, failed_thruster: int,
                  target: np.ndarray | None = None,
                  deadband: float = 0.0) -> SideClassification:
    """Approach-side test for the faulty channel.

    Braking an approach requires force pointing from the target back toward
    the spacecraft; the side is unstable when that direction is the failed
    thruster's, i.e. when the relative-position component along the faulty
    channel's force axis has the failed thruster's force sign.  Offsets with
    magnitude at or below ``deadband`` classify as stable (no meaningful
    braking is needed there).
    """
    channel, force_sign, _ = channel_of_thruster(failed_thruster)
    delta = np.asarray(rho, dtype=float)
    if target is not None:
        delta = delta - np.asarray(target, dtype=float)
    component = float(delta[channel.force_axis])
    if abs(component) <= deadband:
        return SideClassification.STABLE_SIDE
    if np.sign(component) == force_sign:
        return SideClassification.UNSTABLE_SIDE
    return SideClassification.STABLE_SIDE


def interp_distance_table(table: tuple[tuple[float, float], ...],
                          distance: float) -> float:
    """Piecewise-linear weight lookup, clamped at the end knots."""
    ranges = [r for r, _ in table]
    values = [w for _, w in table]
    return float(np.interp(distance, ranges, values))


def schedule_wmf(rho: np.ndarray, fault: FaultConfig | None,
                 side: SideClassification | None = None,
                 target: np.ndarray | None = None) -> float:
    """Allocation weight for the current control period.

    Fully actuated runs use the constant 1.0.  Under a failure the stable
    side interpolates the tuned distance table (default constant 0.93) on the
    range to the target, while the unstable side switches to the high
    attitude-priority weight, suspending position control.
    """
    if fault is None:
        return 1.0
    if side is None:
        side = classify_side(rho, fault.failed_thruster, target,
                             deadband=fault.side_deadband)
    if side is SideClassification.UNSTABLE_SIDE:
        return fault.w_mf_attitude_priority
    delta = np.asarray(rho, dtype=float)
    if target is not None:
        delta = delta - np.asarray(target, dtype=float)
    return interp_distance_table(fault.distance_table,
                                 float(np.linalg.norm(delta)))


@dataclass
class DistanceKnot:
    range_m: float
    w_mf: float
    converged: bool
    overshoot_m: float


def tune_distance_table(run_at, distances=tuple(range(1, 11)),
                        candidates=(0.90, 0.93, 0.95, 1.00, 1.05, 1.10),
                        fallback: float = 0.93) -> list[DistanceKnot]:
    """Per-distance stable-side weight tuning.

    ``run_at(r, w_mf)`` must run the failure scenario started ``r`` meters out
    with the candidate weight and return ``(stable, overshoot_m)``, where
    ``stable`` means no attitude divergence and final convergence.  For each
    knot the stable candidate with the least overshoot wins (ties prefer the
    value closest to ``fallback``).  A knot with no stable candidate is
    flagged and reuses its nearest converged neighbor (or the fallback).
    """
    knots: list[DistanceKnot] = []
    for r in distances:
        best: tuple[float, float] | None = None  # (overshoot, w)
        for w in candidates:
            stable, overshoot = run_at(float(r), float(w))
            if not stable:
                continue
            key = (overshoot, abs(w - fallback))
            if best is None or key < (best[0], abs(best[1] - fallback)):
                best = (overshoot, w)
        if best is None:
            neighbor = next((k.w_mf for k in reversed(knots) if k.converged),
                            fallback)
            knots.append(DistanceKnot(float(r), neighbor, False, float("nan")))
        else:
            knots.append(DistanceKnot(float(r), best[1], True, best[0]))
    return knots
