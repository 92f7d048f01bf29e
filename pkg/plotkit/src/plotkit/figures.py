"""Renderers for the six figure kinds.

Layouts are fixed (size, dpi, fonts from matplotlib defaults) so identical
inputs render pixel-identical files under a pinned matplotlib.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .readers import TrajectoryData, read_sweep, read_trajectory

AXES = "xyz"
GLYPH_SPACING_S = 10.0


def _save(fig, out_path: str | Path) -> None:
    out_path = Path(out_path)
    metadata = {}
    if out_path.suffix == ".svg":
        metadata["Date"] = None  # strip the embedded timestamp
    fig.savefig(out_path, dpi=120, metadata=metadata)
    plt.close(fig)


def render_states(traj: TrajectoryData, out_path) -> None:
    """Four-panel state history: positions, velocities, angles, rates."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    panels = [
        (traj.rho, "relative position (m)"),
        (traj.rho_dot, "relative velocity (m/s)"),
        (traj.theta_deg, "angle (deg)"),
        (traj.omega, "body rate (rad/s)"),
    ]
    for ax, (data, label) in zip(axes.ravel(), panels):
        for i in range(3):
            ax.plot(traj.t, data[:, i], lw=0.8, label=AXES[i])
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    for ax in axes[1]:
        ax.set_xlabel("time (s)")
    if len(traj):
        axes[0, 0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def render_wrench(traj: TrajectoryData, out_path) -> None:
    """Thruster-generated body force and torque components."""
    fig, (ax_f, ax_m) = plt.subplots(2, 1, figsize=(9, 5), sharex=True)
    for i in range(3):
        ax_f.plot(traj.t, traj.F_body[:, i], lw=0.6, label=AXES[i])
        ax_m.plot(traj.t, traj.M_body[:, i], lw=0.6, label=AXES[i])
    ax_f.set_ylabel("body force (N)")
    ax_m.set_ylabel("body torque (N m)")
    ax_m.set_xlabel("time (s)")
    for ax in (ax_f, ax_m):
        ax.grid(alpha=0.3)
    if len(traj):
        ax_f.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)


def render_thrusters(traj: TrajectoryData, out_path) -> None:
    """Firing timeline: one row per thruster, marks while on."""
    fig, ax = plt.subplots(figsize=(9, 5))
    for j in range(12):
        on = traj.thrusters[:, j] > 0
        if on.any():
            ax.plot(traj.t[on], np.full(on.sum(), j + 1), "|",
                    markersize=4, color="C0")
    ax.set_yticks(range(1, 13))
    ax.set_ylim(0.5, 12.5)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("thruster")
    ax.grid(alpha=0.3, axis="x")
    fig.tight_layout()
    _save(fig, out_path)


def render_wmf(traj: TrajectoryData, out_path) -> None:
    """Allocation weight trace over the maneuver."""
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.step(traj.t, traj.wmf, where="post", lw=1.0)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("W_mf")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, out_path)


_PLANES = {"xy": (0, 1, 2), "xz": (0, 2, 1), "zy": (2, 1, 0), "yz": (1, 2, 0)}


def render_plane_view(traj: TrajectoryData, out_path, plane: str = "xz",
                      glyph_size: float = 0.5) -> None:
    """Trajectory in a coordinate plane with orientation glyphs.

    Every 10 s a small square marks the satellite, rotated by the angle
    about the plane normal; its front side is drawn thicker to show which
    way the satellite faces.
    """
    if plane not in _PLANES:
        raise ValueError(f"unknown plane {plane!r}; use one of {sorted(_PLANES)}")
    ia, ib, inormal = _PLANES[plane]
    fig, ax = plt.subplots(figsize=(6, 6))
    if len(traj):
        ax.plot(traj.rho[:, ia], traj.rho[:, ib], lw=0.9, color="C0")
        step = max(1, int(round(GLYPH_SPACING_S / max(traj.t[0], 1e-9))))
        dt = traj.t[1] - traj.t[0] if len(traj) > 1 else 1.0
        step = max(1, int(round(GLYPH_SPACING_S / dt)))
        half = glyph_size / 2.0
        corners = np.array([[-half, -half], [half, -half], [half, half],
                            [-half, half], [-half, -half]])
        for i in range(0, len(traj), step):
            ang = np.deg2rad(traj.theta_deg[i, inormal])
            rot = np.array([[np.cos(ang), -np.sin(ang)],
                            [np.sin(ang), np.cos(ang)]])
            pts = corners @ rot.T + traj.rho[i, [ia, ib]]
            ax.plot(pts[:, 0], pts[:, 1], lw=0.5, color="0.5")
            # front side of the satellite drawn thicker
            ax.plot(pts[1:3, 0], pts[1:3, 1], lw=1.8, color="C3")
        ax.plot([0], [0], "k+", markersize=10)
    ax.set_xlabel(f"{plane[0]} (m)")
    ax.set_ylabel(f"{plane[1]} (m)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, out_path)


def render_sweep(rows: list[dict], out_path) -> None:
    """Settling times and impulse ratio versus initial distance."""
    ok = [r for r in rows if not r.get("error")]
    r_m = [r["r_m"] for r in ok]
    fig, (ax_s, ax_r) = plt.subplots(1, 2, figsize=(10, 4))
    ax_s.plot(r_m, [r["dp_settling_s"] for r in ok], "o-", label="policy")
    ax_s.plot(r_m, [r["baseline_settling_s"] for r in ok], "s--",
              label="baseline (surrogate)")
    ax_s.set_xlabel("initial distance r (m)")
    ax_s.set_ylabel("max settling time (s)")
    ax_s.legend(fontsize=8)
    ax_s.grid(alpha=0.3)
    ax_r.plot(r_m, [r["impulse_ratio"] for r in ok], "o-", color="C2")
    ax_r.axhline(1.0, color="0.6", lw=0.8)
    ax_r.set_xlabel("initial distance r (m)")
    ax_r.set_ylabel("impulse ratio (baseline / policy)")
    ax_r.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, out_path)


FIGURE_KINDS = ("states", "wrench", "thrusters", "wmf", "plane-view", "sweep")


def render(kind: str, in_path, out_path, plane: str = "xz") -> None:
    """Render one figure kind from its input file."""
    if kind == "sweep":
        render_sweep(read_sweep(in_path), out_path)
        return
    traj = read_trajectory(in_path)
    if kind == "states":
        render_states(traj, out_path)
    elif kind == "wrench":
        render_wrench(traj, out_path)
    elif kind == "thrusters":
        render_thrusters(traj, out_path)
    elif kind == "wmf":
        render_wmf(traj, out_path)
    elif kind == "plane-view":
        render_plane_view(traj, out_path, plane=plane)
    else:
        raise ValueError(f"unknown figure kind {kind!r}; "
                         f"use one of {FIGURE_KINDS}")
