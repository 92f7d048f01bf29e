"""Rigid-body attitude dynamics, linearized relative orbital motion, frames,
and the thruster force/torque map.

The coupled state integrated by :func:`rk4_step` is

    [rho (RSW), rho_dot (RSW), q (ECI->body, scalar last), omega (body),
     R (target ECI), V (target ECI)]

Body thrust is rotated into RSW through C_B^R = C_I^R(R, V) @ C_B^I(q) at
every Runge-Kutta stage, so attitude/translation coupling is captured inside
a step.  The target orbit advances by two-body gravity in the same step.
"""

from __future__ import annotations

import math

import numpy as np

from .params import OrbitModel, SatelliteParams, SatelliteState, ThrusterConfig


class DegenerateOrbitError(ValueError):
    """Raised when R and V are collinear and the RSW triad is undefined."""


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def quat_rate(q: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Quaternion kinematics q_dot = 0.5 * Omega(omega) * q (scalar last).

    Omega is skew-symmetric, so q . q_dot = 0 up to roundoff and the norm is
    preserved by exact integration.
    """
    w1, w2, w3 = omega
    q1, q2, q3, q4 = q
    return 0.5 * np.array([
        w3 * q2 - w2 * q3 + w1 * q4,
        -w3 * q1 + w1 * q3 + w2 * q4,
        w2 * q1 - w1 * q2 + w3 * q4,
        -w1 * q1 - w2 * q2 - w3 * q3,
    ])


def omega_rate(omega: np.ndarray, M_body: np.ndarray, J: np.ndarray,
               J_inv: np.ndarray | None = None) -> np.ndarray:
    """Euler's rotation equation: omega_dot = J^-1 (-omega x J omega + M)."""
    if J_inv is None:
        J_inv = np.linalg.inv(J)
    return J_inv @ (M_body - np.cross(omega, J @ omega))


def dcm_from_quat(q: np.ndarray) -> np.ndarray:
    """Body-to-inertial direction cosine matrix of a scalar-last unit quaternion.

    C_B^I = (q4^2 - qv.qv) I + 2 qv qv^T + 2 q4 [qv x]; proper orthonormal.
    """
    q1, q2, q3, q4 = q
    s = q4 * q4 - (q1 * q1 + q2 * q2 + q3 * q3)
    return np.array([
        [s + 2 * q1 * q1, 2 * (q1 * q2 - q4 * q3), 2 * (q1 * q3 + q4 * q2)],
        [2 * (q2 * q1 + q4 * q3), s + 2 * q2 * q2, 2 * (q2 * q3 - q4 * q1)],
        [2 * (q3 * q1 - q4 * q2), 2 * (q3 * q2 + q4 * q1), s + 2 * q3 * q3],
    ])


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate([axis * np.sin(angle / 2.0),
                           [np.cos(angle / 2.0)]])


def quat_multiply(qa: np.ndarray, qb: np.ndarray) -> np.ndarray:
    """Hamilton product (scalar last): rotation qb applied first, then qa."""
    av, a4 = qa[:3], qa[3]
    bv, b4 = qb[:3], qb[3]
    vec = a4 * bv + b4 * av + np.cross(av, bv)
    return np.concatenate([vec, [a4 * b4 - av @ bv]])


def quat_from_per_axis_angles(angles_rad: np.ndarray) -> np.ndarray:
    """Initial-attitude convention: rotations about x, y, z applied in that order."""
    qx = quat_from_axis_angle(np.array([1.0, 0, 0]), angles_rad[0])
    qy = quat_from_axis_angle(np.array([0, 1.0, 0]), angles_rad[1])
    qz = quat_from_axis_angle(np.array([0, 0, 1.0]), angles_rad[2])
    return quat_normalize(quat_multiply(qz, quat_multiply(qy, qx)))


def quat_from_dcm(C: np.ndarray) -> np.ndarray:
    """Scalar-last quaternion of a proper orthonormal body-to-inertial matrix."""
    tr = np.trace(C)
    if tr <= -0.999:
        raise ValueError("near-180-degree attitude; use a different extraction")
    q4 = 0.5 * np.sqrt(1.0 + tr)
    qv = np.array([C[2, 1] - C[1, 2], C[0, 2] - C[2, 0],
                   C[1, 0] - C[0, 1]]) / (4.0 * q4)
    return quat_normalize(np.concatenate([qv, [q4]]))


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.concatenate([-q[:3], [q[3]]])


def quat_error(q: np.ndarray, q_ref: np.ndarray) -> np.ndarray:
    """Attitude of the body relative to a reference attitude (both ECI->body
    scalar-last): the rotation that takes the reference to the body."""
    return quat_multiply(np.asarray(q, dtype=float), quat_conjugate(q_ref))


def rsw_from_rv(R: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Inertial-to-RSW rotation with rows [R_hat, S_hat, W_hat]."""
    r = np.linalg.norm(R)
    if r == 0.0:
        raise DegenerateOrbitError("zero target radius")
    r_hat = R / r
    w = np.cross(R, V)
    wn = np.linalg.norm(w)
    if wn <= 1e-12 * r * max(np.linalg.norm(V), 1.0):
        raise DegenerateOrbitError("R and V are collinear")
    w_hat = w / wn
    s_hat = np.cross(w_hat, r_hat)
    return np.vstack([r_hat, s_hat, w_hat])


def relative_accel(rho: np.ndarray, rho_dot: np.ndarray, orbit: OrbitModel,
                   F_rsw: np.ndarray, mass: float) -> np.ndarray:
    """Linearized relative acceleration in RSW plus thrust/mass.

    Standard linearized two-body relative motion about an arbitrary (possibly
    elliptical) target orbit; reduces to the Clohessy-Wiltshire equations on a
    circular orbit.  Validated against nonlinear two-body differencing.
    """
    R = orbit.R
    V = orbit.V
    r2 = R @ R
    r = np.sqrt(r2)
    r3 = r2 * r
    r4 = r2 * r2
    h = orbit.h
    mu = orbit.mu
    vr = V @ R
    dx, dy, dz = rho
    dxd, dyd, dzd = rho_dot
    h2 = h * h
    ax = (2.0 * mu / r3 + h2 / r4) * dx - 2.0 * (vr * h / r4) * dy + 2.0 * (h / r2) * dyd
    ay = (h2 / r4 - mu / r3) * dy + 2.0 * (vr * h / r4) * dx - 2.0 * (h / r2) * dxd
    az = -(mu / r3) * dz
    return np.array([ax, ay, az]) + F_rsw / mass


def body_wrench(u: np.ndarray, cfg: ThrusterConfig) -> tuple[np.ndarray, np.ndarray]:
    """Body force and torque produced by per-thruster forces u >= 0."""
    u = np.asarray(u, dtype=float)
    if u.shape != (12,):
        raise ValueError("u must have 12 entries")
    if np.any(u < 0):
        raise ValueError("thruster forces must be nonnegative")
    if np.any(u[cfg.failure_mask] != 0.0):
        raise ValueError("failed thrusters must be commanded zero")
    return cfg.H_F @ u, cfg.H_M @ u


def controller_angles(q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Per-axis controller input angles theta_i = 2 atan(q_i/q4), i = 1..3.

    Three independent rotations about the body axes, not an Euler sequence;
    they overestimate the axis-angle rotation, which is the intended behavior
    for the angle channels.  For a single-axis rotation this equals
    2 asin(q_i) up to 90 degrees and wraps the physical angle into
    (-180, 180]: unlike the arcsine form it never folds (the apparent rate
    stays equal to the body rate through a flip), and a completed full turn
    reads as zero, consistent with the sine-wrapped channel cost.  The
    wrapped reading stays inside the finely quantized region of the policy
    grids, whose wider solved range is what prices flip-through maneuvers.
    """
    qv = np.asarray(q[:3], dtype=float)
    if np.any(np.abs(qv) > 1.0 + tol):
        raise ValueError("quaternion component exceeds unit bound; normalize first")
    two_atan = 2.0 * np.arctan2(qv, q[3])
    wrapped = np.mod(two_atan + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


# --- flat-state integration -------------------------------------------------
#
# y = [rho(0:3), rho_dot(3:6), q(6:10), omega(10:13), R(13:16), V(16:19)]
# The free-space variant (orbit None) drops the orbital terms: translation is
# then a pure double integrator driven by the inertially-rotated body force.

def _deriv_scalar(y, FBx, FBy, FBz, MBx, MBy, MBz,
                  mass, Jf, Jif, mu, with_orbit):
    """Coupled-state derivative on plain floats (the integrator hot path).

    Four calls per 10 ms substep; the unrolled arithmetic is an order of
    magnitude faster than composing the small-array helpers, which remain
    the public reference implementations and are cross-checked against this
    one in the tests.  ``Jf``/``Jif`` are the row-major inertia entries.
    """
    (dx, dy, dz, vx, vy, vz, q1, q2, q3, q4, w1, w2, w3,
     Rx, Ry, Rz, Vx, Vy, Vz) = y

    # body-to-inertial attitude matrix
    s = q4 * q4 - (q1 * q1 + q2 * q2 + q3 * q3)
    fx = (s + 2 * q1 * q1) * FBx + 2 * (q1 * q2 - q4 * q3) * FBy \
        + 2 * (q1 * q3 + q4 * q2) * FBz
    fy = 2 * (q2 * q1 + q4 * q3) * FBx + (s + 2 * q2 * q2) * FBy \
        + 2 * (q2 * q3 - q4 * q1) * FBz
    fz = 2 * (q3 * q1 - q4 * q2) * FBx + 2 * (q3 * q2 + q4 * q1) * FBy \
        + (s + 2 * q3 * q3) * FBz

    if with_orbit:
        r2 = Rx * Rx + Ry * Ry + Rz * Rz
        r = math.sqrt(r2)
        wx = Ry * Vz - Rz * Vy
        wy = Rz * Vx - Rx * Vz
        wz = Rx * Vy - Ry * Vx
        h = math.sqrt(wx * wx + wy * wy + wz * wz)
        rhx, rhy, rhz = Rx / r, Ry / r, Rz / r
        whx, why, whz = wx / h, wy / h, wz / h
        shx = why * rhz - whz * rhy
        shy = whz * rhx - whx * rhz
        shz = whx * rhy - why * rhx
        frx = rhx * fx + rhy * fy + rhz * fz
        fry = shx * fx + shy * fy + shz * fz
        frz = whx * fx + why * fy + whz * fz
        r3 = r2 * r
        r4 = r2 * r2
        vr = Vx * Rx + Vy * Ry + Vz * Rz
        h2 = h * h
        ax = (2.0 * mu / r3 + h2 / r4) * dx - 2.0 * (vr * h / r4) * dy \
            + 2.0 * (h / r2) * vy + frx / mass
        ay = (h2 / r4 - mu / r3) * dy + 2.0 * (vr * h / r4) * dx \
            - 2.0 * (h / r2) * vx + fry / mass
        az = -(mu / r3) * dz + frz / mass
        g = -mu / r3
        tail = (Vx, Vy, Vz, g * Rx, g * Ry, g * Rz)
    else:
        ax = fx / mass
        ay = fy / mass
        az = fz / mass
        tail = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    jw1 = Jf[0] * w1 + Jf[1] * w2 + Jf[2] * w3
    jw2 = Jf[3] * w1 + Jf[4] * w2 + Jf[5] * w3
    jw3 = Jf[6] * w1 + Jf[7] * w2 + Jf[8] * w3
    t1 = MBx - (w2 * jw3 - w3 * jw2)
    t2 = MBy - (w3 * jw1 - w1 * jw3)
    t3 = MBz - (w1 * jw2 - w2 * jw1)
    return (
        vx, vy, vz, ax, ay, az,
        0.5 * (w3 * q2 - w2 * q3 + w1 * q4),
        0.5 * (-w3 * q1 + w1 * q3 + w2 * q4),
        0.5 * (w2 * q1 - w1 * q2 + w3 * q4),
        0.5 * (-w1 * q1 - w2 * q2 - w3 * q3),
        Jif[0] * t1 + Jif[1] * t2 + Jif[2] * t3,
        Jif[3] * t1 + Jif[4] * t2 + Jif[5] * t3,
        Jif[6] * t1 + Jif[7] * t2 + Jif[8] * t3,
    ) + tail


def _rk4_flat(y: np.ndarray, F_body, M_body,
              mass: float, J: np.ndarray, J_inv: np.ndarray, mu: float,
              with_orbit: bool, dt: float) -> np.ndarray:
    FBx, FBy, FBz = float(F_body[0]), float(F_body[1]), float(F_body[2])
    MBx, MBy, MBz = float(M_body[0]), float(M_body[1]), float(M_body[2])
    Jf = tuple(J.ravel().tolist())
    Jif = tuple(J_inv.ravel().tolist())
    y0 = tuple(y.tolist()) if isinstance(y, np.ndarray) else tuple(y)
    half = 0.5 * dt
    k1 = _deriv_scalar(y0, FBx, FBy, FBz, MBx, MBy, MBz, mass, Jf, Jif, mu,
                       with_orbit)
    y1 = tuple(a + half * b for a, b in zip(y0, k1))
    k2 = _deriv_scalar(y1, FBx, FBy, FBz, MBx, MBy, MBz, mass, Jf, Jif, mu,
                       with_orbit)
    y2 = tuple(a + half * b for a, b in zip(y0, k2))
    k3 = _deriv_scalar(y2, FBx, FBy, FBz, MBx, MBy, MBz, mass, Jf, Jif, mu,
                       with_orbit)
    y3 = tuple(a + dt * b for a, b in zip(y0, k3))
    k4 = _deriv_scalar(y3, FBx, FBy, FBz, MBx, MBy, MBz, mass, Jf, Jif, mu,
                       with_orbit)
    sixth = dt / 6.0
    out = np.array([a + sixth * (b + 2.0 * (c + d) + e)
                    for a, b, c, d, e in zip(y0, k1, k2, k3, k4)])
    out[6:10] /= math.sqrt(out[6] ** 2 + out[7] ** 2 + out[8] ** 2 + out[9] ** 2)
    return out


def pack_state(state: SatelliteState, orbit: OrbitModel | None) -> np.ndarray:
    y = np.zeros(19)
    y[0:3] = state.rho
    y[3:6] = state.rho_dot
    y[6:10] = state.q
    y[10:13] = state.omega
    if orbit is not None:
        y[13:16] = orbit.R
        y[16:19] = orbit.V
    return y


def unpack_state(y: np.ndarray) -> SatelliteState:
    return SatelliteState(rho=y[0:3].copy(), rho_dot=y[3:6].copy(),
                          q=y[6:10].copy(), omega=y[10:13].copy())


def rk4_step(state: SatelliteState, F_body: np.ndarray, M_body: np.ndarray,
             params: SatelliteParams, orbit: OrbitModel | None,
             dt: float) -> tuple[SatelliteState, OrbitModel | None]:
    """One fixed-step RK4 step of the coupled rotational/translational motion.

    The body wrench is constant over the step (thruster forces are piecewise
    constant at the 10 ms pulse resolution).  The quaternion is renormalized
    after the step.  With ``orbit=None`` the translation is integrated in a
    non-rotating frame with no gravity terms (useful for exactness checks).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = pack_state(state, orbit)
    mu = orbit.mu if orbit is not None else 0.0
    y = _rk4_flat(y, np.asarray(F_body, float), np.asarray(M_body, float),
                  params.mass, params.J, params.J_inv, mu, orbit is not None, dt)
    new_state = unpack_state(y)
    new_orbit = None
    if orbit is not None:
        new_orbit = OrbitModel(mu=orbit.mu, R=y[13:16].copy(), V=y[16:19].copy())
    return new_state, new_orbit


def two_body_accel(r_vec: np.ndarray, mu: float) -> np.ndarray:
    r = np.linalg.norm(r_vec)
    return (-mu / (r * r * r)) * r_vec
