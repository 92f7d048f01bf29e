import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satdp import (DegenerateOrbitError, OrbitModel, SatelliteParams,
                   SatelliteState, ThrusterConfig, body_wrench,
                   controller_angles, dcm_from_quat, elements_to_rv,
                   make_orbit, omega_rate, quat_rate, relative_accel,
                   rk4_step, rsw_from_rv)
from satdp.dynamics import quat_from_axis_angle, quat_normalize

PARAMS = SatelliteParams()


def unit_quats():
    return st.lists(st.floats(-1, 1), min_size=4, max_size=4).map(np.array) \
        .filter(lambda q: np.linalg.norm(q) > 1e-3) \
        .map(lambda q: q / np.linalg.norm(q))


def vectors3(lo=-5.0, hi=5.0):
    return st.lists(st.floats(lo, hi), min_size=3, max_size=3).map(np.array)


# --- quaternion kinematics ---------------------------------------------------

def test_quat_rate_zero_omega():
    q = np.array([0.0, 0.0, 0.0, 1.0])
    assert np.allclose(quat_rate(q, np.zeros(3)), 0.0)


def test_quat_rate_unit_x_spin():
    # hand-multiplied kinematics matrix at identity attitude
    q = np.array([0.0, 0.0, 0.0, 1.0])
    qd = quat_rate(q, np.array([1.0, 0.0, 0.0]))
    assert np.allclose(qd, [0.5, 0.0, 0.0, 0.0])


@given(unit_quats(), vectors3())
def test_quat_rate_orthogonal(q, omega):
    # skew-symmetric kinematics: the rate never changes the norm
    assert abs(q @ quat_rate(q, omega)) < 1e-12


# --- Euler's equation ---------------------------------------------------------

def test_omega_rate_zero():
    assert np.allclose(omega_rate(np.zeros(3), np.zeros(3), PARAMS.J), 0.0)


def test_omega_rate_principal_axis():
    J = np.diag([0.023, 0.0242, 0.0214])
    wd = omega_rate(np.array([0.7, 0.0, 0.0]), np.zeros(3), J)
    assert np.allclose(wd, 0.0)


def test_omega_rate_torque_about_x():
    J = np.diag([0.023, 0.0242, 0.0214])
    wd = omega_rate(np.zeros(3), np.array([0.004632, 0.0, 0.0]), J)
    assert np.allclose(wd, [0.004632 / 0.023, 0.0, 0.0])
    assert wd[0] == pytest.approx(0.20139, rel=1e-4)


# --- attitude matrices --------------------------------------------------------

def test_dcm_identity():
    assert np.allclose(dcm_from_quat(np.array([0, 0, 0, 1.0])), np.eye(3))


def test_dcm_90deg_about_z():
    q = quat_from_axis_angle(np.array([0, 0, 1.0]), np.pi / 2)
    expected = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1.0]])
    assert np.allclose(dcm_from_quat(q), expected, atol=1e-15)


@given(unit_quats())
def test_dcm_proper_orthonormal(q):
    C = dcm_from_quat(q)
    assert np.max(np.abs(C.T @ C - np.eye(3))) < 1e-12
    assert abs(np.linalg.det(C) - 1.0) < 1e-12


@given(unit_quats(), vectors3(-0.5, 0.5))
def test_dcm_consistent_with_kinematics(q, omega):
    # d/dt(C_B^I) from the quaternion rate matches C [w x] (body rate)
    dt = 1e-6
    qn = quat_normalize(q + quat_rate(q, omega) * dt)
    numeric = (dcm_from_quat(qn) - dcm_from_quat(q)) / dt
    wx = np.array([[0, -omega[2], omega[1]],
                   [omega[2], 0, -omega[0]],
                   [-omega[1], omega[0], 0]])
    assert np.max(np.abs(numeric - dcm_from_quat(q) @ wx)) < 1e-4


# --- RSW frame ----------------------------------------------------------------

def test_rsw_aligned():
    C = rsw_from_rv(np.array([7e6, 0, 0]), np.array([0, 7.5e3, 0.0]))
    assert np.allclose(C, np.eye(3))


@given(vectors3(-1, 1), vectors3(-1, 1))
def test_rsw_orthonormal_and_triad(Ru, Vu):
    R = Ru * 7e6
    V = Vu * 7e3
    if np.linalg.norm(R) < 1e5 or np.linalg.norm(np.cross(R, V)) < 1e8:
        return
    C = rsw_from_rv(R, V)
    assert np.max(np.abs(C @ C.T - np.eye(3))) < 1e-12
    r_hat, s_hat, w_hat = C
    assert np.allclose(s_hat, np.cross(w_hat, r_hat))


def test_rsw_collinear_rejected():
    with pytest.raises(DegenerateOrbitError):
        rsw_from_rv(np.array([7e6, 0, 0]), np.array([1.0, 0, 0]))


# --- thruster wrench ----------------------------------------------------------

def test_body_wrench_zero():
    cfg = ThrusterConfig.for_satellite(PARAMS)
    F, M = body_wrench(np.zeros(12), cfg)
    assert np.allclose(F, 0) and np.allclose(M, 0)


def test_body_wrench_pair_one_two():
    cfg = ThrusterConfig.for_satellite(PARAMS)
    u = np.zeros(12)
    u[0] = u[1] = 0.12
    F, M = body_wrench(u, cfg)
    assert np.allclose(F, [0.24, 0, 0])
    assert np.allclose(M, 0)  # +d and -d torques about y cancel


def test_body_wrench_thruster_five():
    cfg = ThrusterConfig.for_satellite(PARAMS)
    u = np.zeros(12)
    u[4] = 0.12
    F, M = body_wrench(u, cfg)
    assert np.allclose(F, [0, 0, 0.12])
    assert np.allclose(M, [0.0965 * 0.12, 0, 0])
    assert M[0] == pytest.approx(0.01158)


def test_body_wrench_rejects_negative_and_failed():
    cfg = ThrusterConfig.for_satellite(PARAMS, failed_thruster=5)
    with pytest.raises(ValueError):
        body_wrench(-np.ones(12), ThrusterConfig.for_satellite(PARAMS))
    u = np.zeros(12)
    u[4] = 0.1
    with pytest.raises(ValueError):
        body_wrench(u, cfg)


@given(st.lists(st.floats(0, 0.12), min_size=12, max_size=12).map(np.array),
       st.lists(st.floats(0, 0.12), min_size=12, max_size=12).map(np.array),
       st.floats(0, 3), st.floats(0, 3))
def test_body_wrench_linear(u1, u2, a, b):
    cfg = ThrusterConfig.for_satellite(PARAMS)
    F1, M1 = body_wrench(u1, cfg)
    F2, M2 = body_wrench(u2, cfg)
    F, M = body_wrench(a * u1 + b * u2, cfg)
    assert np.allclose(F, a * F1 + b * F2, atol=1e-12)
    assert np.allclose(M, a * M1 + b * M2, atol=1e-12)


@pytest.mark.parametrize("j", range(6))
def test_body_wrench_back_to_back_cancel(j):
    cfg = ThrusterConfig.for_satellite(PARAMS)
    u = np.zeros(12)
    u[j] = u[j + 6] = 0.12
    F, M = body_wrench(u, cfg)
    assert np.allclose(F, 0, atol=1e-15) and np.allclose(M, 0, atol=1e-15)


# --- controller angles ---------------------------------------------------------

def test_controller_angles_identity():
    assert np.allclose(controller_angles(np.array([0, 0, 0, 1.0])), 0.0)


def test_controller_angles_thirty_degrees():
    s = np.sin(np.deg2rad(15.0))
    q = quat_normalize(np.array([s, 0, 0, np.cos(np.deg2rad(15.0))]))
    theta = controller_angles(q)
    assert theta[0] == pytest.approx(np.deg2rad(30.0))


def test_controller_angles_boundary_and_error():
    assert controller_angles(np.array([1.0, 0, 0, 0]))[0] == pytest.approx(np.pi)
    with pytest.raises(ValueError):
        controller_angles(np.array([1.0 + 1e-6, 0, 0, 0]))


# --- relative dynamics ---------------------------------------------------------

def iss_orbit() -> OrbitModel:
    return make_orbit()


def test_relative_accel_origin_equilibrium():
    acc = relative_accel(np.zeros(3), np.zeros(3), iss_orbit(), np.zeros(3), 4.16)
    assert np.allclose(acc, 0.0)


def test_relative_accel_z_row():
    orbit = iss_orbit()
    dz = 7.0
    acc = relative_accel(np.array([0, 0, dz]), np.zeros(3), orbit,
                         np.zeros(3), 4.16)
    r = np.linalg.norm(orbit.R)
    assert acc[2] == pytest.approx(-orbit.mu / r**3 * dz, rel=1e-12)
    assert acc[0] == acc[1] == 0.0


def _rsw_to_eci_state(orbit, rho, rho_dot):
    C_ir = rsw_from_rv(orbit.R, orbit.V)
    r = np.linalg.norm(orbit.R)
    w_hat = C_ir[2]
    omega_frame = (orbit.h / r**2) * w_hat
    r_c = orbit.R + C_ir.T @ rho
    v_c = orbit.V + C_ir.T @ rho_dot + np.cross(omega_frame, C_ir.T @ rho)
    return r_c, v_c


def _two_body_rk4(r, v, mu, dt, steps):
    def deriv(y):
        rr = y[:3]
        rn = np.linalg.norm(rr)
        return np.concatenate([y[3:], -mu * rr / rn**3])
    y = np.concatenate([r, v])
    out = [y.copy()]
    for _ in range(steps):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * dt * k1)
        k3 = deriv(y + 0.5 * dt * k2)
        k4 = deriv(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    return np.array(out)


def test_relative_accel_matches_two_body_differencing():
    # oracle: second difference of the true relative position in RSW
    orbit = iss_orbit()
    rho = np.array([10.0, 0.0, 0.0])
    rho_dot = np.zeros(3)
    r_c, v_c = _rsw_to_eci_state(orbit, rho, rho_dot)
    dt = 0.5
    chaser = _two_body_rk4(r_c, v_c, orbit.mu, dt, 2)
    target = _two_body_rk4(orbit.R, orbit.V, orbit.mu, dt, 2)
    rho_t = []
    for k in range(3):
        C = rsw_from_rv(target[k, :3], target[k, 3:])
        rho_t.append(C @ (chaser[k, :3] - target[k, :3]))
    rho_t = np.array(rho_t)
    acc_oracle = (rho_t[2] - 2 * rho_t[1] + rho_t[0]) / dt**2
    acc = relative_accel(rho, rho_dot, orbit, np.zeros(3), 4.16)
    assert np.max(np.abs(acc - acc_oracle)) < 1e-6


@pytest.mark.parametrize("rho0", [(10.0, 0, 0), (0, 10.0, 0), (-6.0, 8.0, 9.0)])
def test_linearization_fidelity_100s(rho0):
    # linear propagation vs nonlinear two-body differencing, 1% over 100 s
    orbit = iss_orbit()
    rho0 = np.array(rho0, dtype=float)
    r_c, v_c = _rsw_to_eci_state(orbit, rho0, np.zeros(3))
    dt = 0.1
    steps = 1000
    chaser = _two_body_rk4(r_c, v_c, orbit.mu, dt, steps)
    target = _two_body_rk4(orbit.R, orbit.V, orbit.mu, dt, steps)

    state = SatelliteState(rho=rho0, rho_dot=np.zeros(3),
                           q=np.array([0, 0, 0, 1.0]), omega=np.zeros(3))
    orb = orbit
    max_rel = 0.0
    for k in range(1, steps + 1):
        state, orb = rk4_step(state, np.zeros(3), np.zeros(3), PARAMS, orb, dt)
        C = rsw_from_rv(target[k, :3], target[k, 3:])
        truth = C @ (chaser[k, :3] - target[k, :3])
        max_rel = max(max_rel,
                      np.linalg.norm(state.rho - truth) / np.linalg.norm(truth))
    assert max_rel < 0.01


# --- integrator ----------------------------------------------------------------

def test_rk4_zero_state_stays_zero():
    state = SatelliteState.zero()
    new, _ = rk4_step(state, np.zeros(3), np.zeros(3), PARAMS, None, 0.01)
    assert np.allclose(new.rho, 0) and np.allclose(new.rho_dot, 0)
    assert np.allclose(new.q, [0, 0, 0, 1]) and np.allclose(new.omega, 0)
    new, _ = rk4_step(state, np.zeros(3), np.zeros(3), PARAMS, iss_orbit(), 0.01)
    assert np.allclose(new.rho, 0, atol=1e-15)
    assert np.allclose(new.rho_dot, 0, atol=1e-15)


def test_rk4_double_integrator_exact():
    # free space, identity attitude: closed form 0.5*a*t^2 to machine precision
    state = SatelliteState.zero()
    F = np.array([0.24, 0.0, 0.0])
    dt = 0.7
    new, _ = rk4_step(state, F, np.zeros(3), PARAMS, None, dt)
    a = 0.24 / PARAMS.mass
    assert new.rho[0] == pytest.approx(0.5 * a * dt**2, abs=1e-12)
    assert new.rho_dot[0] == pytest.approx(a * dt, abs=1e-12)


def test_rk4_orbit_advances_two_body():
    orbit = iss_orbit()
    state = SatelliteState.zero()
    _, orb = rk4_step(state, np.zeros(3), np.zeros(3), PARAMS, orbit, 1.0)
    truth = _two_body_rk4(orbit.R, orbit.V, orbit.mu, 1.0, 1)[-1]
    assert np.allclose(orb.R, truth[:3], rtol=0, atol=1e-6)
    assert np.allclose(orb.V, truth[3:], rtol=0, atol=1e-9)


@settings(deadline=None)
@given(st.integers(0, 1000))
def test_elements_to_rv_invariants(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(6.6e6, 4.2e7)
    e = rng.uniform(0, 0.3)
    i = rng.uniform(0, 180)
    raan, argp, nu = rng.uniform(0, 360, 3)
    mu = 3.986004418e14
    R, V = elements_to_rv(a, e, i, raan, argp, nu, mu)
    p = a * (1 - e**2)
    r_expected = p / (1 + e * np.cos(np.deg2rad(nu)))
    assert np.linalg.norm(R) == pytest.approx(r_expected, rel=1e-12)
    h = np.linalg.norm(np.cross(R, V))
    assert h == pytest.approx(np.sqrt(mu * p), rel=1e-12)
    energy = 0.5 * V @ V - mu / np.linalg.norm(R)
    assert energy == pytest.approx(-mu / (2 * a), rel=1e-10)


def test_scalar_derivative_matches_reference_composition():
    # the unrolled hot-path derivative must agree with the public helpers
    from satdp.dynamics import _deriv_scalar, pack_state
    from satdp.dynamics import quat_rate as qr, omega_rate as orate
    rng = np.random.default_rng(9)
    orbit = iss_orbit()
    for _ in range(20):
        state = SatelliteState(
            rho=rng.uniform(-15, 15, 3), rho_dot=rng.uniform(-1, 1, 3),
            q=quat_normalize(rng.uniform(-1, 1, 4)),
            omega=rng.uniform(-2, 2, 3))
        F_B = rng.uniform(-0.3, 0.3, 3)
        M_B = rng.uniform(-0.01, 0.01, 3)
        y = pack_state(state, orbit)
        got = np.array(_deriv_scalar(
            tuple(y.tolist()), *F_B.tolist(), *M_B.tolist(), PARAMS.mass,
            tuple(PARAMS.J.ravel().tolist()),
            tuple(PARAMS.J_inv.ravel().tolist()), orbit.mu, True))
        C_bi = dcm_from_quat(state.q)
        C_ir = rsw_from_rv(orbit.R, orbit.V)
        F_rsw = C_ir @ (C_bi @ F_B)
        expect = np.concatenate([
            state.rho_dot,
            relative_accel(state.rho, state.rho_dot, orbit, F_rsw, PARAMS.mass),
            qr(state.q, state.omega),
            orate(state.omega, M_B, PARAMS.J),
            orbit.V,
            -orbit.mu * orbit.R / np.linalg.norm(orbit.R) ** 3,
        ])
        assert np.allclose(got, expect, rtol=1e-12, atol=1e-15)


def test_quaternion_norm_drift_many_steps():
    # renormalized every step: no secular drift over 1e5 steps
    from satdp.dynamics import _rk4_flat, pack_state
    state = SatelliteState(rho=np.zeros(3), rho_dot=np.zeros(3),
                           q=quat_normalize(np.array([0.1, -0.2, 0.3, 0.9])),
                           omega=np.array([0.3, -0.5, 0.7]))
    y = pack_state(state, None)
    worst = 0.0
    for _ in range(100_000):
        y = _rk4_flat(y, np.zeros(3), np.zeros(3), PARAMS.mass, PARAMS.J,
                      PARAMS.J_inv, 0.0, False, 0.01)
        worst = max(worst, abs(np.linalg.norm(y[6:10]) - 1.0))
    assert worst < 1e-9
