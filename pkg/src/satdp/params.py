"""Physical parameters, thruster geometry, and frame/orbit configuration.

Conventions used throughout the package:

* Quaternions are length-4 arrays ``[q1, q2, q3, q4]`` with the scalar part
  last, ``q = [e_hat * sin(theta/2), cos(theta/2)]``, and represent the
  rotation from the Earth-centered inertial (ECI) frame to the body frame.
* The RSW frame is centered on the target: x along the target radius vector,
  z along the orbital angular momentum, y completing the right-handed triad.
* All internal units are SI (m, s, kg, rad); degrees appear only at the
  file-format boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MU_EARTH = 3.986004418e14  # m^3/s^2

# ISS-like target orbit used by the shipped scenarios (a, e, i; other angles 0)
ISS_ELEMENTS = {
    "a_m": 6_793_137.0,
    "e": 0.0004,
    "i_deg": 51.6,
    "raan_deg": 0.0,
    "argp_deg": 0.0,
    "nu_deg": 0.0,
}


@dataclass(frozen=True)
class SatelliteParams:
    """Mass/inertia properties and the fixed single-thruster force level."""

    mass: float = 4.16          # kg
    u_on: float = 0.12          # N, force of one thruster while firing
    d: float = 0.0965           # m, thruster lever arm
    J: np.ndarray = field(default_factory=lambda: 1e-2 * np.array(
        [[2.3, 0.01, -0.03],
         [0.01, 2.42, -0.003],
         [-0.03, -0.003, 2.14]]))

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.d <= 0:
            raise ValueError("lever arm must be positive")
        J = np.asarray(self.J, dtype=float)
        if J.shape != (3, 3) or not np.allclose(J, J.T):
            raise ValueError("inertia matrix must be symmetric 3x3")
        if np.any(np.linalg.eigvalsh(J) <= 0):
            raise ValueError("inertia matrix must be positive definite")
        object.__setattr__(self, "J", J)

    @property
    def u_max(self) -> float:
        """Maximum effective average thrust over the 1 s control period.

        Thrusting is allowed only during the first 200 ms of each period, so
        the average is 0.2 * u_on.
        """
        return 0.2 * self.u_on

    @property
    def J_inv(self) -> np.ndarray:
        return np.linalg.inv(self.J)

    @property
    def J_diag(self) -> np.ndarray:
        """Principal moments used by the per-channel rotation models."""
        return np.diag(self.J).copy()


@dataclass
class OrbitModel:
    """Target orbit state: gravitational parameter and ECI position/velocity.

    R and V are kept consistent with two-body propagation by the integrator
    (they advance inside the same RK4 step as the satellite state).
    """

    mu: float
    R: np.ndarray  # (3,) m, ECI
    V: np.ndarray  # (3,) m/s, ECI

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        if np.linalg.norm(self.R) <= 0:
            raise ValueError("target position must be nonzero")

    @property
    def h(self) -> float:
        """Orbital angular momentum magnitude |R x V| (m^2/s)."""
        return float(np.linalg.norm(np.cross(self.R, self.V)))


def elements_to_rv(a: float, e: float, i_deg: float, raan_deg: float = 0.0,
                   argp_deg: float = 0.0, nu_deg: float = 0.0,
                   mu: float = MU_EARTH) -> tuple[np.ndarray, np.ndarray]:
    """Classical orbital elements to ECI position/velocity vectors."""
    i = np.deg2rad(i_deg)
    raan = np.deg2rad(raan_deg)
    argp = np.deg2rad(argp_deg)
    nu = np.deg2rad(nu_deg)
    p = a * (1.0 - e * e)
    if p <= 0:
        raise ValueError("degenerate orbit: a(1-e^2) must be positive")
    r = p / (1.0 + e * np.cos(nu))
    r_pf = r * np.array([np.cos(nu), np.sin(nu), 0.0])
    v_pf = np.sqrt(mu / p) * np.array([-np.sin(nu), e + np.cos(nu), 0.0])

    co, so = np.cos(raan), np.sin(raan)
    ci, si = np.cos(i), np.sin(i)
    cw, sw = np.cos(argp), np.sin(argp)
    rot = np.array([
        [co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si],
        [so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si],
        [sw * si, cw * si, ci],
    ])
    return rot @ r_pf, rot @ v_pf


def make_orbit(elements: dict | None = None, mu: float | None = None) -> OrbitModel:
    """Build an OrbitModel from an elements dict (defaults to the ISS-like set)."""
    el = dict(ISS_ELEMENTS)
    if elements:
        el.update(elements)
    mu = float(el.pop("mu", MU_EARTH) if mu is None else mu)
    R, V = elements_to_rv(el["a_m"], el["e"], el["i_deg"], el["raan_deg"],
                          el["argp_deg"], el["nu_deg"], mu)
    return OrbitModel(mu=mu, R=R, V=V)


def _thrust_matrices(d: float) -> tuple[np.ndarray, np.ndarray]:
    H_F = np.array([
        [1, 1, 0, 0, 0, 0, -1, -1, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 0, 0, 0, -1, -1, 0, 0],
        [0, 0, 0, 0, 1, 1, 0, 0, 0, 0, -1, -1],
    ], dtype=float)
    H_M = d * np.array([
        [0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 1],
        [1, -1, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0],
        [0, 0, 1, -1, 0, 0, 0, 0, -1, 1, 0, 0],
    ], dtype=float)
    return H_F, H_M


@dataclass
class ThrusterConfig:
    """Thrust distribution matrices and the failure mask.

    Thruster numbering is 1..12 at the user interface and 0..11 in arrays.
    Back-to-back pairs are (j, j+6): equal firing of a pair cancels exactly.
    """

    H_F: np.ndarray
    H_M: np.ndarray
    failure_mask: np.ndarray  # (12,) bool, True = failed

    @classmethod
    def for_satellite(cls, params: SatelliteParams,
                      failed_thruster: int | None = None) -> "ThrusterConfig":
        H_F, H_M = _thrust_matrices(params.d)
        mask = np.zeros(12, dtype=bool)
        if failed_thruster is not None:
            if not 1 <= failed_thruster <= 12:
                raise ValueError("failed thruster index must be in 1..12")
            mask[failed_thruster - 1] = True
        return cls(H_F=H_F, H_M=H_M, failure_mask=mask)

    def __post_init__(self):
        self.H_F = np.asarray(self.H_F, dtype=float)
        self.H_M = np.asarray(self.H_M, dtype=float)
        self.failure_mask = np.asarray(self.failure_mask, dtype=bool)
        if self.H_F.shape != (3, 12) or self.H_M.shape != (3, 12):
            raise ValueError("thrust distribution matrices must be 3x12")
        # each thruster: force along exactly one axis, torque about exactly one
        if np.any(np.count_nonzero(self.H_F, axis=0) != 1):
            raise ValueError("each thruster must force exactly one body axis")
        if np.any(np.count_nonzero(self.H_M, axis=0) != 1):
            raise ValueError("each thruster must torque exactly one body axis")


@dataclass(frozen=True)
class Channel:
    """One 2-DOF subsystem: four thrusters giving force along one body axis
    and torque about another.

    ``pair_a``/``pair_b`` hold 0-based (positive-firing, negative-firing)
    thruster indices.  With pair forces fA, fB (signed averages over a control
    period), the channel wrench is F = fA + fB and M = d * (fA - fB).
    """

    name: str
    force_axis: int
    torque_axis: int
    pair_a: tuple[int, int]
    pair_b: tuple[int, int]

    @property
    def thrusters(self) -> tuple[int, int, int, int]:
        """0-based thruster indices in H_c column order (A+, B+, A-, B-)."""
        return (self.pair_a[0], self.pair_b[0], self.pair_a[1], self.pair_b[1])

    def h_c(self, d: float) -> np.ndarray:
        return np.array([[1.0, 1.0, -1.0, -1.0], [d, -d, -d, d]])


CHANNELS: tuple[Channel, ...] = (
    Channel("x", force_axis=0, torque_axis=1, pair_a=(0, 6), pair_b=(1, 7)),
    Channel("y", force_axis=1, torque_axis=2, pair_a=(2, 8), pair_b=(3, 9)),
    Channel("z", force_axis=2, torque_axis=0, pair_a=(4, 10), pair_b=(5, 11)),
)


def channel_of_thruster(thruster: int) -> tuple[Channel, int, int]:
    """Locate a 1-based thruster index: (channel, force sign, torque sign).

    The signs are the direction of force/torque the thruster produces along
    the channel's force/torque axes.
    """
    if not 1 <= thruster <= 12:
        raise ValueError("thruster index must be in 1..12")
    j = thruster - 1
    H_F, H_M = _thrust_matrices(1.0)
    for ch in CHANNELS:
        if j in ch.thrusters:
            return ch, int(H_F[ch.force_axis, j]), int(H_M[ch.torque_axis, j])
    raise AssertionError("unreachable: every thruster belongs to a channel")


@dataclass
class SatelliteState:
    """Simulator state: relative position/velocity (RSW), attitude, body rates."""

    rho: np.ndarray       # (3,) m, RSW
    rho_dot: np.ndarray   # (3,) m/s, RSW
    q: np.ndarray         # (4,) scalar-last unit quaternion, ECI -> body
    omega: np.ndarray     # (3,) rad/s, body frame

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.rho_dot = np.asarray(self.rho_dot, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)
        for name in ("rho", "rho_dot", "q", "omega"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite component in {name}")
        if abs(np.linalg.norm(self.q) - 1.0) > 1e-9:
            raise ValueError("quaternion must be unit norm within 1e-9")

    @classmethod
    def zero(cls) -> "SatelliteState":
        return cls(np.zeros(3), np.zeros(3), np.array([0.0, 0.0, 0.0, 1.0]),
                   np.zeros(3))
