"""Grid dynamic programming for the decoupled 2-DOF channel models.

Each channel is a double integrator (position/velocity or angle/rate) driven
by a bounded generalized force or torque.  The solver quantizes the two
states and the action, precomputes successor states and stage costs once
(the models are time invariant), and then iterates the backward functional
equation with the previous optimal value evaluated at the successors by
bilinear interpolation.

Numerical contract (kept bit-for-bit reproducible, and mirrored by the test
oracles):

* successors: ``s1' = s1 + s2*dt + 0.5*(u/inertia)*dt*dt``,
  ``s2' = s2 + (u/inertia)*dt`` (RK4 on these linear models equals the
  closed form, so the closed form is used directly);
* stage cost: ``(Q11*(e1*e1) + (2*Q12)*(e1*s2)) + Q22*(s2*s2) + R*(u*u)``
  with ``e1 = s1`` for translation and ``e1 = sin(s1 - theta_ref)`` for
  rotation channels;
* interpolation: successors are clamped into the grid box, cell weights are
  ``w0 = (g[i+1]-x)/h`` and ``w1 = (x-g[i])/h`` computed independently, and
  the value is ``(wx0*(wy0*A + wy1*B) + wx1*(wy0*C + wy1*D)) + J_stage``;
* minimization: actions are scanned in the order (|u| ascending, then index
  ascending) keeping the first strict minimum, which prefers the fuel-free
  action on exact ties.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np


class DPNumericalError(RuntimeError):
    """NaN appeared in the optimal value array during iteration."""


def build_grid(half_range: float, n: int, spacing: str = "log",
               inner_fraction: float = 1e-4) -> np.ndarray:
    """Symmetric quantization array with 0 at the center.

    ``log`` spacing mirrors a geometric half-array running from
    ``half_range*inner_fraction`` to ``half_range``, which concentrates
    resolution near the origin where the policies need it.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3 so that 0 is a grid point")
    if half_range <= 0:
        raise ValueError("range must be positive")
    half = (n - 1) // 2
    if spacing == "log":
        pos = np.geomspace(half_range * inner_fraction, half_range, half)
        pos[-1] = half_range
    elif spacing == "linear":
        pos = half_range * np.arange(1, half + 1) / half
        pos[-1] = half_range
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    grid = np.concatenate([-pos[::-1], [0.0], pos])
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid is not strictly increasing")
    return grid


def build_action_grid(u_lo: float, u_hi: float, p: int) -> np.ndarray:
    """Linear action array containing 0; supports asymmetric bounds.

    Each side is spaced uniformly from the origin to its own extreme, so a
    thruster failure that halves one direction keeps the action count and the
    zero action.
    """
    if p < 3 or p % 2 == 0:
        raise ValueError("p must be odd and >= 3 so that 0 is an action")
    if not (u_lo < 0.0 < u_hi):
        raise ValueError("action bounds must straddle 0")
    half = (p - 1) // 2
    pos = u_hi * np.arange(1, half + 1) / half
    neg = u_lo * np.arange(half, 0, -1) / half
    pos[-1] = u_hi
    neg[0] = u_lo
    grid = np.concatenate([neg, [0.0], pos])
    if np.any(np.diff(grid) <= 0):
        raise ValueError("action grid is not strictly increasing")
    return grid


@dataclass(frozen=True)
class DPGrid:
    s1: np.ndarray
    s2: np.ndarray
    u: np.ndarray
    spacing: str = "log"


@dataclass
class DPProblem:
    """One channel's dynamic-programming setup.

    ``kind`` selects the state model: 'translation' (position/velocity,
    inertia = mass) or 'rotation' (angle/rate, inertia = principal moment).
    Rotation channels normally use the sine-wrapped error so the cost is zero
    at whole turns and a flip can beat a reverse rotation.
    """

    kind: str
    inertia: float
    s1_range: float
    s2_range: float
    u_lo: float
    u_hi: float
    n1: int
    n2: int
    p: int
    Q: np.ndarray
    R: float
    N: int
    H_term: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    dt: float = 1.0
    error_kind: str = "plain"
    theta_ref: float = 0.0
    spacing: str = "log"
    dtype: str = "float64"

    def __post_init__(self):
        if self.kind not in ("translation", "rotation"):
            raise ValueError(f"unknown dynamics kind {self.kind!r}")
        if self.error_kind not in ("plain", "sine"):
            raise ValueError(f"unknown error kind {self.error_kind!r}")
        if self.inertia <= 0:
            raise ValueError("inertia must be positive")
        if self.dt <= 0 or self.N < 1:
            raise ValueError("need dt > 0 and N >= 1")
        self.Q = np.asarray(self.Q, dtype=float)
        self.H_term = np.asarray(self.H_term, dtype=float)
        for name, M in (("Q", self.Q), ("H_term", self.H_term)):
            if M.shape != (2, 2) or not np.allclose(M, M.T):
                raise ValueError(f"{name} must be symmetric 2x2")
            if np.any(np.linalg.eigvalsh(M) < -1e-12):
                raise ValueError(f"{name} must be positive semidefinite")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if np.dtype(self.dtype) not in (np.dtype(np.float32), np.dtype(np.float64)):
            raise ValueError("dtype must be float32 or float64")

    def grids(self) -> DPGrid:
        return DPGrid(
            s1=build_grid(self.s1_range, self.n1, self.spacing),
            s2=build_grid(self.s2_range, self.n2, self.spacing),
            u=build_action_grid(self.u_lo, self.u_hi, self.p),
            spacing=self.spacing,
        )


def successor_states(problem: DPProblem, s1, s2, u):
    """Closed-form states after one control period (scalar or array inputs)."""
    a = u / problem.inertia
    dt = problem.dt
    s1p = s1 + s2 * dt + 0.5 * a * dt * dt
    s2p = s2 + a * dt
    return s1p, s2p


def stage_cost_values(problem: DPProblem, s1, s2, u):
    """One-stage cost (scalar or array inputs), with the rotation sine wrap.

    The rotation error is sin((theta - theta_ref)/2): zero exactly at whole
    turns, so completing a flip is as good as returning, but a half turn
    still costs.  (The plain sine would also vanish at odd half turns and
    lets the solver park the attitude upside down.)
    """
    if problem.error_kind == "sine":
        e1 = np.sin((s1 - problem.theta_ref) / 2.0)
    else:
        e1 = s1
    Q11 = problem.Q[0, 0]
    Q12 = problem.Q[0, 1]
    Q22 = problem.Q[1, 1]
    return (Q11 * (e1 * e1) + (2.0 * Q12) * (e1 * s2)) \
        + Q22 * (s2 * s2) + problem.R * (u * u)


@dataclass(frozen=True)
class SuccessorTable:
    S1p: np.ndarray  # (n1, n2, p)
    S2p: np.ndarray


def precompute_successors(problem: DPProblem, grid: DPGrid) -> SuccessorTable:
    S1 = grid.s1[:, None, None]
    S2 = grid.s2[None, :, None]
    U = grid.u[None, None, :]
    S1p, S2p = successor_states(problem, S1, S2, U)
    S2p = np.broadcast_to(S2p, S1p.shape).copy()
    return SuccessorTable(S1p=S1p, S2p=S2p)


def stage_cost(problem: DPProblem, grid: DPGrid) -> np.ndarray:
    S1 = grid.s1[:, None, None]
    S2 = grid.s2[None, :, None]
    U = grid.u[None, None, :]
    return np.ascontiguousarray(
        np.broadcast_to(stage_cost_values(problem, S1, S2, U),
                        (problem.n1, problem.n2, problem.p)))


def terminal_cost(problem: DPProblem, grid: DPGrid) -> np.ndarray:
    s1 = grid.s1[:, None]
    s2 = grid.s2[None, :]
    H = problem.H_term
    return (H[0, 0] * (s1 * s1) + (2.0 * H[0, 1]) * (s1 * s2)) \
        + H[1, 1] * (s2 * s2)


def _cell_weights(g: np.ndarray, x: np.ndarray):
    """Clamped cell index and the two independent interpolation weights."""
    xc = np.clip(x, g[0], g[-1])
    i0 = np.searchsorted(g, xc, side="right") - 1
    np.clip(i0, 0, len(g) - 2, out=i0)
    h = g[i0 + 1] - g[i0]
    w0 = (g[i0 + 1] - xc) / h
    w1 = (xc - g[i0]) / h
    return i0, w0, w1


@dataclass
class PolicyTable:
    """Solved optimal policy for one channel: value and argmin action grids."""

    grid: DPGrid
    J_star: np.ndarray   # (n1, n2) optimal value
    I_star: np.ndarray   # (n1, n2) int32 indices into grid.u
    problem: DPProblem
    iterations_run: int

    @property
    def U_star(self) -> np.ndarray:
        return self.grid.u[self.I_star]


def value_iterate(problem: DPProblem, grid: DPGrid | None = None) -> PolicyTable:
    """Backward value iteration with precomputed successors and stage costs.

    Runs ``problem.N`` updates from the terminal cost, stopping early only if
    the value array reaches a bit-exact fixed point (further updates are then
    provably identical).  Raises :class:`DPNumericalError` if the value array
    turns NaN.
    """
    if grid is None:
        grid = problem.grids()
    dtype = np.dtype(problem.dtype)
    n1, n2, p = problem.n1, problem.n2, problem.p

    succ = precompute_successors(problem, grid)
    # visit actions in tie-break order: |u| ascending, then index ascending
    order = np.lexsort((np.arange(p), np.abs(grid.u)))

    f00 = []
    wx0 = []
    wx1 = []
    wy0 = []  # (n2,) rows: the s2 successor does not depend on s1
    wy1 = []
    jstage = []
    for k in order:
        i0, a0, a1 = _cell_weights(grid.s1, succ.S1p[:, :, k])
        j0, b0, b1 = _cell_weights(grid.s2, succ.S2p[0, :, k])
        f00.append((i0.astype(np.int64) * n2 + j0[None, :]).astype(np.int32))
        wx0.append(a0.astype(dtype))
        wx1.append(a1.astype(dtype))
        wy0.append(b0.astype(dtype))
        wy1.append(b1.astype(dtype))
        jstage.append(stage_cost_values(
            problem, grid.s1[:, None], grid.s2[None, :], grid.u[k]).astype(dtype))
    del succ

    J_prev = terminal_cost(problem, grid).astype(dtype).ravel()
    best = np.empty((n1, n2), dtype)
    kbest = np.empty((n1, n2), np.int32)
    A = np.empty((n1, n2), dtype)
    B = np.empty((n1, n2), dtype)
    C = np.empty((n1, n2), dtype)
    D = np.empty((n1, n2), dtype)
    iterations_run = problem.N

    for it in range(problem.N):
        for pos in range(p):
            f = f00[pos]
            np.take(J_prev, f, out=A)
            np.take(J_prev, f + 1, out=B)
            np.take(J_prev, f + n2, out=C)
            np.take(J_prev, f + n2 + 1, out=D)
            np.multiply(A, wy0[pos], out=A)
            np.multiply(B, wy1[pos], out=B)
            A += B
            np.multiply(C, wy0[pos], out=C)
            np.multiply(D, wy1[pos], out=D)
            C += D
            np.multiply(A, wx0[pos], out=A)
            np.multiply(C, wx1[pos], out=C)
            A += C
            A += jstage[pos]
            if pos == 0:
                best[:] = A
                kbest[:] = 0
            else:
                better = A < best
                np.copyto(best, A, where=better)
                kbest[better] = pos
        if np.isnan(best).any():
            raise DPNumericalError(
                f"NaN in optimal value array at iteration {it + 1}")
        J_next = best.ravel().copy()
        if np.array_equal(J_next, J_prev):
            iterations_run = it + 1  # fixed point: remaining updates are no-ops
            J_prev = J_next
            break
        J_prev = J_next

    I_star = order[kbest].astype(np.int32)
    return PolicyTable(grid=grid, J_star=J_prev.reshape(n1, n2).copy(),
                       I_star=I_star, problem=problem,
                       iterations_run=iterations_run)


def _nearest_index(g: np.ndarray, x: float) -> int:
    if x <= g[0]:
        return 0
    if x >= g[-1]:
        return len(g) - 1
    i = int(np.searchsorted(g, x))
    return i if (g[i] - x) < (x - g[i - 1]) else i - 1


def lookup(policy: PolicyTable, s1: float, s2: float) -> float:
    """Action of the nearest grid cell; out-of-range states clamp to the edge."""
    i = _nearest_index(policy.grid.s1, s1)
    j = _nearest_index(policy.grid.s2, s2)
    return float(policy.grid.u[policy.I_star[i, j]])


def error_transform(state, reference):
    """State error relative to a reference; the rotation sine wrap is applied
    only inside the stage cost, not here."""
    return np.asarray(state, dtype=float) - np.asarray(reference, dtype=float)


# --- persistence -------------------------------------------------------------
#
# Policy container, version 1: one ASCII magic line
#   SATDP-POLICY 1 <header_bytes>\n
# followed by a compact JSON header and the raw little-endian arrays in the
# order listed under "arrays" (name, dtype code, shape), row major.

_MAGIC = "SATDP-POLICY"
_FORMAT_VERSION = 1


def save_policy(path: str | Path, policy: PolicyTable) -> None:
    prob = policy.problem
    meta = asdict(prob)
    meta["Q"] = prob.Q.tolist()
    meta["H_term"] = prob.H_term.tolist()
    value_code = "<f4" if np.dtype(prob.dtype) == np.float32 else "<f8"
    arrays = [
        ("s1", "<f8", [prob.n1]),
        ("s2", "<f8", [prob.n2]),
        ("u", "<f8", [prob.p]),
        ("J_star", value_code, [prob.n1, prob.n2]),
        ("I_star", "<i4", [prob.n1, prob.n2]),
    ]
    header = {
        "format": _MAGIC,
        "version": _FORMAT_VERSION,
        "problem": meta,
        "iterations_run": policy.iterations_run,
        "arrays": arrays,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    payload = {
        "s1": policy.grid.s1, "s2": policy.grid.s2, "u": policy.grid.u,
        "J_star": policy.J_star, "I_star": policy.I_star,
    }
    with open(path, "wb") as fh:
        fh.write(f"{_MAGIC} {_FORMAT_VERSION} {len(blob)}\n".encode())
        fh.write(blob)
        for name, code, _shape in arrays:
            fh.write(np.ascontiguousarray(payload[name], dtype=code).tobytes())


def load_policy(path: str | Path) -> PolicyTable:
    with open(path, "rb") as fh:
        magic = fh.readline().decode().split()
        if len(magic) != 3 or magic[0] != _MAGIC:
            raise ValueError(f"{path}: not a policy container")
        if int(magic[1]) != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {magic[1]}")
        header = json.loads(fh.read(int(magic[2])).decode())
        meta = dict(header["problem"])
        prob = DPProblem(**meta)
        out = {}
        for name, code, shape in header["arrays"]:
            n = int(np.prod(shape))
            arr = np.frombuffer(fh.read(n * np.dtype(code).itemsize), dtype=code)
            out[name] = arr.reshape(shape).copy()
    grid = DPGrid(s1=out["s1"], s2=out["s2"], u=out["u"], spacing=prob.spacing)
    return PolicyTable(grid=grid, J_star=out["J_star"].astype(prob.dtype),
                       I_star=out["I_star"].astype(np.int32), problem=prob,
                       iterations_run=int(header["iterations_run"]))
