"""Classical D2Q9 time stepping: nonlinear BGK reference and the linearized
recurrence, plus macroscopic moments.

Fields are flat vectors with index (x * ny + y) * 9 + k, k running over the
physical velocities in ascending 4-bit index order (see lattice.PHYSICAL).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (
    D2Q9, PHYSICAL, PHYS_POS, SOUND_SPEED, BCType, Geometry, L, DL, UL, R, UR, DR,
    bc_table, opposite,
)


class DegenerateStateError(ArithmeticError):
    pass


CS2 = 1.0 / 3.0
_C = D2Q9.c            # (9, 2)
_W = D2Q9.w            # (9,)
_OPP = np.array([PHYS_POS[opposite(q)] for q in PHYSICAL])


@dataclass(frozen=True)
class FlowParams:
    re: float
    ma: float
    tau: float
    h: float = 0.5
    nt: int = 32
    w_idle: int = 1

    def __post_init__(self):
        if not self.tau > 0.5:
            raise ValueError(f"relaxation time must exceed 1/2, got {self.tau}")
        if not 0.0 <= self.h <= 1.0:
            raise ValueError(f"step-size parameter h must lie in [0, 1], got {self.h}")
        if self.nt < 1:
            raise ValueError("nt must be positive")
        if self.w_idle < 0:
            raise ValueError("idling exponent must be nonnegative")

    @classmethod
    def for_geometry(cls, geom: Geometry, re: float = 1.0, ma: float = 0.01, h: float = 0.5,
                     nt: int = 32, w_idle: int = 1) -> "FlowParams":
        """Relaxation time from Re and Ma with the channel width ny as length scale."""
        return cls(re=re, ma=ma, tau=relaxation_time(re, ma, geom.ny), h=h, nt=nt, w_idle=w_idle)

    @property
    def u_in(self) -> np.ndarray:
        return np.array([self.ma * SOUND_SPEED, 0.0])

    @property
    def total_time(self) -> float:
        return self.nt * self.h


def relaxation_time(re: float, ma: float, length: float) -> float:
    if re <= 0:
        raise ValueError("Reynolds number must be positive")
    u = ma * SOUND_SPEED
    return u * length / (CS2 * re) + 0.5


def equilibrium(rho, u) -> np.ndarray:
    """Second-order Maxwell-Boltzmann equilibrium; broadcasts over leading axes."""
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("equilibrium needs positive density")
    cu = u @ _C.T.astype(float)
    uu = np.sum(u * u, axis=-1)[..., None]
    return _W * rho[..., None] * (1.0 + cu / CS2 + cu**2 / (2 * CS2**2) - uu / (2 * CS2))


@dataclass
class Macroscopics:
    rho: np.ndarray            # (nx, ny)
    u: np.ndarray              # (nx, ny, 2)
    zero_density: np.ndarray   # (nx, ny) bool


def macroscopics(f: np.ndarray, geom: Geometry) -> Macroscopics:
    fs = np.asarray(f, dtype=float).reshape(geom.nx, geom.ny, 9)
    rho = fs.sum(axis=-1)
    mom = fs @ _C.astype(float)
    zero = rho == 0
    u = np.zeros_like(mom)
    np.divide(mom, rho[..., None], out=u, where=~zero[..., None])
    return Macroscopics(rho, u, zero)


def velocity_field(f: np.ndarray, geom: Geometry) -> np.ndarray:
    return macroscopics(f, geom).u


def collide(f: np.ndarray, tau: float, geom: Geometry) -> np.ndarray:
    """Nonlinear BGK relaxation toward the local equilibrium."""
    if not tau > 0.5:
        raise ValueError("relaxation time must exceed 1/2")
    fs = np.asarray(f, dtype=float).reshape(geom.nx, geom.ny, 9)
    mac = macroscopics(fs, geom)
    fluid = ~geom.obstacle_mask()
    if np.any(mac.zero_density & fluid) or np.any(mac.rho < 0):
        raise DegenerateStateError("zero or negative density at a fluid node")
    out = fs.copy()
    live = ~mac.zero_density
    feq = equilibrium(mac.rho[live], mac.u[live])
    out[live] = fs[live] - (fs[live] - feq) / tau
    return out.reshape(-1)


def collision_matrix(tau: float) -> np.ndarray:
    """9x9 linear part of the collision, f* = C f per node."""
    cc = _C @ _C.T
    return np.eye(9) * (1.0 - 1.0 / tau) + (_W[:, None] / tau) * (1.0 + cc / CS2)


def collide_linear(f: np.ndarray, tau: float, geom: Geometry) -> np.ndarray:
    fs = np.asarray(f, dtype=float).reshape(-1, 9)
    return (fs @ collision_matrix(tau).T).reshape(-1)


def inflow_forcing(geom: Geometry, params: FlowParams) -> np.ndarray:
    """Moving-wall correction with rho_in = 1 on the right-pointing populations at x = 0."""
    out = np.zeros((geom.nx, geom.ny, 9))
    u_in = params.u_in
    for q in (R, UR, DR):
        k = PHYS_POS[q]
        out[0, :, k] = 2.0 * _W[k] * float(u_in @ _C[k]) / CS2
    return out.reshape(-1)


def stream_with_bc(f_star: np.ndarray, geom: Geometry, params: FlowParams,
                   forcing: bool = True) -> np.ndarray:
    """Advect post-collision populations and apply the channel boundaries.

    Interior populations shift by their velocity, sealed surfaces reverse them in
    place, right-pointing populations at the outflow column are dropped and the
    left-pointing outflow populations are copied from the neighbouring column.
    """
    nx, ny = geom.nx, geom.ny
    fs = np.asarray(f_star, dtype=float).reshape(nx, ny, 9)
    out = np.zeros_like(fs)
    bc = bc_table(geom)[:, :, list(PHYSICAL)]
    for k in range(9):
        cx, cy = _C[k]
        xs, ys = np.nonzero(bc[:, :, k] == BCType.INTERIOR)
        out[xs + cx, ys + cy, k] += fs[xs, ys, k]
        xs, ys = np.nonzero(bc[:, :, k] == BCType.BOUNCE_BACK)
        out[xs, ys, _OPP[k]] += fs[xs, ys, k]
    # f_q(nx-1, y) = f_q(nx-2, y) after streaming, i.e. f*_q(nx-1, y - c_y)
    for q in (L, DL, UL):
        k = PHYS_POS[q]
        cy = _C[k, 1]
        y = np.arange(ny)
        src = y - cy
        ok = (src >= 0) & (src < ny)
        out[nx - 1, y[ok], k] += fs[nx - 1, src[ok], k]
    out = out.reshape(-1)
    if forcing:
        out += inflow_forcing(geom, params)
    return out


def rest_state(geom: Geometry) -> np.ndarray:
    """f_q = w_q on fluid nodes, zero inside the obstacle."""
    f = np.broadcast_to(_W, (geom.nx, geom.ny, 9)).copy()
    f[geom.obstacle_mask()] = 0.0
    return f.reshape(-1)


def step_nonlinear(f: np.ndarray, geom: Geometry, params: FlowParams) -> np.ndarray:
    h = params.h
    new = stream_with_bc(collide(f, params.tau, geom), geom, params)
    return (1.0 - h) * np.asarray(f, dtype=float) + h * new


def run_nonlinear(f0: np.ndarray, geom: Geometry, params: FlowParams) -> np.ndarray:
    """Trajectory of nt + 1 fields, shape (nt + 1, 9 * nx * ny)."""
    traj = np.empty((params.nt + 1, np.size(f0)))
    traj[0] = f0
    for t in range(params.nt):
        traj[t + 1] = step_nonlinear(traj[t], geom, params)
    return traj


def run_linear(f0: np.ndarray, a_tilde, b: np.ndarray, nt: int, h: float) -> np.ndarray:
    """Iterate y <- A_tilde y + h b, returning all nt + 1 states."""
    n = np.size(f0)
    if a_tilde.shape != (n, n) or np.size(b) != n:
        raise ValueError(f"dimension mismatch: A_tilde {a_tilde.shape}, f0 {n}, b {np.size(b)}")
    traj = np.empty((nt + 1, n))
    traj[0] = f0
    hb = h * np.asarray(b, dtype=float)
    for t in range(nt):
        traj[t + 1] = a_tilde @ traj[t] + hb
    return traj


def mass_balance(f_star: np.ndarray, geom: Geometry, params: FlowParams) -> dict:
    """Mass injected, discarded and copied by one streaming step."""
    nx, ny = geom.nx, geom.ny
    fs = np.asarray(f_star, dtype=float).reshape(nx, ny, 9)
    bc = bc_table(geom)[:, :, list(PHYSICAL)]
    discarded = float(fs[bc == BCType.OUTFLOW].sum())
    copied = 0.0
    for q in (L, DL, UL):
        k = PHYS_POS[q]
        cy = _C[k, 1]
        src = np.arange(ny) - cy
        ok = (src >= 0) & (src < ny)
        copied += float(fs[nx - 1, src[ok], k].sum())
    injected = float(inflow_forcing(geom, params).sum())
    return {"injected": injected, "discarded": discarded, "copied": copied}


__all__ = [
    "FlowParams", "Macroscopics", "DegenerateStateError", "relaxation_time", "equilibrium",
    "macroscopics", "velocity_field", "collide", "collide_linear", "collision_matrix",
    "inflow_forcing", "stream_with_bc", "rest_state", "step_nonlinear", "run_nonlinear",
    "run_linear", "mass_balance",
]
