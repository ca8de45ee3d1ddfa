"""D2Q9 velocity model, 4-bit velocity encoding, channel geometry and
boundary-condition classification.

Velocity indices use the 4-bit layout shared with the circuits: bits 1:0 hold
the x component and bits 3:2 the y component, each as 00 -> 0, 01 -> -1,
10 -> +1. The code 11 in either pair is non-physical padding.

The classification functions here are the only place boundary roles are
decided; matrix builders, the reference solver and the oracle circuits all
read from them.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np


class InvalidVelocityError(ValueError):
    pass


class GeometryError(ValueError):
    pass


PHYSICAL = (0, 1, 2, 4, 5, 6, 8, 9, 10)
NONPHYSICAL = (3, 7, 11, 12, 13, 14, 15)
REST, L, R, D, DL, DR, U, UL, UR = PHYSICAL
NAMES = {REST: "rest", L: "L", R: "R", D: "D", DL: "DL", DR: "DR", U: "U", UL: "UL", UR: "UR"}

Q = 9
Q_PAD = 16
N_Q_BITS = 4

# position of each physical index inside a 9-wide field block
PHYS_POS = {q: k for k, q in enumerate(PHYSICAL)}
# outflow extrapolation slots (x bits = 11) and the left-pointing velocity they carry
EXTRAPOLATION_SLOTS = {3: L, 7: DL, 11: UL}

CS2 = Fraction(1, 3)
SOUND_SPEED = 1.0 / math.sqrt(3.0)

_ENC = {0: 0b00, -1: 0b01, 1: 0b10}
_DEC = {0b00: 0, 0b01: -1, 0b10: 1}


def encode_velocity(c) -> int:
    cx, cy = (int(v) for v in c)
    if cx not in _ENC or cy not in _ENC:
        raise InvalidVelocityError(f"velocity components must lie in {{-1, 0, 1}}, got {tuple(c)}")
    return _ENC[cx] | (_ENC[cy] << 2)


def decode_velocity(q: int) -> tuple[int, int]:
    if not is_physical(q):
        raise InvalidVelocityError(f"index {q} is not a physical D2Q9 velocity")
    return _DEC[q & 3], _DEC[(q >> 2) & 3]


def is_physical(q: int) -> bool:
    return 0 <= q < Q_PAD and (q & 3) != 3 and ((q >> 2) & 3) != 3


def opposite(q: int) -> int:
    """Index of the reversed velocity; swaps the bits inside each pair."""
    if not is_physical(q):
        raise InvalidVelocityError(f"index {q} is not a physical D2Q9 velocity")
    return _swap_pairs(q)


def _swap_pairs(q):
    return ((q & 1) << 1) | ((q >> 1) & 1) | ((q & 4) << 1) | ((q >> 1) & 4)


@dataclass(frozen=True)
class D2Q9Model:
    velocities: tuple[tuple[int, int], ...]
    weights: tuple[Fraction, ...]
    sound_speed: float = SOUND_SPEED

    @classmethod
    def standard(cls) -> "D2Q9Model":
        vel = tuple(decode_velocity(q) for q in PHYSICAL)
        w = []
        for cx, cy in vel:
            n = abs(cx) + abs(cy)
            w.append({0: Fraction(4, 9), 1: Fraction(1, 9), 2: Fraction(1, 36)}[n])
        return cls(vel, tuple(w))

    @property
    def c(self) -> np.ndarray:
        return np.array(self.velocities, dtype=np.int64)

    @property
    def w(self) -> np.ndarray:
        return np.array([float(x) for x in self.weights])


D2Q9 = D2Q9Model.standard()


class BCType(IntEnum):
    """Two-bit boundary code BC[1]BC[0]."""

    INTERIOR = 0b00
    OUTFLOW = 0b10
    BOUNCE_BACK = 0b11


@dataclass(frozen=True)
class Obstacle:
    x0: int
    y0: int
    wx: int
    wy: int

    def contains(self, x, y):
        return (x >= self.x0) & (x < self.x0 + self.wx) & (y >= self.y0) & (y < self.y0 + self.wy)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Geometry:
    """Channel of nx x ny nodes: inflow on the left, outflow on the right,
    no-slip walls at top and bottom, optional rectangular obstacle."""

    nx: int
    ny: int
    obstacle: Obstacle | None = None

    def __post_init__(self):
        if not (_is_pow2(self.nx) and _is_pow2(self.ny)):
            raise GeometryError(f"nx and ny must be powers of two, got {self.nx}x{self.ny}")
        if self.nx < 2 or self.ny < 2:
            raise GeometryError("grid needs at least two nodes per direction")
        ob = self.obstacle
        if ob is not None:
            if ob.wx < 1 or ob.wy < 1:
                raise GeometryError("obstacle must have positive size")
            if ob.x0 < 1 or ob.x0 + ob.wx > self.nx - 1:
                raise GeometryError("obstacle must not touch the inflow or outflow boundary")
            if ob.y0 < 0 or ob.y0 + ob.wy > self.ny:
                raise GeometryError("obstacle lies outside the domain")

    @classmethod
    def with_default_obstacle(cls, nx: int, ny: int) -> "Geometry":
        if nx % 8 or ny % 8:
            raise GeometryError(f"default obstacle needs nx, ny divisible by 8, got {nx}x{ny}")
        return cls(nx, ny, Obstacle(x0=nx // 4, y0=3 * ny // 8, wx=nx // 8, wy=ny // 4))

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def n_bits_x(self) -> int:
        return self.nx.bit_length() - 1

    @property
    def n_bits_y(self) -> int:
        return self.ny.bit_length() - 1

    def node_index(self, x, y):
        return x * self.ny + y

    def in_obstacle(self, x, y):
        if self.obstacle is None:
            return np.zeros(np.broadcast(x, y).shape, dtype=bool) if np.ndim(x) or np.ndim(y) else False
        return self.obstacle.contains(x, y)

    def obstacle_mask(self) -> np.ndarray:
        """Boolean (nx, ny) mask of obstacle-interior nodes."""
        x, y = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        return np.asarray(self.in_obstacle(x, y), dtype=bool)


def crosses_sealed_surface(geom: Geometry, x: int, y: int, c: tuple[int, int]) -> bool:
    """True if the move from (x, y) by c crosses the inflow wall, a no-slip wall
    or the obstacle surface (in either direction)."""
    cx, cy = c
    if x == 0 and cx == -1:
        return True
    if y == geom.ny - 1 and cy == 1:
        return True
    if y == 0 and cy == -1:
        return True
    dx, dy = x + cx, y + cy
    if 0 <= dx < geom.nx and 0 <= dy < geom.ny:
        return bool(geom.in_obstacle(x, y)) != bool(geom.in_obstacle(dx, dy))
    return False


def _masked_corner_slot(geom: Geometry, y: int, q: int) -> bool:
    # extrapolation slots whose y shift would leave the grid at the right-hand corners
    return (q == 7 and y == 0) or (q == 11 and y == geom.ny - 1)


def classify_bc(n, q_star: int, geom: Geometry) -> BCType:
    """Boundary type of post-collision population q_star at node n = (x, y)."""
    x, y = n
    if is_physical(q_star) and crosses_sealed_surface(geom, x, y, decode_velocity(q_star)):
        return BCType.BOUNCE_BACK
    if x == geom.nx - 1:
        if q_star in EXTRAPOLATION_SLOTS:
            if not _masked_corner_slot(geom, y, q_star):
                return BCType.OUTFLOW
        elif is_physical(q_star) and decode_velocity(q_star)[0] == 1:
            return BCType.OUTFLOW
    return BCType.INTERIOR


def classify_bc_out(n_out, q_out: int, geom: Geometry) -> BCType:
    """Boundary type recovered from a post-streaming pair (n_out, q_out)."""
    x, y = n_out
    if is_physical(q_out):
        cx, cy = decode_velocity(q_out)
        if crosses_sealed_surface(geom, x, y, (-cx, -cy)):
            return BCType.BOUNCE_BACK
    if x == geom.nx - 1:
        if q_out in EXTRAPOLATION_SLOTS:
            # parked right-pointing populations; these two corner slots are filled
            # by the masked interior slots wrapping in from the opposite corner
            wrapped = (q_out == 11 and y == 0) or (q_out == 7 and y == geom.ny - 1)
            if not wrapped:
                return BCType.OUTFLOW
        elif is_physical(q_out) and decode_velocity(q_out)[0] == -1:
            return BCType.OUTFLOW
    return BCType.INTERIOR


def route(x, y, q, bc, nx: int, ny: int):
    """Streaming destination exactly as the streaming oracle moves basis states.

    Works elementwise on integer arrays. Coordinates wrap modulo the grid size;
    wrapped moves only occur for pairs that carry no amplitude.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    bc = np.asarray(bc, dtype=np.int64)
    interior = bc == 0
    x = x - (interior & ((q & 1) > 0)) + (interior & ((q & 2) > 0))
    yshift = (bc & 1) == 0
    y = y - (yshift & ((q & 4) > 0)) + (yshift & ((q & 8) > 0))
    x = np.mod(x, nx)
    y = np.mod(y, ny)
    bc1 = (bc & 2) > 0
    bc0 = (bc & 1) > 0
    qx = np.where(bc1, ((q & 1) << 1) | ((q >> 1) & 1), q & 3)
    qy = np.where(bc0, ((q & 4) << 1) | ((q >> 1) & 4), q & 12)
    q = qx | qy
    q = np.where(bc == BCType.OUTFLOW, q ^ 2, q)
    return x, y, q


@lru_cache(maxsize=64)
def bc_table(geom: Geometry) -> np.ndarray:
    """classify_bc for every (x, y, q*) as an int array of shape (nx, ny, 16)."""
    out = np.empty((geom.nx, geom.ny, Q_PAD), dtype=np.int64)
    for x in range(geom.nx):
        for y in range(geom.ny):
            for q in range(Q_PAD):
                out[x, y, q] = classify_bc((x, y), q, geom)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def bc_out_table(geom: Geometry) -> np.ndarray:
    out = np.empty((geom.nx, geom.ny, Q_PAD), dtype=np.int64)
    for x in range(geom.nx):
        for y in range(geom.ny):
            for q in range(Q_PAD):
                out[x, y, q] = classify_bc_out((x, y), q, geom)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def routing_table(geom: Geometry):
    """Destination (x_out, y_out, q_out) of every padded source slot, each (nx, ny, 16)."""
    x, y, q = np.meshgrid(np.arange(geom.nx), np.arange(geom.ny), np.arange(Q_PAD), indexing="ij")
    xo, yo, qo = route(x, y, q, bc_table(geom), geom.nx, geom.ny)
    for a in (xo, yo, qo):
        a.setflags(write=False)
    return xo, yo, qo
