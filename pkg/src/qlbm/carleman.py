"""First-order Carleman operators of the lattice Boltzmann update.

Two index spaces are supported: ``"physical"`` with 9 velocities per node and
``"padded"`` with all 16 four-bit velocity codes per node (the circuit space).
Matrices are scipy CSR with explicit zeros removed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.io
import scipy.sparse as sp

from .lattice import (
    D2Q9, EXTRAPOLATION_SLOTS, PHYSICAL, PHYS_POS, Q, Q_PAD, BCType, Geometry,
    bc_table, routing_table,
)
from .reference import FlowParams, inflow_forcing

MODES = ("physical", "padded")


class ParameterError(ValueError):
    pass


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True)
class CollisionTable:
    C: np.ndarray
    tau: float
    mode: str = "physical"

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.C)))

    def physical(self) -> np.ndarray:
        if self.mode == "physical":
            return self.C
        return self.C[np.ix_(PHYSICAL, PHYSICAL)]


def _collision_rational() -> list[list[Fraction]]:
    """Exact rationals K with C = I + K / tau."""
    cs2 = Fraction(1, 3)
    c = D2Q9.velocities
    w = D2Q9.weights
    K = []
    for a in range(Q):
        row = []
        for b in range(Q):
            dot = c[a][0] * c[b][0] + c[a][1] * c[b][1]
            row.append(-Fraction(int(a == b)) + w[a] * (1 + dot / cs2))
        K.append(row)
    return K


_K = np.array([[float(x) for x in row] for row in _collision_rational()])


def collision_table(tau: float, mode: str = "physical") -> CollisionTable:
    """C[q*, q] = (1 - 1/tau) delta + (w_q*/tau) (1 + 3 c_q . c_q*)."""
    _check_mode(mode)
    if not tau > 0.5:
        raise ParameterError(f"relaxation time must exceed 1/2, got {tau}")
    C9 = np.eye(Q) + _K / tau
    if mode == "physical":
        C = C9
    else:
        C = np.zeros((Q_PAD, Q_PAD))
        C[np.ix_(PHYSICAL, PHYSICAL)] = C9
    C.setflags(write=False)
    return CollisionTable(C, float(tau), mode)


def _source_population(geom: Geometry) -> np.ndarray:
    """Physical velocity whose post-collision value sits in padded slot (x, y, q*), or -1."""
    bc = bc_table(geom)
    src = np.full((geom.nx, geom.ny, Q_PAD), -1, dtype=np.int64)
    for q in PHYSICAL:
        src[:, :, q] = q
    for slot, q in EXTRAPOLATION_SLOTS.items():
        src[:, :, slot] = np.where(bc[:, :, slot] == BCType.OUTFLOW, q, -1)
    return src


def _clean(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


def build_S(geom: Geometry, mode: str = "physical") -> sp.csr_matrix:
    """Streaming matrix including boundary treatment.

    Padded mode is the permutation the streaming oracle applies to basis states.
    Physical mode keeps, for every padded slot holding a physical population,
    the physical destination; right-pointing outflow populations are dropped and
    extrapolation slots contribute a copy of their left-pointing source.
    """
    _check_mode(mode)
    nx, ny = geom.nx, geom.ny
    xo, yo, qo = routing_table(geom)
    x, y, q = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(Q_PAD), indexing="ij")
    if mode == "padded":
        rows = ((xo * ny + yo) * Q_PAD + qo).ravel()
        cols = ((x * ny + y) * Q_PAD + q).ravel()
        n = nx * ny * Q_PAD
        return _clean(sp.coo_matrix((np.ones(n), (rows, cols)), shape=(n, n)))
    src = _source_population(geom)
    pos = np.full(Q_PAD, -1)
    for p in PHYSICAL:
        pos[p] = PHYS_POS[p]
    keep = (src >= 0) & (pos[qo] >= 0)
    rows = (xo * ny + yo) * Q + pos[qo]
    cols = (x * ny + y) * Q + pos[np.maximum(src, 0)]
    n = nx * ny * Q
    data = np.ones(int(keep.sum()))
    return _clean(sp.coo_matrix((data, (rows[keep], cols[keep])), shape=(n, n)))


def _loaded_collision(geom: Geometry, table: CollisionTable) -> sp.csr_matrix:
    """Padded map from pre-collision physical values to slot contents:
    G[(n, q*), (n, q)] = C[p(n, q*), q]."""
    nx, ny = geom.nx, geom.ny
    C9 = table.physical()
    src = _source_population(geom)
    rows, cols, vals = [], [], []
    node = np.arange(nx * ny)
    flat_src = src.reshape(nx * ny, Q_PAD)
    for slot in range(Q_PAD):
        has = flat_src[:, slot] >= 0
        nodes = node[has]
        pops = flat_src[has, slot]
        for q in PHYSICAL:
            v = C9[[PHYS_POS[p] for p in pops], PHYS_POS[q]]
            rows.append(nodes * Q_PAD + slot)
            cols.append(nodes * Q_PAD + q)
            vals.append(v)
    n = nx * ny * Q_PAD
    return _clean(sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                shape=(n, n)))


def build_forcing(geom: Geometry, params: FlowParams, mode: str = "physical") -> np.ndarray:
    """Inflow correction vector b (positive on R, UR, DR at x = 0)."""
    _check_mode(mode)
    b = inflow_forcing(geom, params)
    return b if mode == "physical" else embed(b, geom)


def build_A(geom: Geometry, params: FlowParams, mode: str = "physical") -> sp.csr_matrix:
    """A = S (I + F1): collision followed by streaming."""
    _check_mode(mode)
    table = collision_table(params.tau, "physical")
    if mode == "padded":
        return _clean(build_S(geom, "padded") @ _loaded_collision(geom, table))
    blk = sp.block_diag([sp.csr_matrix(table.C)] * geom.n_nodes, format="csr")
    return _clean(build_S(geom, "physical") @ blk)


def interpolate(A, h: float) -> sp.csr_matrix:
    """A_tilde = (1 - h) I + h A."""
    if not 0.0 <= h <= 1.0:
        raise ParameterError(f"h must lie in [0, 1], got {h}")
    if A.shape[0] != A.shape[1]:
        raise ParameterError("A must be square")
    return _clean((1.0 - h) * sp.identity(A.shape[0], format="csr") + h * sp.csr_matrix(A))


def build_A_tilde(geom: Geometry, params: FlowParams, mode: str = "physical") -> sp.csr_matrix:
    return interpolate(build_A(geom, params, mode), params.h)


def physical_indices(geom: Geometry) -> np.ndarray:
    """Padded indices of the physical entries, in physical-field order."""
    nodes = np.arange(geom.n_nodes)[:, None]
    return (nodes * Q_PAD + np.array(PHYSICAL)[None, :]).ravel()


def embedding_matrix(geom: Geometry) -> sp.csr_matrix:
    """E: physical -> padded (a column selection of the identity)."""
    n9 = geom.n_nodes * Q
    idx = physical_indices(geom)
    return sp.csr_matrix((np.ones(n9), (idx, np.arange(n9))), shape=(geom.n_nodes * Q_PAD, n9))


def embed(v: np.ndarray, geom: Geometry) -> np.ndarray:
    out = np.zeros(geom.n_nodes * Q_PAD)
    out[physical_indices(geom)] = v
    return out


def project(v: np.ndarray, geom: Geometry) -> np.ndarray:
    return np.asarray(v)[physical_indices(geom)]


def write_matrix_market(path, M, comment: str = "") -> None:
    """Coordinate real general Matrix Market file (1-based indices)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(M), comment=comment, field="real", symmetry="general")
