"""Oracle circuits for the collision-streaming matrix A and the global system L.

Basis index of the system register: q + 16 (y + ny x) + 16 nx ny (t + nt s), the
same ordering as the padded matrices. A block is read out with every ancilla in
|0>; the amplitude qubit is flipped at the end so that a successful rotation
(|1>) lands in the block.
"""
from __future__ import annotations

import math

import numpy as np

from ..carleman import CollisionTable, collision_table
from ..lattice import (
    EXTRAPOLATION_SLOTS, N_Q_BITS, PHYSICAL, Geometry, bc_out_table, bc_table, decode_velocity,
    BCType,
)
from ..reference import FlowParams
from .cubes import CubeSet, cube_controls, point, shifted_interval
from .ir import INC, RY, SWAP, Circuit, CircuitError, Gate, H, RegisterLayout, X, eq_controls

Q_STAR_0 = 0   # identity term
Q_STAR_1 = 1   # (1 - h) identity on the subdiagonal
Q_STAR_2 = 0   # idling identity
VERIFY_MAX_NODES = 1 << 12


class ConstructionError(CircuitError):
    pass


class NormalizationError(CircuitError):
    pass


def _log2(n: int) -> int:
    return n.bit_length() - 1


def _check_pow2(n: int, what: str):
    if n < 1 or n & (n - 1):
        raise ConstructionError(f"{what} must be a power of two, got {n}")


def ua_layout(geom: Geometry) -> RegisterLayout:
    lay = RegisterLayout()
    lay.add("q", N_Q_BITS, system=True)
    lay.add("y", geom.n_bits_y, system=True)
    lay.add("x", geom.n_bits_x, system=True)
    lay.add("qstar", N_Q_BITS)
    lay.add("bc", 2)
    lay.add("amp", 1)
    return lay


def ul_layout(geom: Geometry, nt: int, W: int) -> RegisterLayout:
    _check_pow2(nt, "nt")
    if W < 1:
        raise ConstructionError("the U_L circuit needs at least one idling bit (W >= 1)")
    lay = RegisterLayout()
    lay.add("q", N_Q_BITS, system=True)
    lay.add("y", geom.n_bits_y, system=True)
    lay.add("x", geom.n_bits_x, system=True)
    lay.add("t", _log2(nt), system=True)
    lay.add("s", W, system=True)
    lay.add("qstar", N_Q_BITS)
    lay.add("bc", 2)
    lay.add("amp", 1)
    lay.add("in_l", 1)
    lay.add("flag", 1)
    return lay


def layout_qubits(geom: Geometry, nt: int | None = None, W: int = 0) -> int:
    """Qubits of the unlowered layout: n_x + n_y + 4 + 4 + 2 + 1 (+ n_t + W + 2 for U_L)."""
    base = geom.n_bits_x + geom.n_bits_y + 2 * N_Q_BITS + 3
    return base if nt is None else base + _log2(nt) + W + 2


def lowered_qubits(geom: Geometry, nt: int | None = None, W: int = 0) -> int:
    """Layout qubits plus the work register of the lowered circuit.

    The widest gates are a boundary flip fixing one node (4 + n_x + n_y
    controls) and an extrapolation-slot rotation (q, q* and bc: 10 controls),
    each with one more control under the U_L flag; the idling test on
    (in_l, t, s) needs n_t + W work qubits.
    """
    widest = max(geom.n_bits_x + geom.n_bits_y + N_Q_BITS, 2 * N_Q_BITS + 2)
    if nt is None:
        return layout_qubits(geom) + widest - 1
    return layout_qubits(geom, nt, W) + max(widest, _log2(nt) + W)


# ---- boundary sets -------------------------------------------------------

def _sealed_set(geom: Geometry, c) -> CubeSet:
    """Nodes whose move by c crosses the inflow wall, a no-slip wall or the obstacle surface."""
    bx, by, nx, ny = geom.n_bits_x, geom.n_bits_y, geom.nx, geom.ny
    full = [(0, 0)]
    cx, cy = c
    s = CubeSet.empty(bx, by)
    if cx == -1:
        s = s | CubeSet.product(bx, by, point(0, bx), full)
    if cy == 1:
        s = s | CubeSet.product(bx, by, full, point(ny - 1, by))
    if cy == -1:
        s = s | CubeSet.product(bx, by, full, point(0, by))
    ob = geom.obstacle
    if ob is not None and (cx, cy) != (0, 0):
        x0, x1, y0, y1 = ob.x0, ob.x0 + ob.wx, ob.y0, ob.y0 + ob.wy
        inside = CubeSet.product(bx, by, shifted_interval(x0, x1, 0, bx), shifted_interval(y0, y1, 0, by))
        pre = CubeSet.product(bx, by, shifted_interval(x0, x1, -cx, bx), shifted_interval(y0, y1, -cy, by))
        s = s | (inside ^ pre)
    return s


def _right_column(geom: Geometry, drop_y: int | None = None) -> CubeSet:
    """Column x = nx - 1, optionally without the node at y = drop_y."""
    bx, by = geom.n_bits_x, geom.n_bits_y
    ys = [(0, 0)] + ([] if drop_y is None else point(drop_y, by))
    return CubeSet.product(bx, by, point(geom.nx - 1, bx), ys)


def set_bc_sets(geom: Geometry, q_star: int) -> tuple[CubeSet, CubeSet]:
    """(bounce-back set, outflow set) of nodes for post-collision index q_star."""
    bx, by, ny = geom.n_bits_x, geom.n_bits_y, geom.ny
    bb = CubeSet.empty(bx, by)
    right = CubeSet.empty(bx, by)
    if q_star in PHYSICAL:
        c = decode_velocity(q_star)
        if c != (0, 0):
            bb = _sealed_set(geom, c)
        if c[0] == 1:
            right = _right_column(geom)
    elif q_star in EXTRAPOLATION_SLOTS:
        right = _right_column(geom, {3: None, 7: 0, 11: ny - 1}[q_star])
    return bb, right ^ (right & bb)


def unset_bc_sets(geom: Geometry, q_out: int) -> tuple[CubeSet, CubeSet]:
    """(bounce-back set, outflow set) of output nodes for post-streaming index q_out."""
    bx, by, ny = geom.n_bits_x, geom.n_bits_y, geom.ny
    bb = CubeSet.empty(bx, by)
    right = CubeSet.empty(bx, by)
    if q_out in PHYSICAL:
        cx, cy = decode_velocity(q_out)
        if (cx, cy) != (0, 0):
            bb = _sealed_set(geom, (-cx, -cy))
        if cx == -1:
            right = _right_column(geom)
    elif q_out in EXTRAPOLATION_SLOTS:
        right = _right_column(geom, {3: None, 7: ny - 1, 11: 0}[q_out])
    return bb, right ^ (right & bb)


def _verify_sets(geom: Geometry, sets_fn, table_fn):
    """Check the cube sets against the boundary table on grids small enough to tabulate."""
    if geom.n_nodes > VERIFY_MAX_NODES:
        return
    table = table_fn(geom)
    for q in range(16):
        bb, of = sets_fn(geom, q)
        want_bb = table[:, :, q] == BCType.BOUNCE_BACK
        want_of = table[:, :, q] == BCType.OUTFLOW
        if not (np.array_equal(bb.mask(), want_bb) and np.array_equal(of.mask(), want_of)):
            raise ConstructionError(f"dyadic control blocks disagree with the boundary table at q={q}")


def _cube_gates(cs: CubeSet, target: int, base_controls, lay: RegisterLayout):
    for cxc, cyc in cs.cubes:
        ctrl = list(base_controls) + cube_controls(cxc, lay["x"]) + cube_controls(cyc, lay["y"])
        yield X(target, ctrl)


def build_OsetBC(geom: Geometry, lay: RegisterLayout | None = None, extra_controls=()) -> list[Gate]:
    """Flip bc to 11 (bounce-back) or 10 (outflow) from (x, y, q*)."""
    lay = lay or ua_layout(geom)
    _verify_sets(geom, set_bc_sets, bc_table)
    bc0, bc1 = lay["bc"]
    extra = tuple(extra_controls)
    sets = [set_bc_sets(geom, q) for q in range(16)]
    gates = []
    for q, (bb, _) in enumerate(sets):
        gates += _cube_gates(bb, bc0, eq_controls(lay["qstar"], q) + list(extra), lay)
    gates.append(X(bc1, [(bc0, True), *extra]))
    for q, (_, of) in enumerate(sets):
        gates += _cube_gates(of, bc1, eq_controls(lay["qstar"], q) + list(extra), lay)
    return gates


def build_OunsetBC(geom: Geometry, lay: RegisterLayout | None = None, extra_controls=()) -> list[Gate]:
    """Clear bc from the post-streaming (x, y, q) registers."""
    lay = lay or ua_layout(geom)
    _verify_sets(geom, unset_bc_sets, bc_out_table)
    bc0, bc1 = lay["bc"]
    extra = tuple(extra_controls)
    sets = [unset_bc_sets(geom, q) for q in range(16)]
    gates = [X(bc1, [(bc0, True), *extra])]
    for q, (_, of) in enumerate(sets):
        gates += _cube_gates(of, bc1, eq_controls(lay["q"], q) + list(extra), lay)
    for q, (bb, _) in enumerate(sets):
        gates += _cube_gates(bb, bc0, eq_controls(lay["q"], q) + list(extra), lay)
    return gates


# ---- collision -----------------------------------------------------------

def _angle(v: float) -> float:
    if abs(v) > 1 + 1e-12:
        raise NormalizationError(f"encoded value {v} exceeds 1 in magnitude")
    return 2.0 * math.asin(max(-1.0, min(1.0, v)))


def l_scale(table: CollisionTable, h: float) -> float:
    """c_L = max(1, h max|C|): keeps every U_L rotation value in [-1, 1]."""
    return max(1.0, h * table.max_abs)


def build_Ocollision(table: CollisionTable, lay: RegisterLayout, mode: str = "UA", h: float = 1.0,
                     c_L: float | None = None, extra_controls=()) -> list[Gate]:
    """Rotations loading C[q*, q] onto the amplitude qubit.

    mode "UA": value C/max|C|; mode "UL": value -h C / c_L. Extrapolation slots
    3, 7, 11 load the row of their left-pointing velocity when bc = 10.
    """
    C = table.physical()
    if mode == "UA":
        scale = table.max_abs
        val = lambda c: c / scale
    elif mode == "UL":
        cl = l_scale(table, h) if c_L is None else c_L
        val = lambda c: -h * c / cl
    else:
        raise ConstructionError(f"unknown collision mode {mode!r}")
    amp = lay["amp"][0]
    bc0, bc1 = lay["bc"]
    extra = list(extra_controls)
    pos = {q: k for k, q in enumerate(PHYSICAL)}
    gates = []
    for qs in PHYSICAL:
        for q in PHYSICAL:
            v = val(C[pos[qs], pos[q]])
            if v != 0.0:
                ctrl = eq_controls(lay["q"], q) + eq_controls(lay["qstar"], qs) + extra
                gates.append(RY(amp, _angle(v), ctrl))
    for slot, p in EXTRAPOLATION_SLOTS.items():
        for q in PHYSICAL:
            v = val(C[pos[p], pos[q]])
            if v != 0.0:
                ctrl = (eq_controls(lay["q"], q) + eq_controls(lay["qstar"], slot)
                        + [(bc0, False), (bc1, True)] + extra)
                gates.append(RY(amp, _angle(v), ctrl))
    return gates


# ---- streaming -----------------------------------------------------------

def build_Ostreaming(lay: RegisterLayout, extra_controls=()) -> list[Gate]:
    """Swap q <-> q*, shift the node per velocity bits, reverse or park per bc."""
    q = lay["q"]
    bc0, bc1 = lay["bc"]
    e = list(extra_controls)
    gates = [SWAP(a, b, e) for a, b in zip(q, lay["qstar"])]
    interior = [(bc0, False), (bc1, False)]
    if lay.width("x"):
        gates.append(INC(lay["x"], +1, [(q[1], True)] + interior + e))
        gates.append(INC(lay["x"], -1, [(q[0], True)] + interior + e))
    if lay.width("y"):
        gates.append(INC(lay["y"], +1, [(q[3], True), (bc0, False)] + e))
        gates.append(INC(lay["y"], -1, [(q[2], True), (bc0, False)] + e))
    gates.append(SWAP(q[0], q[1], [(bc1, True)] + e))
    gates.append(SWAP(q[2], q[3], [(bc0, True)] + e))
    gates.append(X(q[1], [(bc1, True), (bc0, False)] + e))
    return gates


def _o_sequence(geom, table, lay, mode, h=1.0, c_L=None, extra=()):
    return (build_OsetBC(geom, lay, extra)
            + build_Ocollision(table, lay, mode, h, c_L, extra)
            + build_Ostreaming(lay, extra)
            + build_OunsetBC(geom, lay, extra))


# ---- block encodings -----------------------------------------------------

def alpha_A(table: CollisionTable) -> float:
    return table.max_abs * (1 << N_Q_BITS)


def alpha_L(table: CollisionTable, h: float) -> float:
    return l_scale(table, h) * (1 << (N_Q_BITS + 1))


def build_UA(geom: Geometry, params: FlowParams) -> Circuit:
    """Block encoding of the padded collision-streaming matrix, subnorm max|C| 2^4."""
    table = collision_table(params.tau, "padded")
    lay = ua_layout(geom)
    qs = lay["qstar"]
    gates = [H(b) for b in qs]
    gates += _o_sequence(geom, table, lay, "UA")
    gates += [H(b) for b in qs]
    gates.append(X(lay["amp"][0]))
    return Circuit(lay, gates, alpha_A(table))


def build_UL(geom: Geometry, params: FlowParams, nt: int | None = None, W: int | None = None) -> Circuit:
    """Block encoding of the padded global system L, subnorm c_L 2^5."""
    nt = params.nt if nt is None else nt
    W = params.w_idle if W is None else W
    h = params.h
    table = collision_table(params.tau, "padded")
    cl = l_scale(table, h)
    lay = ul_layout(geom, nt, W)
    qs, amp = lay["qstar"], lay["amp"][0]
    inl, flag = lay["in_l"][0], lay["flag"][0]
    s_zero = [(b, False) for b in lay["s"]]
    last = [(b, True) for b in lay["t"] + lay["s"]]
    g = [H(inl)] + [H(b) for b in qs]
    # identity on every block row
    g.append(RY(amp, _angle(1.0 / cl), [(inl, False)] + eq_controls(qs, Q_STAR_0)))
    # (1 - h) identity part of -A_tilde on the evolution rows
    g.append(RY(amp, _angle(-(1.0 - h) / cl), [(inl, False)] + eq_controls(qs, Q_STAR_1) + s_zero))
    # h A part of -A_tilde, gated by flag = in_l and s == 0
    compute = X(flag, [(inl, True)] + s_zero)
    g.append(compute)
    g += _o_sequence(geom, table, lay, "UL", h, cl, [(flag, True)])
    g.append(compute)
    # idling -I on rows with s >= 1, excluding the last block column
    idle = [X(flag, [(inl, True)]), X(flag, [(inl, True)] + s_zero), X(flag, [(inl, True)] + last)]
    g += idle
    g.append(RY(amp, _angle(-1.0 / cl), [(flag, True)] + eq_controls(qs, Q_STAR_2)))
    g += idle[::-1]
    # subdiagonal shift of the block index
    counter = [X(flag, [(inl, True)]), X(flag, [(inl, False)] + eq_controls(qs, Q_STAR_1))]
    g += counter
    g.append(INC(lay["t"] + lay["s"], +1, [(flag, True)]))
    g += counter[::-1]
    g += [H(inl)] + [H(b) for b in qs]
    g.append(X(amp))
    return Circuit(lay, g, alpha_L(table, h))
