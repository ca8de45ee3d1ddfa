"""Statevector simulation of the circuit IR, block extraction and verification.

``apply`` works on a dense complex vector (up to MAX_QUBITS qubits). Block
extraction propagates all system basis columns at once as a sparse list of
(column, basis index, amplitude) triples; every gate in the IR maps a basis
state to at most two basis states, so the lists stay small.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
import json
import math

import numpy as np
import scipy.sparse as sp

from .circuits.ir import Circuit, Gate

MAX_QUBITS = 24
DROP_TOL = 1e-14


class SizeError(MemoryError):
    pass


def _ctrl_mask(idx: np.ndarray, controls) -> np.ndarray:
    ok = np.ones(idx.shape, dtype=bool)
    for q, pol in controls:
        bit = (idx >> q) & 1
        ok &= bit == (1 if pol else 0)
    return ok


def _inc_index(idx: np.ndarray, reg, step: int) -> np.ndarray:
    val = np.zeros_like(idx)
    for i, q in enumerate(reg):
        val |= ((idx >> q) & 1) << i
    val = (val + step) % (1 << len(reg))
    out = idx.copy()
    for i, q in enumerate(reg):
        out &= ~(np.int64(1) << q)
        out |= ((val >> i) & 1) << q
    return out


def _swap_index(idx, a, b):
    ba = (idx >> a) & 1
    bb = (idx >> b) & 1
    diff = ba ^ bb
    return idx ^ ((diff << a) | (diff << b))


def apply_gate(g: Gate, state: np.ndarray) -> np.ndarray:
    """Apply one gate to a dense state (returns a new array)."""
    n = state.size
    idx = np.arange(n, dtype=np.int64)
    ok = _ctrl_mask(idx, g.controls)
    out = state.copy()
    if g.kind in ("X", "SWAP", "INC"):
        if g.kind == "X":
            dest = idx ^ (np.int64(1) << g.targets[0])
        elif g.kind == "SWAP":
            dest = _swap_index(idx, *g.targets)
        else:
            dest = _inc_index(idx, g.targets, g.step)
        src = idx[ok]
        out[dest[ok]] = state[src]
        return out
    t = g.targets[0]
    sel = ok & (((idx >> t) & 1) == 0)
    i0 = idx[sel]
    i1 = i0 | (np.int64(1) << t)
    a0, a1 = state[i0], state[i1]
    if g.kind == "H":
        r = 1.0 / math.sqrt(2.0)
        out[i0], out[i1] = r * (a0 + a1), r * (a0 - a1)
    elif g.kind == "Z":
        out[i1] = -a1
    elif g.kind == "RY":
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        out[i0], out[i1] = c * a0 - s * a1, s * a0 + c * a1
    return out


def apply(circuit: Circuit, state) -> np.ndarray:
    n = circuit.layout.n_qubits
    if n > MAX_QUBITS:
        raise SizeError(f"{n} qubits exceed the dense limit of {MAX_QUBITS}; shrink nx, ny or nt")
    state = np.asarray(state, dtype=complex)
    if state.shape != (1 << n,):
        raise ValueError(f"state has length {state.size}, circuit needs {1 << n}")
    for g in circuit.gates:
        state = apply_gate(g, state)
    return state


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    v = np.zeros(1 << n_qubits, dtype=complex)
    v[index] = 1.0
    return v


# ---- sparse batched propagation ------------------------------------------

def _merge(col, idx, amp, n_qubits):
    key = col * (np.int64(1) << n_qubits) + idx
    uk, inv = np.unique(key, return_inverse=True)
    a = np.bincount(inv, weights=amp, minlength=uk.size)
    keep = np.abs(a) > DROP_TOL
    uk = uk[keep]
    return uk >> n_qubits, uk & ((np.int64(1) << n_qubits) - 1), a[keep]


def propagate_sparse(circuit: Circuit, col, idx, amp):
    """Run real-amplitude basis superpositions through the circuit."""
    n = circuit.layout.n_qubits
    if n + int(np.max(col, initial=0)).bit_length() > 62:
        raise SizeError("index space too large for 64-bit keys")
    col = np.asarray(col, dtype=np.int64)
    idx = np.asarray(idx, dtype=np.int64)
    amp = np.asarray(amp, dtype=float)
    for g in circuit.gates:
        ok = _ctrl_mask(idx, g.controls)
        if g.kind == "X":
            idx = np.where(ok, idx ^ (np.int64(1) << g.targets[0]), idx)
        elif g.kind == "SWAP":
            idx = np.where(ok, _swap_index(idx, *g.targets), idx)
        elif g.kind == "INC":
            idx = np.where(ok, _inc_index(idx, g.targets, g.step), idx)
        elif g.kind == "Z":
            amp = np.where(ok & (((idx >> g.targets[0]) & 1) == 1), -amp, amp)
        else:
            t = g.targets[0]
            bit = (idx >> t) & 1
            if g.kind == "H":
                r = 1.0 / math.sqrt(2.0)
                m00, m01, m10, m11 = r, r, r, -r
            else:
                c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
                m00, m01, m10, m11 = c, -s, s, c
            # new amplitude on |0> and |1> for inputs with bit = 0 or 1
            to0 = np.where(bit == 0, m00, m01) * amp
            to1 = np.where(bit == 0, m10, m11) * amp
            base = idx & ~(np.int64(1) << t)
            c_ok, c_no = col[ok], col[~ok]
            col = np.concatenate([c_ok, c_ok, c_no])
            idx = np.concatenate([base[ok], base[ok] | (np.int64(1) << t), idx[~ok]])
            amp = np.concatenate([to0[ok], to1[ok], amp[~ok]])
            col, idx, amp = _merge(col, idx, amp, n)
    return col, idx, amp


def extract_block(circuit: Circuit, system_qubits=None, ancilla_qubits=None) -> sp.csr_matrix:
    """<0_anc| U |0_anc> as a real sparse matrix over the system basis.

    System basis index j has bit i equal to the value of system_qubits[i].
    """
    lay = circuit.layout
    sysq = tuple(lay.system_qubits() if system_qubits is None else system_qubits)
    anc = tuple(lay.ancilla_qubits() if ancilla_qubits is None else ancilla_qubits)
    if set(sysq) & set(anc) or len(sysq) + len(anc) != lay.n_qubits:
        raise ValueError("system and ancilla qubits must partition the layout")
    dim = 1 << len(sysq)
    cols = np.arange(dim, dtype=np.int64)
    idx = np.zeros(dim, dtype=np.int64)
    for i, q in enumerate(sysq):
        idx |= ((cols >> i) & 1) << q
    col, out_idx, amp = propagate_sparse(circuit, cols, idx, np.ones(dim))
    anc_mask = np.int64(0)
    for q in anc:
        anc_mask |= np.int64(1) << q
    keep = (out_idx & anc_mask) == 0
    rows = np.zeros(int(keep.sum()), dtype=np.int64)
    sel = out_idx[keep]
    for i, q in enumerate(sysq):
        rows |= ((sel >> q) & 1) << i
    return sp.csr_matrix((amp[keep], (rows, col[keep])), shape=(dim, dim))


def extract_block_dense(circuit: Circuit) -> np.ndarray:
    """Column-by-column dense extraction (small circuits only)."""
    lay = circuit.layout
    sysq, anc = lay.system_qubits(), lay.ancilla_qubits()
    dim = 1 << len(sysq)
    out = np.zeros((dim, dim), dtype=complex)
    sys_index = np.zeros(dim, dtype=np.int64)
    for j in range(dim):
        for i, q in enumerate(sysq):
            sys_index[j] |= ((j >> i) & 1) << q
    for j in range(dim):
        psi = apply(circuit, basis_state(lay.n_qubits, int(sys_index[j])))
        out[:, j] = psi[sys_index]
    return out


@dataclass
class VerifyReport:
    max_abs_err: float
    worst_entry: tuple[int, int]
    alpha: float
    passed: bool

    def to_json(self) -> str:
        d = asdict(self)
        d["worst_entry"] = list(self.worst_entry)
        return json.dumps(d)


def verify(circuit: Circuit, target, alpha: float | None = None, tol: float = 1e-10) -> VerifyReport:
    """Entrywise comparison of the extracted block with target / alpha."""
    alpha = circuit.subnorm if alpha is None else alpha
    blk = extract_block(circuit)
    diff = (blk - sp.csr_matrix(target) / alpha).tocoo()
    if diff.nnz == 0:
        return VerifyReport(0.0, (0, 0), alpha, True)
    k = int(np.argmax(np.abs(diff.data)))
    err = float(abs(diff.data[k]))
    return VerifyReport(err, (int(diff.row[k]), int(diff.col[k])), alpha, err <= tol)
