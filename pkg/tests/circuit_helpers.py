import numpy as np

from qlbm.statevec import propagate_sparse


def basis_index(lay, **values) -> int:
    idx = 0
    for name, v in values.items():
        for i, q in enumerate(lay[name]):
            idx |= ((v >> i) & 1) << q
    return idx


def read(lay, idx: int, name: str) -> int:
    return sum(((int(idx) >> q) & 1) << i for i, q in enumerate(lay[name]))


def run_basis(circuit, **values):
    """Propagate one basis state; returns {basis index: amplitude}."""
    col, idx, amp = propagate_sparse(circuit, [0], [basis_index(circuit.layout, **values)], [1.0])
    return dict(zip(idx.tolist(), amp.tolist()))
