import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from qlbm.carleman import build_A
from qlbm.circuits import Circuit, RegisterLayout, build_UA
from qlbm.circuits.ir import H, INC, RY, SWAP, X, Gate
from qlbm.statevec import (
    SizeError, apply, basis_state, extract_block, extract_block_dense, propagate_sparse, verify,
)

from conftest import channel

N = 5


def _layout(n=N, n_sys=3):
    lay = RegisterLayout()
    lay.add("s", n_sys, system=True)
    lay.add("a", n - n_sys)
    return lay


def test_hh_is_identity():
    lay = _layout(1, 1)
    psi = apply(Circuit(lay, [H(0), H(0)]), basis_state(1, 0))
    assert np.allclose(psi, [1, 0], atol=1e-15)


def test_negative_control_flips_on_zero():
    lay = _layout(2, 2)
    psi = apply(Circuit(lay, [X(1, [(0, False)])]), basis_state(2, 0))
    assert psi[2] == 1


def test_ry_amplitude():
    lay = _layout(1, 1)
    psi = apply(Circuit(lay, [RY(0, -math.pi / 3)]), basis_state(1, 0))
    assert psi[1].real == pytest.approx(-0.5, abs=1e-16)


def test_identity_block():
    c = Circuit(_layout(), [])
    assert abs(extract_block(c) - sp.identity(8)).max() == 0


def test_dimension_and_size_errors():
    c = Circuit(_layout(), [])
    with pytest.raises(ValueError):
        apply(c, np.zeros(4))
    big = RegisterLayout()
    big.add("s", 25, system=True)
    with pytest.raises(SizeError):
        apply(Circuit(big, []), np.zeros(2))


qubit = st.integers(0, N - 1)


@st.composite
def gates(draw):
    kind = draw(st.sampled_from(["H", "X", "Z", "RY", "SWAP", "INC"]))
    n_t = {"SWAP": 2, "INC": draw(st.integers(1, 3))}.get(kind, 1)
    qs = draw(st.permutations(range(N)))
    targets = tuple(qs[:n_t])
    n_c = draw(st.integers(0, 2 if kind == "H" or kind == "Z" else N - n_t))
    if kind in ("H", "Z"):
        n_c = 0
    controls = tuple((q, draw(st.booleans())) for q in qs[n_t:n_t + n_c])
    angle = draw(st.floats(-math.pi, math.pi)) if kind == "RY" else 0.0
    step = draw(st.sampled_from([1, -1])) if kind == "INC" else 1
    return Gate(kind, targets, controls, angle, step)


@given(st.lists(gates(), max_size=12), st.integers(0, 2**31 - 1))
def test_dense_and_sparse_paths_agree(gs, seed):
    c = Circuit(_layout(), gs)
    rng = np.random.default_rng(seed)
    psi0 = rng.standard_normal(1 << N)
    psi0 /= np.linalg.norm(psi0)
    dense = apply(c, psi0)
    assert np.linalg.norm(dense) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(dense.imag).max() == 0
    idx = np.arange(1 << N)
    _, out, amp = propagate_sparse(c, np.zeros_like(idx), idx, psi0)
    sparse = np.zeros(1 << N)
    sparse[out] = amp
    assert np.allclose(sparse, dense.real, atol=1e-14)
    assert np.allclose(extract_block(c).toarray(), extract_block_dense(c).real, atol=1e-14)


def test_norm_preserved_on_random_states():
    geom, params = channel(4, False)
    c = build_UA(geom, params)
    rng = np.random.default_rng(7)
    for _ in range(2):
        psi = rng.standard_normal(1 << c.layout.n_qubits) + 1j * rng.standard_normal(1 << c.layout.n_qubits)
        psi /= np.linalg.norm(psi)
        assert np.linalg.norm(apply(c, psi)) == pytest.approx(1.0, abs=1e-12)


def test_verify_reports():
    geom, params = channel(4, False)
    c = build_UA(geom, params)
    A = build_A(geom, params, "padded")
    rep = verify(c, A)
    assert rep.passed and rep.max_abs_err <= 1e-10
    exact = Circuit(_layout(), [])
    assert verify(exact, sp.identity(8), alpha=1.0).max_abs_err == 0
    d = json.loads(rep.to_json())
    assert set(d) == {"max_abs_err", "worst_entry", "alpha", "passed"}


def test_perturbed_rotation_detected():
    geom, params = channel(4, False)
    c = build_UA(geom, params)
    k = next(i for i, g in enumerate(c.gates) if g.kind == "RY")
    g = c.gates[k]
    gates = list(c.gates)
    gates[k] = Gate("RY", g.targets, g.controls, g.angle + 1e-3)
    rep = verify(Circuit(c.layout, gates, c.subnorm), build_A(geom, params, "padded"))
    assert rep.max_abs_err > 1e-5 and not rep.passed


def test_verify_default_obstacle_UA():
    geom, params = channel(8, True)
    c = build_UA(geom, params)
    assert c.layout.n_qubits == 17
    assert verify(c, build_A(geom, params, "padded")).passed
