import numpy as np
import pytest
import scipy.sparse as sp

from qlbm import spectral
from qlbm.spectral import (
    CSV_COLUMNS, PowerIterationError, loglog_slope, report, sigma_max, sigma_max_result,
    sigma_min, sigma_min_result, sweep, write_csv,
)
from qlbm.timesystem import assemble

from conftest import system


def test_sigma_max_trivial():
    assert sigma_max(sp.identity(5)) == pytest.approx(1.0, rel=1e-12)
    assert sigma_max(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-8)
    with pytest.raises(ValueError):
        sigma_max(sp.csr_matrix((3, 3)))


def test_identity_single_block():
    s = assemble(sp.identity(4, format="csr"), np.zeros(4), np.ones(4), 1, 0, 0.5)
    assert sigma_min(s) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("mode", ["physical", "padded"])
def test_matches_dense_svd_small_channel(mode):
    s = system(4, False, 4, 1, mode)
    sv = np.linalg.svd(s.matrix().toarray(), compute_uv=False)
    assert sigma_max(s) == pytest.approx(sv[0], rel=1e-6)
    assert sigma_min(s) == pytest.approx(sv[-1], rel=1e-6)


def test_symmetric_geometry_does_not_trap_the_iteration():
    # without an obstacle the channel is mirror symmetric in y and the top right
    # singular vector is orthogonal to the all-ones vector
    s = system(4, False, 4, 1)
    L = s.matrix().toarray()
    _, sv, vt = np.linalg.svd(L)
    assert abs(vt[0].sum()) < 1e-8
    assert sigma_max(s) == pytest.approx(sv[0], rel=1e-6)


def test_bracket_and_report():
    s = system(4, False, 8, 1)
    r = report(s, 4, 4)
    norm_at = np.linalg.norm(s.A_tilde.toarray(), 2)
    assert 1.0 <= r.sigma_max <= 1.0 + norm_at + 1e-9
    assert r.sigma_max >= r.sigma_min > 0
    assert r.kappa == pytest.approx(r.sigma_max / r.sigma_min)
    assert r.T == 4.0 and r.tol_achieved <= spectral.DEFAULT_TOL


def test_deterministic_iteration_counts():
    s = system(4, False, 4, 1)
    a, b = sigma_min_result(s), sigma_min_result(s)
    assert a == b
    assert sigma_max_result(s) == sigma_max_result(s)


def test_nonconvergence_carries_iterate():
    with pytest.raises(PowerIterationError) as exc:
        sigma_max(np.diag([1.0, 0.999999, 0.5]), max_iter=3)
    assert exc.value.last_iterate.shape == (3,)
    assert 0 < exc.value.estimate <= 1.0


def test_sweep_and_csv(tmp_path):
    reps = sweep([(4, 4, 2), (4, 4, 4)], lambda nx, ny, nt: system(nx, False, nt, 1))
    assert [r.nt for r in reps] == [2, 4]
    p = tmp_path / "s.csv"
    write_csv(p, reps)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 3
    with pytest.raises(ValueError):
        sweep([], None)


def test_loglog_slope():
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    assert loglog_slope(xs, 3 * xs**1.2) == pytest.approx(1.2)
