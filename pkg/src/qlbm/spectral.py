"""Matrix-free singular value estimates of the global system by power iteration."""
from __future__ import annotations

from dataclasses import dataclass, asdict
import csv
import math

import numpy as np
import scipy.sparse as sp

from .timesystem import GlobalSystem

DEFAULT_TOL = 1e-8
MAX_ITER = 100_000
START_SEED = 0


class PowerIterationError(RuntimeError):
    def __init__(self, msg, last_iterate, estimate):
        super().__init__(msg)
        self.last_iterate = last_iterate
        self.estimate = estimate


@dataclass(frozen=True)
class PowerResult:
    value: float
    iterations: int
    residual: float


def power_iteration(op, n: int, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> PowerResult:
    """Dominant eigenvalue of a symmetric positive semidefinite operator.

    Starts from a fixed-seed Gaussian vector and stops once
    ||B x - lambda x|| <= tol * lambda. A symmetric start such as all-ones can
    be orthogonal to the dominant eigenvector when the geometry is mirror
    symmetric, so it is not used.
    """
    x = np.random.default_rng(START_SEED).standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    res = math.inf
    for it in range(1, max_iter + 1):
        y = op(x)
        lam = float(x @ y)
        res = float(np.linalg.norm(y - lam * x))
        ny = np.linalg.norm(y)
        if ny == 0:
            return PowerResult(0.0, it, 0.0)
        if res <= tol * abs(lam):
            return PowerResult(lam, it, res / abs(lam))
        x = y / ny
    raise PowerIterationError(f"power iteration did not converge in {max_iter} steps "
                              f"(relative residual {res / max(abs(lam), 1e-300):.3e})", x, lam)


def _as_operator(M):
    if isinstance(M, GlobalSystem):
        return M.dim, M.matvec, M.rmatvec
    if sp.issparse(M) or isinstance(M, np.ndarray):
        Mt = M.T
        return M.shape[1], (lambda v: M @ v), (lambda v: Mt @ v)
    raise TypeError(f"unsupported operator type {type(M)!r}")


def sigma_max_result(M, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> PowerResult:
    n, mv, rmv = _as_operator(M)
    r = power_iteration(lambda v: rmv(mv(v)), n, tol, max_iter)
    return PowerResult(math.sqrt(max(r.value, 0.0)), r.iterations, r.residual)


def sigma_max(M, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> float:
    """Largest singular value of a sparse/dense matrix or a GlobalSystem."""
    if (sp.issparse(M) and M.count_nonzero() == 0) or (isinstance(M, np.ndarray) and not M.any()):
        raise ValueError("matrix is zero")
    return sigma_max_result(M, tol, max_iter).value


def sigma_min_result(sys: GlobalSystem, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> PowerResult:
    r = power_iteration(lambda v: sys.solve(sys.rsolve(v)), sys.dim, tol, max_iter)
    return PowerResult(1.0 / math.sqrt(r.value), r.iterations, r.residual)


def sigma_min(sys: GlobalSystem, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITER) -> float:
    """Smallest singular value from the top eigenvalue of L^{-1} L^{-T}."""
    return sigma_min_result(sys, tol, max_iter).value


@dataclass(frozen=True)
class SpectralReport:
    nx: int
    ny: int
    nt: int
    T: float
    sigma_min: float
    sigma_max: float
    kappa: float
    iterations_min: int
    iterations_max: int
    tol_achieved: float


def report(sys: GlobalSystem, nx: int, ny: int, tol: float = DEFAULT_TOL) -> SpectralReport:
    lo = sigma_min_result(sys, tol)
    hi = sigma_max_result(sys, tol)
    return SpectralReport(nx, ny, sys.nt, sys.nt * sys.h, lo.value, hi.value, hi.value / lo.value,
                          lo.iterations, hi.iterations, max(lo.residual, hi.residual))


def sweep(grid, params_factory, tol: float = DEFAULT_TOL) -> list[SpectralReport]:
    """One report per (nx, ny, nt) in ``grid``.

    ``params_factory(nx, ny, nt)`` returns the GlobalSystem for that point.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty sweep grid")
    return [report(params_factory(nx, ny, nt), nx, ny, tol) for nx, ny, nt in grid]


CSV_COLUMNS = ("nx", "ny", "nt", "T", "sigma_min", "sigma_max", "kappa")


def write_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in reports:
            d = asdict(r)
            w.writerow([d[c] if isinstance(d[c], int) else f"{d[c]:.17g}" for c in CSV_COLUMNS])


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
