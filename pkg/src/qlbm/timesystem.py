"""Global block-bidiagonal system L y = b_L for the unrolled linear recurrence.

Block row 0 fixes y_0; rows 1..n_evo apply y_k = A_tilde y_{k-1} + h b; the
remaining 2^W nt - 1 - n_evo rows idle with y_k = y_{k-1}. All operations
other than ``matrix`` work blockwise without forming L.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import csv
import warnings

import numpy as np
import scipy.sparse as sp

from .carleman import write_matrix_market


class AssemblyError(ValueError):
    pass


class DegenerateSystemWarning(UserWarning):
    pass


class UndefinedErrorError(ZeroDivisionError):
    pass


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass
class GlobalSystem:
    A_tilde: sp.csr_matrix
    b: np.ndarray          # forcing per step, already multiplied by h
    y0: np.ndarray
    nt: int
    W: int
    h: float
    mode: str = "physical"
    _AT: sp.csr_matrix = field(default=None, repr=False)

    def __post_init__(self):
        self._AT = sp.csr_matrix(self.A_tilde.T)

    @property
    def d(self) -> int:
        return self.A_tilde.shape[0]

    @property
    def n_blocks(self) -> int:
        return (1 << self.W) * self.nt

    @property
    def n_evo(self) -> int:
        return min(self.nt, self.n_blocks - 1)

    @property
    def dim(self) -> int:
        return self.n_blocks * self.d

    @property
    def meta(self) -> dict:
        return {"nt": self.nt, "W": self.W, "h": self.h, "d_C": self.d, "mode": self.mode}

    @property
    def b_L(self) -> np.ndarray:
        out = np.zeros((self.n_blocks, self.d))
        out[0] = self.y0
        out[1:self.n_evo + 1] = self.b
        return out.reshape(-1)

    def _blocks(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise AssemblyError(f"expected a vector of length {self.dim}, got {v.shape}")
        return v.reshape(self.n_blocks, self.d)

    def matvec(self, u) -> np.ndarray:
        ub = self._blocks(u)
        out = ub.copy()
        ne = self.n_evo
        if ne:
            out[1:ne + 1] -= (self.A_tilde @ ub[:ne].T).T
        out[ne + 1:] -= ub[ne:-1]
        return out.reshape(-1)

    def rmatvec(self, v) -> np.ndarray:
        vb = self._blocks(v)
        out = vb.copy()
        ne = self.n_evo
        if ne:
            out[:ne] -= (self._AT @ vb[1:ne + 1].T).T
        out[ne:-1] -= vb[ne + 1:]
        return out.reshape(-1)

    def solve(self, rhs) -> np.ndarray:
        """L^{-1} rhs by forward substitution."""
        r = self._blocks(rhs)
        y = np.empty_like(r)
        y[0] = r[0]
        for k in range(1, self.n_evo + 1):
            y[k] = r[k] + self.A_tilde @ y[k - 1]
        ne = self.n_evo
        # idle rows: y_k = r_k + y_{k-1}
        y[ne:] = np.cumsum(np.vstack([y[ne:ne + 1], r[ne + 1:]]), axis=0)
        return y.reshape(-1)

    def rsolve(self, v) -> np.ndarray:
        """L^{-T} v by backward substitution."""
        r = self._blocks(v)
        x = np.empty_like(r)
        ne = self.n_evo
        # idle part: x_k = r_k + x_{k+1} for k >= ne
        x[ne:] = np.cumsum(r[ne:][::-1], axis=0)[::-1]
        for k in range(ne - 1, -1, -1):
            x[k] = r[k] + self._AT @ x[k + 1]
        return x.reshape(-1)

    def matrix(self) -> sp.csr_matrix:
        nb, ne, d = self.n_blocks, self.n_evo, self.d
        evo = sp.diags(np.r_[np.ones(ne), np.zeros(nb - 1 - ne)], -1, shape=(nb, nb))
        idle = sp.diags(np.r_[np.zeros(ne), np.ones(nb - 1 - ne)], -1, shape=(nb, nb))
        L = sp.identity(nb * d) - sp.kron(evo, self.A_tilde) - sp.kron(idle, sp.identity(d))
        L = sp.csr_matrix(L)
        L.eliminate_zeros()
        L.sort_indices()
        return L


def assemble(A_tilde, b, y0, nt: int, W: int, h: float, mode: str = "physical",
             for_circuit: bool = False) -> GlobalSystem:
    A_tilde = sp.csr_matrix(A_tilde)
    d = A_tilde.shape[0]
    if A_tilde.shape != (d, d):
        raise AssemblyError("A_tilde must be square")
    b = np.asarray(b, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if b.shape != (d,) or y0.shape != (d,):
        raise AssemblyError(f"dimension mismatch: A_tilde is {d}x{d}, b {b.shape}, y0 {y0.shape}")
    if nt < 1 or W < 0:
        raise AssemblyError("need nt >= 1 and W >= 0")
    if for_circuit and not _is_pow2(nt):
        raise AssemblyError(f"nt must be a power of two for circuit export, got {nt}")
    return GlobalSystem(A_tilde, h * b, y0, int(nt), int(W), float(h), mode)


def _warn_degenerate(sys: GlobalSystem):
    if sys.n_blocks == 1:
        warnings.warn("single-block system: L is the identity and no time step is taken",
                      DegenerateSystemWarning, stacklevel=3)


def forward_solve(sys: GlobalSystem) -> np.ndarray:
    _warn_degenerate(sys)
    return sys.solve(sys.b_L)


def adjoint_apply(sys: GlobalSystem, v) -> np.ndarray:
    return sys.rmatvec(v)


def adjoint_solve(sys: GlobalSystem, v) -> np.ndarray:
    return sys.rsolve(v)


def extract_block(y, k: int, d: int | None = None, sys: GlobalSystem | None = None) -> np.ndarray:
    """k-th block of a global vector; block size from ``d`` or ``sys``."""
    if d is None:
        if sys is None:
            raise ValueError("need the block size d or the system")
        d = sys.d
    y = np.asarray(y)
    nb = y.size // d
    if y.size % d or not 0 <= k < nb:
        raise IndexError(f"block {k} out of range for {nb} blocks of size {d}")
    return y[k * d:(k + 1) * d]


def relative_error(u, v) -> float:
    """||u - v|| / ||v||."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0:
        raise UndefinedErrorError("relative error against a zero reference is undefined")
    return float(np.linalg.norm(u - v) / nv)


def write_vector_csv(path, v) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, x in enumerate(np.asarray(v, dtype=float)):
            w.writerow([i, f"{x:.17g}"])


def write_system_mm(path, sys: GlobalSystem) -> None:
    write_matrix_market(path, sys.matrix(), comment=f"nt={sys.nt} W={sys.W} h={sys.h} mode={sys.mode}")
