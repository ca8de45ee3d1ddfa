"""Odd Chebyshev approximation of 1/(kappa x) and its classical application to
the singular values of the global system through the Hermitian dilation.

The default polynomial is

    P(x) = (1 - T_n(b(x)) / T_n(b(0))) / (kappa x),   b(x) = (1 + a^2 - 2 x^2) / (1 - a^2),

with a = 1/kappa and n = (d + 1) / 2. It has odd degree d, is bounded on
[-1, 1] and its error on [1/kappa, 1] is about 2 exp(-d / kappa).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb
import scipy.fft

from .timesystem import GlobalSystem

SUP_GRID_POINTS = 10_000
RECTIFIER_DELTA = 0.5


class ParameterError(ValueError):
    pass


class SpectralOverflowError(ArithmeticError):
    """Clenshaw iterates blew up: alpha is below the largest singular value."""


@dataclass(frozen=True)
class ChebyshevPoly:
    kappa: float
    degree: int
    coeffs: np.ndarray
    method: str = "gks"

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ParameterError("need degree + 1 coefficients")
        if not np.all(np.isfinite(self.coeffs)):
            raise ParameterError("non-finite coefficient")

    def __call__(self, x):
        return npcheb.chebval(x, self.coeffs)


def _gks_values(x: np.ndarray, kappa: float, n: int) -> np.ndarray:
    a = 1.0 / kappa
    b = (1.0 + a * a - 2.0 * x * x) / (1.0 - a * a)
    th0 = math.acosh((1.0 + a * a) / (1.0 - a * a))
    # log cosh(n th0) = n th0 + log1p(exp(-2 n th0)) - log 2
    log_t0 = n * th0 + math.log1p(math.exp(-2.0 * n * th0)) - math.log(2.0)
    one_minus = np.empty_like(x)
    inside = np.abs(b) <= 1.0
    th = np.arccos(np.clip(b[inside], -1.0, 1.0))
    one_minus[inside] = 1.0 - np.cos(n * th) * math.exp(-log_t0)
    out = ~inside   # only b > 1 occurs for |x| <= 1
    th = np.arccosh(b[out])
    log_t = n * th + np.log1p(np.exp(-2.0 * n * th)) - math.log(2.0)
    one_minus[out] = -np.expm1(log_t - log_t0)
    return one_minus / (kappa * x)


def _rectified_values(x: np.ndarray, kappa: float) -> np.ndarray:
    kx = kappa * x
    return -np.expm1(-(kx / RECTIFIER_DELTA) ** 2) / kx


def inverse_poly(kappa: float, degree: int, method: str = "gks") -> ChebyshevPoly:
    """Odd polynomial approximating 1/(kappa x) on [1/kappa, 1].

    ``method="rectified"`` interpolates (1 - exp(-(kappa x / 0.5)^2)) / (kappa x)
    instead; it is kept for comparison and is far less accurate near x = 1/kappa.
    """
    if not kappa > 1:
        raise ParameterError(f"kappa must exceed 1, got {kappa}")
    if degree < 1 or degree % 2 == 0:
        raise ParameterError(f"degree must be odd and positive, got {degree}")
    N = degree + 1
    k = np.arange(N)
    nodes = np.cos(np.pi * (k + 0.5) / N)
    if method == "gks":
        vals = _gks_values(nodes, kappa, N // 2)
    elif method == "rectified":
        vals = _rectified_values(nodes, kappa)
    else:
        raise ParameterError(f"unknown construction {method!r}")
    coeffs = scipy.fft.dct(vals, type=2) / N
    coeffs[0] /= 2.0
    coeffs[0::2] = 0.0
    return ChebyshevPoly(float(kappa), int(degree), coeffs, method)


def sup_grid(kappa: float, m: int = SUP_GRID_POINTS) -> np.ndarray:
    """Chebyshev-Lobatto points on [1/kappa, 1], endpoints included."""
    lo, hi = 1.0 / kappa, 1.0
    t = np.cos(np.pi * np.arange(m) / (m - 1))
    return 0.5 * (hi + lo) + 0.5 * (hi - lo) * t


def poly_sup_error(poly: ChebyshevPoly, m: int = SUP_GRID_POINTS) -> float:
    """max |P(x) - 1/(kappa x)| over a dense grid on [1/kappa, 1]."""
    x = sup_grid(poly.kappa, m)
    return float(np.max(np.abs(poly(x) - 1.0 / (poly.kappa * x))))


def degree_for(kappa: float, c: float) -> int:
    """Smallest odd degree >= c * kappa."""
    d = int(math.ceil(c * kappa))
    return d if d % 2 else d + 1


def clenshaw_apply(sys: GlobalSystem, alpha: float, poly: ChebyshevPoly, rhs=None,
                   growth_limit: float = 1e6) -> np.ndarray:
    """Lower half of P(H) (b_L, 0) for H = [[0, L/alpha], [L^T/alpha, 0]].

    For odd P this equals W P(Sigma/alpha) V^T b_L with L = W Sigma V^T. Iterates
    alternate between the upper and lower halves, so each step costs one
    product with L or L^T.
    """
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    a = poly.coeffs
    if np.any(a[0::2] != 0):
        raise ParameterError("polynomial must be odd")
    x = sys.b_L if rhs is None else np.asarray(rhs, dtype=float)
    d = poly.degree
    if not np.any(a):
        return np.zeros_like(x)
    inv = 1.0 / alpha
    bound = growth_limit * (d + 1) * float(np.sum(np.abs(a))) * max(np.linalg.norm(x), 1e-300)
    # y_{j+2}, y_{j+1}; odd j live in the upper half, even j in the lower half
    y2 = np.zeros_like(x)
    y1 = a[d] * x
    for j in range(d - 1, 0, -1):
        if j % 2:   # upper: 2 (L/alpha) y_{j+1}[lower] + a_j x - y_{j+2}
            y = 2.0 * inv * sys.matvec(y1) + a[j] * x - y2
        else:       # lower: 2 (L^T/alpha) y_{j+1}[upper] - y_{j+2}
            y = 2.0 * inv * sys.rmatvec(y1) - y2
        y2, y1 = y1, y
        if j % 64 == 0:
            nrm = np.linalg.norm(y)
            if not np.isfinite(nrm) or nrm > bound:
                raise SpectralOverflowError(
                    f"Clenshaw iterate norm {nrm:.3e} exceeded {bound:.3e} at j={j}; "
                    f"alpha={alpha} is likely below sigma_max(L)")
    # y_0 - H y_1 = H y_1 + a_0 x - y_2; y_1 is upper, a_0 = 0
    out = inv * sys.rmatvec(y1) - y2
    if not np.all(np.isfinite(out)):
        raise SpectralOverflowError("non-finite Clenshaw output")
    return out


def clenshaw_solve(sys: GlobalSystem, alpha: float, poly: ChebyshevPoly, rhs=None) -> np.ndarray:
    """Approximation of L^{-1} b_L: the Clenshaw output rescaled by kappa / alpha."""
    return (poly.kappa / alpha) * clenshaw_apply(sys, alpha, poly, rhs)
