"""Fault-tolerant T-gate estimate for one inverse-polynomial solve."""
from __future__ import annotations

from dataclasses import dataclass, asdict
import math

from .lowering import GateCounts

T_PER_TOFFOLI = 7
KAPPA_PREFACTOR = 4.0
KAPPA_EXPONENT = 1.2
ALPHA_L_DEFAULT = 32.0


def steps_for(T: float, h: float = 0.5) -> int:
    """Smallest power-of-two step count covering time T at step size h."""
    if T <= 0 or h <= 0:
        raise ValueError("T and h must be positive")
    return 1 << max(0, math.ceil(math.log2(T / h - 1e-9)))


def kappa_fit(T: float, alpha: float = ALPHA_L_DEFAULT) -> float:
    """Effective condition number 4 T^1.2 alpha_L from the 1/sigma_min fit."""
    return KAPPA_PREFACTOR * T ** KAPPA_EXPONENT * alpha


@dataclass(frozen=True)
class ResourceEstimate:
    T: float
    kappa_fit: float
    degree: float
    eps_gate: float
    t_toffoli: float
    t_rotation: float
    t_count: float

    def as_dict(self) -> dict:
        return asdict(self)


def estimate_tgates(counts: GateCounts, T: float, eps_base: float = 0.01, c: float = 10.0,
                    alpha: float = ALPHA_L_DEFAULT) -> ResourceEstimate:
    """N_T = N_Tof d 7 + (N_RY d + d + 1) 3 log2(1 / eps_gate), d = c kappa + 1, eps_gate = eps_base / d."""
    if T <= 0:
        raise ValueError("simulation time must be positive")
    if not 0 < eps_base < 1:
        raise ValueError("eps_base must lie in (0, 1)")
    kap = kappa_fit(T, alpha)
    d = c * kap + 1.0
    eps_gate = eps_base / d
    t_tof = counts.toffoli * d * T_PER_TOFFOLI
    t_rot = (counts.ry * d + (d + 1.0)) * 3.0 * math.log2(1.0 / eps_gate)
    return ResourceEstimate(float(T), kap, d, eps_gate, t_tof, t_rot, t_tof + t_rot)
