"""Node sets as XOR sums of dyadic boxes.

A 1D dyadic cube ``(prefix, k)`` on an n-bit coordinate is the set of values
whose top k bits equal ``prefix``; it costs k controls. A 2D cube is a pair of
1D cubes. A set is a list of 2D cubes whose indicator functions add over GF(2),
so one multi-controlled X per cube flips a target exactly on the set.

Lists are kept as constructed, without cancelling coinciding cubes. The
construction is therefore the same for every grid size: each cube either keeps
its number of controls or gains one per doubling of a dimension in which it
fixes a single point. This is what makes gate counts affine in log2(nx).
"""
from __future__ import annotations

import numpy as np

Cube1 = tuple[int, int]                  # (prefix, fixed top bits)
Cube2 = tuple[Cube1, Cube1]


def dyadic_decomposition(lo: int, hi: int, n_bits: int) -> list[Cube1]:
    """Disjoint aligned blocks covering [lo, hi) in [0, 2^n_bits)."""
    out = []
    x = max(lo, 0)
    hi = min(hi, 1 << n_bits)
    while x < hi:
        size = x & -x if x else 1 << n_bits
        while size > hi - x:
            size >>= 1
        k = n_bits - size.bit_length() + 1
        out.append((x >> (n_bits - k), k))
        x += size
    return out


def point(v: int, n_bits: int) -> list[Cube1]:
    return [(v, n_bits)] if 0 <= v < (1 << n_bits) else []


def shifted_interval(lo: int, hi: int, shift: int, n_bits: int) -> list[Cube1]:
    """[lo + shift, hi + shift) clipped to the grid, for shift in {-1, 0, 1}.

    Written as the aligned split of [lo, hi) plus two single-point corrections:
    [lo + 1, hi + 1) = [lo, hi) + {lo} + {hi} and [lo - 1, hi - 1) = [lo, hi) + {lo - 1} + {hi - 1}.
    """
    base = dyadic_decomposition(lo, hi, n_bits)
    if shift == 0:
        return base
    if shift == 1:
        return base + point(lo, n_bits) + point(hi, n_bits)
    if shift == -1:
        return base + point(lo - 1, n_bits) + point(hi - 1, n_bits)
    raise ValueError("shift must be -1, 0 or 1")


def intersect1(a: Cube1, b: Cube1) -> Cube1 | None:
    (pa, ka), (pb, kb) = a, b
    if ka < kb:
        (pa, ka), (pb, kb) = (pb, kb), (pa, ka)
    return (pa, ka) if pa >> (ka - kb) == pb else None


class CubeSet:
    """GF(2) sum of 2D dyadic cubes over a 2^bx x 2^by grid."""

    def __init__(self, bx: int, by: int, cubes=()):
        self.bx, self.by = bx, by
        self.cubes: list[Cube2] = list(cubes)

    @classmethod
    def product(cls, bx: int, by: int, xs: list[Cube1], ys: list[Cube1]) -> "CubeSet":
        return cls(bx, by, [(a, b) for a in xs for b in ys])

    @classmethod
    def empty(cls, bx: int, by: int) -> "CubeSet":
        return cls(bx, by)

    def __xor__(self, other: "CubeSet") -> "CubeSet":
        return CubeSet(self.bx, self.by, self.cubes + other.cubes)

    def __and__(self, other: "CubeSet") -> "CubeSet":
        out = []
        for ax, ay in self.cubes:
            for bx_, by_ in other.cubes:
                cx, cy = intersect1(ax, bx_), intersect1(ay, by_)
                if cx is not None and cy is not None:
                    out.append((cx, cy))
        return CubeSet(self.bx, self.by, out)

    def __or__(self, other: "CubeSet") -> "CubeSet":
        return self ^ other ^ (self & other)

    def __len__(self):
        return len(self.cubes)

    def mask(self) -> np.ndarray:
        """Dense boolean (2^bx, 2^by) indicator."""
        nx, ny = 1 << self.bx, 1 << self.by
        out = np.zeros((nx, ny), dtype=bool)
        for (px, kx), (py, ky) in self.cubes:
            sx, sy = 1 << (self.bx - kx), 1 << (self.by - ky)
            out[px * sx:(px + 1) * sx, py * sy:(py + 1) * sy] ^= True
        return out


def cube_controls(cube: Cube1, qubits: tuple[int, ...]) -> list[tuple[int, bool]]:
    """Controls fixing the top bits of a register (qubits listed LSB first)."""
    prefix, k = cube
    n = len(qubits)
    return [(qubits[n - k + i], bool((prefix >> i) & 1)) for i in range(k)]
