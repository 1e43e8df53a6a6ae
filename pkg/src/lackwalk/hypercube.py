"""Bit-level hypercube structure.

Vertices are plain integers in ``[0, 2**n)``; direction ``i`` is bit ``i``
(LSB is direction 0), so the neighbor along ``i`` is ``x ^ (1 << i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_DIMENSION = 24


@dataclass(frozen=True)
class HypercubeDims:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise TypeError(f"dimension must be an int, got {self.n!r}")
        if not 2 <= self.n <= MAX_DIMENSION:
            raise ValueError(f"dimension n={self.n} outside [2, {MAX_DIMENSION}]")

    @property
    def N(self) -> int:
        return 1 << self.n

    def check_vertex(self, x: int) -> int:
        if not 0 <= x < self.N:
            raise ValueError(f"vertex {x} outside [0, {self.N})")
        return x


def neighbor(dims: HypercubeDims, x: int, i: int) -> int:
    """Vertex reached from ``x`` along direction ``i``."""
    dims.check_vertex(x)
    if not 0 <= i < dims.n:
        raise ValueError(f"direction {i} outside [0, {dims.n})")
    return x ^ (1 << i)


def hamming_distance(x: int, y: int) -> int:
    return (x ^ y).bit_count()


def is_adjacent(x: int, y: int) -> bool:
    return hamming_distance(x, y) == 1
