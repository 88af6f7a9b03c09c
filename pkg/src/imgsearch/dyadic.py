"""Dyadic boxes: products of intervals ``[2^i * y, 2^i * (y+1) - 1]``."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .funcmodel import Box


@dataclass(frozen=True)
class DyadicBox:
    y: tuple[int, ...]
    i: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(int(v) for v in self.y))
        object.__setattr__(self, "i", tuple(int(v) for v in self.i))
        if len(self.y) != len(self.i):
            raise ValueError("y and i must have the same dimension")
        if min(self.i, default=0) < 0 or min(self.y, default=0) < 0:
            raise ValueError("levels and multiples must be non-negative")

    @property
    def dimension(self) -> int:
        return len(self.y)

    @property
    def is_leaf(self) -> bool:
        return not any(self.i)

    def interval(self, j: int) -> tuple[int, int]:
        lo = self.y[j] << self.i[j]
        return lo, lo + (1 << self.i[j]) - 1

    def as_box(self) -> Box:
        return Box.of(*(self.interval(j) for j in range(self.dimension)))

    def valid_for(self, widths: Sequence[int]) -> bool:
        return all(i <= w and y < 1 << (w - i) for y, i, w in zip(self.y, self.i, widths))


def _widths(W, d):
    return tuple(W) if isinstance(W, (tuple, list)) else (int(W),) * d


def level_floor(p, i) -> tuple[int, ...]:
    return tuple(v >> l for v, l in zip(p, i))


def contains(db: DyadicBox, p) -> bool:
    return len(p) == db.dimension and level_floor(p, db.i) == db.y


def children(db: DyadicBox) -> list[DyadicBox]:
    """Halve every dimension of size at least two; leaves have no children."""
    axes = []
    for y, i in zip(db.y, db.i):
        axes.append(((2 * y, i - 1), (2 * y + 1, i - 1)) if i else ((y, 0),))
    if db.is_leaf:
        return []
    return [DyadicBox(tuple(a[0] for a in c), tuple(a[1] for a in c)) for c in product(*axes)]


def decompose_interval(lo: int, hi: int, W: int) -> list[tuple[int, int]]:
    """Canonical minimal cover of ``[lo, hi]`` by dyadic intervals, as ``(y, i)``."""
    out = []
    while lo <= hi:
        i = (lo & -lo).bit_length() - 1 if lo else W
        while i > 0 and lo + (1 << i) - 1 > hi:
            i -= 1
        out.append((lo >> i, i))
        lo += 1 << i
    return out


def decompose(b: Box, W) -> list[DyadicBox]:
    """Partition ``b`` into the product of per-dimension canonical covers."""
    widths = _widths(W, b.dimension)
    for h, w in zip(b.hi, widths):
        if h >> w:
            raise ValueError(f"coordinate {h} does not fit in {w} bits")
    per_dim = [decompose_interval(lo, hi, w) for lo, hi, w in zip(b.lo, b.hi, widths)]
    return [DyadicBox(tuple(c[0] for c in combo), tuple(c[1] for c in combo))
            for combo in product(*per_dim)]
