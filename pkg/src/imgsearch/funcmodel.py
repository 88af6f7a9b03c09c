"""Integer grid functions, query boxes and exact fixed-precision keys.

A :class:`GridFunction` maps ``[0, N)`` to tuples of non-negative integers,
coordinate ``j`` being less than ``2**widths[j]``.  Evaluation is batched:
``batch(xs)`` receives an int64 array and returns one column per coordinate
(int64, or object dtype for coordinates wider than 62 bits).

The key helpers turn geometric quantities (slopes, areas, distances,
intersection ordinates) into non-negative integers whose order matches the
order of the exact rational quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainRangeError, VerticalPairError
from .packing import INT_BITS, column

BatchFn = Callable[[np.ndarray], Sequence[np.ndarray]]


@dataclass(frozen=True)
class GridFunction:
    domain_size: int
    widths: tuple[int, ...]
    batch: BatchFn = field(compare=False, repr=False)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.domain_size < 1:
            raise ValueError("domain must be non-empty")
        if not self.widths or min(self.widths) < 1:
            raise ValueError("every coordinate needs at least one bit")

    @property
    def dimension(self) -> int:
        return len(self.widths)

    @property
    def coord_bits(self) -> int:
        return max(self.widths)

    def eval(self, x: int) -> tuple[int, ...]:
        if not 0 <= x < self.domain_size:
            raise DomainRangeError(f"{x} outside [0, {self.domain_size})")
        cols = self.batch(np.array([x], dtype=np.int64))
        out = tuple(int(c[0]) for c in cols)
        for v, w in zip(out, self.widths):
            if v < 0 or v >> w:
                raise ValueError(f"coordinate {v} does not fit in {w} bits")
        return out

    def eval_batch(self, xs) -> list[np.ndarray]:
        xs = np.asarray(xs, dtype=np.int64)
        if len(xs) and (xs.min() < 0 or xs.max() >= self.domain_size):
            raise DomainRangeError("batch contains out-of-domain indexes")
        return list(self.batch(xs))

    @classmethod
    def from_scalar(cls, domain_size, widths, fn, name=""):
        """Wrap a scalar ``fn(x) -> tuple`` (slow path, for small or ad-hoc functions)."""
        widths = tuple(widths)

        def batch(xs):
            rows = [tuple(fn(int(x))) for x in xs]
            return [column([r[j] for r in rows], w) for j, w in enumerate(widths)]

        return cls(domain_size, widths, batch, name)


@dataclass(frozen=True)
class LinearCoord:
    """One coordinate ``((a*x + b) mod prime) // div mod mod``.

    ``prime = 0`` disables the first reduction.
    """

    a: int
    b: int = 0
    div: int = 1
    mod: int = 0
    prime: int = 0

    def apply(self, xs):
        big = max(abs(self.a), 1) * (int(xs.max()) + 1 if len(xs) else 1) + abs(self.b)
        if big.bit_length() < 63:
            v = self.a * xs + self.b
        else:
            v = xs.astype(object) * self.a + self.b
        if self.prime:
            v = v % self.prime
        if self.div != 1:
            v = v // self.div
        if self.mod:
            v = v % self.mod
        return v


def linear_function(domain_size, coords: Sequence[LinearCoord], widths=None, name="linear"):
    """Vectorized function whose coordinates are :class:`LinearCoord` maps."""
    coords = tuple(coords)
    if widths is None:
        widths = []
        for c in coords:
            if c.mod:
                top = c.mod - 1
            elif c.prime:
                top = (c.prime - 1) // c.div
            else:
                if c.a < 0 or c.b < 0:
                    raise ValueError("widths required for decreasing coordinates")
                top = (c.a * (domain_size - 1) + c.b) // c.div
            widths.append(max(1, int(top).bit_length()))
    widths = tuple(widths)

    def batch(xs):
        return [column(c.apply(xs), w) if w > INT_BITS else c.apply(xs).astype(np.int64)
                for c, w in zip(coords, widths)]

    return GridFunction(domain_size, widths, batch, name)


@dataclass(frozen=True)
class Box:
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same dimension")
        for a, b in zip(self.lo, self.hi):
            if a < 0 or a > b:
                raise ValueError(f"invalid interval [{a}, {b}]")

    @classmethod
    def of(cls, *intervals):
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals))

    @classmethod
    def full(cls, widths):
        return cls(tuple(0 for _ in widths), tuple((1 << w) - 1 for w in widths))

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def intervals(self):
        return list(zip(self.lo, self.hi))

    def contains(self, p) -> bool:
        return all(a <= v <= b for a, v, b in zip(self.lo, p, self.hi))

    def __mul__(self, other: "Box") -> "Box":
        return Box(self.lo + other.lo, self.hi + other.hi)


@dataclass(frozen=True, order=True)
class FixedPointKey:
    value: int
    total_bits: int
    frac_bits: int = 0
    offset: int = 0

    def __post_init__(self):
        if self.value < 0 or self.value >> self.total_bits:
            raise ValueError(f"key {self.value} does not fit in {self.total_bits} bits")

    def approx(self) -> Fraction:
        """The encoded quantity, rounded down to the key's resolution."""
        return Fraction(self.value - self.offset, 1 << self.frac_bits)


def eval_point(f: GridFunction, x: int) -> tuple[int, ...]:
    return f.eval(x)


# --- slopes -----------------------------------------------------------------

def slope_bits(W: int) -> int:
    return 3 * W + 4


def slope_sentinel(W: int) -> int:
    """Key reserved for vertical pairs; larger than every real slope key."""
    return (1 << slope_bits(W)) - 1


def slope_key(p, q, W: int) -> FixedPointKey:
    dx = q[0] - p[0]
    if dx == 0:
        raise VerticalPairError(f"vertical pair {p}, {q}")
    dy = q[1] - p[1]
    if dx < 0:
        dx, dy = -dx, -dy
    frac = 2 * W + 2
    off = 1 << (3 * W + 3)
    return FixedPointKey((dy << frac) // dx + off, slope_bits(W), frac, off)


def slope_keys(x1, y1, x2, y2, W: int) -> np.ndarray:
    """Vector form of :func:`slope_key`; vertical pairs get the sentinel."""
    dx = x2 - x1
    dy = y2 - y1
    neg = dx < 0
    dx = np.where(neg, -dx, dx)
    dy = np.where(neg, -dy, dy)
    vertical = dx == 0
    frac = 2 * W + 2
    if slope_bits(W) <= INT_BITS:
        num = dy.astype(np.int64) << frac
        out = num // np.where(vertical, 1, dx) + (1 << (3 * W + 3))
    else:
        num = dy.astype(object) * (1 << frac)
        out = num // np.where(vertical, 1, dx).astype(object) + (1 << (3 * W + 3))
    out[vertical] = slope_sentinel(W)
    return out


# --- areas ------------------------------------------------------------------

def area_bits(W: int) -> int:
    return 2 * W + 1


def doubled_area_key(p1, p2, p3) -> int:
    return abs((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0]))


def doubled_area_keys(x1, y1, x2, y2, x3, y3) -> np.ndarray:
    return np.abs((x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1))


# --- hyperplanes ------------------------------------------------------------

def _det(m):
    """Exact integer determinant (Bareiss)."""
    m = [list(r) for r in m]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def hyperplane_normal(points):
    """Integer normal of the hyperplane through ``d`` points in ``d`` dimensions."""
    d = len(points)
    base = points[0]
    rows = [[p[j] - base[j] for j in range(d)] for p in points[1:]]
    return [(-1) ** j * _det([r[:j] + r[j + 1:] for r in rows]) for j in range(d)]


def hyperplane_frac_bits(d: int, W: int) -> int:
    """Fractional bits for squared-distance keys.

    Defaults to ``4*d*W`` but never below the bound that separates two
    distinct squared distances ``c1^2/|n1|^2`` and ``c2^2/|n2|^2``.
    """
    fact = 1
    for k in range(2, d):
        fact *= k
    nn_max = d * (fact << (W * (d - 1))) ** 2
    return max(4 * d * W, 2 * nn_max.bit_length() + 1)


def hyperplane_int_bits(d: int, W: int) -> int:
    return (d << (2 * W)).bit_length()


def hyperplane_bits(d: int, W: int, frac_bits=None) -> int:
    F = hyperplane_frac_bits(d, W) if frac_bits is None else frac_bits
    return F + hyperplane_int_bits(d, W)


def hyperplane_distance_key(points, W: int, frac_bits=None) -> FixedPointKey:
    d = len(points)
    F = hyperplane_frac_bits(d, W) if frac_bits is None else frac_bits
    n = hyperplane_normal(points)
    nn = sum(v * v for v in n)
    total = hyperplane_bits(d, W, F)
    if nn == 0:
        return FixedPointKey(0, total, F)
    c = sum(a * b for a, b in zip(n, points[0]))
    return FixedPointKey((c * c << F) // nn, total, F)


def hyperplane_keys(coords, d: int, W: int, frac_bits=None) -> np.ndarray:
    """Vector form; ``coords[k][j]`` is axis ``j`` of point ``k`` (columns)."""
    F = hyperplane_frac_bits(d, W) if frac_bits is None else frac_bits
    cols = [[np.asarray(c).astype(object) for c in pt] for pt in coords]
    if d == 1:
        n = [np.ones(len(cols[0][0]), dtype=object)]
    elif d == 2:
        vx = cols[1][0] - cols[0][0]
        vy = cols[1][1] - cols[0][1]
        n = [vy, -vx]
    elif d == 3:
        u = [cols[1][j] - cols[0][j] for j in range(3)]
        v = [cols[2][j] - cols[0][j] for j in range(3)]
        n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
    else:
        m = len(cols[0][0])
        rows = [hyperplane_normal([[int(cols[k][j][i]) for j in range(d)] for k in range(d)])
                for i in range(m)]
        n = [np.array([r[j] for r in rows], dtype=object) for j in range(d)]
    nn = sum(v * v for v in n)
    c = sum(a * b for a, b in zip(n, cols[0]))
    safe = np.where(nn == 0, 1, nn)
    out = (c * c * (1 << F)) // safe
    out[nn == 0] = 0
    return column(out, hyperplane_bits(d, W, F))


# --- intersections with a vertical line --------------------------------------

@dataclass(frozen=True)
class OrdinateCodec:
    """Key layout for ordinates where segments cross the line ``x = line_x``.

    Integer ordinates are exact multiples of ``2**frac_bits``; any
    non-integer crossing sits strictly between two such multiples.
    """

    W: int
    line_x: int

    @property
    def frac_bits(self) -> int:
        return self.W + 1

    @property
    def int_bits(self) -> int:
        bound = (1 << self.W) * (1 + abs(self.line_x) + (1 << self.W))
        return bound.bit_length()

    @property
    def offset(self) -> int:
        return 1 << (self.int_bits + self.frac_bits)

    @property
    def total_bits(self) -> int:
        return self.int_bits + self.frac_bits + 2

    @property
    def sentinel(self) -> int:
        return (1 << self.total_bits) - 1

    @property
    def every(self) -> int:
        """Marker for pairs collinear with every point of the line."""
        return self.sentinel - 1

    def ordinate(self, q_y: int) -> FixedPointKey | None:
        v = (q_y << self.frac_bits) + self.offset
        if v < 0 or v >= self.every:
            return None
        return FixedPointKey(v, self.total_bits, self.frac_bits, self.offset)


def intersection_key(p1, p2, line_x: int, W: int) -> FixedPointKey:
    codec = OrdinateCodec(W, line_x)
    total, F, off = codec.total_bits, codec.frac_bits, codec.offset
    dx = p2[0] - p1[0]
    if dx == 0:
        if p1[0] == line_x or tuple(p1) == tuple(p2):
            return FixedPointKey(codec.every, total, F, off)
        return FixedPointKey(codec.sentinel, total, F, off)
    num = p1[1] * dx + (line_x - p1[0]) * (p2[1] - p1[1])
    if dx < 0:
        num, dx = -num, -dx
    return FixedPointKey((num << F) // dx + off, total, F, off)


def intersection_keys(x1, y1, x2, y2, codec: OrdinateCodec) -> np.ndarray:
    F = codec.frac_bits
    x1, y1, x2, y2 = (np.asarray(a).astype(object) for a in (x1, y1, x2, y2))
    dx = x2 - x1
    num = y1 * dx + (codec.line_x - x1) * (y2 - y1)
    neg = dx < 0
    num = np.where(neg, -num, num)
    dxp = np.where(neg, -dx, dx)
    vertical = dx == 0
    out = (num * (1 << F)) // np.where(vertical, 1, dxp) + codec.offset
    on_line = vertical & ((x1 == codec.line_x) | (y1 == y2))
    out[vertical] = codec.sentinel
    out[on_line] = codec.every
    return column(out, codec.total_bits)
