"""Selection over tuples of points: distances, slopes, areas, hyperplanes, collinearity.

A :class:`TupleIndex` indexes the ordered ``t``-tuples of distinct point
indices.  Each tuple maps to the concatenated coordinates of its points (in
per-axis rank space, so box constraints become rank intervals) scored by an
exact integer key ``delta``.  Ranking and selection by ``delta`` inside a
product of boxes then run on the scored counting index.

Tuples are ordered, so every unordered pair appears twice and every
triangle up to six times.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, InsufficientDataError
from .funcmodel import (Box, GridFunction, OrdinateCodec, area_bits, doubled_area_keys,
                        hyperplane_bits, hyperplane_frac_bits, hyperplane_keys, intersection_keys,
                        slope_bits, slope_keys, slope_sentinel)
from .inversion import (Inverter, KeyFunction, build_dictionary_inverter,
                        build_tradeoff_inverter)
from .order_queries import OrderIndex, build_order_index
from .packing import bits_for, column


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    W: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim != 2 or len(pts) == 0:
            raise InputError("points must be a non-empty (n, d) array")
        if pts.min() < 0 or pts.max() >> self.W:
            raise InputError(f"coordinates must lie in [0, 2^{self.W})")
        object.__setattr__(self, "points", pts)
        if len({tuple(p) for p in pts.tolist()}) < len(pts):
            warnings.warn("point set contains duplicate coordinates; they collapse in "
                          "distinct-value counts", stacklevel=3)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]


def tuple_count(n: int, t: int) -> int:
    return math.perm(n, t)


def decode_tuples(es: np.ndarray, n: int, t: int) -> list[np.ndarray]:
    """Inverse of the mixed-radix code of ordered tuples of distinct indices."""
    digits = []
    for base in range(n - t + 1, n + 1):
        es, r = np.divmod(es, base)
        digits.append(r)
    digits = digits[::-1]
    out = []
    for r in digits:
        idx = r.copy()
        if out:
            # skip indices already used, smallest first
            used = np.sort(np.stack(out), axis=0)
            for row in used:
                idx = idx + (idx >= row)
        out.append(idx)
    return out


def encode_tuple(idx: Sequence[int], n: int) -> int:
    code, used = 0, []
    for j, i in enumerate(idx):
        r = i - sum(1 for u in used if u < i)
        code = code * (n - j) + r
        used.append(i)
    return code


# --- scores ------------------------------------------------------------------
# a score maps coordinate columns coords[k][j] (point k, axis j) to one key column

@dataclass(frozen=True)
class Score:
    name: str
    bits: int
    fn: Callable[[list[list[np.ndarray]]], np.ndarray]


def squared_distance_score(d: int, W: int) -> Score:
    def fn(c):
        return sum((c[0][j] - c[1][j]) ** 2 for j in range(d))

    return Score("sqdist", 2 * W + bits_for(d + 1), fn)


def slope_score(W: int) -> Score:
    return Score("slope", slope_bits(W), lambda c: slope_keys(c[0][0], c[0][1], c[1][0], c[1][1], W))


def area_score(W: int) -> Score:
    return Score("area", area_bits(W),
                 lambda c: doubled_area_keys(c[0][0], c[0][1], c[1][0], c[1][1], c[2][0], c[2][1]))


def hyperplane_score(d: int, W: int) -> Score:
    F = hyperplane_frac_bits(d, W)
    return Score("hyperplane", hyperplane_bits(d, W, F), lambda c: hyperplane_keys(c, d, W, F))


SCORES = {
    "sqdist": lambda t, d, W: squared_distance_score(d, W),
    "slope": lambda t, d, W: slope_score(W),
    "area": lambda t, d, W: area_score(W),
    "hyperplane": lambda t, d, W: hyperplane_score(d, W),
}


class TupleIndex:
    def __init__(self, S: PointSet, t: int, score: Score, order: OrderIndex, axis_values):
        self.S = S
        self.t = t
        self.score = score
        self.order = order
        self.axis_values = axis_values

    def space_words(self) -> int:
        return self.order.space_words() + self.S.n * self.S.d

    def rank_box(self, boxes: Sequence[Box]) -> Box | None:
        if len(boxes) != self.t:
            raise InputError(f"need {self.t} boxes, got {len(boxes)}")
        lo, hi = [], []
        for b in boxes:
            if b.dimension != self.S.d:
                raise InputError(f"box dimension {b.dimension}, points have {self.S.d}")
            for j, vals in enumerate(self.axis_values):
                a = bisect.bisect_left(vals, b.lo[j])
                z = bisect.bisect_right(vals, b.hi[j]) - 1
                if a > z:
                    return None
                lo.append(a)
                hi.append(z)
        return Box(tuple(lo), tuple(hi))

    def decode(self, x: int) -> tuple[int, ...]:
        return tuple(int(c[0]) for c in decode_tuples(np.array([x]), self.S.n, self.t))

    def points_of(self, idx: Sequence[int]) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(v) for v in self.S.points[i]) for i in idx)

    def key_of(self, idx: Sequence[int]) -> int:
        pts = self.S.points[list(idx)]
        cols = [[np.array([pts[k][j]]) for j in range(self.S.d)] for k in range(self.t)]
        return int(self.score.fn(cols)[0])

    def rank(self, boxes, y: int) -> int:
        """Ordered tuples in the boxes with key below ``y``."""
        rb = self.rank_box(boxes)
        return 0 if rb is None else self.order.rank_in_box(rb, y)

    def count(self, boxes) -> int:
        rb = self.rank_box(boxes)
        return 0 if rb is None else self.order.count_in_box(rb)

    def select(self, boxes, k: int) -> tuple[int, ...] | None:
        """Tuple of point indices whose key is the ``k``-th largest in the boxes."""
        rb = self.rank_box(boxes)
        if rb is None:
            return None
        x = self.order.select_in_box(rb, k)
        if x is None:
            return None
        idx = self.decode(x)
        if not all(b.contains(p) for b, p in zip(boxes, self.points_of(idx))):
            raise RuntimeError(f"tuple {idx} is outside the query boxes")
        return idx

    def median(self, boxes) -> tuple[int, ...] | None:
        m = self.count(boxes)
        return None if m == 0 else self.select(boxes, (m + 1) // 2)


def _tuple_function(S: PointSet, t: int, score: Score):
    axis_values = [sorted(set(S.points[:, j].tolist())) for j in range(S.d)]
    ranks = np.stack([np.searchsorted(np.array(v), S.points[:, j])
                      for j, v in enumerate(axis_values)], axis=1)
    coords = [np.array(v, dtype=np.int64) for v in axis_values]
    widths = tuple(bits_for(len(v)) for v in axis_values) * t
    n, d = S.n, S.d

    def batch(es):
        idx = decode_tuples(es, n, t)
        return [ranks[i, j] for i in idx for j in range(d)]

    def mu(cols):
        c = [[coords[j][cols[k * d + j]] for j in range(d)] for k in range(t)]
        return column(np.asarray(score.fn(c)), score.bits)

    return GridFunction(tuple_count(n, t), widths, batch, name=f"tuples{t}"), mu, axis_values


def build_tuple_index(S: PointSet, t: int, delta: str | Score, alpha: float = 0.5,
                      seed: int = 0, engine: str = "tradeoff") -> TupleIndex:
    if not 1 <= t <= S.n:
        raise InputError(f"arity {t} needs at least {t} points")
    score = SCORES[delta](t, S.d, S.W) if isinstance(delta, str) else delta
    f, mu, axis_values = _tuple_function(S, t, score)
    order = build_order_index(f, alpha, seed, families=("scored",), mu=mu,
                              mu_bits=score.bits, engine=engine)
    return TupleIndex(S, t, score, order, axis_values)


def tuple_rank_in_boxes(idx: TupleIndex, boxes, y: int):
    return idx.rank(boxes, y)


def tuple_select_in_boxes(idx: TupleIndex, boxes, k: int):
    return idx.select(boxes, k)


def tuple_median_in_boxes(idx: TupleIndex, boxes):
    return idx.median(boxes)


def triangle_select(idx: TupleIndex, b1: Box, b2: Box, b3: Box, k: int):
    """``(points, doubled_area)`` of the ordered triple with the ``k``-th largest area."""
    found = idx.select((b1, b2, b3), k)
    if found is None:
        return None
    pts = idx.points_of(found)
    (x1, y1), (x2, y2), (x3, y3) = pts
    area2 = abs((x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1))
    if Fraction(area2, 2) * 2 != area2 or area2 != idx.key_of(found):
        raise RuntimeError(f"area mismatch for {pts}")
    return pts, area2


def theil_sen(idx: TupleIndex, b: Box):
    """Upper median slope over non-vertical pairs in ``b``: ``((num, den), (p, q))``."""
    boxes = (b, b)
    W = idx.S.W
    m = idx.rank(boxes, slope_sentinel(W))
    if m == 0:
        raise InsufficientDataError("no non-vertical pair of points in the box")
    total = idx.count(boxes)
    found = idx.select(boxes, (total - m) + (m + 1) // 2)
    p, q = idx.points_of(found)
    s = Fraction(q[1] - p[1], q[0] - p[0])
    return (s.numerator, s.denominator), (p, q)


def hyperplane_select(idx: TupleIndex, boxes, k: int):
    """``(points, key)`` of the ordered tuple with the ``k``-th largest distance key."""
    found = idx.select(boxes, k)
    if found is None:
        return None
    return idx.points_of(found), idx.key_of(found)


# --- collinearity with a point on a vertical line ------------------------------

class CollinearityIndex:
    """Pairs ``(p1, p2)`` in ``S1 x S2`` keyed by where their line meets ``x = line_x``."""

    def __init__(self, S1: PointSet, S2: PointSet, line_x: int, inverter: Inverter):
        self.S1, self.S2 = S1, S2
        self.line_x = line_x
        self.codec = OrdinateCodec(max(S1.W, S2.W), line_x)
        self.inverter = inverter

    def space_words(self) -> int:
        return self.inverter.space_words() + 2 * (self.S1.n + self.S2.n)

    def _pair(self, e: int):
        i, j = divmod(e, self.S2.n)
        return tuple(int(v) for v in self.S1.points[i]), tuple(int(v) for v in self.S2.points[j])

    def query(self, q_y: int):
        """A pair whose line passes through ``(line_x, q_y)``, or None."""
        keys = [self.codec.every]
        ordinate = self.codec.ordinate(q_y)
        if ordinate is not None:
            keys.append(ordinate.value)
        for key in keys:
            e = self.inverter.invert(key)
            if e is not None:
                p1, p2 = self._pair(e)
                cross = (p2[0] - p1[0]) * (q_y - p1[1]) - (p2[1] - p1[1]) * (self.line_x - p1[0])
                if cross != 0:
                    raise RuntimeError(f"pair {(p1, p2)} is not collinear with the query")
                return p1, p2
        return None


def collinearity_key_function(S1: PointSet, S2: PointSet, line_x: int) -> KeyFunction:
    codec = OrdinateCodec(max(S1.W, S2.W), line_x)
    a, b = S1.points, S2.points
    n2 = S2.n

    def columns(es):
        i, j = np.divmod(es, n2)
        return [intersection_keys(a[i, 0], a[i, 1], b[j, 0], b[j, 1], codec)]

    return KeyFunction(S1.n * S2.n, (codec.total_bits,), columns)


def build_collinearity(S1: PointSet, S2: PointSet, line_x: int, alpha: float = 0.5,
                       seed: int = 0, engine: str = "tradeoff") -> CollinearityIndex:
    if S1.d != 2 or S2.d != 2:
        raise InputError("collinearity needs planar points")
    kf = collinearity_key_function(S1, S2, line_x)
    inv = build_dictionary_inverter(kf) if engine == "dictionary" else \
        build_tradeoff_inverter(kf, alpha, seed)
    return CollinearityIndex(S1, S2, line_x, inv)


def collinear_query(cidx: CollinearityIndex, q_y: int):
    return cidx.query(q_y)
