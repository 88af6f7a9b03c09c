"""Range searching, counting and reporting over the image of a grid function.

The index never stores the image.  It inverts the levelled function

    g(x, i) = (floor(f_1(x) / 2^i_1), ..., floor(f_d(x) / 2^i_d), i)

whose domain is flattened as ``x * P + level_index`` with
``P = prod(W_j + 1)``.  A dyadic box ``DB(y, i)`` meets the image iff the
key ``(y, i)`` has a preimage under ``g``, so emptiness of any dyadic box costs
one inversion.  The inverter's answer ``x * P + level_index(i)`` also names a
witness ``x``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dyadic import DyadicBox, children
from .errors import InputError
from .funcmodel import Box, GridFunction
from .inversion import (Inverter, KeyFunction, build_dictionary_inverter,
                        build_tradeoff_inverter, domain_words, unique_keys)
from .packing import bits_for, pack


def level_index(i: Sequence[int], widths: Sequence[int]) -> int:
    """Mixed-radix index of a level vector; the first dimension is most significant."""
    out = 0
    for l, w in zip(i, widths):
        out = out * (w + 1) + int(l)
    return out


def decode_levels(li: np.ndarray, widths: Sequence[int]) -> list[np.ndarray]:
    levels = []
    for w in reversed(widths):
        levels.append(li % (w + 1))
        li = li // (w + 1)
    return levels[::-1]


def levelled_key_function(f: GridFunction) -> KeyFunction:
    widths = f.widths
    P = math.prod(w + 1 for w in widths)

    def columns(es):
        x, li = np.divmod(es, P)
        cols = f.batch(x)
        levels = decode_levels(li, widths)
        return [c >> l for c, l in zip(cols, levels)] + [li]

    return KeyFunction(f.domain_size * P, widths + (bits_for(P),), columns)


@dataclass
class QueryStats:
    inversions: int = 0
    boxes: int = 0
    descent_boxes: int = 0

    def clear(self):
        self.inversions = self.boxes = self.descent_boxes = 0


class RangeIndex:
    """Emptiness and witness queries for dyadic boxes in ``f``'s image."""

    def __init__(self, f: GridFunction, inverter: Inverter, alpha: float | None, seed: int,
                 augmented: bool = False):
        self.f = f
        self.inverter = inverter
        self.alpha = alpha
        self.seed = seed
        self.augmented = augmented
        self.widths = f.widths
        self.d = f.dimension
        self.levels_per_x = math.prod(w + 1 for w in self.widths)
        self._key_widths = self.widths + (bits_for(self.levels_per_x),)
        self.stats = QueryStats()

    @property
    def N(self) -> int:
        return self.f.domain_size

    @property
    def base_dimension(self) -> int:
        return self.d - 1 if self.augmented else self.d

    def space_words(self) -> int:
        return self.inverter.space_words()

    def root(self) -> DyadicBox:
        return DyadicBox((0,) * self.d, self.widths)

    def key_rows(self, boxes: Sequence[DyadicBox]) -> np.ndarray:
        cols = [np.array([b.y[j] for b in boxes], dtype=np.int64) for j in range(self.d)]
        cols.append(np.array([level_index(b.i, self.widths) for b in boxes], dtype=np.int64))
        return pack(cols, self._key_widths)

    def witnesses(self, boxes: Sequence[DyadicBox]) -> np.ndarray:
        """For each dyadic box some ``x`` with ``f(x)`` inside it, or -1."""
        if not boxes:
            return np.zeros(0, dtype=np.int64)
        self.stats.inversions += len(boxes)
        e = self.inverter.invert_rows(self.key_rows(boxes))
        return np.where(e >= 0, e // self.levels_per_x, -1)

    def _full_box(self, b: Box) -> Box:
        if self.augmented and b.dimension == self.base_dimension:
            b = b * Box.full((self.widths[-1],))
        if b.dimension != self.d:
            raise InputError(f"box has dimension {b.dimension}, index has {self.d}")
        for lo, hi, w in zip(b.lo, b.hi, self.widths):
            if hi >> w:
                raise InputError(f"box coordinate {hi} does not fit in {w} bits")
        return b

    def pieces(self, boxes: Sequence[Box], first_only: bool = False):
        """Nonempty canonical dyadic pieces of each query box, with witnesses.

        Top-down over the dyadic tree: a node inside the box is a piece, a
        node crossing it is split along its first uncontained dimension, and
        empty nodes are discarded after one batched inversion per round.
        With ``first_only`` a query stops at its first nonempty piece.
        Returns one list of ``(DyadicBox, x)`` per query box.
        """
        boxes = [self._full_box(b) for b in boxes]
        out = [[] for _ in boxes]
        done = set()
        candidates = [(q, self.root()) for q in range(len(boxes))]
        while candidates:
            self.stats.boxes += len(candidates)
            wit = self.witnesses([node for _, node in candidates])
            frontier = []
            for (q, node), x in zip(candidates, wit):
                if x < 0 or q in done:
                    continue
                j = self._crossing_dim(node, boxes[q])
                if j < 0:
                    out[q].append((node, int(x)))
                    if first_only:
                        done.add(q)
                else:
                    frontier.append((q, node, j))
            candidates = []
            for q, node, j in frontier:
                if q in done:
                    continue
                b = boxes[q]
                for half in (0, 1):
                    y, i = list(node.y), list(node.i)
                    y[j], i[j] = 2 * y[j] + half, i[j] - 1
                    lo = y[j] << i[j]
                    if lo + (1 << i[j]) - 1 >= b.lo[j] and lo <= b.hi[j]:
                        candidates.append((q, DyadicBox(tuple(y), tuple(i))))
        return out

    def _crossing_dim(self, node: DyadicBox, b: Box) -> int:
        for j in range(self.d):
            lo, hi = node.interval(j)
            if lo < b.lo[j] or hi > b.hi[j]:
                return j
        return -1

    def descend(self, node: DyadicBox, x: int = -1) -> int:
        """Walk from a nonempty box to a nonempty leaf; returns the leaf's witness."""
        self.stats.descent_boxes += 1
        while not node.is_leaf:
            kids = children(node)
            self.stats.descent_boxes += len(kids)
            wit = self.witnesses(kids)
            hit = np.flatnonzero(wit >= 0)
            if len(hit) == 0:
                raise RuntimeError("nonempty box has no nonempty child")
            node, x = kids[int(hit[0])], int(wit[hit[0]])
        return x if x >= 0 else int(self.witnesses([node])[0])

    def search_many(self, boxes: Sequence[Box], descend: bool = True) -> list[int | None]:
        res = self.pieces(boxes, first_only=True)
        out = []
        for found in res:
            if not found:
                out.append(None)
            elif descend:
                out.append(self.descend(*found[0]))
            else:
                out.append(found[0][1])
        return out

    def search(self, b: Box, descend: bool = True) -> int | None:
        """Some ``x`` with ``f(x)`` in ``b``, or None."""
        return self.search_many([b], descend)[0]

    def report(self, b: Box, k: int, order_dims: Sequence[int] | None = None) -> list[int]:
        """Up to ``k`` witnesses, the smallest in the lexicographic order of ``order_dims``.

        Best-first over nonempty dyadic boxes keyed by the lower corner of
        their ``order_dims`` projection.  On the augmented index the default
        order is ``x`` itself, so the result is the ``k`` smallest witnesses,
        returned in increasing order.
        """
        return self.report_many([b], k, order_dims)[0]

    def report_many(self, boxes: Sequence[Box], k: int,
                    order_dims: Sequence[int] | None = None) -> list[list[int]]:
        """:meth:`report` for several boxes, sharing one inversion batch per round."""
        if k <= 0:
            return [[] for _ in boxes]
        od = (self.d - 1,) if order_dims is None else tuple(order_dims)

        def corner(node):
            return tuple(node.y[j] << node.i[j] for j in od)

        heaps = []
        for found in self.pieces(boxes):
            heap = [(corner(node), n, node, x) for n, (node, x) in enumerate(found)]
            heapq.heapify(heap)
            heaps.append(heap)
        tick = max((len(h) for h in heaps), default=0)
        results = [[] for _ in boxes]
        active = [q for q in range(len(boxes)) if heaps[q]]
        while active:
            expand, owner = [], []
            for q in active:
                heap, found = heaps[q], results[q]
                # a leaf may only be taken before any expansion in the same round,
                # since children can sort below later heap entries
                opened = 0
                while heap and len(found) < k and opened < k - len(found):
                    node = heap[0][2]
                    if node.is_leaf:
                        if opened:
                            break
                        found.append(heapq.heappop(heap)[3])
                    else:
                        heapq.heappop(heap)
                        kids = children(node)
                        expand.extend(kids)
                        owner.extend([q] * len(kids))
                        opened += 1
            for q, node, x in zip(owner, expand, self.witnesses(expand)):
                if x >= 0:
                    heapq.heappush(heaps[q], (corner(node), tick, node, int(x)))
                    tick += 1
            active = [q for q in active if heaps[q] and len(results[q]) < k]
        if order_dims is None:
            return [sorted(r) for r in results]
        return results


def augmented_function(f: GridFunction) -> GridFunction:
    """``x -> (f(x), x)``, injective by construction."""
    wx = bits_for(f.domain_size)

    def batch(xs):
        return list(f.batch(xs)) + [xs.astype(np.int64)]

    return GridFunction(f.domain_size, f.widths + (wx,), batch, name=f"({f.name},x)")


def _inverter_for(kf, alpha, seed, engine):
    if engine == "dictionary":
        return build_dictionary_inverter(kf)
    if engine == "tradeoff":
        return build_tradeoff_inverter(kf, alpha, seed)
    raise InputError(f"unknown inversion engine {engine!r}")


def build_range_index(f: GridFunction, alpha: float = 0.5, seed: int = 0,
                      engine: str = "tradeoff", augment: bool = False) -> RangeIndex:
    """Index the image of ``f`` (or of ``(f(x), x)`` with ``augment``)."""
    if engine == "tradeoff" and not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    g = augmented_function(f) if augment else f
    inv = _inverter_for(levelled_key_function(g), alpha, seed, engine)
    return RangeIndex(g, inv, alpha if engine == "tradeoff" else None, seed, augmented=augment)


def build_report_index(f: GridFunction, alpha: float = 0.5, seed: int = 0,
                       engine: str = "tradeoff") -> RangeIndex:
    return build_range_index(f, alpha, seed, engine, augment=True)


def search(idx: RangeIndex, b: Box):
    return idx.search(b)


def report(idx: RangeIndex, b: Box, k: int):
    return idx.report(b, k)


# --- weighted counting -------------------------------------------------------

WeightFn = Callable[[Sequence[np.ndarray]], np.ndarray]


def unit_weight(cols: Sequence[np.ndarray]) -> np.ndarray:
    return np.ones(len(cols[0]), dtype=np.int64)


def count_threshold(N: int, alpha_q: float) -> int:
    return max(1, math.ceil(N ** (alpha_q / 4)))


class CountIndex:
    """Weighted counting over distinct image values.

    Dyadic boxes holding at least ``threshold`` distinct values are stored
    with their exact weighted sum; lighter boxes are counted by descending
    through their nonempty children.
    """

    def __init__(self, ranges: RangeIndex, alpha_q: float, weight: WeightFn,
                 threshold: int, heavy_rows: np.ndarray, heavy_sums: np.ndarray):
        self.ranges = ranges
        self.alpha_q = alpha_q
        self.weight = weight
        self.threshold = threshold
        self.heavy_rows = heavy_rows
        self.heavy_sums = heavy_sums
        self._heavy = {r.tobytes(): int(s) for r, s in zip(heavy_rows, heavy_sums)}

    @property
    def stats(self) -> QueryStats:
        return self.ranges.stats

    @property
    def heavy_boxes(self) -> int:
        return len(self.heavy_sums)

    def dictionary_words(self) -> int:
        return len(self.heavy_sums) * (self.heavy_rows.shape[1] + 1)

    def space_words(self) -> int:
        return self.ranges.space_words() + self.dictionary_words()

    def _stored(self, boxes):
        rows = self.ranges.key_rows(boxes)
        return [self._heavy.get(r.tobytes()) for r in rows]

    def _leaf_weight(self, leaves) -> int:
        cols = [np.array([b.y[j] for b in leaves], dtype=object if w > 62 else np.int64)
                for j, w in enumerate(self.ranges.widths)]
        return int(sum(int(v) for v in self.weight(cols)))

    def count_many(self, boxes: Sequence[Box]) -> list[int]:
        out = []
        for found in self.ranges.pieces(boxes):
            total = 0
            frontier = []
            nodes = [node for node, _ in found]
            for node, s in zip(nodes, self._stored(nodes) if nodes else []):
                if s is not None:
                    total += s
                else:
                    frontier.append(node)
            # light pieces: breadth-first over nonempty children, summing leaves
            while frontier:
                leaves = [n for n in frontier if n.is_leaf]
                if leaves:
                    total += self._leaf_weight(leaves)
                kids = [c for n in frontier if not n.is_leaf for c in children(n)]
                if not kids:
                    break
                wit = self.ranges.witnesses(kids)
                frontier = [c for c, x in zip(kids, wit) if x >= 0]
            out.append(total)
        return out

    def count(self, b: Box) -> int:
        return self.count_many([b])[0]


def _group(rows):
    if rows.shape[1] == 1:
        u, inv, counts = np.unique(rows[:, 0], return_inverse=True, return_counts=True)
        return u[:, None], inv.ravel(), counts
    void = np.ascontiguousarray(rows).view(np.dtype((np.void, rows.shape[1] * 8))).ravel()
    _, first, inv, counts = np.unique(void, return_index=True, return_inverse=True,
                                      return_counts=True)
    return rows[first], inv.ravel(), counts


def _heavy_boxes(f: GridFunction, weight: WeightFn, threshold: int):
    rows = domain_words(KeyFunction(f.domain_size, f.widths, f.batch))
    _, first, _ = unique_keys(rows)
    first = np.sort(first)
    values = f.batch(first.astype(np.int64))
    w = np.asarray(weight(values))
    w = w.astype(object) if w.dtype == object else w.astype(np.int64)
    widths = f.widths
    key_widths = widths + (bits_for(math.prod(x + 1 for x in widths)),)
    keep_rows, keep_sums = [], []
    for levels in np.ndindex(*(x + 1 for x in widths)):
        li = level_index(levels, widths)
        cols = [v >> l for v, l in zip(values, levels)]
        cols.append(np.full(len(first), li, dtype=np.int64))
        packed = pack(cols, key_widths)
        uniq, inverse, counts = _group(packed)
        heavy = counts >= threshold
        if not heavy.any():
            continue
        order = np.argsort(inverse, kind="stable")
        starts = np.r_[0, np.cumsum(counts)[:-1]]
        sums = np.add.reduceat(w[order], starts)
        keep_rows.append(uniq[heavy])
        keep_sums.append(np.asarray(sums)[heavy])
    n_words = len(pack([np.zeros(1, np.int64)] * len(key_widths), key_widths)[0])
    if not keep_rows:
        return np.zeros((0, n_words), np.uint64), np.zeros(0, np.int64)
    return np.concatenate(keep_rows), np.concatenate(keep_sums)


def build_count_index(f: GridFunction, alpha_q: float = 0.5, seed: int = 0,
                      weight: WeightFn | None = None, engine: str = "tradeoff") -> CountIndex:
    """Counting index answering in about ``N**alpha_q`` evaluations.

    The internal inverter runs at exponent ``3 * alpha_q / 4``; boxes with
    ``ceil(N**(alpha_q / 4))`` or more distinct values are stored explicitly.
    """
    if not 0 < alpha_q < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha_q}")
    weight = weight or unit_weight
    ranges = build_range_index(f, 0.75 * alpha_q, seed, engine)
    tau = count_threshold(f.domain_size, alpha_q)
    rows, sums = _heavy_boxes(f, weight, tau)
    return CountIndex(ranges, alpha_q, weight, tau, rows, sums)


def count(idx: CountIndex, b: Box) -> int:
    return idx.count(b)
