"""k-POL indexing: find ``x_j`` in ``S_j`` within intervals with ``p(x_1..x_k) = y``.

The indexed function maps a rank tuple ``(i_1, ..., i_k)`` to
``(i_1, ..., i_k, p(x_1, ..., x_k))`` where ``x_j`` is the ``i_j``-th
smallest element of ``S_j``.  Interval constraints on the values become rank
intervals by binary search in the sorted sets, so the image coordinates stay
``ceil(log2 n)`` bits wide.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InputError
from .funcmodel import Box, GridFunction
from .order_queries import OrderIndex, build_order_index
from .packing import bits_for, column


@dataclass(frozen=True)
class Polynomial:
    """``sum(coef * prod(x_j ** e_j))`` with non-negative integer coefficients."""

    arity: int
    terms: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        terms = tuple((int(c), tuple(int(e) for e in exps)) for c, exps in self.terms)
        object.__setattr__(self, "terms", terms)
        for c, exps in terms:
            if c < 0:
                raise ConfigurationError("coefficients must be non-negative")
            if len(exps) != self.arity or min(exps, default=0) < 0:
                raise ConfigurationError(f"term exponents {exps} do not match arity {self.arity}")

    @property
    def degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def __call__(self, *xs: int) -> int:
        total = 0
        for c, exps in self.terms:
            v = c
            for x, e in zip(xs, exps):
                v *= int(x) ** e
            total += v
        return total

    def evaluate(self, cols: Sequence[np.ndarray]) -> np.ndarray:
        cols = [np.asarray(c).astype(object) for c in cols]
        total = np.zeros(len(cols[0]), dtype=object)
        for c, exps in self.terms:
            v = np.full(len(cols[0]), c, dtype=object)
            for col, e in zip(cols, exps):
                if e:
                    v = v * col ** e
            total = total + v
        return total

    @classmethod
    def sum_of(cls, arity: int) -> "Polynomial":
        return cls(arity, tuple((1, tuple(int(j == i) for j in range(arity))) for i in range(arity)))

    @classmethod
    def parse(cls, text: str, arity: int | None = None) -> "Polynomial":
        """Parse ``"2*x1^2*x2 + x2 + 5"``: ``+``-separated products of an
        integer coefficient and powers ``x<j>`` or ``x<j>^<e>`` (1-based)."""
        raw = []
        for term in text.split("+"):
            term = term.strip()
            if not term:
                raise InputError(f"empty term in polynomial {text!r}")
            coef, exps = 1, {}
            for factor in term.split("*"):
                factor = factor.strip()
                m = re.fullmatch(r"x(\d+)(?:\^(\d+))?", factor)
                if m:
                    j = int(m.group(1))
                    if j < 1:
                        raise InputError("variables are numbered from x1")
                    exps[j] = exps.get(j, 0) + int(m.group(2) or 1)
                elif re.fullmatch(r"\d+", factor):
                    coef *= int(factor)
                else:
                    raise InputError(f"cannot parse factor {factor!r} in {text!r}")
            raw.append((coef, exps))
        k = max([max(e, default=0) for _, e in raw] + [arity or 0])
        return cls(k, tuple((c, tuple(e.get(j, 0) for j in range(1, k + 1))) for c, e in raw))


class KPolIndex:
    def __init__(self, sets, poly: Polynomial, order: OrderIndex, value_bits: int):
        self.sets = sets
        self.poly = poly
        self.order = order
        self.value_bits = value_bits
        self.sizes = tuple(len(s) for s in sets)

    @property
    def ranges(self):
        return self.order.scored.ranges

    @property
    def k(self) -> int:
        return len(self.sets)

    def space_words(self) -> int:
        return self.order.space_words() + sum(self.sizes)

    def _rank_box(self, boxes) -> Box | None:
        if len(boxes) != self.k:
            raise InputError(f"need {self.k} intervals, got {len(boxes)}")
        out = []
        for (lo, hi), s in zip(boxes, self.sets):
            a, b = bisect.bisect_left(s, lo), bisect.bisect_right(s, hi) - 1
            if a > b:
                return None
            out.append((a, b))
        return Box.of(*out)

    def decode(self, x: int) -> tuple[int, ...]:
        ranks = []
        for n in reversed(self.sizes):
            x, r = divmod(x, n)
            ranks.append(r)
        return tuple(s[r] for s, r in zip(self.sets, reversed(ranks)))

    def _target_box(self, boxes, lo, hi):
        rb = self._rank_box(boxes)
        if rb is None or hi < 0 or lo >> self.value_bits:
            return None
        return rb * Box.of((max(lo, 0), min(hi, (1 << self.value_bits) - 1)))

    def query_many(self, boxes, ys) -> list[tuple[int, ...] | None]:
        targets = [self._target_box(boxes, y, y) for y in ys]
        live = [t for t in targets if t is not None]
        found = iter(self.ranges.search_many(live, descend=False))
        out = []
        for y, t in zip(ys, targets):
            x = next(found) if t is not None else None
            out.append(None if x is None else self._verified(x, boxes, y))
        return out

    def _verified(self, x, boxes, y):
        vals = self.decode(x)
        ok = self.poly(*vals) == y and all(lo <= v <= hi for v, (lo, hi) in zip(vals, boxes))
        if not ok:
            raise RuntimeError(f"witness {vals} fails the query constraints")
        return vals

    def query(self, boxes, y: int):
        """Some ``(x_1..x_k)`` with ``x_j`` in ``S_j`` and ``boxes[j]`` and ``p(x) = y``."""
        return self.query_many(boxes, [y])[0]

    def count(self, boxes, y: int) -> int:
        """Number of rank tuples in the boxes with ``p = y``."""
        t = self._target_box(boxes, y, y)
        return 0 if t is None else self.order.scored.count(t)

    def rank(self, boxes, y: int) -> int:
        """Number of tuples in the boxes with ``p < y``."""
        rb = self._rank_box(boxes)
        return 0 if rb is None else self.order.rank_in_box(rb, y)

    def select(self, boxes, k: int):
        """Tuple whose ``p`` value is the ``k``-th largest over tuples in the boxes."""
        rb = self._rank_box(boxes)
        if rb is None:
            return None
        x = self.order.select_in_box(rb, k)
        return None if x is None else self.decode(x)

    def preimage_select(self, boxes, y: int, k: int):
        """``k``-th largest tuple (in rank-tuple order) of ``p^-1(y)`` within the boxes."""
        t = self._target_box(boxes, y, y)
        if t is None:
            return None
        scored = self.order.scored
        found = scored.ranges.report(t, scored.count(t), order_dims=range(self.k))
        if k < 1 or k > len(found):
            return None
        return self.decode(sorted(found, reverse=True)[k - 1])


def _prepare_sets(sets) -> list[list[int]]:
    out = []
    for s in sets:
        vals = sorted({int(v) for v in s})
        if not vals:
            raise InputError("every set must be non-empty")
        if vals[0] < 0:
            raise InputError("set elements must be non-negative")
        out.append(vals)
    return out


def kpol_function(sets, poly: Polynomial, value_bits: int | None = None):
    sizes = [len(s) for s in sets]
    arrays = [np.array(s, dtype=object) for s in sets]
    top = poly(*(s[-1] for s in sets))
    bits = value_bits or bits_for(top + 1)
    if top >> bits:
        raise ConfigurationError(f"polynomial values up to {top} exceed {bits} bits")
    widths = tuple(bits_for(n) for n in sizes)

    def ranks(xs):
        out = []
        for n in reversed(sizes):
            xs, r = np.divmod(xs, n)
            out.append(r)
        return out[::-1]

    def batch(xs):
        return ranks(xs)

    def score(cols):
        vals = [a[c] for a, c in zip(arrays, cols)]
        return column(poly.evaluate(vals), bits)

    n_total = 1
    for n in sizes:
        n_total *= n
    return GridFunction(n_total, widths, batch, name="kpol-ranks"), score, bits


def build_kpol(sets, poly: Polynomial, alpha: float = 0.5, seed: int = 0,
               value_bits: int | None = None, engine: str = "tradeoff") -> KPolIndex:
    sets = _prepare_sets(sets)
    if poly.arity != len(sets):
        raise ConfigurationError(f"polynomial arity {poly.arity} but {len(sets)} sets")
    f, score, bits = kpol_function(sets, poly, value_bits)
    order = build_order_index(f, alpha, seed, families=("scored",), mu=score, mu_bits=bits,
                              engine=engine)
    return KPolIndex(sets, poly, order, bits)


def kpol_query(idx: KPolIndex, boxes, y: int):
    return idx.query(boxes, y)
