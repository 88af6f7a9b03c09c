"""Predecessor, rank, selection, median and preimage queries.

Every query is a bisection over integer thresholds whose predicate is a
search or a count on a suitable index:

* ``values``: counting index over ``f`` itself (distinct values);
* ``pairs``: counting index over the injective ``x -> (f(x), x)``, which
  turns distinct-value counts into domain-multiplicity counts and supports
  the preimage family;
* ``scored``: counting index over ``x -> (f(x), mu(f(x)))`` for ranking and
  selection by a score inside a box.

Selection is 1-indexed from the top: ``k = 1`` is the largest value.  The
median of ``m`` items is the ``ceil(m / 2)``-th largest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, InputError
from .funcmodel import Box, GridFunction
from .packing import bits_for
from .range_index import CountIndex, augmented_function, build_count_index

ScoreFn = Callable[[Sequence[np.ndarray]], np.ndarray]


def scored_function(f: GridFunction, mu: ScoreFn, mu_bits: int) -> GridFunction:
    """``x -> (f(x), mu(f(x)))``."""

    def batch(xs):
        cols = list(f.batch(xs))
        return cols + [np.asarray(mu(cols))]

    return GridFunction(f.domain_size, f.widths + (mu_bits,), batch, name=f"({f.name},mu)")


def _largest_true(lo: int, hi: int, pred) -> tuple[int | None, int]:
    """Largest ``t`` in ``[lo, hi]`` with ``pred(t)`` for a predicate true on a prefix."""
    steps = 1
    if not pred(lo):
        return None, steps
    while lo < hi:
        mid = (lo + hi + 1) // 2
        steps += 1
        if pred(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo, steps


@dataclass
class OrderIndex:
    f: GridFunction
    values: CountIndex | None = None
    pairs: CountIndex | None = None
    scored: CountIndex | None = None
    mu: ScoreFn | None = field(default=None, repr=False)
    mu_bits: int = 0
    last_steps: int = 0

    def _need(self, part: str) -> CountIndex:
        idx = getattr(self, part)
        if idx is None:
            raise ConfigurationError(f"index was built without the {part!r} family")
        return idx

    @property
    def W(self) -> int:
        return self.f.widths[0]

    @property
    def x_bits(self) -> int:
        return bits_for(self.f.domain_size)

    def _one_dim(self):
        if self.f.dimension != 1:
            raise InputError("this query needs a one-dimensional function")

    def space_words(self) -> int:
        return sum(p.space_words() for p in (self.values, self.pairs, self.scored) if p)

    def reset_counter(self):
        for p in (self.values, self.pairs, self.scored):
            if p:
                p.ranges.inverter.reset_counter()

    @property
    def eval_counter(self) -> int:
        return sum(p.ranges.inverter.eval_counter for p in (self.values, self.pairs, self.scored) if p)

    # --- one-dimensional value queries ---------------------------------

    def predecessor(self, y: int, strict: bool = False) -> int | None:
        """``x`` maximizing ``f(x)`` subject to ``f(x) <= y`` (``< y`` when strict)."""
        self._one_dim()
        top = min(y - 1 if strict else y, (1 << self.W) - 1)
        if top < 0:
            self.last_steps = 0
            return None
        ranges = self._any_ranges()
        found = {}

        def pred(z):
            found[z] = ranges.search(Box.of((z, top)), descend=False)
            return found[z] is not None

        z, self.last_steps = _largest_true(0, top, pred)
        return None if z is None else found[z]

    def _any_ranges(self):
        if self.values is not None:
            return self.values.ranges
        return self._need("pairs").ranges

    def rank(self, y: int) -> int:
        """``|{x : f(x) < y}|`` counted over the domain."""
        self._one_dim()
        self.last_steps = 1
        if y <= 0:
            return 0
        hi = min(y - 1, (1 << self.W) - 1)
        return self._need("pairs").count(Box.of((0, hi), (0, (1 << self.x_bits) - 1)))

    def rank_distinct(self, y: int) -> int:
        """Number of distinct image values below ``y``."""
        self._one_dim()
        self.last_steps = 1
        if y <= 0:
            return 0
        return self._need("values").count(Box.of((0, min(y - 1, (1 << self.W) - 1))))

    def select(self, k: int) -> int | None:
        """``x`` whose value is the ``k``-th largest distinct image value."""
        self._one_dim()
        values = self._need("values")
        top = (1 << self.W) - 1
        if k < 1:
            self.last_steps = 0
            return None
        t, self.last_steps = _largest_true(0, top, lambda t: values.count(Box.of((t, top))) >= k)
        return None if t is None else values.ranges.search(Box.of((t, t)), descend=False)

    # --- scored queries inside a box -----------------------------------

    def _score_box(self, b: Box, lo: int, hi: int) -> Box:
        return b * Box.of((lo, hi))

    def rank_in_box(self, b: Box, y: int) -> int:
        """Distinct values in ``b`` whose score is below ``y``."""
        scored = self._need("scored")
        self.last_steps = 1
        if y <= 0:
            return 0
        return scored.count(self._score_box(b, 0, min(y - 1, (1 << self.mu_bits) - 1)))

    def count_in_box(self, b: Box) -> int:
        return self._need("scored").count(self._score_box(b, 0, (1 << self.mu_bits) - 1))

    def select_in_box(self, b: Box, k: int) -> int | None:
        """``x`` whose score is the ``k``-th largest over distinct values in ``b``."""
        scored = self._need("scored")
        top = (1 << self.mu_bits) - 1
        if k < 1:
            self.last_steps = 0
            return None
        t, self.last_steps = _largest_true(
            0, top, lambda t: scored.count(self._score_box(b, t, top)) >= k)
        if t is None:
            return None
        return scored.ranges.search(self._score_box(b, t, t), descend=False)

    def median_in_box(self, b: Box) -> int | None:
        m = self.count_in_box(b)
        if m == 0:
            return None
        return self.select_in_box(b, (m + 1) // 2)

    # --- preimage queries --------------------------------------------

    def _preimage_box(self, y: int, lo: int, hi: int) -> Box:
        return Box.of((y, y), (lo, hi))

    def preimage_rank(self, y: int, z: int) -> int:
        """``|{x < z : f(x) = y}|``."""
        self._one_dim()
        pairs = self._need("pairs")
        self.last_steps = 1
        if z <= 0 or y >> self.W or y < 0:
            return 0
        return pairs.count(self._preimage_box(y, 0, min(z, self.f.domain_size) - 1))

    def preimage_count(self, y: int) -> int:
        return self.preimage_rank(y, self.f.domain_size)

    def preimage_select(self, y: int, k: int) -> int | None:
        """The ``k``-th largest ``x`` with ``f(x) = y``."""
        self._one_dim()
        pairs = self._need("pairs")
        top = self.f.domain_size - 1
        if k < 1 or y < 0 or y >> self.W:
            self.last_steps = 0
            return None
        t, self.last_steps = _largest_true(
            0, top, lambda t: pairs.count(self._preimage_box(y, t, top)) >= k)
        return t

    def preimage_median(self, y: int) -> int | None:
        m = self.preimage_count(y)
        if m == 0:
            return None
        return self.preimage_select(y, (m + 1) // 2)


FAMILIES = ("values", "pairs", "scored")


def build_order_index(f: GridFunction, alpha: float = 0.5, seed: int = 0,
                      families: Sequence[str] = ("values", "pairs"),
                      mu: ScoreFn | None = None, mu_bits: int | None = None,
                      engine: str = "tradeoff") -> OrderIndex:
    """Build the counting indexes needed by the requested query families."""
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise ConfigurationError(f"unknown query families {sorted(unknown)}")
    out = OrderIndex(f, mu=mu, mu_bits=mu_bits or 0)
    if "values" in families:
        out.values = build_count_index(f, alpha, seed, engine=engine)
    if "pairs" in families:
        out.pairs = build_count_index(augmented_function(f), alpha, seed, engine=engine)
    if "scored" in families:
        if mu is None or not mu_bits:
            raise ConfigurationError("the scored family needs mu and mu_bits")
        out.scored = build_count_index(scored_function(f, mu, mu_bits), alpha, seed,
                                       engine=engine)
    return out


def predecessor(idx: OrderIndex, y: int, strict: bool = False):
    return idx.predecessor(y, strict)


def rank(idx: OrderIndex, y: int):
    return idx.rank(y)


def select(idx: OrderIndex, k: int):
    return idx.select(k)


def rank_in_box(idx: OrderIndex, b: Box, y: int):
    return idx.rank_in_box(b, y)


def select_in_box(idx: OrderIndex, b: Box, k: int):
    return idx.select_in_box(b, k)


def median_in_box(idx: OrderIndex, b: Box):
    return idx.median_in_box(b)


def preimage_rank(idx: OrderIndex, y: int, z: int):
    return idx.preimage_rank(y, z)


def preimage_select(idx: OrderIndex, y: int, k: int):
    return idx.preimage_select(y, k)


def preimage_median(idx: OrderIndex, y: int):
    return idx.preimage_median(y)
