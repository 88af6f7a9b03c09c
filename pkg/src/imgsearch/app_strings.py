"""Suffix arrays, birange proximity and gapped string indexing.

Occurrences of a pattern are a contiguous block of suffix-array ranks, so a
gapped query "P1 at x, P2 at y, |x - y| in gap" becomes a box over pairs of
ranks plus one coordinate holding the distance between their positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .funcmodel import Box, GridFunction
from .packing import bits_for
from .range_index import CountIndex, RangeIndex, build_count_index


@dataclass(frozen=True)
class SuffixArray:
    text: bytes
    sa: np.ndarray

    @property
    def n(self) -> int:
        return len(self.text)


def build_suffix_array(text: bytes) -> SuffixArray:
    """Prefix doubling: sort by rank pairs of length ``2h`` until all ranks differ."""
    if isinstance(text, str):
        text = text.encode()
    n = len(text)
    if n == 0:
        raise InputError("text must be non-empty")
    rank = np.frombuffer(text, dtype=np.uint8).astype(np.int64)
    sa = np.argsort(rank, kind="stable")
    h = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if h < n:
            second[:n - h] = rank[h:]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        new = np.empty(n, dtype=np.int64)
        change = np.r_[0, ((r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])).astype(np.int64)]
        new[sa] = np.cumsum(change)
        rank = new
        if rank.max() == n - 1 or h >= n:
            break
        h *= 2
    return SuffixArray(text, sa.astype(np.int64))


def pattern_interval(sa: SuffixArray, pattern: bytes) -> tuple[int, int] | None:
    """Rank interval of the suffixes starting with ``pattern``."""
    if isinstance(pattern, str):
        pattern = pattern.encode()
    text, s, m = sa.text, sa.sa, len(pattern)
    if m == 0:
        return 0, sa.n - 1

    def prefix(j):
        p = int(s[j])
        return text[p:p + m]

    lo, hi = 0, sa.n
    while lo < hi:
        mid = (lo + hi) // 2
        if prefix(mid) < pattern:
            lo = mid + 1
        else:
            hi = mid
    start = lo
    hi = sa.n
    while lo < hi:
        mid = (lo + hi) // 2
        if prefix(mid) <= pattern:
            lo = mid + 1
        else:
            hi = mid
    return (start, lo - 1) if lo > start else None


# --- birange -----------------------------------------------------------------

def birange_function(A: np.ndarray) -> GridFunction:
    A = np.asarray(A, dtype=np.int64)
    n = len(A)
    w = bits_for(n)
    wv = bits_for(int(A.max()) + 1) if n else 1

    def batch(es):
        x, y = np.divmod(es, n)
        return [x, y, np.abs(A[x] - A[y])]

    return GridFunction(n * n, (w, w, wv), batch, name="birange")


class BirangeIndex:
    """Pairs ``(x, y)`` with ``x`` in ``xr``, ``y`` in ``yr`` and ``|A[x]-A[y]|`` in ``gap``."""

    def __init__(self, A, counts: CountIndex):
        self.A = np.asarray(A, dtype=np.int64)
        self.counts = counts

    @property
    def ranges(self) -> RangeIndex:
        return self.counts.ranges

    @property
    def n(self) -> int:
        return len(self.A)

    def space_words(self) -> int:
        return self.counts.space_words()

    def _box(self, xr, yr, gap) -> Box | None:
        top = (1 << self.ranges.widths[2]) - 1
        lo = (max(xr[0], 0), max(yr[0], 0), max(gap[0], 0))
        hi = (min(xr[1], self.n - 1), min(yr[1], self.n - 1), min(gap[1], top))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def report(self, xr, yr, gap, k: int) -> list[tuple[int, int]]:
        """Up to ``k`` pairs, the lexicographically smallest, in increasing order."""
        b = self._box(xr, yr, gap)
        if b is None or k <= 0:
            return []
        es = self.ranges.report(b, k, order_dims=(0, 1))
        out = []
        for e in es:
            x, y = divmod(int(e), self.n)
            if not (xr[0] <= x <= xr[1] and yr[0] <= y <= yr[1]
                    and gap[0] <= abs(int(self.A[x]) - int(self.A[y])) <= gap[1]):
                raise RuntimeError(f"pair {(x, y)} fails the query constraints")
            out.append((x, y))
        return out

    def count(self, xr, yr, gap) -> int:
        b = self._box(xr, yr, gap)
        return 0 if b is None else self.counts.count(b)


def build_birange(A, alpha: float = 0.5, seed: int = 0, engine: str = "tradeoff") -> BirangeIndex:
    A = np.asarray(A, dtype=np.int64)
    if len(A) == 0 or A.min() < 0:
        raise InputError("array must be non-empty with non-negative values")
    return BirangeIndex(A, build_count_index(birange_function(A), alpha, seed, engine=engine))


def birange_report(idx: BirangeIndex, xr, yr, gap, k: int):
    return idx.report(xr, yr, gap, k)


# --- gapped string indexing ----------------------------------------------------

class GappedIndex:
    def __init__(self, sa: SuffixArray, birange: BirangeIndex):
        self.sa = sa
        self.birange = birange

    def space_words(self) -> int:
        return self.birange.space_words() + self.sa.n

    def _check(self, pairs, p1, p2, gap):
        t = self.sa.text
        for x, y in pairs:
            if not (t.startswith(p1, x) and t.startswith(p2, y) and gap[0] <= abs(x - y) <= gap[1]):
                raise RuntimeError(f"pair {(x, y)} fails the query constraints")

    def report(self, p1: bytes, p2: bytes, gap, k: int) -> list[tuple[int, int]]:
        """Up to ``k`` position pairs ``(x, y)``: ``p1`` at ``x``, ``p2`` at ``y``."""
        p1, p2 = _bytes(p1), _bytes(p2)
        r1, r2 = pattern_interval(self.sa, p1), pattern_interval(self.sa, p2)
        if r1 is None or r2 is None:
            return []
        ranks = self.birange.report(r1, r2, gap, k)
        s = self.sa.sa
        pairs = sorted((int(s[a]), int(s[b])) for a, b in ranks)
        self._check(pairs, p1, p2, gap)
        return pairs

    def count(self, p1: bytes, p2: bytes, gap) -> int:
        r1, r2 = pattern_interval(self.sa, _bytes(p1)), pattern_interval(self.sa, _bytes(p2))
        if r1 is None or r2 is None:
            return 0
        return self.birange.count(r1, r2, gap)


def _bytes(p) -> bytes:
    return p.encode() if isinstance(p, str) else bytes(p)


def build_gapped(text: bytes, alpha: float = 0.5, seed: int = 0,
                 engine: str = "tradeoff") -> GappedIndex:
    sa = build_suffix_array(_bytes(text))
    return GappedIndex(sa, build_birange(sa.sa, alpha, seed, engine))


def gapped_report(idx: GappedIndex, p1, p2, gap, k: int):
    return idx.report(p1, p2, gap, k)


# --- generalized gapped indexing --------------------------------------------------

def generalized_function(sa: SuffixArray, d: int, windows: bool) -> GridFunction:
    """Rank ``d``-tuples to ``(ranks, [positions], pairwise |position differences|)``."""
    n = sa.n
    pos = sa.sa
    w = bits_for(n)
    pairs = list(combinations(range(d), 2))
    widths = (w,) * d + ((w,) * d if windows else ()) + (w,) * len(pairs)

    def batch(es):
        ranks = []
        for _ in range(d):
            es, r = np.divmod(es, n)
            ranks.append(r)
        ranks = ranks[::-1]
        ps = [pos[r] for r in ranks]
        return ranks + (ps if windows else []) + [np.abs(ps[i] - ps[j]) for i, j in pairs]

    return GridFunction(n ** d, widths, batch, name=f"gapped{d}")


class GeneralizedGappedIndex:
    def __init__(self, sa: SuffixArray, d: int, windows: bool, counts: CountIndex):
        self.sa = sa
        self.d = d
        self.windows = windows
        self.counts = counts

    def space_words(self) -> int:
        return self.counts.space_words() + self.sa.n

    def _box(self, patterns, pair_gaps, pos_windows) -> Box | None:
        if len(patterns) != self.d:
            raise InputError(f"need {self.d} patterns, got {len(patterns)}")
        n = self.sa.n
        top = n - 1
        lo, hi = [], []
        for p in patterns:
            r = pattern_interval(self.sa, _bytes(p))
            if r is None:
                return None
            lo.append(r[0])
            hi.append(r[1])
        if self.windows:
            wins = pos_windows or [(0, top)] * self.d
            for a, b in wins:
                lo.append(max(a, 0))
                hi.append(min(b, top))
        elif pos_windows and any(a > 0 or b < top for a, b in pos_windows):
            raise InputError("index was built without position windows")
        for i, j in combinations(range(self.d), 2):
            a, b = pair_gaps.get((i, j), (0, top)) if pair_gaps else (0, top)
            lo.append(max(a, 0))
            hi.append(min(b, top))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(tuple(lo), tuple(hi))

    def _decode(self, e: int) -> tuple[int, ...]:
        ranks = []
        for _ in range(self.d):
            e, r = divmod(e, self.sa.n)
            ranks.append(r)
        return tuple(int(self.sa.sa[r]) for r in reversed(ranks))

    def _valid(self, t, patterns, pair_gaps, pos_windows) -> bool:
        text = self.sa.text
        if not all(text.startswith(_bytes(p), x) for p, x in zip(patterns, t)):
            return False
        if pos_windows and not all(a <= x <= b for x, (a, b) in zip(t, pos_windows)):
            return False
        for (i, j), (a, b) in (pair_gaps or {}).items():
            if not a <= abs(t[i] - t[j]) <= b:
                return False
        return True

    def query(self, patterns, pair_gaps: Mapping | None = None, pos_windows=None,
              k: int = 10, mode: str = "report"):
        b = self._box(patterns, pair_gaps, pos_windows)
        if mode == "count":
            return 0 if b is None else self.counts.count(b)
        if mode != "report":
            raise InputError(f"unknown mode {mode!r}")
        if b is None or k <= 0:
            return []
        es = self.counts.ranges.report(b, k, order_dims=range(self.d))
        out = sorted(self._decode(int(e)) for e in es)
        for t in out:
            if not self._valid(t, patterns, pair_gaps, pos_windows):
                raise RuntimeError(f"tuple {t} fails the query constraints")
        return out


def build_generalized_gapped(text: bytes, d: int, alpha: float = 0.5, seed: int = 0,
                             windows: bool = True,
                             engine: str = "tradeoff") -> GeneralizedGappedIndex:
    if d < 1:
        raise InputError("need at least one pattern")
    sa = build_suffix_array(_bytes(text))
    f = generalized_function(sa, d, windows)
    return GeneralizedGappedIndex(sa, d, windows, build_count_index(f, alpha, seed, engine=engine))


def generalized_gapped(idx: GeneralizedGappedIndex, patterns, pair_gaps=None, pos_windows=None,
                       k: int = 10, mode: str = "report"):
    return idx.query(patterns, pair_gaps, pos_windows, k, mode)
