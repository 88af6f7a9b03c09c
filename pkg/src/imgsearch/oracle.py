"""Brute-force reference answers by full enumeration.

Written independently of the indexes: no inversion, no dyadic boxes, no
fixed-point keys.  Geometric quantities are exact :class:`~fractions.Fraction`
values.  Answers that the indexes may realize by any witness are returned in
a canonical form (smallest witness, the selected value, or the full set), so
callers compare values rather than witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Any, Callable, Mapping, Sequence

from .errors import SizeGuardError


@dataclass(frozen=True)
class OracleConfig:
    max_size: int = 1 << 20
    ordered_tuples: bool = True
    distinct_counting: bool = True
    upper_median: bool = True
    inclusive_predecessor: bool = True

    def guard(self, size: int):
        if size > self.max_size:
            raise SizeGuardError(f"instance of size {size} exceeds the oracle guard {self.max_size}")


DEFAULT = OracleConfig()


def _kth_largest(values, k):
    vals = sorted(values, reverse=True)
    return vals[k - 1] if 1 <= k <= len(vals) else None


def _median_k(m: int, cfg: OracleConfig) -> int:
    return (m + 1) // 2 if cfg.upper_median else max(1, m // 2)


def _table(inst, cfg) -> list[tuple[int, ...]]:
    """All values ``f(0), ..., f(N-1)`` as tuples."""
    if "table" in inst:
        return [tuple(v) if isinstance(v, (tuple, list)) else (v,) for v in inst["table"]]
    f = inst["f"]
    n = f.domain_size if hasattr(f, "domain_size") else inst["N"]
    cfg.guard(n)
    if hasattr(f, "eval"):
        return [tuple(f.eval(x)) for x in range(n)]
    return [tuple(v) if isinstance(v, (tuple, list)) else (v,) for v in (f(x) for x in range(n))]


def _inside(v, box) -> bool:
    lo, hi = (box.lo, box.hi) if hasattr(box, "lo") else box
    return all(a <= c <= b for c, a, b in zip(v, lo, hi))


def _box(args):
    b = args["box"]
    return (tuple(b.lo), tuple(b.hi)) if hasattr(b, "lo") else b


# --- queries over a function's image -------------------------------------------

def _search(inst, args, cfg):
    box = _box(args)
    for x, v in enumerate(_table(inst, cfg)):
        if _inside(v, box):
            return x
    return None


def _witnesses(inst, args, cfg):
    box = _box(args)
    return [x for x, v in enumerate(_table(inst, cfg)) if _inside(v, box)]


def _count(inst, args, cfg):
    box = _box(args)
    weight = args.get("weight") or (lambda v: 1)
    vals = {v for v in _table(inst, cfg) if _inside(v, box)}
    if not cfg.distinct_counting:
        return sum(1 for v in _table(inst, cfg) if _inside(v, box))
    return sum(weight(v) for v in vals)


def _report(inst, args, cfg):
    return _witnesses(inst, args, cfg)[:args["k"]]


def _predecessor_value(inst, args, cfg):
    y = args["y"]
    strict = args.get("strict", not cfg.inclusive_predecessor)
    vals = [v[0] for v in _table(inst, cfg) if (v[0] < y if strict else v[0] <= y)]
    return max(vals) if vals else None


def _rank(inst, args, cfg):
    return sum(1 for v in _table(inst, cfg) if v[0] < args["y"])


def _rank_distinct(inst, args, cfg):
    return len({v[0] for v in _table(inst, cfg) if v[0] < args["y"]})


def _select_value(inst, args, cfg):
    return _kth_largest({v[0] for v in _table(inst, cfg)}, args["k"])


def _scored(inst, args, cfg):
    mu = inst["mu"]
    box = _box(args)
    return [mu(v) for v in {v for v in _table(inst, cfg) if _inside(v, box)}]


def _rank_in_box(inst, args, cfg):
    return sum(1 for s in _scored(inst, args, cfg) if s < args["y"])


def _select_in_box(inst, args, cfg):
    return _kth_largest(_scored(inst, args, cfg), args["k"])


def _median_in_box(inst, args, cfg):
    s = _scored(inst, args, cfg)
    return _kth_largest(s, _median_k(len(s), cfg)) if s else None


def _preimages(inst, args, cfg):
    y = args["y"]
    return [x for x, v in enumerate(_table(inst, cfg)) if v[0] == y]


def _preimage_rank(inst, args, cfg):
    return sum(1 for x in _preimages(inst, args, cfg) if x < args["z"])


def _preimage_select(inst, args, cfg):
    return _kth_largest(_preimages(inst, args, cfg), args["k"])


def _preimage_median(inst, args, cfg):
    xs = _preimages(inst, args, cfg)
    return _kth_largest(xs, _median_k(len(xs), cfg)) if xs else None


# --- applications -------------------------------------------------------------

def _kpol(inst, args, cfg):
    """All value tuples inside the intervals with ``p(x) = y``."""
    sets = [sorted(set(s)) for s in inst["sets"]]
    size = 1
    for s in sets:
        size *= len(s)
    cfg.guard(size)
    p: Callable = inst["p"]
    lists = [[v for v in s if lo <= v <= hi] for s, (lo, hi) in zip(sets, args["boxes"])]
    return {t for t in product(*lists) if p(*t) == args["y"]}


def _suffix_array(inst, args, cfg):
    text = inst["text"]
    cfg.guard(len(text))
    return sorted(range(len(text)), key=lambda i: text[i:])


def _occurrences(text: bytes, p: bytes):
    return [i for i in range(len(text)) if text.startswith(p, i)]


def _birange(inst, args, cfg):
    A = inst["A"]
    cfg.guard(len(A) ** 2)
    (a, b), (c, d), (lo, hi) = args["xr"], args["yr"], args["gap"]
    return {(x, y) for x in range(max(a, 0), min(b, len(A) - 1) + 1)
            for y in range(max(c, 0), min(d, len(A) - 1) + 1) if lo <= abs(A[x] - A[y]) <= hi}


def _gapped(inst, args, cfg):
    text = inst["text"]
    lo, hi = args["gap"]
    xs, ys = _occurrences(text, args["p1"]), _occurrences(text, args["p2"])
    cfg.guard(len(xs) * len(ys))
    return {(x, y) for x in xs for y in ys if lo <= abs(x - y) <= hi}


def _generalized_gapped(inst, args, cfg):
    text = inst["text"]
    occ = [_occurrences(text, p) for p in args["patterns"]]
    size = 1
    for o in occ:
        size *= len(o)
    cfg.guard(size)
    gaps: Mapping = args.get("pair_gaps") or {}
    wins = args.get("pos_windows")
    out = set()
    for t in product(*occ):
        if wins and not all(a <= x <= b for x, (a, b) in zip(t, wins)):
            continue
        if all(a <= abs(t[i] - t[j]) <= b for (i, j), (a, b) in gaps.items()):
            out.add(t)
    return out


# --- geometry -----------------------------------------------------------------

def _tuples(points, boxes, t, cfg):
    n = len(points)
    cfg.guard(n ** t)
    gen = permutations(range(n), t) if cfg.ordered_tuples else combinations(range(n), t)
    for idx in gen:
        pts = [tuple(points[i]) for i in idx]
        if all(_inside(p, b) for p, b in zip(pts, boxes)):
            yield pts


def exact_slope(p, q):
    return None if p[0] == q[0] else Fraction(q[1] - p[1], q[0] - p[0])


def exact_doubled_area(p, q, r):
    return abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))


def exact_squared_distance(p, q):
    return sum((a - b) ** 2 for a, b in zip(p, q))


def _minor_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _minor_det([r[:j] + r[j + 1:] for r in m[1:]])
               for j in range(n))


def exact_hyperplane_sqdist(pts):
    """Squared distance from the origin to the hyperplane through ``pts`` (0 if degenerate)."""
    d = len(pts)
    rows = [[p[j] - pts[0][j] for j in range(d)] for p in pts[1:]]
    normal = [(-1) ** j * _minor_det([r[:j] + r[j + 1:] for r in rows]) if d > 1 else 1
              for j in range(d)]
    nn = sum(v * v for v in normal)
    if nn == 0:
        return Fraction(0)
    c = sum(a * b for a, b in zip(normal, pts[0]))
    return Fraction(c * c, nn)


_DELTAS: dict[str, Callable[..., Any]] = {
    "slope": lambda pts: exact_slope(*pts),
    "area": lambda pts: exact_doubled_area(*pts),
    "sqdist": lambda pts: exact_squared_distance(*pts),
    "hyperplane": exact_hyperplane_sqdist,
}


def _tuple_values(inst, args, cfg):
    delta = _DELTAS[inst["delta"]]
    return [delta(pts) for pts in _tuples(inst["points"], args["boxes"], inst["t"], cfg)]


def _tuple_rank(inst, args, cfg):
    y = args["y"]
    return sum(1 for v in _tuple_values(inst, args, cfg) if v is not None and v < y)


def _tuple_count(inst, args, cfg):
    return len(_tuple_values(inst, args, cfg))


def _tuple_select(inst, args, cfg):
    return _kth_largest([v for v in _tuple_values(inst, args, cfg) if v is not None], args["k"])


def _tuple_median(inst, args, cfg):
    vals = [v for v in _tuple_values(inst, args, cfg) if v is not None]
    return _kth_largest(vals, _median_k(len(vals), cfg)) if vals else None


def _theil_sen(inst, args, cfg):
    box = _box(args)
    pts = [tuple(p) for p in inst["points"] if _inside(p, box)]
    slopes = [exact_slope(p, q) for p, q in combinations(pts, 2)]
    slopes = [s for s in slopes if s is not None]
    if not slopes:
        return None
    return _kth_largest(slopes, _median_k(len(slopes), cfg))


def _collinear(inst, args, cfg):
    """All pairs ``(p1, p2)`` whose line passes through ``(line_x, q_y)``."""
    S1, S2, lx, qy = inst["S1"], inst["S2"], inst["line_x"], args["q_y"]
    cfg.guard(len(S1) * len(S2))
    out = set()
    for p in S1:
        for q in S2:
            if (q[0] - p[0]) * (qy - p[1]) - (q[1] - p[1]) * (lx - p[0]) == 0:
                out.add((tuple(p), tuple(q)))
    return out


KINDS: dict[str, Callable] = {
    "range-search": _search,
    "range-witnesses": _witnesses,
    "range-count": _count,
    "range-report": _report,
    "predecessor": _predecessor_value,
    "rank": _rank,
    "rank-distinct": _rank_distinct,
    "select": _select_value,
    "rank-in-box": _rank_in_box,
    "select-in-box": _select_in_box,
    "median-in-box": _median_in_box,
    "preimage-rank": _preimage_rank,
    "preimage-select": _preimage_select,
    "preimage-median": _preimage_median,
    "kpol": _kpol,
    "suffix-array": _suffix_array,
    "birange": _birange,
    "gapped": _gapped,
    "generalized-gapped": _generalized_gapped,
    "tuple-rank": _tuple_rank,
    "tuple-count": _tuple_count,
    "tuple-select": _tuple_select,
    "tuple-median": _tuple_median,
    "theil-sen": _theil_sen,
    "collinear": _collinear,
}


def bf_query(kind: str, instance: Mapping, args: Mapping | None = None,
             config: OracleConfig = DEFAULT):
    """Exact answer to query ``kind`` on ``instance`` by enumeration."""
    try:
        fn = KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown query kind {kind!r}") from None
    return fn(instance, args or {}, config)
