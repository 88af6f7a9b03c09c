"""Per-application build, persistence and query dispatch for the command line.

Each application keeps its raw inputs in the artifact (function description,
text, sets or points) and rebuilds only the pure functions on load; the
inverters and heavy-box dictionaries are restored as stored.
"""

from __future__ import annotations

import json
import shlex
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import artifact as art
from .app_algebraic import KPolIndex, Polynomial, build_kpol, kpol_function
from .app_geometry import (CollinearityIndex, PointSet, SCORES, TupleIndex, _tuple_function,
                           build_collinearity, build_tuple_index, collinearity_key_function,
                           hyperplane_select, theil_sen, triangle_select)
from .app_strings import GappedIndex, BirangeIndex, birange_function, build_gapped, build_suffix_array
from .errors import InputError, InsufficientDataError
from .funcmodel import Box, LinearCoord, linear_function
from .order_queries import OrderIndex, build_order_index, scored_function
from .packing import bits_for
from .range_index import augmented_function, build_count_index, build_report_index


# --- query spec parsing -------------------------------------------------------------

def _interval(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise InputError(f"bad interval {text!r}; expected lo:hi") from None


def parse_box(text: str) -> Box:
    return Box.of(*(_interval(part) for part in text.split(",")))


def _unescape(s: str) -> bytes:
    return s.encode("latin-1", "backslashreplace").decode("unicode_escape").encode("latin-1")


@dataclass
class Query:
    boxes: list[Box]
    fields: dict[str, str]

    def int(self, key: str, default=None) -> int:
        if key not in self.fields:
            if default is None:
                raise InputError(f"query needs {key}=")
            return default
        try:
            return int(self.fields[key])
        except ValueError:
            raise InputError(f"{key}= expects an integer") from None

    def interval(self, key: str):
        if key not in self.fields:
            raise InputError(f"query needs {key}=lo:hi")
        return _interval(self.fields[key])

    def pattern(self, key: str) -> bytes:
        if key not in self.fields:
            raise InputError(f"query needs {key}=")
        return _unescape(self.fields[key])


def parse_query(spec: str) -> Query:
    boxes, fields = [], {}
    try:
        tokens = shlex.split(spec)
    except ValueError as e:
        raise InputError(f"cannot tokenize query: {e}") from None
    for tok in tokens:
        if "=" not in tok:
            raise InputError(f"query token {tok!r} is not key=value")
        key, value = tok.split("=", 1)
        if key == "box":
            boxes.append(parse_box(value))
        else:
            fields[key] = value
    return Query(boxes, fields)


def _fmt(values) -> str:
    return " ".join(str(int(v)) for v in values)


# --- input formats ------------------------------------------------------------

def read_function_spec(paths) -> dict:
    with open(paths[0]) as fh:
        spec = json.load(fh)
    if "N" not in spec or "coords" not in spec:
        raise InputError("function spec needs 'N' and 'coords'")
    return spec


def function_from_spec(spec: dict):
    try:
        coords = [LinearCoord(**c) for c in spec["coords"]]
        return linear_function(int(spec["N"]), coords, spec.get("widths"))
    except (TypeError, KeyError) as e:
        raise InputError(f"bad function spec: {e}") from None


def read_ints(path) -> list[int]:
    with open(path) as fh:
        try:
            return [int(line) for line in fh if line.strip()]
        except ValueError as e:
            raise InputError(f"{path}: {e}") from None


def read_points(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if line.strip():
                try:
                    rows.append([int(v) for v in line.split()])
                except ValueError:
                    raise InputError(f"{path}:{n}: expected integers") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: points need a consistent dimension")
    return np.array(rows, dtype=np.int64)


def read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _width_for(points: np.ndarray, width: int | None) -> int:
    return width or max(1, int(points.max()).bit_length())


# --- applications -------------------------------------------------------------------

@dataclass
class Built:
    header: art.Header
    body: art.Writer
    index: object
    space_words: int


class App:
    tag = ""

    def build(self, inputs, alpha, seed, opts) -> Built:
        raise NotImplementedError

    def load(self, header: art.Header, body: art.Reader):
        raise NotImplementedError

    def query(self, index, q: Query) -> list[str]:
        raise NotImplementedError


def _clip(b: Box, widths) -> Box | None:
    """``b`` cut to the grid ``[0, 2^w)`` per axis, or None when nothing is left."""
    if b.dimension != len(widths):
        raise InputError(f"box has dimension {b.dimension}, the function has {len(widths)}")
    hi = tuple(min(h, (1 << w) - 1) for h, w in zip(b.hi, widths))
    if any(a > h for a, h in zip(b.lo, hi)):
        return None
    return Box(b.lo, hi)


class RangeApp(App):
    """Search, count and report over a function given as linear coordinates."""

    tag = "range"

    def build(self, inputs, alpha, seed, opts):
        spec = read_function_spec(inputs)
        f = function_from_spec(spec)
        counts = build_count_index(f, alpha, seed)
        reports = build_report_index(f, alpha, seed)
        w = art.Writer()
        w.str(json.dumps(spec, sort_keys=True))
        w.section(b"CNT ", art.write_count(counts))
        w.section(b"REP ", art.write_range(reports))
        header = art.Header(self.tag, f.domain_size, f.dimension, f.coord_bits, alpha, seed)
        return Built(header, w, (counts, reports), counts.space_words() + reports.space_words())

    def load(self, header, body):
        f = function_from_spec(json.loads(body.str()))
        counts = art.read_count(body.section(b"CNT "), f, header.seed)
        reports = art.read_range(body.section(b"REP "), f, header.seed)
        return counts, reports

    def query(self, index, q):
        counts, reports = index
        if len(q.boxes) != 1:
            raise InputError("range queries take exactly one box=")
        op = q.fields.get("op", "report" if "k" in q.fields else "search")
        b = _clip(q.boxes[0], counts.ranges.widths)
        if b is None:
            return ["0" if op == "count" else "NONE"]
        if op == "search":
            x = counts.ranges.search(b)
            return ["NONE" if x is None else str(x)]
        if op == "count":
            return [str(counts.count(b))]
        if op == "report":
            xs = reports.report(b, q.int("k"))
            return [str(x) for x in xs] or ["NONE"]
        raise InputError(f"unknown range op {op!r}")


class PreimageApp(App):
    """Predecessor, rank, selection and preimage queries on a 1-D function."""

    tag = "preimage"

    def build(self, inputs, alpha, seed, opts):
        spec = read_function_spec(inputs)
        f = function_from_spec(spec)
        if f.dimension != 1:
            raise InputError("the preimage app needs a one-dimensional function")
        order = build_order_index(f, alpha, seed, families=("values", "pairs"))
        w = art.Writer()
        w.str(json.dumps(spec, sort_keys=True))
        w.section(b"VALS", art.write_count(order.values))
        w.section(b"PAIR", art.write_count(order.pairs))
        header = art.Header(self.tag, f.domain_size, 1, f.coord_bits, alpha, seed)
        return Built(header, w, order, order.space_words())

    def load(self, header, body):
        f = function_from_spec(json.loads(body.str()))
        values = art.read_count(body.section(b"VALS"), f, header.seed)
        pairs = art.read_count(body.section(b"PAIR"), augmented_function(f), header.seed)
        return OrderIndex(f, values=values, pairs=pairs)

    def query(self, index: OrderIndex, q):
        op = q.fields.get("op")
        ops: dict[str, Callable[[], object]] = {
            "predecessor": lambda: index.predecessor(q.int("y"), bool(q.int("strict", 0))),
            "rank": lambda: index.rank(q.int("y")),
            "rank_distinct": lambda: index.rank_distinct(q.int("y")),
            "select": lambda: index.select(q.int("k")),
            "preimage_rank": lambda: index.preimage_rank(q.int("y"), q.int("z")),
            "preimage_select": lambda: index.preimage_select(q.int("y"), q.int("k")),
            "preimage_median": lambda: index.preimage_median(q.int("y")),
        }
        if op not in ops:
            raise InputError(f"op= must be one of {', '.join(sorted(ops))}")
        out = ops[op]()
        return ["NONE" if out is None else str(out)]


class KPolApp(App):
    tag = "kpol"

    def build(self, inputs, alpha, seed, opts):
        sets = [read_ints(p) for p in inputs]
        poly_text = opts.get("poly") or " + ".join(f"x{j + 1}" for j in range(len(sets)))
        poly = Polynomial.parse(poly_text, len(sets))
        idx = build_kpol(sets, poly, alpha, seed)
        w = art.Writer()
        w.str(poly_text)
        w.u32(idx.value_bits)
        w.u32(len(idx.sets))
        for s in idx.sets:
            w.array(np.array(s, dtype=np.int64), np.int64)
        w.section(b"SCOR", art.write_count(idx.order.scored))
        header = art.Header(self.tag, int(np.prod(idx.sizes)), len(sets) + 1, idx.value_bits,
                            alpha, seed)
        return Built(header, w, idx, idx.space_words())

    def load(self, header, body):
        poly_text = body.str()
        bits = body.u32()
        sets = [body.array(np.int64).tolist() for _ in range(body.u32())]
        poly = Polynomial.parse(poly_text, len(sets))
        f, score, bits = kpol_function(sets, poly, bits)
        scored = art.read_count(body.section(b"SCOR"), scored_function(f, score, bits),
                                header.seed)
        order = OrderIndex(f, scored=scored, mu=score, mu_bits=bits)
        return KPolIndex(sets, poly, order, bits)

    def query(self, index: KPolIndex, q):
        boxes = [(b.lo[0], b.hi[0]) for b in q.boxes]
        if len(q.boxes) == 1 and q.boxes[0].dimension == index.k:
            boxes = [(lo, hi) for lo, hi in zip(q.boxes[0].lo, q.boxes[0].hi)]
        if q.fields.get("op") == "count":
            return [str(index.count(boxes, q.int("y")))]
        t = index.query(boxes, q.int("y"))
        return ["NONE" if t is None else _fmt(t)]


class GappedApp(App):
    tag = "gapped"

    def build(self, inputs, alpha, seed, opts):
        text = read_bytes(inputs[0])
        idx = build_gapped(text, alpha, seed)
        w = art.Writer()
        w.blob(text)
        w.section(b"CNT ", art.write_count(idx.birange.counts))
        header = art.Header(self.tag, len(text) ** 2, 3, bits_for(len(text)), alpha, seed)
        return Built(header, w, idx, idx.space_words())

    def load(self, header, body):
        text = body.blob()
        sa = build_suffix_array(text)
        counts = art.read_count(body.section(b"CNT "), birange_function(sa.sa), header.seed)
        return GappedIndex(sa, BirangeIndex(sa.sa, counts))

    def query(self, index: GappedIndex, q):
        p1, p2, gap = q.pattern("P1"), q.pattern("P2"), q.interval("gap")
        if q.fields.get("op") == "count":
            return [str(index.count(p1, p2, gap))]
        pairs = index.report(p1, p2, gap, q.int("k", 10))
        return [_fmt(p) for p in pairs] or ["NONE"]


class TupleApp(App):
    """Point-tuple selection: Theil-Sen, triangles, hyperplanes."""

    def __init__(self, tag, t_of_d, delta):
        self.tag = tag
        self.t_of_d = t_of_d
        self.delta = delta

    def build(self, inputs, alpha, seed, opts):
        pts = read_points(inputs[0])
        W = _width_for(pts, opts.get("width"))
        S = PointSet(pts, W)
        t = self.t_of_d(S.d)
        idx = build_tuple_index(S, t, self.delta, alpha, seed)
        w = art.Writer()
        w.u32(W)
        w.array(pts, np.int64)
        w.section(b"SCOR", art.write_count(idx.order.scored))
        header = art.Header(self.tag, idx.order.f.domain_size, S.d, W, alpha, seed)
        return Built(header, w, idx, idx.space_words())

    def load(self, header, body):
        W = body.u32()
        S = PointSet(body.array(np.int64), W)
        t = self.t_of_d(S.d)
        score = SCORES[self.delta](t, S.d, W)
        f, mu, axis_values = _tuple_function(S, t, score)
        scored = art.read_count(body.section(b"SCOR"), scored_function(f, mu, score.bits),
                                header.seed)
        order = OrderIndex(f, scored=scored, mu=mu, mu_bits=score.bits)
        return TupleIndex(S, t, score, order, axis_values)

    def _boxes(self, index: TupleIndex, q):
        if not q.boxes:
            raise InputError("query needs box=")
        boxes = q.boxes * index.t if len(q.boxes) == 1 else q.boxes
        if len(boxes) != index.t:
            raise InputError(f"give one box= or {index.t} of them")
        return boxes

    def query(self, index: TupleIndex, q):
        boxes = self._boxes(index, q)
        if self.tag == "theilsen":
            try:
                (num, den), (p, r) = theil_sen(index, boxes[0])
            except InsufficientDataError:
                return ["NONE"]
            return [f"{num}/{den}", _fmt(p + r)]
        if self.tag == "triangles":
            out = triangle_select(index, *boxes, q.int("k", 1))
            if out is None:
                return ["NONE"]
            pts, area2 = out
            return [str(area2), _fmt(sum(pts, ()))]
        out = hyperplane_select(index, boxes, q.int("k", 1))
        if out is None:
            return ["NONE"]
        pts, key = out
        return [str(key), _fmt(sum(pts, ()))]


class CollinearApp(App):
    tag = "collinear"

    def build(self, inputs, alpha, seed, opts):
        if len(inputs) != 2:
            raise InputError("collinear needs two point files")
        a, b = read_points(inputs[0]), read_points(inputs[1])
        W = _width_for(np.concatenate([a, b]), opts.get("width"))
        line_x = int(opts.get("line_x") or 0)
        idx = build_collinearity(PointSet(a, W), PointSet(b, W), line_x, alpha, seed)
        w = art.Writer()
        w.u32(W)
        w.i64(line_x)
        w.array(a, np.int64)
        w.array(b, np.int64)
        w.section(b"INVR", art.write_inverter(idx.inverter))
        header = art.Header(self.tag, len(a) * len(b), 2, W, alpha, seed)
        return Built(header, w, idx, idx.space_words())

    def load(self, header, body):
        W, line_x = body.u32(), body.i64()
        S1, S2 = PointSet(body.array(np.int64), W), PointSet(body.array(np.int64), W)
        kf = collinearity_key_function(S1, S2, line_x)
        return CollinearityIndex(S1, S2, line_x, art.read_inverter(body.section(b"INVR"), kf))

    def query(self, index: CollinearityIndex, q):
        out = index.query(q.int("y"))
        return ["NONE" if out is None else _fmt(out[0] + out[1])]


APPS: dict[str, App] = {app.tag: app for app in (
    RangeApp(), PreimageApp(), KPolApp(), GappedApp(),
    TupleApp("theilsen", lambda d: 2, "slope"),
    TupleApp("triangles", lambda d: 3, "area"),
    TupleApp("hyperplane", lambda d: d, "hyperplane"),
    CollinearApp(),
)}


def build_artifact(app: str, inputs, alpha: float, seed: int, **opts) -> tuple[bytes, Built]:
    built = APPS[app].build(inputs, alpha, seed, opts)
    return art.dumps(built.header, built.body), built


def load_artifact(data: bytes):
    header, body = art.loads(data)
    if header.app not in APPS:
        raise InputError(f"unknown application {header.app!r} in artifact")
    return header, APPS[header.app].load(header, body)


def run_query(header: art.Header, index, spec: str) -> list[str]:
    return APPS[header.app].query(index, parse_query(spec))
