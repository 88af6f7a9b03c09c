"""Function inversion: find some ``x`` with ``key(x) == y``.

Two engines share one interface:

* :func:`build_dictionary_inverter` stores every distinct key with one
  preimage.  Exact, linear space; used as a reference and for tiny domains.
* :func:`build_tradeoff_inverter` stores the most frequent keys explicitly
  and covers the rest with Hellman chain tables over a hashed step function.
  Space is about ``N**(1 - alpha/3)`` words per sub-structure and a query walks
  ``tables * L`` chain steps per sub-structure.

Keys are rows of 60-bit words (see :mod:`imgsearch.packing`).  Every answer
is re-checked against the key function before it is returned.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import BuildFailure, CapacityError
from .funcmodel import GridFunction
from .packing import column, layout, pack, pack_one

CHUNK = 1 << 20
EXHAUSTIVE_VERIFY = 1 << 16
SAMPLED_VERIFY = 10_000
DEFAULT_RETRIES = 8
BUDGET_GROWTH = 1.25


def max_build_retries() -> int:
    return int(os.environ.get("IMGSEARCH_MAX_BUILD_RETRIES", DEFAULT_RETRIES))


def max_domain() -> int:
    """Desk-scale guard on the number of domain elements an inverter may cover."""
    return int(os.environ.get("IMGSEARCH_MAX_DOMAIN", 1 << 25))


@dataclass(frozen=True)
class KeyFunction:
    """Batched key function ``[0, domain_size) -> fields``.

    ``columns(xs)`` returns one integer column per field; field ``j`` is
    below ``2**widths[j]``.
    """

    domain_size: int
    widths: tuple[int, ...]
    columns: Callable[[np.ndarray], Sequence[np.ndarray]] = field(compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))

    @property
    def n_words(self) -> int:
        return layout(self.widths)[0]

    def words(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if len(xs) == 0:
            return np.zeros((0, self.n_words), dtype=np.uint64)
        return pack(list(self.columns(xs)), self.widths)

    def key(self, x: int) -> tuple[int, ...]:
        cols = self.columns(np.array([x], dtype=np.int64))
        return tuple(int(c[0]) for c in cols)

    def encode(self, key) -> np.ndarray:
        if isinstance(key, (int, np.integer)):
            key = (int(key),)
        return pack_one(tuple(key), self.widths)

    @classmethod
    def from_scalar(cls, domain_size, width, fn):
        """Single-field key from a scalar ``fn(x) -> int``."""

        def columns(xs):
            return [column([fn(int(x)) for x in xs], width)]

        return cls(domain_size, (width,), columns)

    @classmethod
    def from_grid(cls, f: GridFunction):
        return cls(f.domain_size, f.widths, f.batch)


class _Counter:
    """Evaluation counter; increments are serialized by a lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self.value = 0

    def add(self, n):
        with self._lock:
            self.value += int(n)

    def reset(self):
        with self._lock:
            self.value = 0


class Inverter:
    variant = "abstract"

    def __init__(self, kf: KeyFunction):
        self.kf = kf
        self._counter = _Counter()

    @property
    def eval_counter(self) -> int:
        return self._counter.value

    def reset_counter(self):
        self._counter.reset()

    def _eval(self, xs) -> np.ndarray:
        self._counter.add(len(xs))
        return self.kf.words(xs)

    def invert(self, key) -> int | None:
        """Some ``x`` with ``kf(x) == key``, or None."""
        try:
            row = self.kf.encode(key)
        except ValueError:  # wider than the key fields, so not in the image
            return None
        x = int(self.invert_rows(row[None, :])[0])
        return None if x < 0 else x

    def invert_rows(self, rows) -> np.ndarray:
        """Batched inversion of packed keys; ``-1`` marks keys with no preimage found."""
        rows = np.ascontiguousarray(rows, dtype=np.uint64).reshape(-1, self.kf.n_words)
        out = np.full(len(rows), -1, dtype=np.int64)
        if len(rows) == 0:
            return out
        found = self._lookup(rows)
        ok = found >= 0
        if ok.any():
            # final soundness check against the key function
            idx = np.flatnonzero(ok)
            good = (self._eval(found[idx]) == rows[idx]).all(axis=1)
            out[idx[good]] = found[idx[good]]
        return out

    def _lookup(self, rows) -> np.ndarray:
        raise NotImplementedError

    def space_words(self) -> int:
        raise NotImplementedError


# --- exact dictionary --------------------------------------------------------

def domain_words(kf: KeyFunction):
    n = kf.domain_size
    parts = [kf.words(np.arange(s, min(s + CHUNK, n), dtype=np.int64)) for s in range(0, n, CHUNK)]
    return np.concatenate(parts) if parts else np.zeros((0, kf.n_words), dtype=np.uint64)


def _void(rows):
    rows = np.ascontiguousarray(rows, dtype=np.uint64)
    return rows.view(np.dtype((np.void, rows.shape[1] * 8))).ravel()


def unique_keys(rows):
    """Distinct rows with first index and multiplicity, in byte order."""
    if rows.shape[1] == 1:
        u, first, counts = np.unique(rows[:, 0], return_index=True, return_counts=True)
        return u[:, None], first, counts
    _, first, counts = np.unique(_void(rows), return_index=True, return_counts=True)
    return rows[first], first, counts


class DictionaryInverter(Inverter):
    variant = "dictionary"

    def __init__(self, kf, keys, preimages):
        super().__init__(kf)
        self.keys = np.ascontiguousarray(keys, dtype=np.uint64)
        self.preimages = np.asarray(preimages, dtype=np.int64)
        self._index = {k.tobytes(): int(x) for k, x in zip(self.keys, self.preimages)}

    def _lookup(self, rows):
        get = self._index.get
        return np.array([get(r.tobytes(), -1) for r in rows], dtype=np.int64)

    def space_words(self) -> int:
        return len(self.preimages) * (self.kf.n_words + 1)


def build_dictionary_inverter(kf: KeyFunction) -> DictionaryInverter:
    if kf.domain_size > max_domain():
        raise CapacityError(f"domain {kf.domain_size} exceeds guard {max_domain()}")
    keys, first, _ = unique_keys(domain_words(kf))
    inv = DictionaryInverter(kf, keys, first)
    return inv


# --- chain tables ------------------------------------------------------------

@dataclass(frozen=True)
class TradeoffParams:
    """Sizes of one tradeoff build attempt."""

    domain: int
    alpha: float
    subtables: int       # r: independent sub-structures
    tables: int          # per sub-structure
    chain_length: int    # L
    chains: int          # per table, before deduplication
    heavy: int           # number of explicitly stored keys

    @classmethod
    def for_domain(cls, n: int, alpha: float, attempt: int = 0):
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        n = max(int(n), 2)
        L = max(1, math.ceil(n ** (alpha / 3)))
        budget = n ** (1 - alpha / 3)
        return cls(
            domain=n,
            alpha=alpha,
            subtables=max(1, math.ceil(math.log2(n))),
            tables=L,
            chain_length=L,
            chains=max(1, math.ceil(budget / L * BUDGET_GROWTH ** attempt)),
            heavy=math.ceil(budget),
        )

    @property
    def walk_budget(self) -> int:
        """Upper bound on key evaluations per inverted key (walk + replays + final check)."""
        return self.subtables * self.tables * 2 * self.chain_length + 1


class TradeoffInverter(Inverter):
    variant = "tradeoff"

    def __init__(self, kf, params: TradeoffParams, seed: int, attempt: int, beta: int,
                 heavy_keys, heavy_pre, coeffs, starts, ends, offsets):
        super().__init__(kf)
        self.params = params
        self.seed = int(seed)
        self.attempt = int(attempt)
        self.beta = int(beta)
        self.heavy_keys = np.ascontiguousarray(heavy_keys, dtype=np.uint64)
        self.heavy_pre = np.asarray(heavy_pre, dtype=np.int64)
        self.heavy_fps = kernels.fingerprint(self.heavy_keys, self.beta) if len(self.heavy_keys) \
            else np.zeros(0, dtype=np.uint64)
        order = np.argsort(self.heavy_fps, kind="stable")
        self.heavy_keys, self.heavy_pre = self.heavy_keys[order], self.heavy_pre[order]
        self.heavy_fps = self.heavy_fps[order]
        self.coeffs = np.asarray(coeffs, dtype=np.uint64).reshape(4, -1)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.ends = np.asarray(ends, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        n_tables = len(self.offsets) - 1
        table_of = np.repeat(np.arange(n_tables, dtype=np.int64), np.diff(self.offsets))
        self._combo = table_of * params.domain + self.ends
        self._filter_bits, self._filter = _bit_filter(self._combo)

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def n_tables(self) -> int:
        return len(self.offsets) - 1

    def space_words(self) -> int:
        return (2 * len(self.starts)
                + len(self.heavy_pre) * (self.kf.n_words + 1)
                + self.coeffs.size + 1)

    def _step(self, words, z, u):
        a, b, c, d = (self.coeffs[k][u] for k in range(4))
        fp = kernels.fingerprint(words, self.beta)
        return kernels.step(fp, z, a, b, c, d, self.heavy_fps, self.params.domain)

    # heavy-table lookup by fingerprint, confirmed on the stored words
    def _heavy(self, rows, fps):
        out = np.full(len(rows), -1, dtype=np.int64)
        if len(self.heavy_fps) == 0:
            return out
        pos = np.minimum(np.searchsorted(self.heavy_fps, fps), len(self.heavy_fps) - 1)
        hit = (self.heavy_fps[pos] == fps) & (self.heavy_keys[pos] == rows).all(axis=1)
        out[hit] = self.heavy_pre[pos[hit]]
        return out

    def _lookup(self, rows):
        fps = kernels.fingerprint(rows, self.beta)
        out = self._heavy(rows, fps)
        if self.n_tables == 0:
            return out
        todo = np.flatnonzero(out < 0)
        per = max(1, (1 << 20) // max(self.n_tables, 1))
        for s in range(0, len(todo), per):
            idx = todo[s:s + per]
            out[idx] = self._walk(rows[idx], fps[idx])
        return out

    def _walk(self, rows, fps):
        P = self.params
        R, L, N = self.n_tables, P.chain_length, P.domain
        Q = len(rows)
        wq = np.repeat(np.arange(Q, dtype=np.int64), R)
        wu = np.tile(np.arange(R, dtype=np.int64), Q)
        z = kernels.affine_mod(fps[wq], self.coeffs[0][wu], self.coeffs[1][wu], N)
        hits_w, hits_s, hits_c = [], [], []
        combo = self._combo
        for s in range(L):
            key = wu * N + z
            w = np.flatnonzero(_probe(self._filter, self._filter_bits, key))
            pos = np.minimum(np.searchsorted(combo, key[w]), len(combo) - 1)
            hit = combo[pos] == key[w]
            if hit.any():
                hits_w.append(w[hit])
                hits_s.append(np.full(int(hit.sum()), s, dtype=np.int64))
                hits_c.append(pos[hit])
            if s < L - 1:
                z = self._step(self._eval(z), z, wu)
        out = np.full(Q, -1, dtype=np.int64)
        if not hits_w:
            return out
        w = np.concatenate(hits_w)
        s = np.concatenate(hits_s)
        c = np.concatenate(hits_c)
        order = np.lexsort((s, w))
        w, s, c = w[order], s[order], c[order]
        # replay budget: at most L evaluations per walker
        cost = L - s
        cum = np.cumsum(cost)
        first = np.r_[True, w[1:] != w[:-1]]
        base = np.maximum.accumulate(np.where(first, cum - cost, 0))
        keep = cum - base <= L
        w, s, c = w[keep], s[keep], c[keep]
        target = L - 1 - s
        x = self.starts[c]
        u = wu[w]
        q = wq[w]
        alive = np.arange(len(w))
        found_at = np.full(len(w), -1, dtype=np.int64)
        for t in range(int(target.max()) + 1 if len(target) else 0):
            if len(alive) == 0:
                break
            words = self._eval(x[alive])
            at = target[alive] == t
            if at.any():
                sel = alive[at]
                match = (words[at] == rows[q[sel]]).all(axis=1)
                found_at[sel[match]] = x[sel[match]]
            more = ~at
            alive = alive[more]
            if len(alive):
                x[alive] = self._step(words[more], x[alive], u[alive])
        hit = np.flatnonzero(found_at >= 0)
        if len(hit):
            # first discovery in (walker, step) order wins
            qs = q[hit]
            firsts = np.r_[True, qs[1:] != qs[:-1]]
            out[qs[firsts]] = found_at[hit[firsts]]
        return out


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _filter_slot(keys, bits):
    with np.errstate(over="ignore"):
        return (keys.astype(np.uint64) * _GOLDEN) >> np.uint64(64 - bits)


def _bit_filter(keys):
    # one-hash bitmap over the endpoints; screens out most misses before binary search
    bits = max(6, int(8 * max(len(keys), 1) - 1).bit_length())
    table = np.zeros(1 << (bits - 6), dtype=np.uint64)
    slot = _filter_slot(keys, bits)
    np.bitwise_or.at(table, (slot >> np.uint64(6)).astype(np.int64),
                     np.uint64(1) << (slot & np.uint64(63)))
    return bits, table


def _probe(table, bits, keys):
    slot = _filter_slot(keys, bits)
    word = table[(slot >> np.uint64(6)).astype(np.int64)]
    return ((word >> (slot & np.uint64(63))) & np.uint64(1)).astype(bool)


def _derive_rng(seed, attempt, salt):
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(attempt), salt])


def _random_field(rng, size, low=0):
    return rng.integers(low, kernels.PRIME, size=size, dtype=np.uint64)


def _build_attempt(kf, params: TradeoffParams, seed, attempt, uniq, first, counts):
    rng = _derive_rng(seed, attempt, 1)
    beta = int(_random_field(rng, 1, 1)[0])
    order = np.lexsort((first, -counts))
    heavy = order[:params.heavy]
    heavy_keys, heavy_pre = uniq[heavy], first[heavy]
    fps = kernels.fingerprint(heavy_keys, beta)
    if len(np.unique(fps)) != len(fps):
        return None
    N = params.domain
    if len(heavy) == len(uniq):
        coeffs = np.zeros((4, 0), dtype=np.uint64)
        empty = np.zeros(0, dtype=np.int64)
        return TradeoffInverter(kf, params, seed, attempt, beta, heavy_keys, heavy_pre,
                                coeffs, empty, empty, np.zeros(1, dtype=np.int64))
    R = params.subtables * params.tables
    coeffs = np.stack([_random_field(rng, R, 1), _random_field(rng, R),
                       _random_field(rng, R, 1), _random_field(rng, R)])
    inv = TradeoffInverter(kf, params, seed, attempt, beta, heavy_keys, heavy_pre,
                           coeffs, np.zeros(0, np.int64), np.zeros(0, np.int64),
                           np.zeros(R + 1, dtype=np.int64))
    m = params.chains
    starts = rng.integers(0, N, size=R * m, dtype=np.int64)
    table = np.repeat(np.arange(R, dtype=np.int64), m)
    ends = np.empty_like(starts)
    for s in range(0, len(starts), CHUNK):
        z = starts[s:s + CHUNK].copy()
        u = table[s:s + CHUNK]
        for _ in range(params.chain_length):
            z = inv._step(inv._eval(z), z, u)
        ends[s:s + CHUNK] = z
    # one chain per (table, endpoint): merged chains add nothing
    combo = table * N + ends
    order = np.lexsort((np.arange(len(combo)), combo))
    combo = combo[order]
    keep = np.r_[True, combo[1:] != combo[:-1]]
    sel = order[keep]
    counts_per = np.bincount(table[sel], minlength=R)
    offsets = np.r_[0, np.cumsum(counts_per)].astype(np.int64)
    out = TradeoffInverter(kf, params, seed, attempt, beta, heavy_keys, heavy_pre,
                           coeffs, starts[sel], ends[sel], offsets)
    return out


def verification_keys(kf: KeyFunction, seed, uniq=None):
    """Keys checked after each build: all of them, or a seeded sample."""
    n = kf.domain_size
    if n <= EXHAUSTIVE_VERIFY and uniq is not None:
        return uniq
    rng = _derive_rng(seed, 0, 2)
    xs = rng.integers(0, n, size=min(SAMPLED_VERIFY, n), dtype=np.int64)
    return unique_keys(kf.words(xs))[0]


def build_tradeoff_inverter(kf: KeyFunction, alpha: float, seed: int = 0,
                            retries: int | None = None) -> TradeoffInverter:
    """Build and verify a chain-table inverter; deterministic in ``(kf, alpha, seed)``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if kf.domain_size > max_domain():
        raise CapacityError(
            f"domain {kf.domain_size} exceeds the build guard {max_domain()} "
            "(raise IMGSEARCH_MAX_DOMAIN to override)")
    retries = max_build_retries() if retries is None else retries
    uniq, first, counts = unique_keys(domain_words(kf))
    check = verification_keys(kf, seed, uniq)
    for attempt in range(retries + 1):
        params = TradeoffParams.for_domain(kf.domain_size, alpha, attempt)
        inv = _build_attempt(kf, params, seed, attempt, uniq, first, counts)
        if inv is None:
            continue
        got = inv.invert_rows(check)
        inv.reset_counter()
        if (got >= 0).all():
            return inv
    raise BuildFailure(
        f"inverter verification failed after {retries + 1} attempts "
        f"(domain {kf.domain_size}, alpha {alpha})")


def invert(inv: Inverter, key):
    return inv.invert(key)


def space_words(inv: Inverter) -> int:
    return inv.space_words()


def eval_counter(inv: Inverter) -> int:
    return inv.eval_counter
