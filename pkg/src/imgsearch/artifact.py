"""Binary index files.

Layout (all integers little-endian, fixed width)::

    magic "IMGIDX01" | u16 version | str app | u64 N | u32 d | u32 W
    | u64 alpha_num | u64 alpha_den | i64 seed | u64 timestamp
    | sections ... | u32 crc32 of everything before it

A section is ``4-byte tag | u64 length | payload``; composite indexes nest
sections.  The timestamp comes from ``SOURCE_DATE_EPOCH`` (0 when unset) so
identical builds give identical bytes.
"""

from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ArtifactError, ChecksumError
from .inversion import DictionaryInverter, Inverter, KeyFunction, TradeoffInverter, TradeoffParams
from .range_index import CountIndex, RangeIndex, WeightFn

MAGIC = b"IMGIDX01"
VERSION = 1


class Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, v):
        self.parts.append(struct.pack("<B", v))

    def u16(self, v):
        self.parts.append(struct.pack("<H", v))

    def u32(self, v):
        self.parts.append(struct.pack("<I", v))

    def u64(self, v):
        self.parts.append(struct.pack("<Q", v))

    def i64(self, v):
        self.parts.append(struct.pack("<q", v))

    def f64(self, v):
        self.parts.append(struct.pack("<d", v))

    def blob(self, b: bytes):
        self.u64(len(b))
        self.parts.append(bytes(b))

    def str(self, s: str):
        self.blob(s.encode())

    def array(self, a, dtype):
        a = np.ascontiguousarray(a, dtype=np.dtype(dtype).newbyteorder("<"))
        self.u32(a.ndim)
        for n in a.shape:
            self.u64(n)
        self.parts.append(a.tobytes())

    def section(self, tag: bytes, body: "Writer"):
        if len(tag) != 4:
            raise ValueError("section tags have four bytes")
        self.parts.append(tag)
        self.blob(body.getvalue())

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def _take(self, n):
        if self.pos + n > len(self.data):
            raise ArtifactError("artifact is truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def _unpack(self, fmt):
        return struct.unpack(fmt, self._take(struct.calcsize(fmt)))[0]

    def u8(self):
        return self._unpack("<B")

    def u16(self):
        return self._unpack("<H")

    def u32(self):
        return self._unpack("<I")

    def u64(self):
        return self._unpack("<Q")

    def i64(self):
        return self._unpack("<q")

    def f64(self):
        return self._unpack("<d")

    def blob(self) -> bytes:
        return bytes(self._take(self.u64()))

    def str(self) -> str:
        return self.blob().decode()

    def array(self, dtype):
        ndim = self.u32()
        shape = tuple(self.u64() for _ in range(ndim))
        dt = np.dtype(dtype).newbyteorder("<")
        n = int(np.prod(shape)) if shape else 1
        raw = self._take(n * dt.itemsize)
        return np.frombuffer(raw, dtype=dt).astype(np.dtype(dtype)).reshape(shape)

    def section(self, tag: bytes) -> "Reader":
        got = bytes(self._take(4))
        if got != tag:
            raise ArtifactError(f"expected section {tag!r}, found {got!r}")
        return Reader(self.blob())

    def done(self) -> bool:
        return self.pos == len(self.data)


def alpha_rational(alpha: float | None) -> tuple[int, int]:
    if alpha is None:
        return 0, 1
    fr = Fraction(alpha).limit_denominator(1_000_000)
    return fr.numerator, fr.denominator


# --- inverters ------------------------------------------------------------------

def write_inverter(inv: Inverter) -> Writer:
    w = Writer()
    if isinstance(inv, DictionaryInverter):
        w.u8(0)
        w.array(inv.keys, np.uint64)
        w.array(inv.preimages, np.int64)
        return w
    if not isinstance(inv, TradeoffInverter):
        raise ArtifactError(f"cannot serialize {type(inv).__name__}")
    p = inv.params
    w.u8(1)
    num, den = alpha_rational(p.alpha)
    w.u64(num)
    w.u64(den)
    w.i64(inv.seed)
    w.u32(inv.attempt)
    w.u64(inv.beta)
    for v in (p.domain, p.subtables, p.tables, p.chain_length, p.chains, p.heavy):
        w.u64(v)
    w.array(inv.heavy_keys, np.uint64)
    w.array(inv.heavy_pre, np.int64)
    w.array(inv.coeffs, np.uint64)
    w.array(inv.offsets, np.int64)
    w.array(inv.starts, np.int64)
    w.array(inv.ends, np.int64)
    return w


def read_inverter(r: Reader, kf: KeyFunction) -> Inverter:
    variant = r.u8()
    if variant == 0:
        return DictionaryInverter(kf, r.array(np.uint64), r.array(np.int64))
    if variant != 1:
        raise ArtifactError(f"unknown inverter variant {variant}")
    num, den = r.u64(), r.u64()
    seed, attempt, beta = r.i64(), r.u32(), r.u64()
    domain, sub, tables, L, chains, heavy = (r.u64() for _ in range(6))
    params = TradeoffParams(domain, num / den, sub, tables, L, chains, heavy)
    heavy_keys, heavy_pre = r.array(np.uint64), r.array(np.int64)
    coeffs, offsets = r.array(np.uint64), r.array(np.int64)
    starts, ends = r.array(np.int64), r.array(np.int64)
    if domain != max(kf.domain_size, 2):
        raise ArtifactError("stored inverter does not match the key function's domain")
    return TradeoffInverter(kf, params, seed, attempt, beta, heavy_keys, heavy_pre,
                            coeffs, starts, ends, offsets)


def write_range(idx: RangeIndex) -> Writer:
    w = Writer()
    w.u8(int(idx.augmented))
    w.section(b"INVR", write_inverter(idx.inverter))
    return w


def read_range(r: Reader, f, seed: int) -> RangeIndex:
    from .range_index import augmented_function, levelled_key_function

    augmented = bool(r.u8())
    g = augmented_function(f) if augmented else f
    inv = read_inverter(r.section(b"INVR"), levelled_key_function(g))
    alpha = inv.params.alpha if isinstance(inv, TradeoffInverter) else None
    return RangeIndex(g, inv, alpha, seed, augmented=augmented)


def write_count(idx: CountIndex) -> Writer:
    w = Writer()
    num, den = alpha_rational(idx.alpha_q)
    w.u64(num)
    w.u64(den)
    w.u64(idx.threshold)
    w.array(idx.heavy_rows, np.uint64)
    w.array(np.asarray(idx.heavy_sums).astype(np.uint64), np.uint64)
    w.section(b"RNGE", write_range(idx.ranges))
    return w


def read_count(r: Reader, f, seed: int, weight: WeightFn | None = None) -> CountIndex:
    from .range_index import unit_weight

    num, den = r.u64(), r.u64()
    tau = r.u64()
    rows = r.array(np.uint64)
    sums = r.array(np.uint64).astype(np.int64)
    ranges = read_range(r.section(b"RNGE"), f, seed)
    return CountIndex(ranges, num / den, weight or unit_weight, tau, rows, sums)


# --- files ----------------------------------------------------------------------

@dataclass
class Header:
    app: str
    N: int
    d: int
    W: int
    alpha: float | None
    seed: int
    timestamp: int = field(default_factory=lambda: int(os.environ.get("SOURCE_DATE_EPOCH", 0)))


def dumps(header: Header, body: Writer) -> bytes:
    w = Writer()
    w.parts.append(MAGIC)
    w.u16(VERSION)
    w.str(header.app)
    w.u64(header.N)
    w.u32(header.d)
    w.u32(header.W)
    num, den = alpha_rational(header.alpha)
    w.u64(num)
    w.u64(den)
    w.i64(header.seed)
    w.u64(header.timestamp)
    w.section(b"BODY", body)
    data = w.getvalue()
    return data + struct.pack("<I", zlib.crc32(data))


def loads(data: bytes) -> tuple[Header, Reader]:
    if len(data) < len(MAGIC) + 4 or data[:len(MAGIC)] != MAGIC:
        raise ArtifactError("not an index file (bad magic)")
    payload, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(payload) != crc:
        raise ChecksumError("checksum mismatch: the index file is corrupted")
    r = Reader(payload)
    r._take(len(MAGIC))
    version = r.u16()
    if version != VERSION:
        raise ArtifactError(f"unsupported format version {version}")
    app = r.str()
    N, d, W = r.u64(), r.u32(), r.u32()
    num, den = r.u64(), r.u64()
    seed, ts = r.i64(), r.u64()
    header = Header(app, N, d, W, None if num == 0 else num / den, seed, ts)
    return header, r.section(b"BODY")
