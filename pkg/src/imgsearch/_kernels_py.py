"""Pure numpy versions of the hashing kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature
and bit-identical output.  Arithmetic is over the Mersenne prime 2**61 - 1;
inputs are assumed already reduced (< 2**61 - 1).
"""

import numpy as np

PRIME = (1 << 61) - 1

_P = np.uint64(PRIME)
_M31 = np.uint64((1 << 31) - 1)
_M30 = np.uint64((1 << 30) - 1)
_S31 = np.uint64(31)
_S30 = np.uint64(30)
_S61 = np.uint64(61)


def _reduce(s):
    s = (s & _P) + (s >> _S61)
    return np.where(s >= _P, s - _P, s)


def mulmod(a, b):
    """``a * b mod 2**61-1`` elementwise, without 128-bit intermediates."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1, a0 = a >> _S31, a & _M31
    b1, b0 = b >> _S31, b & _M31
    mid = a1 * b0 + a0 * b1
    s = (a1 * b1 << np.uint64(1)) + (mid >> _S30) + ((mid & _M30) << _S31) + a0 * b0
    return _reduce(s)


def addmod(a, b):
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= _P, s - _P, s)


def fingerprint(words, beta):
    """Polynomial hash of each row of ``words`` (uint64, shape (n, K))."""
    words = np.asarray(words, dtype=np.uint64)
    n, k = words.shape
    beta = np.uint64(beta)
    h = np.zeros(n, dtype=np.uint64)
    for j in range(k):
        h = addmod(mulmod(h, beta), words[:, j])
    return addmod(mulmod(h, beta), np.uint64(k + 1))


def affine_mod(fp, a, b, n):
    """``((a*fp + b) mod p) mod n`` with per-element coefficients."""
    return (addmod(mulmod(a, fp), b) % np.uint64(n)).astype(np.int64)


def step(fp, z, a, b, c, d, heavy_sorted, n):
    """One chain step.

    Points whose key fingerprint lies in ``heavy_sorted`` are re-routed by a
    hash of the point itself instead of its key.
    """
    fp = np.asarray(fp, dtype=np.uint64)
    nxt = affine_mod(fp, a, b, n)
    if len(heavy_sorted):
        pos = np.searchsorted(heavy_sorted, fp)
        pos = np.minimum(pos, len(heavy_sorted) - 1)
        heavy = heavy_sorted[pos] == fp
        if heavy.any():
            zz = np.asarray(z, dtype=np.uint64)[heavy] + np.uint64(1)
            nxt[heavy] = affine_mod(zz, np.asarray(c)[heavy], np.asarray(d)[heavy], n)
    return nxt
