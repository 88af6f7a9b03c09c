# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hashing kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

PRIME = (1 << 61) - 1
cdef uint64_t P = (<uint64_t>1 << 61) - 1

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


cdef inline uint64_t _mulmod(uint64_t a, uint64_t b) nogil:
    cdef u128 s = <u128>a * b
    cdef uint64_t r = <uint64_t>(s & P) + <uint64_t>(s >> 61)
    if r >= P:
        r -= P
    return r


cdef inline uint64_t _addmod(uint64_t a, uint64_t b) nogil:
    cdef uint64_t s = a + b
    if s >= P:
        s -= P
    return s


def mulmod(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
    shape = a.shape
    cdef const uint64_t[::1] aa = np.ascontiguousarray(a).ravel()
    cdef const uint64_t[::1] bb = np.ascontiguousarray(b).ravel()
    cdef Py_ssize_t i, n = aa.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _mulmod(aa[i], bb[i])
    return out.reshape(shape)


def addmod(a, b):
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= np.uint64(P), s - np.uint64(P), s)


def fingerprint(words, uint64_t beta):
    cdef const uint64_t[:, ::1] w = np.ascontiguousarray(words, dtype=np.uint64)
    cdef Py_ssize_t n = w.shape[0], k = w.shape[1], i, j
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t h
    with nogil:
        for i in range(n):
            h = 0
            for j in range(k):
                h = _addmod(_mulmod(h, beta), w[i, j])
            o[i] = _addmod(_mulmod(h, beta), <uint64_t>(k + 1))
    return out


def affine_mod(fp, a, b, uint64_t n):
    cdef const uint64_t[::1] f = np.ascontiguousarray(fp, dtype=np.uint64)
    cdef Py_ssize_t m = f.shape[0], i
    cdef const uint64_t[::1] aa = np.ascontiguousarray(np.broadcast_to(a, (m,)), dtype=np.uint64)
    cdef const uint64_t[::1] bb = np.ascontiguousarray(np.broadcast_to(b, (m,)), dtype=np.uint64)
    out = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = <int64_t>(_addmod(_mulmod(aa[i], f[i]), bb[i]) % n)
    return out


cdef inline bint _member(const uint64_t[::1] s, uint64_t v) nogil:
    cdef Py_ssize_t lo = 0, hi = s.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if s[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo < s.shape[0] and s[lo] == v


def step(fp, z, a, b, c, d, heavy_sorted, uint64_t n):
    cdef const uint64_t[::1] f = np.ascontiguousarray(fp, dtype=np.uint64)
    cdef Py_ssize_t m = f.shape[0], i
    cdef const int64_t[::1] zz = np.ascontiguousarray(z, dtype=np.int64)
    cdef const uint64_t[::1] aa = np.ascontiguousarray(np.broadcast_to(a, (m,)), dtype=np.uint64)
    cdef const uint64_t[::1] bb = np.ascontiguousarray(np.broadcast_to(b, (m,)), dtype=np.uint64)
    cdef const uint64_t[::1] cc = np.ascontiguousarray(np.broadcast_to(c, (m,)), dtype=np.uint64)
    cdef const uint64_t[::1] dd = np.ascontiguousarray(np.broadcast_to(d, (m,)), dtype=np.uint64)
    cdef const uint64_t[::1] hs = np.ascontiguousarray(heavy_sorted, dtype=np.uint64)
    out = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for i in range(m):
            if hs.shape[0] and _member(hs, f[i]):
                o[i] = <int64_t>(_addmod(_mulmod(cc[i], <uint64_t>zz[i] + 1), dd[i]) % n)
            else:
                o[i] = <int64_t>(_addmod(_mulmod(aa[i], f[i]), bb[i]) % n)
    return out
