"""Packing of multi-field integer keys into rows of 60-bit words.

Keys are compared for equality row-wise and hashed word-wise, so every word
must stay below the Mersenne prime used by the kernels.
"""

import numpy as np

WORD_BITS = 60
_MASK = (1 << WORD_BITS) - 1
INT_BITS = 62  # widest field stored in an int64 column


def column(values, width):
    """Return ``values`` as an int64 column, or an object column when too wide."""
    if width <= INT_BITS:
        return np.asarray(values, dtype=np.int64)
    arr = np.empty(len(values), dtype=object)
    arr[:] = [int(v) for v in values]
    return arr


def bits_for(n):
    """Bits needed to store integers in ``[0, n)`` (at least 1)."""
    return max(1, (int(n) - 1).bit_length())


def layout(widths):
    """Place fields into words.

    Returns ``(n_words, slots)`` where each slot is
    ``(field, field_shift, word, word_shift, bits)``.  Fields up to 60 bits
    never straddle words; wider fields are cut into 60-bit chunks.
    """
    slots = []
    word, off = 0, 0
    for f, w in enumerate(widths):
        w = max(int(w), 1)
        if w <= WORD_BITS:
            if off + w > WORD_BITS:
                word, off = word + 1, 0
            slots.append((f, 0, word, off, w))
            off += w
        else:
            if off:
                word, off = word + 1, 0
            for fs in range(0, w, WORD_BITS):
                bits = min(WORD_BITS, w - fs)
                slots.append((f, fs, word, 0, bits))
                word += 1
    n_words = word + (1 if off else 0)
    return max(n_words, 1), slots


def pack(columns, widths):
    """Pack a list of equally long columns into a uint64 array (n, n_words)."""
    n_words, slots = layout(widths)
    n = len(columns[0]) if columns else 0
    out = np.zeros((n, n_words), dtype=np.uint64)
    for f, fs, word, ws, bits in slots:
        col = columns[f]
        if col.dtype == object:
            chunk = ((col >> fs) & ((1 << bits) - 1)).astype(np.int64)
        else:
            chunk = (col >> fs) & ((1 << bits) - 1) if fs else col
        out[:, word] |= chunk.astype(np.uint64) << np.uint64(ws)
    return out


def pack_one(values, widths):
    """Pack a single key given as a sequence of Python ints; returns shape (n_words,)."""
    cols = [column([v], w) for v, w in zip(values, widths)]
    for v, w in zip(values, widths):
        if v < 0 or v >> max(int(w), 1):
            raise ValueError(f"field value {v} does not fit in {w} bits")
    return pack(cols, widths)[0]


def row_bytes(rows):
    """Hashable views of packed rows."""
    rows = np.ascontiguousarray(rows, dtype=np.uint64)
    return [r.tobytes() for r in rows]
