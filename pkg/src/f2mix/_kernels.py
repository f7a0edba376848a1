"""Numba kernels over bit-packed GF(2) rows.

Layout: a 2-D ``uint64`` array of shape ``(rows, words)``; column ``c`` is bit
``c % 64`` of word ``c // 64``.  This is the same layout as a Python ``int``
serialized little-endian, so ``int`` rows and packed rows convert losslessly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_DEBRUIJN_TABLE = np.array(
    [0, 47, 1, 56, 48, 27, 2, 60, 57, 49, 41, 37, 28, 16, 3, 61,
     54, 58, 35, 52, 50, 42, 21, 44, 38, 32, 29, 23, 17, 11, 4, 62,
     46, 55, 26, 59, 40, 36, 15, 53, 34, 51, 20, 43, 31, 22, 10, 45,
     25, 39, 14, 33, 19, 30, 9, 24, 13, 18, 8, 12, 7, 6, 5, 63],
    dtype=np.int64,
)


@njit(cache=True, inline="always")
def _lowest_bit(v, table):
    # bitscan-forward; v must be nonzero
    return table[((v ^ (v - np.uint64(1))) * np.uint64(0x03F79D71B4CB0A89)) >> np.uint64(58)]


@njit(cache=True, inline="always")
def _popcount(v):
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (v * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def rref_inplace(a, ncols):
    """Gauss-Jordan on ``a`` restricted to pivots among the first ``ncols``
    columns.  Row operations act on the full row width.  Returns the pivot
    columns; rows ``[0, rank)`` hold the reduced basis.
    """
    m, nw = a.shape
    pivots = np.empty(min(m, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == m:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, m):
            if a[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(nw):
                tmp = a[r, k]
                a[r, k] = a[p, k]
                a[p, k] = tmp
        for i in range(m):
            if i != r and (a[i, w] & bit):
                for k in range(w, nw):
                    a[i, k] ^= a[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


@njit(cache=True)
def _insert(x, slots, has, nw):
    """Reduce ``x`` against the echelon slots; store it if it survives.
    Returns True when ``x`` was independent."""
    for w in range(nw):
        while x[w] != 0:
            c = w * 64 + _lowest_bit(x[w], _DEBRUIJN_TABLE)
            if has[c]:
                for k in range(w, nw):
                    x[k] ^= slots[c, k]
            else:
                for k in range(nw):
                    slots[c, k] = x[k]
                has[c] = True
                return True
    return False


@njit(cache=True)
def _parity_checks(slots, has, ncols, nw):
    """Rows spanning the dual of the slot span (one per free column)."""
    basis = slots.copy()
    for c in range(ncols - 1, -1, -1):
        if not has[c]:
            continue
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        for r in range(c):
            if has[r] and (basis[r, w] & bit):
                for k in range(nw):
                    basis[r, k] ^= basis[c, k]
    nfree = 0
    for c in range(ncols):
        if not has[c]:
            nfree += 1
    checks = np.zeros((nfree, nw), dtype=np.uint64)
    j = 0
    for f in range(ncols):
        if has[f]:
            continue
        checks[j, f >> 6] |= np.uint64(1) << np.uint64(f & 63)
        fw = f >> 6
        fbit = np.uint64(1) << np.uint64(f & 63)
        for r in range(f):
            if has[r] and (basis[r, fw] & fbit):
                checks[j, r >> 6] |= np.uint64(1) << np.uint64(r & 63)
        j += 1
    return checks


@njit(cache=True)
def rank_incremental(rows, ncols, stop_at):
    """Rank of ``rows`` by inserting each row into an echelon basis keyed by
    leading column.  Stops early once the rank reaches ``stop_at``.
    Returns ``(rank, rows_consumed)``.

    Once the basis fills most of the column space, membership of further
    rows is decided by the (few) parity checks of the current span instead
    of a full reduction; the checks are updated whenever a row is new.
    """
    m, nw = rows.shape
    slots = np.zeros((nw * 64, nw), dtype=np.uint64)
    has = np.zeros(nw * 64, dtype=np.bool_)
    x = np.empty(nw, dtype=np.uint64)
    rank = 0
    i = 0
    while i < m:
        if rank >= stop_at:
            return rank, i
        if i % 256 == 0 and i > 0 and 2 * (ncols - rank) < rank:
            break
        for k in range(nw):
            x[k] = rows[i, k]
        if _insert(x, slots, has, nw):
            rank += 1
        i += 1
    if i == m:
        return rank, m
    checks = _parity_checks(slots, has, ncols, nw)
    alive = np.ones(checks.shape[0], dtype=np.bool_)
    while i < m:
        if rank >= stop_at:
            return rank, i
        hit = -1
        for j in range(checks.shape[0]):
            if not alive[j]:
                continue
            acc = np.uint64(0)
            for k in range(nw):
                acc ^= checks[j, k] & rows[i, k]
            if _popcount(acc) & np.uint64(1):
                hit = j
                break
        if hit >= 0:
            rank += 1
            alive[hit] = False
            for j in range(hit + 1, checks.shape[0]):
                if not alive[j]:
                    continue
                acc = np.uint64(0)
                for k in range(nw):
                    acc ^= checks[j, k] & rows[i, k]
                if _popcount(acc) & np.uint64(1):
                    for k in range(nw):
                        checks[j, k] ^= checks[hit, k]
        i += 1
    return rank, m


@njit(cache=True)
def matvec(mat, xs, out_words):
    """Apply the ``k x n`` matrix ``mat`` to every packed row of ``xs``."""
    k = mat.shape[0]
    s, nw = xs.shape
    out = np.zeros((s, out_words), dtype=np.uint64)
    for i in range(s):
        for j in range(k):
            acc = np.uint64(0)
            for w in range(nw):
                acc ^= mat[j, w] & xs[i, w]
            if _popcount(acc) & np.uint64(1):
                out[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return out


@njit(cache=True)
def combine_rows(basis, coeffs, out_words):
    """Row ``i`` of the result is the XOR of the basis rows selected by the
    bits of ``coeffs[i]``.  Uses per-byte lookup tables of partial sums."""
    d = basis.shape[0]
    s = coeffs.shape[0]
    nbytes = (d + 7) // 8
    table = np.zeros((nbytes, 256, out_words), dtype=np.uint64)
    for b in range(nbytes):
        for v in range(1, 256):
            low = v & (-v)
            j = 0
            while (low >> j) != 1:
                j += 1
            row = 8 * b + j
            prev = v ^ low
            for k in range(out_words):
                table[b, v, k] = table[b, prev, k]
                if row < d:
                    table[b, v, k] ^= basis[row, k]
    out = np.zeros((s, out_words), dtype=np.uint64)
    for i in range(s):
        for b in range(nbytes):
            v = (coeffs[i, b >> 3] >> np.uint64(8 * (b & 7))) & np.uint64(255)
            if v:
                for k in range(out_words):
                    out[i, k] ^= table[b, v, k]
    return out


@njit(cache=True)
def lift_rows(points, masks, out_words):
    """Monomial evaluation: bit ``j`` of output row ``i`` is 1 iff every
    variable in ``masks[j]`` is set in ``points[i]``."""
    s, nw = points.shape
    nm = masks.shape[0]
    out = np.zeros((s, out_words), dtype=np.uint64)
    for i in range(s):
        for j in range(nm):
            ok = True
            for w in range(nw):
                if (points[i, w] & masks[j, w]) != masks[j, w]:
                    ok = False
                    break
            if ok:
                out[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return out


@njit(cache=True)
def parity_products(rows, polys):
    """``out[i, j] = <rows[i], polys[j]>`` over GF(2)."""
    s, nw = rows.shape
    p = polys.shape[0]
    out = np.zeros((s, p), dtype=np.uint8)
    for i in range(s):
        for j in range(p):
            acc = np.uint64(0)
            for w in range(nw):
                acc ^= rows[i, w] & polys[j, w]
            out[i, j] = np.uint8(_popcount(acc) & np.uint64(1))
    return out


@njit(cache=True)
def echelon_basis(rows, ncols):
    """Reduced echelon basis of the row span.  Returns ``(basis, pivots)``
    with pivots ascending; each pivot is its row's lowest set column and is
    cleared in every other row.  Stops reading rows once the span is full.
    """
    m, nw = rows.shape
    slots = np.zeros((max(ncols, 1), nw), dtype=np.uint64)
    has = np.zeros(max(ncols, 1), dtype=np.bool_)
    x = np.empty(nw, dtype=np.uint64)
    rank = 0
    for i in range(m):
        if rank >= ncols:
            break
        for k in range(nw):
            x[k] = rows[i, k]
        inserted = False
        for w in range(nw):
            while x[w] != 0:
                c = w * 64 + _lowest_bit(x[w], _DEBRUIJN_TABLE)
                if has[c]:
                    for k in range(w, nw):
                        x[k] ^= slots[c, k]
                else:
                    for k in range(nw):
                        slots[c, k] = x[k]
                    has[c] = True
                    rank += 1
                    inserted = True
                    break
            if inserted:
                break
    pivots = np.empty(rank, dtype=np.int64)
    j = 0
    for c in range(ncols):
        if has[c]:
            pivots[j] = c
            j += 1
    # back-substitution: clear each pivot column from the rows of lower pivots
    for a in range(rank - 1, -1, -1):
        c = pivots[a]
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        for b in range(a):
            r = pivots[b]
            if slots[r, w] & bit:
                for k in range(nw):
                    slots[r, k] ^= slots[c, k]
    basis = np.empty((rank, nw), dtype=np.uint64)
    for a in range(rank):
        for k in range(nw):
            basis[a, k] = slots[pivots[a], k]
    return basis, pivots


@njit(cache=True)
def gather_bits(xs, positions, out_words):
    """Bit ``j`` of output row ``i`` is bit ``positions[j]`` of ``xs[i]``."""
    s = xs.shape[0]
    p = positions.shape[0]
    out = np.zeros((s, out_words), dtype=np.uint64)
    for i in range(s):
        for j in range(p):
            c = positions[j]
            if (xs[i, c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
                out[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return out


@njit(cache=True)
def dependent_support(rows, ncols):
    """Indices ``i`` such that ``rows[i]`` lies in the span of the other rows.

    Each row is tagged with its own unit vector and reduced against an
    echelon basis on the first ``ncols`` columns; a row that reduces to zero
    leaves a kernel vector in its tag.  These tags form a kernel basis, and
    the union of their supports is the answer.
    """
    m, nw = rows.shape
    tw = max(1, (m + 63) // 64)
    basis = np.zeros((nw * 64, nw), dtype=np.uint64)
    tags = np.zeros((nw * 64, tw), dtype=np.uint64)
    has = np.zeros(nw * 64, dtype=np.bool_)
    x = np.empty(nw, dtype=np.uint64)
    tag = np.empty(tw, dtype=np.uint64)
    support = np.zeros(tw, dtype=np.uint64)
    for i in range(m):
        for k in range(nw):
            x[k] = rows[i, k]
        tag[:] = 0
        tag[i >> 6] = np.uint64(1) << np.uint64(i & 63)
        inserted = False
        for w in range(nw):
            while x[w] != 0:
                c = w * 64 + _lowest_bit(x[w], _DEBRUIJN_TABLE)
                if has[c]:
                    for k in range(w, nw):
                        x[k] ^= basis[c, k]
                    for k in range(tw):
                        tag[k] ^= tags[c, k]
                else:
                    for k in range(nw):
                        basis[c, k] = x[k]
                    for k in range(tw):
                        tags[c, k] = tag[k]
                    has[c] = True
                    inserted = True
                    break
            if inserted:
                break
        if not inserted:
            for k in range(tw):
                support[k] |= tag[k]
    out = np.zeros(m, dtype=np.bool_)
    for i in range(m):
        if (support[i >> 6] >> np.uint64(i & 63)) & np.uint64(1):
            out[i] = True
    return out


@njit(cache=True)
def lift2_single(points, v, out_words):
    """Degree-2 lift of single-word points in ``v`` variables; same monomial
    order as ``lift_rows`` with degree-2 masks, but visits only set bits."""
    s = points.shape[0]
    out = np.zeros((s, out_words), dtype=np.uint64)
    pos = np.empty(64, dtype=np.int64)
    one = np.uint64(1)
    for i in range(s):
        x = points[i]
        k = 0
        while x != 0:
            pos[k] = _lowest_bit(x, _DEBRUIJN_TABLE)
            x &= x - one
            k += 1
        out[i, 0] |= one
        for a in range(k):
            p = pos[a]
            j = 1 + p
            out[i, j >> 6] |= one << np.uint64(j & 63)
            base = 1 + v + p * v - (p * (p + 1)) // 2 - p - 1
            for b in range(a + 1, k):
                j = base + pos[b]
                out[i, j >> 6] |= one << np.uint64(j & 63)
    return out
