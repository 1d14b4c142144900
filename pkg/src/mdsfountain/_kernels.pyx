# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_fallback``.

Same signatures, same results.  Elimination and the Monte Carlo trial loops
run without the GIL so callers may drive several blocks from threads.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

cnp.import_array()

ctypedef unsigned long long u64
ctypedef unsigned char u8

cdef u64 GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline u64 mix64(u64 z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 derive(u64 key, u64 w) noexcept nogil:
    return mix64(key + (w + 1) * GAMMA)


cdef inline double uniform(u64 key, u64 i) noexcept nogil:
    return <double>(derive(key, i) >> 11) * INV_2_53


cdef int _rank(u8* a, int m, int k, const u8* mul, const u8* inv, int q) noexcept nogil:
    """Forward elimination on a row-major m x k buffer, destroying it."""
    cdef int r = 0, c, p, i, j
    cdef u8 f, t
    cdef u8* row
    cdef u8* other
    cdef const u8* mrow
    for c in range(k):
        if r == m:
            break
        p = -1
        for i in range(r, m):
            if a[i * k + c] != 0:
                p = i
                break
        if p < 0:
            continue
        row = a + r * k
        if p != r:
            other = a + p * k
            for j in range(c, k):
                t = row[j]
                row[j] = other[j]
                other[j] = t
        mrow = mul + <int>inv[row[c]] * q
        for j in range(c, k):
            row[j] = mrow[row[j]]
        for i in range(r + 1, m):
            other = a + i * k
            f = other[c]
            if f != 0:
                mrow = mul + <int>f * q
                for j in range(c, k):
                    other[j] ^= mrow[row[j]]
        r += 1
    return r


def rank(a, const u8[:, ::1] mul, const u8[::1] inv):
    cdef u8[:, ::1] buf = np.array(a, dtype=np.uint8, order="C", copy=True)
    cdef int m = buf.shape[0], k = buf.shape[1], q = mul.shape[0], r
    if m == 0 or k == 0:
        return 0
    with nogil:
        r = _rank(&buf[0, 0], m, k, &mul[0, 0], &inv[0], q)
    return r


def gauss_jordan(u8[:, :] a, u8[:, :] b, const u8[:, ::1] mul, const u8[::1] inv):
    """Reduce ``[a | b]`` in place to reduced row echelon form; return rank."""
    cdef int m = a.shape[0], k = a.shape[1], t_len = b.shape[1], q = mul.shape[0]
    cdef int r = 0, c, p, i, j
    cdef u8 f, tmp
    cdef const u8* mrow
    with nogil:
        for c in range(k):
            if r == m:
                break
            p = -1
            for i in range(r, m):
                if a[i, c] != 0:
                    p = i
                    break
            if p < 0:
                continue
            if p != r:
                for j in range(k):
                    tmp = a[r, j]; a[r, j] = a[p, j]; a[p, j] = tmp
                for j in range(t_len):
                    tmp = b[r, j]; b[r, j] = b[p, j]; b[p, j] = tmp
            mrow = &mul[inv[a[r, c]], 0]
            for j in range(k):
                a[r, j] = mrow[a[r, j]]
            for j in range(t_len):
                b[r, j] = mrow[b[r, j]]
            for i in range(m):
                if i == r:
                    continue
                f = a[i, c]
                if f == 0:
                    continue
                mrow = &mul[f, 0]
                for j in range(k):
                    a[i, j] ^= mrow[a[r, j]]
                for j in range(t_len):
                    b[i, j] ^= mrow[b[r, j]]
            r += 1
    return r


cdef inline void _coeffs(u64 col_key, int k, u64 mask, u8* out) noexcept nogil:
    cdef int j
    for j in range(k):
        out[j] = <u8>(derive(col_key, j) & mask)


def lrfc_block(seed, esis, int k, mask):
    cdef u64 root = mix64(<u64>((int(seed) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF))
    cdef cnp.int64_t[::1] e = np.ascontiguousarray(esis, dtype=np.int64)
    cdef Py_ssize_t n = e.shape[0], i
    out = np.empty((n, k), dtype=np.uint8)
    cdef u8[:, ::1] o = out
    cdef u64 msk = mask
    if k == 0:
        return out
    with nogil:
        for i in range(n):
            _coeffs(derive(root, <u64>e[i]), k, msk, &o[i, 0])
    return out


def pf_block(const u8[:, ::1] gen_t, int k, const u8[:, ::1] mul, const u8[::1] inv,
             double eps, int m_target, chan_key, code_key,
             long long t_start, long long t_stop, bint full, long long horizon):
    cdef int n = gen_t.shape[0], q = mul.shape[0]
    cdef u64 mask = q - 1
    cdef u64 ckey = chan_key, kkey = code_key, tkey, seed_root
    cdef long long t, i
    cdef long long failures = 0, deficient = 0
    cdef int got, m_prime, row, j
    cdef bint exhausted = False
    cdef long long* esis = <long long*>malloc((m_target + 1) * sizeof(long long))
    cdef u8* a = <u8*>malloc((m_target * k + 1) * sizeof(u8))
    if esis == NULL or a == NULL:
        free(esis)
        free(a)
        raise MemoryError()
    with nogil:
        for t in range(t_start, t_stop):
            tkey = derive(ckey, <u64>t)
            got = 0
            m_prime = 0
            i = 1
            while got < m_target:
                if i > horizon:
                    exhausted = True
                    break
                if uniform(tkey, <u64>i) >= eps:
                    esis[got] = i
                    got += 1
                    if i <= n:
                        m_prime += 1
                i += 1
            if exhausted:
                break
            if m_prime < k:
                deficient += 1
            elif not full:
                continue
            seed_root = mix64(derive(kkey, <u64>t) + GAMMA)
            for row in range(m_target):
                if esis[row] <= n:
                    memcpy(a + row * k, &gen_t[esis[row] - 1, 0], k)
                else:
                    _coeffs(derive(seed_root, <u64>esis[row]), k, mask, a + row * k)
            if k > 0 and _rank(a, m_target, k, &mul[0, 0], &inv[0], q) < k:
                failures += 1
    free(esis)
    free(a)
    if exhausted:
        raise RuntimeError("erasure channel horizon exhausted")
    return int(failures), int(deficient)


def multiuser_trial(const u8[:, ::1] gen_t, int k, const u8[:, ::1] mul, const u8[::1] inv,
                    double eps, rx_keys, code_seed_t, long long max_esi):
    """ESI count after which every receiver holds a rank-k system, or -1."""
    cdef cnp.uint64_t[::1] keys = np.ascontiguousarray(rx_keys, dtype=np.uint64)
    cdef Py_ssize_t users = keys.shape[0], r
    cdef int n = gen_t.shape[0], q = mul.shape[0], c, j, c0
    cdef u64 mask = q - 1
    cdef u64 seed_root = mix64(<u64>((int(code_seed_t) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF))
    cdef long long esi, result = -1, done = 0
    cdef u8 f
    cdef const u8* mrow
    if k == 0:
        return 0
    basis_arr = np.zeros((users, k, k), dtype=np.uint8)
    has_arr = np.zeros((users, k), dtype=np.uint8)
    rank_arr = np.zeros(users, dtype=np.int32)
    cdef u8[:, :, ::1] basis = basis_arr
    cdef u8[:, ::1] has = has_arr
    cdef int[::1] ranks = rank_arr
    cdef u8* col = <u8*>malloc(k)
    cdef u8* v = <u8*>malloc(k)
    if col == NULL or v == NULL:
        free(col)
        free(v)
        raise MemoryError()
    with nogil:
        for esi in range(1, max_esi + 1):
            if esi <= n:
                memcpy(col, &gen_t[esi - 1, 0], k)
            else:
                _coeffs(derive(seed_root, <u64>esi), k, mask, col)
            for r in range(users):
                if ranks[r] == k:
                    continue
                if uniform(keys[r], <u64>esi) < eps:
                    continue
                memcpy(v, col, k)
                for c in range(k):
                    if has[r, c] and v[c] != 0:
                        mrow = &mul[v[c], 0]
                        for j in range(c, k):
                            v[j] ^= mrow[basis[r, c, j]]
                c0 = -1
                for c in range(k):
                    if v[c] != 0:
                        c0 = c
                        break
                if c0 >= 0:
                    mrow = &mul[inv[v[c0]], 0]
                    for j in range(k):
                        basis[r, c0, j] = mrow[v[j]]
                    has[r, c0] = 1
                    ranks[r] += 1
                    if ranks[r] == k:
                        done += 1
            if done == users:
                result = esi
                break
    free(col)
    free(v)
    return int(result)
