"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` function for function.  Results are bit-identical;
only speed differs.
"""

import numpy as np

from . import _rng

_EMPTY = np.zeros((0, 0), dtype=np.uint8)


def _swap(x, i, j):
    x[[i, j]] = x[[j, i]]


def rank(a, mul, inv):
    a = np.array(a, dtype=np.uint8, copy=True)
    m, k = a.shape
    r = 0
    for c in range(k):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            _swap(a, p, r)
        a[r] = mul[inv[a[r, c]], a[r]]
        below = a[r + 1:, c]
        rows = np.flatnonzero(below) + r + 1
        if rows.size:
            a[rows] ^= mul[a[rows, c][:, None], a[r][None, :]]
        r += 1
    return r


def gauss_jordan(a, b, mul, inv):
    """Reduce ``[a | b]`` in place to reduced row echelon form; return rank.

    Pivot rule: first nonzero entry of the pivot column, scanning down.
    """
    m, k = a.shape
    r = 0
    for c in range(k):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            _swap(a, p, r)
            _swap(b, p, r)
        f = inv[a[r, c]]
        a[r] = mul[f, a[r]]
        b[r] = mul[f, b[r]]
        col = a[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            fac = col[rows][:, None]
            a[rows] ^= mul[fac, a[r][None, :]]
            b[rows] ^= mul[fac, b[r][None, :]]
        r += 1
    return r


def lrfc_block(seed, esis, k, mask):
    return _rng.coefficient_block(seed, esis, k, mask)


def _collect_block(keys, eps, m_target, horizon):
    """Received ESIs (1-based) for each trial key, shape (B, m_target)."""
    b = keys.shape[0]
    out = np.zeros((b, m_target), dtype=np.int64)
    if m_target == 0 or b == 0:
        return out
    width = min(horizon, int(m_target / (1.0 - eps) * 1.25) + 16)
    esis = np.arange(1, width + 1, dtype=np.uint64)
    kept = _rng.uniforms_np(keys[:, None], esis[None, :]) >= eps
    counts = kept.sum(axis=1)
    for t in range(b):
        idx = np.flatnonzero(kept[t])
        if counts[t] >= m_target:
            out[t] = idx[:m_target] + 1
            continue
        # rare: keep drawing one ESI at a time
        got = list(idx + 1)
        i = width + 1
        while len(got) < m_target:
            if i > horizon:
                raise RuntimeError("erasure channel horizon exhausted")
            if _rng.uniform(int(keys[t]), i) >= eps:
                got.append(i)
            i += 1
        out[t] = got
    return out


def _trial_matrix(esis, gen_t, code_seed_t, k, mask):
    n = gen_t.shape[0]
    a = np.empty((len(esis), k), dtype=np.uint8)
    mds = esis <= n
    a[mds] = gen_t[esis[mds] - 1]
    if (~mds).any():
        a[~mds] = _rng.coefficient_block(code_seed_t, esis[~mds], k, mask)
    return a


def pf_block(gen_t, k, mul, inv, eps, m_target, chan_key, code_key,
             t_start, t_stop, full, horizon):
    """Decode-failure count over trials ``t_start..t_stop-1``.

    Returns ``(failures, deficient)`` where ``deficient`` counts trials with
    fewer than k outer-code symbols among the received ones.
    """
    n = gen_t.shape[0]
    mask = mul.shape[0] - 1
    trials = np.arange(t_start, t_stop, dtype=np.uint64)
    keys = _rng.derive_np(np.uint64(chan_key), trials)
    rx = _collect_block(keys, eps, m_target, horizon)
    m_prime = (rx <= n).sum(axis=1)
    failures = 0
    deficient = int((m_prime < k).sum())
    for j in range(trials.shape[0]):
        if m_prime[j] >= k and not full:
            continue
        seed_t = _rng.derive(code_key, int(trials[j]))
        a = _trial_matrix(rx[j], gen_t, seed_t, k, mask)
        if rank(a, mul, inv) < k:
            failures += 1
    return failures, deficient


def _reduce_into(basis, has, ranks, v, active, mul, inv):
    """Incremental elimination of one row per active receiver."""
    k = v.shape[1]
    for c in range(k):
        sel = active & has[:, c] & (v[:, c] != 0)
        if sel.any():
            v[sel] ^= mul[v[sel, c][:, None], basis[sel, c, :]]
    nonzero = active & v.any(axis=1)
    for r in np.flatnonzero(nonzero):
        c0 = int(np.flatnonzero(v[r])[0])
        basis[r, c0] = mul[inv[v[r, c0]], v[r]]
        has[r, c0] = True
        ranks[r] += 1


def multiuser_trial(gen_t, k, mul, inv, eps, rx_keys, code_seed_t, max_esi):
    """ESI count after which every receiver holds a rank-k system, or -1."""
    n = gen_t.shape[0]
    mask = mul.shape[0] - 1
    users = rx_keys.shape[0]
    basis = np.zeros((users, k, k), dtype=np.uint8)
    has = np.zeros((users, k), dtype=bool)
    ranks = np.zeros(users, dtype=np.int64)
    if k == 0:
        return 0
    for esi in range(1, max_esi + 1):
        if esi <= n:
            col = gen_t[esi - 1]
        else:
            col = _rng.coefficients(code_seed_t, esi, k, mask)
        got = _rng.uniforms_np(rx_keys, np.uint64(esi)) >= eps
        active = got & (ranks < k)
        if active.any():
            v = np.zeros((users, k), dtype=np.uint8)
            v[active] = col
            _reduce_into(basis, has, ranks, v, active, mul, inv)
        if (ranks == k).all():
            return esi
    return -1
