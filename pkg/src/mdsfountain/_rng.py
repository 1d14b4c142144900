"""Counter-based random draws shared by the encoder, the channel and the kernels.

Every draw is a pure function of a 64-bit key and a counter, so any symbol,
coefficient or erasure decision can be recomputed out of order.  The mixing
step is the SplitMix64 output function; ``derive(key, i)`` is the i-th output
of a SplitMix64 stream whose state starts at ``key``.

The compiled kernels reimplement exactly these functions; the test-suite
checks them against each other bit for bit.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0

# domain tags keep the channel and coefficient streams of a simulation apart
TAG_CHANNEL = 0x43484E4C
TAG_CODE = 0x434F4445


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def root_key(seed):
    return mix64(seed + GAMMA)


def derive(key, *words):
    """Fold ``words`` into ``key``; each step is one SplitMix64 output."""
    h = key & MASK64
    for w in words:
        if w < 0:
            raise ValueError("counter words must be non-negative")
        h = mix64(h + (w + 1) * GAMMA)
    return h


def uniform(key, i):
    return (derive(key, i) >> 11) * INV_2_53


# --- numpy vectorised versions -------------------------------------------

_U_GAMMA = np.uint64(GAMMA)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U1 = np.uint64(1)


def mix64_np(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _U_M1
        z = (z ^ (z >> np.uint64(27))) * _U_M2
    return z ^ (z >> np.uint64(31))


def derive_np(keys, words):
    """Broadcasting ``derive(key, word)`` over uint64 arrays."""
    keys = np.asarray(keys, dtype=np.uint64)
    words = np.asarray(words, dtype=np.uint64)
    # uint64 wraparound is the intended arithmetic
    with np.errstate(over="ignore"):
        return mix64_np(keys + (words + _U1) * _U_GAMMA)


def uniforms_np(keys, counters):
    h = derive_np(keys, counters)
    return (h >> np.uint64(11)).astype(np.float64) * INV_2_53


def coefficients(seed, esi, k, mask):
    """The k coefficients of the random column with identifier ``esi``."""
    col_key = derive(root_key(seed), esi)
    h = derive_np(np.uint64(col_key), np.arange(k, dtype=np.uint64))
    return (h & np.uint64(mask)).astype(np.uint8)


def coefficient_block(seed, esis, k, mask):
    """Stack of ``coefficients`` rows, one per ESI in ``esis``."""
    esis = np.asarray(esis, dtype=np.uint64)
    col_keys = derive_np(np.uint64(root_key(seed)), esis)
    h = derive_np(col_keys[:, None], np.arange(k, dtype=np.uint64)[None, :])
    return (h & np.uint64(mask)).astype(np.uint8)
