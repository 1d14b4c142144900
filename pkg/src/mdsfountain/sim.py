"""Monte Carlo estimates of decoding failure.

Every trial is keyed by ``(seed, delta, trial_index)`` so estimates do not
depend on how trials are split across blocks or worker threads.  Trials run
in fixed-size blocks; early stopping is decided on the ordered sequence of
completed blocks, never on completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from ._backend import kernels
from .channel import ChannelExhausted, ChannelSpec, collect, horizon_for
from .codes import CodeSpec
from .fountain import Encoder, ReceivedSet, try_decode

__all__ = [
    "Budget",
    "MultiuserResult",
    "PointEstimate",
    "SimConfig",
    "estimate_multiuser",
    "estimate_pf",
    "rare_event_budget",
    "wilson_interval",
]

Z95 = 1.959963984540054
DESK_SCALE_TRIALS = 10**8


def wilson_interval(failures, trials, z=Z95):
    if trials <= 0:
        return 0.0, 1.0
    p = failures / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    # the end points are exactly 0 and 1 at the extremes; avoid rounding drift
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class PointEstimate:
    delta: int
    failures: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    deficient: int = 0

    @classmethod
    def from_counts(cls, delta, failures, trials, deficient=0):
        lo, hi = wilson_interval(failures, trials)
        p = failures / trials if trials else 0.0
        return cls(delta, failures, trials, p, min(lo, p), max(hi, p), deficient)


@dataclass
class SimConfig:
    code: CodeSpec
    epsilon: float
    deltas: list
    trials: int
    seed: int = 0
    payload_len: int = 0
    max_failures_target: int | None = 100
    block_size: int = 1 << 16
    workers: int = 1
    full_decode: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(d < 0 for d in self.deltas):
            raise ValueError("overheads must be non-negative")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("erasure probability must be in [0, 1)")
        if self.block_size < 1 or self.workers < 1:
            raise ValueError("block_size and workers must be positive")


@dataclass(frozen=True)
class Budget:
    trials: int
    beyond_desk_scale: bool


def rare_event_budget(target_p, min_failures=20) -> Budget:
    """Trials needed to expect ``min_failures`` failures at probability ``target_p``."""
    if not 0.0 < target_p < 1.0:
        raise ValueError("target probability must be in (0, 1)")
    trials = math.ceil(min_failures / target_p - 1e-9)
    return Budget(trials, trials > DESK_SCALE_TRIALS)


def stream_seeds(seed, delta):
    """Channel seed and coefficient key used for overhead ``delta``."""
    base = _rng.root_key(seed)
    chan_seed = _rng.derive(base, _rng.TAG_CHANNEL, delta)
    code_key = _rng.root_key(_rng.derive(base, _rng.TAG_CODE, delta))
    return chan_seed, code_key


def _payload_block(cfg, delta, chan_seed, code_key, t0, t1):
    """Reference path: real encode/collect/decode round trips."""
    code = cfg.code
    ch = ChannelSpec(cfg.epsilon, chan_seed)
    failures = deficient = 0
    for t in range(t0, t1):
        rng = np.random.default_rng([cfg.seed, delta, t])
        src = rng.integers(0, code.q, size=(code.k, cfg.payload_len))
        enc = Encoder(code, src, seed=_rng.derive(code_key, t))
        esis = collect(ch, t, code.k + delta)
        rx = ReceivedSet(code, enc.seed, enc.symbols(esis))
        if rx.m_prime < code.k:
            deficient += 1
        out = try_decode(rx)
        if out is None:
            failures += 1
        elif not np.array_equal(out, enc.source):
            raise AssertionError(f"trial {t}: decoded block differs from the source")
    return failures, deficient


def _run_block(cfg, delta, chan_seed, code_key, t0, t1):
    if cfg.payload_len > 0:
        return _payload_block(cfg, delta, chan_seed, code_key, t0, t1)
    code = cfg.code
    m_target = code.k + delta
    try:
        return kernels.pf_block(
            code.gen_t, code.k, code.field.mul_table, code.field.inv_table,
            float(cfg.epsilon), m_target, _rng.root_key(chan_seed), code_key,
            t0, t1, bool(cfg.full_decode), horizon_for(m_target, cfg.epsilon),
        )
    except RuntimeError as exc:
        raise ChannelExhausted(str(exc)) from None


def _blocks(total, size):
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def _estimate_point(cfg, delta, pool):
    chan_seed, code_key = stream_seeds(cfg.seed, delta)
    failures = deficient = trials = 0
    blocks = _blocks(cfg.trials, cfg.block_size)
    for r in range(0, len(blocks), cfg.workers):
        batch = blocks[r:r + cfg.workers]
        if pool is None:
            results = [_run_block(cfg, delta, chan_seed, code_key, a, b) for a, b in batch]
        else:
            results = list(pool.map(lambda ab: _run_block(cfg, delta, chan_seed, code_key, *ab), batch))
        for (a, b), (f, d) in zip(batch, results):
            failures += f
            deficient += d
            trials += b - a
            if cfg.max_failures_target is not None and failures >= cfg.max_failures_target:
                return PointEstimate.from_counts(delta, failures, trials, deficient)
    return PointEstimate.from_counts(delta, failures, trials, deficient)


def estimate_pf(cfg: SimConfig):
    """One :class:`PointEstimate` of the decoding failure rate per overhead."""
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        return [_estimate_point(cfg, d, pool) for d in cfg.deltas]
    finally:
        if pool is not None:
            pool.shutdown()


@dataclass
class MultiuserResult:
    """Transmitter overhead needed until every receiver decoded, per trial."""

    k: int
    users: int
    required: np.ndarray = field(repr=False)

    def pe(self, delta_tx):
        """Fraction of trials still undecoded after ``k + delta_tx`` sends."""
        fails = int((self.required > delta_tx).sum())
        return PointEstimate.from_counts(delta_tx, fails, self.required.size)

    def curve(self, delta_max):
        return [self.pe(d) for d in range(delta_max + 1)]


def receiver_channel(seed, receiver, epsilon) -> ChannelSpec:
    """The erasure channel of one receiver in :func:`estimate_multiuser`."""
    base = _rng.derive(_rng.root_key(seed), _rng.TAG_CHANNEL)
    return ChannelSpec(epsilon, _rng.derive(base, receiver))


def receiver_keys(seed, users, trial):
    """Trial keys of all receivers; entry r equals ``receiver_channel(seed, r, .).trial_key(trial)``."""
    base = _rng.derive(_rng.root_key(seed), _rng.TAG_CHANNEL)
    seeds = _rng.derive_np(np.uint64(base), np.arange(users, dtype=np.uint64))
    roots = _rng.mix64_np(seeds + np.uint64(_rng.GAMMA))
    return _rng.derive_np(roots, np.uint64(trial))


def multiuser_code_seed(seed, trial):
    code_key = _rng.root_key(_rng.derive(_rng.root_key(seed), _rng.TAG_CODE))
    return _rng.derive(code_key, trial)


def _multiuser_trial(code, epsilon, users, seed, t, max_esi):
    keys = receiver_keys(seed, users, t)
    count = kernels.multiuser_trial(
        code.gen_t, code.k, code.field.mul_table, code.field.inv_table,
        float(epsilon), keys, multiuser_code_seed(seed, t), max_esi,
    )
    if count < 0:
        raise ChannelExhausted(f"trial {t}: not all receivers decoded within {max_esi} symbols")
    return count - code.k


def estimate_multiuser(code: CodeSpec, epsilon, N, trials, seed=0, workers=1, max_esi=None):
    """Broadcast ESIs 1, 2, ... to N receivers until all of them decode.

    All receivers see the same generator (one coefficient stream per trial)
    through independent erasure channels.
    """
    if N < 1:
        raise ValueError("need at least one user")
    if max_esi is None:
        max_esi = horizon_for(code.k + 64, epsilon)
    run = lambda t: _multiuser_trial(code, epsilon, N, seed, t, max_esi)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            required = list(pool.map(run, range(trials)))
    else:
        required = [run(t) for t in range(trials)]
    return MultiuserResult(code.k, N, np.asarray(required, dtype=np.int64))
