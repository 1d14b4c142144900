"""Memoryless packet erasure channel.

Each trial owns a draw stream keyed by ``(seed, trial_index)``; ESI ``i`` of a
trial is erased iff its uniform draw falls below epsilon.  Trials are
therefore independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng

__all__ = ["ChannelExhausted", "ChannelSpec", "collect", "erase_fixed", "horizon_for", "loss_pattern"]


class ChannelExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelSpec:
    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"erasure probability must be in [0, 1), got {self.epsilon}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def trial_key(self, trial_index):
        return _rng.derive(_rng.root_key(self.seed), trial_index)


def horizon_for(m_target, epsilon):
    """Transmission cap for collecting ``m_target`` symbols."""
    return max(math.ceil(10 * m_target / (1.0 - epsilon)), 1000)


def loss_pattern(ch: ChannelSpec, trial_index, count) -> np.ndarray:
    """Boolean array, True where ESI ``1..count`` is erased."""
    key = np.uint64(ch.trial_key(trial_index))
    esis = np.arange(1, count + 1, dtype=np.uint64)
    return _rng.uniforms_np(key, esis) < ch.epsilon


def collect(ch: ChannelSpec, trial_index, m_target, horizon=None):
    """Send ESIs 1, 2, ... until ``m_target`` arrive; return the arrived ESIs."""
    if m_target < 0:
        raise ValueError("m_target must be non-negative")
    if m_target == 0:
        return []
    horizon = horizon_for(m_target, ch.epsilon) if horizon is None else horizon
    got = []
    start = 1
    chunk = int(m_target / (1.0 - ch.epsilon) * 1.25) + 16
    key = np.uint64(ch.trial_key(trial_index))
    while len(got) < m_target:
        stop = min(start + chunk, horizon + 1)
        if start >= stop:
            raise ChannelExhausted(
                f"only {len(got)} of {m_target} symbols arrived within {horizon} transmissions"
            )
        esis = np.arange(start, stop, dtype=np.uint64)
        kept = esis[_rng.uniforms_np(key, esis) >= ch.epsilon]
        got.extend(int(e) for e in kept[: m_target - len(got)])
        start = stop
    return got


def erase_fixed(ch: ChannelSpec, trial_index, esi_count):
    """Surviving subset of ESIs ``1..esi_count``."""
    if esi_count < 0:
        raise ValueError("esi_count must be non-negative")
    lost = loss_pattern(ch, trial_index, esi_count)
    return (np.flatnonzero(~lost) + 1).tolist()
