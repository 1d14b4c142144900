import math

import numpy as np
import pytest

from mdsfountain.analysis import (
    ConcatBounds,
    ExactRank,
    SystemParams,
    concat_bounds,
    concat_exact,
    exact_full_rank,
    receiver_failure,
    system_failure,
)
from mdsfountain.channel import loss_pattern
from mdsfountain.codes import build_lrfc_only
from mdsfountain.fountain import EncodedSymbol, ReceivedSet
from mdsfountain.sim import (
    PointEstimate,
    SimConfig,
    estimate_multiuser,
    estimate_pf,
    multiuser_code_seed,
    rare_event_budget,
    receiver_channel,
    receiver_keys,
    wilson_interval,
)


def _wilson_oracle(x, n, z=1.959963984540054):
    """Roots of (p - p_hat)^2 = z^2 p (1 - p) / n."""
    ph = x / n
    a = 1 + z * z / n
    b = -(2 * ph + z * z / n)
    c = ph * ph
    r = np.sort(np.roots([a, b, c]).real)
    return max(0.0, r[0]), min(1.0, r[1])


@pytest.mark.parametrize("x,n", [(0, 10), (1, 10), (5, 10), (10, 10), (20, 10**6), (3, 7)])
def test_wilson_interval(x, n):
    lo, hi = wilson_interval(x, n)
    olo, ohi = _wilson_oracle(x, n)
    assert lo == pytest.approx(olo, abs=1e-12)
    assert hi == pytest.approx(ohi, abs=1e-12)
    assert lo <= x / n <= hi


def test_point_estimate_zero_failures():
    p = PointEstimate.from_counts(0, 0, 1000)
    assert p.p_hat == 0.0 and p.ci_low == 0.0 and 0 < p.ci_high < 0.004


def test_rare_event_budget():
    assert rare_event_budget(1e-3).trials == 20_000
    assert rare_event_budget(1e-5).trials == 2_000_000
    b = rare_event_budget(1e-7)
    assert b.trials == 200_000_000 and b.beyond_desk_scale
    assert not rare_event_budget(1e-5).beyond_desk_scale
    with pytest.raises(ValueError):
        rare_event_budget(0.0)


def test_sim_config_validation(rs15):
    with pytest.raises(ValueError):
        SimConfig(rs15, 0.1, [0], trials=0)
    with pytest.raises(ValueError):
        SimConfig(rs15, 1.0, [0], trials=10)
    with pytest.raises(ValueError):
        SimConfig(rs15, 0.1, [-1], trials=10)


def test_lossless_mds_never_fails(rs15, spc11):
    for code in (rs15, spc11):
        for p in estimate_pf(SimConfig(code, 0.0, [0, 1], trials=20_000, max_failures_target=None)):
            assert p.failures == 0 and p.p_hat == 0.0


def test_pure_fountain_matches_rank_formula(f2):
    code = build_lrfc_only(10, f2)
    cfg = SimConfig(code, 0.1, [0, 1, 2, 3], trials=200_000, seed=4, max_failures_target=None)
    for p in estimate_pf(cfg):
        want = 1 - float(exact_full_rank(10 + p.delta, 10, 2))
        sigma = math.sqrt(want * (1 - want) / p.trials)
        assert abs(p.p_hat - want) < 3 * sigma


def test_concatenated_f16_ci_meets_band(rs15):
    cfg = SimConfig(rs15, 0.1, [0, 1], trials=10**8, seed=8, max_failures_target=100)
    for p in estimate_pf(cfg):
        b = concat_bounds(p.delta, 16, 15, 10, 0.1)
        assert p.failures >= 100
        assert p.ci_low <= b.upper and p.ci_high >= b.lower
        exact = concat_exact(p.delta, 16, 15, 10, 0.1)
        assert p.ci_low <= exact <= p.ci_high


def test_concatenated_f2_against_exact(spc11):
    cfg = SimConfig(spc11, 0.1, [0, 2, 4], trials=10**7, seed=2, max_failures_target=400)
    for p in estimate_pf(cfg):
        exact = concat_exact(p.delta, 2, 11, 10, 0.1)
        sigma = math.sqrt(exact * (1 - exact) / p.trials)
        assert abs(p.p_hat - exact) < 4 * sigma


def test_deterministic_across_workers_and_blocks(rs15):
    base = dict(code=rs15, epsilon=0.2, deltas=[0, 1, 2], trials=30_000, seed=11)
    ref = estimate_pf(SimConfig(**base, max_failures_target=None, block_size=1 << 16))
    for workers, block in ((1, 1000), (3, 1000), (4, 4096), (2, 7)):
        cfg = SimConfig(**base, max_failures_target=None, block_size=block, workers=workers)
        assert estimate_pf(cfg) == ref


def test_early_stop_independent_of_workers(rs15):
    base = dict(code=rs15, epsilon=0.2, deltas=[0, 1], trials=10**6, seed=3, block_size=2000,
                max_failures_target=50)
    one = estimate_pf(SimConfig(**base, workers=1))
    assert one == estimate_pf(SimConfig(**base, workers=3))
    assert all(p.failures >= 50 and p.trials % 2000 == 0 for p in one)


def test_payload_path_agrees_with_rank_kernel(rs15, spc11):
    for code in (rs15, spc11):
        base = dict(code=code, epsilon=0.3, deltas=[0, 1], trials=1500, seed=21, max_failures_target=None)
        fast = estimate_pf(SimConfig(**base))
        slow = estimate_pf(SimConfig(**base, payload_len=3))
        assert fast == slow
        assert any(p.failures > 0 for p in fast)


def test_full_decode_flag_changes_nothing(rs15):
    base = dict(code=rs15, epsilon=0.3, deltas=[0, 1], trials=20_000, seed=5, max_failures_target=None)
    assert estimate_pf(SimConfig(**base)) == estimate_pf(SimConfig(**base, full_decode=True))


def test_multiuser_lossless_rs_needs_no_overhead(rs15):
    res = estimate_multiuser(rs15, 0.0, 50, trials=20)
    assert res.required.tolist() == [0] * 20


def test_receiver_keys_match_channels():
    keys = receiver_keys(17, 5, 9)
    for r in range(5):
        assert int(keys[r]) == receiver_channel(17, r, 0.1).trial_key(9)


def _batch_required(code, eps, users, seed, t):
    """Smallest transmitter overhead after which every receiver has full rank."""
    code_seed = multiuser_code_seed(seed, t)
    worst = 0
    for r in range(users):
        ch = receiver_channel(seed, r, eps)
        lost = loss_pattern(ch, t, code.k + 200)
        syms, sent = [], 0
        rx = ReceivedSet(code, code_seed)
        while True:
            sent += 1
            if not lost[sent - 1]:
                rx.add(EncodedSymbol(sent, [0]))
                if rx.m >= code.k and rx.rank() == code.k:
                    break
        worst = max(worst, sent - code.k)
    return worst


def test_incremental_elimination_equals_batch(rs15, spc11, lrfc16):
    for code, eps in ((rs15, 0.2), (spc11, 0.1), (lrfc16, 0.05)):
        res = estimate_multiuser(code, eps, 3, trials=25, seed=6)
        for t in range(25):
            assert res.required[t] == _batch_required(code, eps, 3, 6, t)


def test_multiuser_workers_deterministic(spc11):
    a = estimate_multiuser(spc11, 0.05, 20, trials=200, seed=1)
    b = estimate_multiuser(spc11, 0.05, 20, trials=200, seed=1, workers=3)
    assert np.array_equal(a.required, b.required)


@pytest.mark.parametrize("which", ["spc", "lrfc"])
def test_single_receiver_matches_exact_model(which, spc11, f2):
    code = spc11 if which == "spc" else build_lrfc_only(10, f2)
    res = estimate_multiuser(code, 0.05, 1, trials=20_000, seed=2)
    for p in res.curve(10):
        exact = receiver_failure(SystemParams(code.n, 10, 2, 0.05, delta_tx=p.delta), ExactRank()).upper
        sigma = math.sqrt(exact * (1 - exact) / p.trials)
        assert abs(p.p_hat - exact) < 4 * sigma + 1e-12


def test_multiuser_curve_within_system_failure_band(spc11):
    """N = 100, eps = 0.01, SPC(11,10) + binary fountain against the bound band."""
    res = estimate_multiuser(spc11, 0.01, 100, trials=4000, seed=1)
    misses = []
    for p in res.curve(12):
        b = system_failure(SystemParams(11, 10, 2, 0.01, N=100, delta_tx=p.delta), ConcatBounds())
        if p.ci_low > b.upper or p.ci_high < b.lower:
            misses.append((p.delta, p.p_hat, b.lower, b.upper))
    assert not misses, misses
