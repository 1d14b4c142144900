import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdsfountain import field_new
from mdsfountain.analysis import exact_full_rank
from mdsfountain.codes import build_lrfc_only, build_rs, build_spc
from mdsfountain.fountain import (
    DecodeFailure,
    EncodedSymbol,
    Encoder,
    ReceivedSet,
    decode,
    generator_column,
    lrfc_column,
    peel_fast_path,
    read_symbols,
    try_decode,
    write_symbols,
)
from mdsfountain.matrix import GFMatrix, mat_mul, rank

from .partition import partitioned_verdict


def test_lrfc_column_is_deterministic(f16):
    a = lrfc_column(f16, 0, 16, 10, n=15)
    b = lrfc_column(f16, 0, 16, 10, n=15)
    assert np.array_equal(a, b) and a.shape == (10,)
    assert not np.array_equal(a, lrfc_column(f16, 1, 16, 10, n=15))


def test_lrfc_column_rejects_outer_esi(f16):
    with pytest.raises(ValueError):
        lrfc_column(f16, 0, 15, 10, n=15)


def test_lrfc_coefficients_uniform_over_f16(f16):
    samples = np.concatenate([lrfc_column(f16, 42, e, 100) for e in range(1, 1001)])
    assert samples.size == 100_000
    counts = np.bincount(samples, minlength=16)
    p = 1 / 16
    sigma = np.sqrt(samples.size * p * (1 - p))
    assert np.all(np.abs(counts - samples.size * p) < 5 * sigma)
    # chi-square with 15 degrees of freedom, far tail at 0.999 quantile ~ 37.7
    chi2 = ((counts - samples.size * p) ** 2 / (samples.size * p)).sum()
    assert chi2 < 37.7


def test_all_zero_column_is_kept(f2):
    # with k = 1 over GF(2) half of all columns are zero; none is resampled
    cols = [int(lrfc_column(f2, 3, e, 1)[0]) for e in range(1, 2001)]
    assert 900 < cols.count(0) < 1100


def test_emit_systematic_and_parity():
    code = build_spc(2)
    enc = Encoder(code, [[1, 0, 1], [1, 1, 0]], seed=5)
    assert enc.symbol(1).payload.tolist() == [1, 0, 1]
    assert enc.symbol(2).payload.tolist() == [1, 1, 0]
    assert enc.symbol(3).payload.tolist() == [0, 1, 1]


def test_emit_fountain_symbol_is_dot_product(rs15, rng):
    u = rng.integers(0, 16, size=(10, 5))
    enc = Encoder(rs15, u, seed=99)
    col = lrfc_column(rs15.field, 99, 20, 10, n=15)
    want = mat_mul(GFMatrix(col[None, :], rs15.field), GFMatrix(u, rs15.field)).data[0]
    assert np.array_equal(enc.symbol(20).payload, want)
    assert enc.symbol(20) == enc.symbol(20)
    assert np.array_equal(generator_column(rs15, 99, 20), col)


def test_decode_from_systematic_prefix(rs15, rng):
    u = rng.integers(0, 16, size=(10, 4))
    enc = Encoder(rs15, u, seed=1)
    rx = ReceivedSet(rs15, 1, enc.symbols(range(1, 11)))
    assert np.array_equal(try_decode(rx), u)


def test_decode_from_every_k_subset_of_outer_symbols(rs15, rng):
    u = rng.integers(0, 16, size=(10, 2))
    enc = Encoder(rs15, u, seed=1)
    syms = enc.symbols(range(1, 16))
    for subset in itertools.combinations(syms, 10):
        rx = ReceivedSet(rs15, 1, subset)
        assert np.array_equal(try_decode(rx), u)
        assert np.array_equal(peel_fast_path(rx), u)


def test_failure_carries_rank(lrfc16, rng):
    enc = Encoder(lrfc16, rng.integers(0, 16, size=(10, 1)), seed=2)
    rx = ReceivedSet(lrfc16, 2, enc.symbols(range(1, 6)))
    assert try_decode(rx) is None
    with pytest.raises(DecodeFailure) as exc:
        decode(rx)
    assert exc.value.rank == 5


def test_lrfc_only_binary_success_rate(f2):
    """Pure fountain, k = m = 10 over GF(2): success = prod (1 - 2^-i)."""
    from mdsfountain.sim import SimConfig, estimate_pf

    code = build_lrfc_only(10, f2)
    p = estimate_pf(SimConfig(code, 0.0, [0], trials=100_000, seed=3, max_failures_target=None))[0]
    success = 1 - p.p_hat
    expect = float(exact_full_rank(10, 10, 2))
    assert expect == pytest.approx(0.2890, abs=1e-4)
    sigma = np.sqrt(expect * (1 - expect) / p.trials)
    assert abs(success - expect) < 3 * sigma


def test_peel_fast_path_falls_through(rs15, rng):
    enc = Encoder(rs15, rng.integers(0, 16, size=(10, 1)), seed=2)
    rx = ReceivedSet(rs15, 2, enc.symbols(list(range(1, 10)) + [16, 17]))
    assert rx.m_prime == 9
    assert peel_fast_path(rx) is None


def test_peel_matches_full_decode_on_random_sets(rs15, spc11):
    rng = np.random.default_rng(11)
    for code in (rs15, spc11):
        for _ in range(5000):
            u = rng.integers(0, code.q, size=(code.k, 2))
            seed = int(rng.integers(0, 2**32))
            m = code.k + int(rng.integers(0, 3))
            esis = rng.choice(np.arange(1, code.n + 8), size=m, replace=False)
            enc = Encoder(code, u, seed)
            rx = ReceivedSet(code, seed, enc.symbols(esis.tolist()))
            fast = peel_fast_path(rx)
            full = try_decode(rx)
            if fast is not None:
                assert np.array_equal(fast, full)
            else:
                assert rx.m_prime < code.k


def test_received_set_validation(rs15):
    rx = ReceivedSet(rs15, 0)
    rx.add(EncodedSymbol(1, [1, 2]))
    with pytest.raises(ValueError, match="twice"):
        rx.add(EncodedSymbol(1, [1, 2]))
    with pytest.raises(ValueError, match="length"):
        rx.add(EncodedSymbol(2, [1, 2, 3]))
    with pytest.raises(ValueError):
        rx.add(EncodedSymbol(3, [16, 0]))
    with pytest.raises(ValueError):
        EncodedSymbol(0, [1])


def test_received_set_counts(rs15, rng):
    enc = Encoder(rs15, rng.integers(0, 16, size=(10, 1)))
    rx = ReceivedSet(rs15, 0, enc.symbols([1, 5, 15, 16, 40]))
    assert (rx.m, rx.m_prime, rx.m_second, rx.overhead) == (5, 3, 2, -5)
    assert rx.generator().shape == (10, 5)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([1, 2, 4]), st.sampled_from([5, 10]), st.integers(0, 2**32 - 1))
def test_round_trip_whenever_full_rank(m, k, seed):
    f = field_new(m)
    r = np.random.default_rng(seed)
    if m == 2:
        k = 2  # the only RS code over GF(4) with k >= 2 is (3, 2)
    n = k + 1 if m == 1 else min(f.q - 1, k + 2)
    code = build_spc(k) if m == 1 else build_rs(n, k, f)
    u = r.integers(0, f.q, size=(k, 3))
    enc = Encoder(code, u, seed)
    esis = r.choice(np.arange(1, n + 3 * k), size=k + int(r.integers(0, 4)), replace=False)
    rx = ReceivedSet(code, seed, enc.symbols(esis.tolist()))
    out = try_decode(rx)
    if rank(rx.coefficient_rows()) == k:
        assert np.array_equal(out, u)
    else:
        assert out is None


def test_verdict_independent_of_payload(rs15):
    r = np.random.default_rng(5)
    for _ in range(300):
        esis = r.choice(np.arange(1, 30), size=11, replace=False).tolist()
        verdicts = set()
        for _ in range(2):
            enc = Encoder(rs15, r.integers(0, 16, size=(10, 3)), seed=4)
            verdicts.add(try_decode(ReceivedSet(rs15, 4, enc.symbols(esis))) is None)
        assert len(verdicts) == 1


def test_partition_verdict_agrees_on_small_sample(rs15, spc11):
    r = np.random.default_rng(6)
    for code in (rs15, spc11):
        for _ in range(300):
            esis = r.choice(np.arange(1, code.n + 10), size=code.k + 1, replace=False).tolist()
            rx = ReceivedSet(code, 9, [EncodedSymbol(e, [0]) for e in esis])
            assert partitioned_verdict(rx) == (rx.rank() == code.k)


def test_symbol_file_round_trip(rs15, rng):
    enc = Encoder(rs15, rng.integers(0, 16, size=(10, 4)), seed=3)
    syms = enc.symbols([1, 7, 16, 300])
    buf = io.StringIO()
    write_symbols(buf, syms)
    assert buf.getvalue().splitlines()[0].split()[0] == "1"
    buf.seek(0)
    assert read_symbols(buf) == syms
    with pytest.raises(ValueError, match="line 1"):
        read_symbols(io.StringIO("x zz\n"))
