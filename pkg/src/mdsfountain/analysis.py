"""Closed-form failure probabilities for fountain and concatenated codes.

Conventions: ``delta`` is the receiver overhead (symbols received beyond k),
``delta_tx`` the transmitter overhead (symbols sent beyond k), ``epsilon``
the erasure probability.  Binomial sums are carried out in the log domain.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "BoundPair",
    "ConcatBounds",
    "Empirical",
    "ExactRank",
    "Idealized",
    "LrfcBounds",
    "SystemParams",
    "binomial_tail",
    "concat_bounds",
    "concat_exact",
    "exact_full_rank",
    "lrfc_bounds",
    "p_star",
    "q_star",
    "rank_deficiency",
    "receiver_failure",
    "receiver_pmf",
    "smallest_overhead",
    "system_failure",
    "write_curve_csv",
]


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid bound pair ({self.lower}, {self.upper})")

    def scale(self, factor):
        return BoundPair(self.lower * factor, self.upper * factor)

    def contains(self, p):
        return self.lower <= p <= self.upper

    def __iter__(self):
        yield self.lower
        yield self.upper


def lrfc_bounds(delta, q) -> BoundPair:
    """Failure bounds of a random linear fountain at overhead ``delta``.

    ``q^-(delta+1) <= P_F < q^-delta / (q-1)``, upper value clamped to 1.
    """
    if delta < 0:
        raise ValueError("overhead must be non-negative; m < k is handled by the caller")
    if q < 2:
        raise ValueError("field order must be at least 2")
    return BoundPair(float(q) ** (-delta - 1), min(1.0, float(q) ** (-delta) / (q - 1)))


def exact_full_rank(m_rows, k, q, exact=False):
    """Probability that a uniform ``m_rows x k`` matrix over GF(q) has rank k.

    ``prod_{i=0}^{k-1} (1 - q^(i - m_rows))``.  With ``exact=True`` the
    result is a :class:`fractions.Fraction`.
    """
    if m_rows < k:
        raise ValueError(f"need m_rows >= k, got {m_rows} < {k}")
    if exact:
        p = Fraction(1)
        for i in range(k):
            p *= 1 - Fraction(1, q ** (m_rows - i))
        return p
    return math.exp(_log_full_rank(m_rows, k, q))


def _log_full_rank(m_rows, k, q):
    return math.fsum(math.log1p(-float(q) ** (i - m_rows)) for i in range(k))


def rank_deficiency(m_rows, k, q):
    """``1 - exact_full_rank`` without cancellation."""
    if k == 0:
        return 0.0
    return -math.expm1(_log_full_rank(m_rows, k, q))


def _log_binom_pmf(n, i, eps):
    if eps == 0.0:
        return 0.0 if i == n else -math.inf
    return math.log(math.comb(n, i)) + i * math.log1p(-eps) + (n - i) * math.log(eps)


def _logsumexp(xs):
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    top = max(xs)
    return top + math.log(math.fsum(math.exp(x - top) for x in xs))


def binomial_tail(n, lo, hi, eps):
    """``sum_{i=lo}^{hi} C(n,i) (1-eps)^i eps^(n-i)`` (survivor counts)."""
    lo, hi = max(lo, 0), min(hi, n)
    if lo > hi:
        return 0.0
    return math.exp(_logsumexp(_log_binom_pmf(n, i, eps) for i in range(lo, hi + 1)))


def q_star(n, k, epsilon):
    """Probability that at least k of the n outer-code symbols survive."""
    _check_eps(epsilon)
    return binomial_tail(n, k, n, epsilon)


def p_star(n, k, epsilon):
    """Probability that fewer than k of the n outer-code symbols survive."""
    _check_eps(epsilon)
    return binomial_tail(n, 0, k - 1, epsilon)


def _check_eps(epsilon):
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"erasure probability must be in [0, 1), got {epsilon}")


def concat_bounds(delta, q, n, k, epsilon) -> BoundPair:
    """Fountain bounds scaled by the chance the outer code alone cannot decode."""
    return lrfc_bounds(delta, q).scale(p_star(n, k, epsilon))


def concat_exact(delta, q, n, k, epsilon):
    """Exact failure probability when a receiver collects k + delta symbols.

    Conditions on the number m' of outer-code symbols among them: for
    m' < k the remaining unknowns face a uniform ``(k+delta-m') x (k-m')``
    random system.  Used as an oracle for the simulator.
    """
    _check_eps(epsilon)
    if delta < 0:
        raise ValueError("overhead must be non-negative")
    terms = []
    for mp in range(0, k):
        lp = _log_binom_pmf(n, mp, epsilon) if n else (0.0 if mp == 0 else -math.inf)
        if lp == -math.inf:
            continue
        d = rank_deficiency(k + delta - mp, k - mp, q)
        if d > 0:
            terms.append(lp + math.log(d))
    return math.exp(_logsumexp(terms))


def receiver_pmf(k, delta_tx, m, epsilon):
    """Probability that exactly ``m`` of ``k + delta_tx`` sent symbols arrive."""
    total = k + delta_tx
    if not 0 <= m <= total:
        raise ValueError(f"m must be in 0..{total}, got {m}")
    _check_eps(epsilon)
    return math.exp(_log_binom_pmf(total, m, epsilon))


@dataclass(frozen=True)
class SystemParams:
    n: int
    k: int
    q: int
    epsilon: float
    N: int = 1
    delta_tx: int = 0

    def __post_init__(self):
        _check_eps(self.epsilon)
        if self.N < 1:
            raise ValueError("need at least one user")
        if self.delta_tx < 0:
            raise ValueError("transmitter overhead must be non-negative")
        if self.k < 1 or self.n < 0:
            raise ValueError("invalid code parameters")

    def with_delta(self, delta_tx):
        return SystemParams(self.n, self.k, self.q, self.epsilon, self.N, delta_tx)


class _PfModel:
    """A receiver-side failure model ``P_F(delta)`` plugged into the system sums."""

    name = "model"

    def pf(self, delta, params) -> BoundPair:
        raise NotImplementedError

    def receiver(self, params: SystemParams) -> BoundPair:
        k, dtx, eps = params.k, params.delta_tx, params.epsilon
        total = k + dtx
        short = binomial_tail(total, 0, k - 1, eps)
        lo = [short]
        hi = [short]
        for m in range(k, total + 1):
            w = receiver_pmf(k, dtx, m, eps)
            if w == 0.0:
                continue
            b = self.pf(m - k, params)
            lo.append(w * b.lower)
            hi.append(w * b.upper)
        return BoundPair(min(1.0, math.fsum(lo)), min(1.0, math.fsum(hi)))


class ConcatBounds(_PfModel):
    name = "concat"

    def pf(self, delta, params):
        return concat_bounds(delta, params.q, params.n, params.k, params.epsilon)


class LrfcBounds(_PfModel):
    name = "lrfc"

    def pf(self, delta, params):
        return lrfc_bounds(delta, params.q)


class Idealized(_PfModel):
    """Decodes from any k received symbols."""

    name = "ideal"

    def pf(self, delta, params):
        return BoundPair(0.0, 0.0)


class Empirical(_PfModel):
    """``P_F`` read from a table ``delta -> p`` or ``delta -> (low, high)``.

    Beyond the largest tabulated overhead the lower value is 0 and the upper
    value is held at the last entry (failure is nonincreasing in delta).
    """

    name = "empirical"

    def __init__(self, table):
        self.table = {}
        for d, v in table.items():
            lo, hi = (v, v) if isinstance(v, (int, float)) else v
            self.table[int(d)] = BoundPair(float(lo), float(hi))
        if not self.table:
            raise ValueError("empty table")

    @classmethod
    def from_estimates(cls, points):
        return cls({p.delta: (p.ci_low, p.ci_high) for p in points})

    def pf(self, delta, params):
        if delta in self.table:
            return self.table[delta]
        last = max(self.table)
        if delta > last:
            return BoundPair(0.0, self.table[last].upper)
        raise ValueError(f"no empirical entry for overhead {delta}")


class ExactRank(_PfModel):
    """Exact receiver failure for the broadcast model, no bounds involved.

    Of the k + delta_tx sent ESIs, ``min(n, k + delta_tx)`` are outer-code
    symbols; the received counts of the two kinds are independent binomials
    and failure is a rank deficiency of the residual uniform random system.
    """

    name = "exact"

    def pf(self, delta, params):
        p = concat_exact(delta, params.q, params.n, params.k, params.epsilon)
        return BoundPair(p, p)

    def receiver(self, params):
        k, eps = params.k, params.epsilon
        total = k + params.delta_tx
        n_out = min(params.n, total)
        n_in = total - n_out
        terms = []
        for mp in range(0, min(k, n_out + 1)):
            lp = _log_binom_pmf(n_out, mp, eps)
            if lp == -math.inf:
                continue
            for ms in range(0, n_in + 1):
                ls = _log_binom_pmf(n_in, ms, eps)
                if ls == -math.inf:
                    continue
                need = k - mp
                fail = 1.0 if ms < need else rank_deficiency(ms, need, params.q)
                if fail > 0:
                    terms.append(lp + ls + math.log(fail))
        p = min(1.0, math.exp(_logsumexp(terms)))
        return BoundPair(p, p)


def receiver_failure(params: SystemParams, model) -> BoundPair:
    """Probability that one receiver cannot decode after ``k + delta_tx`` sends."""
    return model.receiver(params)


def _one_of_n(p, users):
    if p >= 1.0:
        return 1.0
    if p <= 0.0:
        return 0.0
    return min(1.0, -math.expm1(users * math.log1p(-p)))


def system_failure(params: SystemParams, model) -> BoundPair:
    """Probability that at least one of N independent receivers fails."""
    b = receiver_failure(params, model)
    return BoundPair(_one_of_n(b.lower, params.N), _one_of_n(b.upper, params.N))


def smallest_overhead(params: SystemParams, model, target, delta_max=200, side="upper"):
    """Smallest transmitter overhead whose system failure is at most ``target``."""
    for d in range(delta_max + 1):
        b = system_failure(params.with_delta(d), model)
        if getattr(b, side) <= target:
            return d
    return None


def format_prob(p):
    """Fixed-point above 1e-3, scientific below; stable across platforms."""
    if p == 0:
        return "0"
    if p < 1e-3:
        return f"{p:.6e}"
    return f"{p:.8f}"


def write_curve_csv(fh, rows, header):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_prob(x) if isinstance(x, float) else x for x in row])
