"""Parallel concatenation of a systematic outer code with a random linear fountain.

ESIs are 1-based column indices of the overall generator ``G = (G' | G'')``.
ESIs ``1..n`` are outer-code symbols; every larger ESI is a random linear
combination of the source symbols whose coefficients are recomputed on
demand from ``(seed, esi, row)``, so encoder and decoder never exchange
coefficient vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rng
from .codes import CodeSpec, _as_block
from .gf import FieldSpec
from .matrix import GFMatrix, Singular, Unsolvable, _mul_dense, invert, rank, solve

__all__ = [
    "DecodeFailure",
    "EncodedSymbol",
    "Encoder",
    "ReceivedSet",
    "decode",
    "generator_column",
    "lrfc_column",
    "peel_fast_path",
    "read_symbols",
    "try_decode",
    "write_symbols",
]


class DecodeFailure(ArithmeticError):
    """Received symbols do not determine the source block."""

    def __init__(self, rank, k):
        super().__init__(f"received system has rank {rank} < {k}")
        self.rank = rank
        self.k = k


@dataclass(frozen=True, eq=False)
class EncodedSymbol:
    esi: int
    payload: np.ndarray

    def __post_init__(self):
        if self.esi < 1:
            raise ValueError(f"ESI must be >= 1, got {self.esi}")
        object.__setattr__(self, "payload", np.asarray(self.payload, dtype=np.uint8).ravel())

    def __eq__(self, other):
        if not isinstance(other, EncodedSymbol):
            return NotImplemented
        return self.esi == other.esi and np.array_equal(self.payload, other.payload)

    def __repr__(self):
        return f"EncodedSymbol(esi={self.esi}, payload={self.payload.tobytes().hex()})"


def lrfc_column(field: FieldSpec, seed, esi, k, n=0) -> np.ndarray:
    """Coefficients g_{1..k, esi} of a fountain symbol.

    Uniform over all of GF(q), zero included; an all-zero column is a legal
    outcome.
    """
    if esi <= n:
        raise ValueError(f"ESI {esi} belongs to the outer code (n={n})")
    return _rng.coefficients(seed, esi, k, field.mask)


def generator_column(code: CodeSpec, seed, esi) -> np.ndarray:
    if esi < 1:
        raise ValueError(f"ESI must be >= 1, got {esi}")
    if esi <= code.n:
        return code.gen.data[:, esi - 1].copy()
    return lrfc_column(code.field, seed, esi, code.k, code.n)


def generator_rows(code: CodeSpec, seed, esis) -> np.ndarray:
    """``len(esis) x k`` array whose rows are the generator columns of ``esis``."""
    esis = np.asarray(esis, dtype=np.int64)
    out = np.empty((esis.size, code.k), dtype=np.uint8)
    if esis.size == 0:
        return out
    if esis.min() < 1:
        raise ValueError("ESIs must be >= 1")
    mds = esis <= code.n
    out[mds] = code.gen_t[esis[mds] - 1]
    if (~mds).any():
        out[~mds] = _rng.coefficient_block(seed, esis[~mds], code.k, code.field.mask)
    return out


class Encoder:
    """Rateless encoder for one source block.

    ``symbol(esi)`` is a pure function of the code, the source block, the
    seed and the ESI.
    """

    def __init__(self, code: CodeSpec, source, seed=0):
        self.code = code
        self.source = _as_block(source, code)
        self.seed = seed

    @property
    def payload_len(self):
        return self.source.shape[1]

    def symbol(self, esi) -> EncodedSymbol:
        return self.symbols([esi])[0]

    def symbols(self, esis):
        esis = list(esis)
        g = generator_rows(self.code, self.seed, esis)
        c = _mul_dense(g, self.source, self.code.field.mul_table)
        return [EncodedSymbol(e, c[i]) for i, e in enumerate(esis)]

    emit_symbol = symbol


class ReceivedSet:
    """Symbols gathered by one receiver; ESIs must be distinct."""

    def __init__(self, code: CodeSpec, seed=0, symbols=()):
        self.code = code
        self.seed = seed
        self._symbols = {}
        self.payload_len = None
        for s in symbols:
            self.add(s)

    def add(self, sym: EncodedSymbol):
        if sym.esi in self._symbols:
            raise ValueError(f"ESI {sym.esi} received twice")
        if self.payload_len is None:
            self.payload_len = sym.payload.size
        elif sym.payload.size != self.payload_len:
            raise ValueError(
                f"payload of ESI {sym.esi} has length {sym.payload.size}, expected {self.payload_len}"
            )
        if sym.payload.size and int(sym.payload.max()) >= self.code.q:
            raise ValueError(f"payload of ESI {sym.esi} is outside GF({self.code.q})")
        self._symbols[sym.esi] = sym

    def __len__(self):
        return len(self._symbols)

    def __iter__(self):
        return iter(self._symbols.values())

    @property
    def esis(self):
        return list(self._symbols)

    @property
    def m(self):
        return len(self._symbols)

    @property
    def m_prime(self):
        return sum(1 for e in self._symbols if e <= self.code.n)

    @property
    def m_second(self):
        return self.m - self.m_prime

    @property
    def overhead(self):
        return self.m - self.code.k

    def coefficient_rows(self) -> GFMatrix:
        """The m x k system matrix, i.e. the transpose of the received-column generator."""
        return GFMatrix(generator_rows(self.code, self.seed, self.esis), self.code.field)

    def generator(self) -> GFMatrix:
        """The k x m matrix of generator columns indexed by the received ESIs."""
        return self.coefficient_rows().T

    def payloads(self) -> np.ndarray:
        t = self.payload_len or 0
        if not self._symbols:
            return np.zeros((0, t), dtype=np.uint8)
        return np.stack([s.payload for s in self._symbols.values()])

    def rank(self) -> int:
        return rank(self.coefficient_rows())


def decode(rx: ReceivedSet) -> np.ndarray:
    """Recover the ``k x T`` source block or raise :class:`DecodeFailure`."""
    k = rx.code.k
    if rx.m < k:
        raise DecodeFailure(rx.rank(), k)
    try:
        return solve(rx.coefficient_rows(), rx.payloads())
    except Unsolvable as exc:
        raise DecodeFailure(exc.rank, k) from None


def try_decode(rx: ReceivedSet):
    """Source block if the received system has rank k, otherwise ``None``."""
    try:
        return decode(rx)
    except DecodeFailure:
        return None


def peel_fast_path(rx: ReceivedSet):
    """Decode from k outer-code symbols alone, or ``None`` to fall through.

    Uses the first k received outer-code ESIs in arrival order and inverts the
    matching ``k x k`` block of ``G'``.
    """
    code = rx.code
    outer = [s for s in rx if s.esi <= code.n][: code.k]
    if len(outer) < code.k:
        return None
    cols = [s.esi - 1 for s in outer]
    sub = GFMatrix(code.gen.data[:, cols], code.field)
    try:
        inv = invert(sub.T)
    except Singular:
        return None
    y = np.stack([s.payload for s in outer])
    return _mul_dense(inv.data, y, code.field.mul_table)


def write_symbols(fh, symbols):
    """One symbol per line: decimal ESI, a space, payload bytes as hex."""
    for s in symbols:
        fh.write(f"{s.esi} {s.payload.tobytes().hex()}\n")


def read_symbols(fh):
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            esi, hexpayload = line.split()
            out.append(EncodedSymbol(int(esi), np.frombuffer(bytes.fromhex(hexpayload), dtype=np.uint8)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed symbol record {line!r}") from exc
    return out
