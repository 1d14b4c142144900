"""Systematic MDS outer codes: single parity check and shortened Reed-Solomon.

Generators are stored as ``k x n`` matrices ``(I | P)``.  Reed-Solomon
generators come from a Vandermonde evaluation matrix over the points
alpha^0 .. alpha^(n-1), brought to systematic form by left-multiplying with
the inverse of its first k columns.
"""

from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gf import FieldSpec, field_new
from .matrix import GFMatrix, invert, mat_mul, rank, submatrix_by_columns

__all__ = [
    "CodeKind",
    "CodeSpec",
    "MdsResult",
    "build_lrfc_only",
    "build_rs",
    "build_spc",
    "encode_block",
    "mds_check",
    "read_generator_csv",
    "write_generator_csv",
]


class CodeKind(enum.Enum):
    SPC = "spc"
    REED_SOLOMON = "rs"
    NONE = "none"  # no outer code: every symbol comes from the fountain


@dataclass(frozen=True, eq=False)
class CodeSpec:
    n: int
    k: int
    field: FieldSpec
    gen: GFMatrix
    kind: CodeKind

    def __post_init__(self):
        if self.gen.shape != (self.k, self.n):
            raise ValueError(f"generator is {self.gen.shape}, expected {(self.k, self.n)}")
        if self.n and not np.array_equal(self.gen.data[:, : self.k], np.eye(self.k, dtype=np.uint8)):
            raise ValueError("generator is not in systematic form")

    @property
    def q(self):
        return self.field.q

    @property
    def parity(self):
        """The ``k x (n-k)`` redundancy part P of ``G = (I | P)``."""
        return submatrix_by_columns(self.gen, range(self.k, self.n))

    @property
    def gen_t(self):
        """Row ``i`` is the generator column of ESI ``i + 1`` (C-contiguous)."""
        return np.ascontiguousarray(self.gen.data.T)

    def label(self):
        if self.kind is CodeKind.NONE:
            return f"LRFC(k={self.k}) over GF({self.q})"
        name = "SPC" if self.kind is CodeKind.SPC else "RS"
        return f"({self.n},{self.k}) {name} over GF({self.q})"


def build_spc(k) -> CodeSpec:
    """The binary (k+1, k) single-parity-check code."""
    if k < 2:
        raise ValueError(f"SPC needs k >= 2, got {k}")
    f = field_new(1)
    g = np.hstack([np.eye(k, dtype=np.uint8), np.ones((k, 1), dtype=np.uint8)])
    return CodeSpec(k + 1, k, f, GFMatrix(g, f), CodeKind.SPC)


def build_rs(n, k, field: FieldSpec) -> CodeSpec:
    if not 2 <= k < n <= field.q - 1:
        raise ValueError(
            f"Reed-Solomon over GF({field.q}) needs 2 <= k < n <= {field.q - 1}, got n={n}, k={k}"
        )
    v = np.array(
        [[field.alpha_pow(i * j) for j in range(n)] for i in range(k)], dtype=np.uint8
    )
    V = GFMatrix(v, field)
    head = submatrix_by_columns(V, range(k))
    gen = mat_mul(invert(head), V)
    return CodeSpec(n, k, field, gen, CodeKind.REED_SOLOMON)


def build_lrfc_only(k, field: FieldSpec) -> CodeSpec:
    """Degenerate spec with no outer code, so ESI 1 is already a random column."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return CodeSpec(0, k, field, GFMatrix.zeros(k, 0, field), CodeKind.NONE)


@dataclass(frozen=True)
class MdsResult:
    verified: bool
    checked: int
    exhaustive: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.verified


def mds_check(spec: CodeSpec, exhaustive_limit=10**6, rng=None) -> MdsResult:
    """Check that every ``k x k`` column submatrix of the generator is invertible.

    All C(n, k) subsets are tried when that number is at most
    ``exhaustive_limit``; otherwise that many random subsets.  On failure the
    result carries the offending 0-based column indices.
    """
    n, k = spec.n, spec.k
    g = spec.gen
    total = math.comb(n, k)
    if total <= exhaustive_limit:
        subsets = itertools.combinations(range(n), k)
        exhaustive = True
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        subsets = (
            tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
            for _ in range(exhaustive_limit)
        )
        exhaustive = False
    checked = 0
    for cols in subsets:
        checked += 1
        if rank(submatrix_by_columns(g, cols)) < k:
            return MdsResult(False, checked, exhaustive, tuple(cols))
    return MdsResult(True, checked, exhaustive)


def encode_block(spec: CodeSpec, u):
    """The n outer-code symbols of source block ``u`` (k rows of T symbols)."""
    from .fountain import EncodedSymbol

    u = _as_block(u, spec)
    c = mat_mul(spec.gen.T, GFMatrix(u, spec.field)).data
    return [EncodedSymbol(i + 1, c[i]) for i in range(spec.n)]


def _as_block(u, spec):
    try:
        arr = np.array(u, dtype=np.int64)
    except ValueError as exc:
        raise ValueError("source block rows must all have the same length") from exc
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != spec.k or arr.shape[1] < 1:
        raise ValueError(f"source block must be {spec.k} rows of T >= 1 symbols, got {arr.shape}")
    if arr.min() < 0 or arr.max() >= spec.q:
        raise ValueError(f"source symbols must lie in GF({spec.q})")
    return arr.astype(np.uint8)


def write_generator_csv(spec: CodeSpec, fh):
    w = csv.writer(fh, lineterminator="\n")
    for row in spec.gen.tolist():
        w.writerow(row)


def read_generator_csv(fh, field: FieldSpec) -> GFMatrix:
    rows = [[int(x) for x in r] for r in csv.reader(fh) if r]
    return GFMatrix(rows, field)
