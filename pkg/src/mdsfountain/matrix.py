"""Dense matrices over GF(2^m) with Gaussian elimination.

Entries live in a ``uint8`` numpy array; multiplication goes through the
field's lookup table so every operation is vectorised or handed to the
compiled kernels.
"""

from __future__ import annotations

import numpy as np

from ._backend import kernels
from .gf import FieldSpec

__all__ = [
    "ContradictoryInput",
    "DimensionError",
    "GFMatrix",
    "Singular",
    "Unsolvable",
    "invert",
    "mat_mul",
    "rank",
    "solve",
    "submatrix_by_columns",
]


class DimensionError(ValueError):
    pass


class Unsolvable(ArithmeticError):
    """The coefficient matrix does not have full column rank."""

    def __init__(self, rank, needed):
        super().__init__(f"system has rank {rank}, needs {needed}")
        self.rank = rank
        self.needed = needed


class ContradictoryInput(ArithmeticError):
    """Redundant equations disagree with the solved unknowns."""


class Singular(ArithmeticError):
    pass


class GFMatrix:
    """A ``rows x cols`` matrix over ``field``."""

    __slots__ = ("data", "field")

    def __init__(self, data, field: FieldSpec):
        arr = np.array(data, dtype=np.uint8, copy=True)
        if arr.ndim != 2:
            if arr.size == 0:
                arr = arr.reshape(0, 0)
            else:
                raise DimensionError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.size and int(arr.max()) >= field.q:
            raise ValueError(f"entry {int(arr.max())} is outside GF({field.q})")
        self.data = arr
        self.field = field

    @classmethod
    def identity(cls, n, field):
        return cls(np.eye(n, dtype=np.uint8), field)

    @classmethod
    def zeros(cls, rows, cols, field):
        return cls(np.zeros((rows, cols), dtype=np.uint8), field)

    @classmethod
    def random(cls, rows, cols, field, rng):
        return cls(rng.integers(0, field.q, size=(rows, cols), dtype=np.uint8), field)

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def T(self):
        return GFMatrix(self.data.T, self.field)

    def __getitem__(self, idx):
        return self.data[idx]

    def __eq__(self, other):
        if not isinstance(other, GFMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.data, other.data)

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __repr__(self):
        return f"GFMatrix(GF({self.field.q}), {self.rows}x{self.cols})\n{self.data}"

    def rank(self):
        return rank(self)

    def tolist(self):
        return self.data.tolist()


def _mul_dense(a, b, mul):
    """Product of two uint8 arrays through the multiplication table."""
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    out = np.zeros((m, n), dtype=np.uint8)
    for j in range(k):
        out ^= mul[a[:, j][:, None], b[j][None, :]]
    return out


def rank(M: GFMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return kernels.rank(M.data, M.field.mul_table, M.field.inv_table)


def mat_mul(A: GFMatrix, B: GFMatrix) -> GFMatrix:
    if A.field != B.field:
        raise ValueError("matrices are over different fields")
    return GFMatrix(_mul_dense(A.data, B.data, A.field.mul_table), A.field)


def transpose(M: GFMatrix) -> GFMatrix:
    return M.T


def submatrix_by_columns(M: GFMatrix, indices) -> GFMatrix:
    """Columns ``indices`` (0-based) of ``M``, in the given order."""
    idx = np.asarray(list(indices), dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= M.cols):
        raise IndexError("column index out of range")
    return GFMatrix(M.data[:, idx], M.field)


def invert(A: GFMatrix) -> GFMatrix:
    if A.rows != A.cols:
        raise DimensionError(f"only square matrices can be inverted, got {A.shape}")
    n = A.rows
    a = A.data.copy()
    b = np.eye(n, dtype=np.uint8)
    r = kernels.gauss_jordan(a, b, A.field.mul_table, A.field.inv_table)
    if r < n:
        raise Singular(f"matrix has rank {r} < {n}")
    return GFMatrix(b, A.field)


def solve(A: GFMatrix, y) -> np.ndarray:
    """Unique ``u`` (k x T) with ``A @ u == y`` for an m x k system, m >= k.

    ``y`` holds one payload row of T symbols per equation; all lanes are
    eliminated in the same pass.  Raises :class:`Unsolvable` when
    ``rank(A) < k`` and :class:`ContradictoryInput` when the surplus
    equations are inconsistent.
    """
    y = np.asarray(y, dtype=np.uint8)
    if y.ndim == 1:
        y = y[:, None]
    m, k = A.shape
    if y.shape[0] != m:
        raise DimensionError(f"{m} equations but {y.shape[0]} right-hand sides")
    if m < k:
        raise Unsolvable(rank(A), k)
    if y.size and int(y.max()) >= A.field.q:
        raise ValueError("payload entry outside the field")
    a = A.data.copy()
    b = np.array(y, dtype=np.uint8, order="C", copy=True)
    r = kernels.gauss_jordan(a, b, A.field.mul_table, A.field.inv_table)
    if r < k:
        raise Unsolvable(r, k)
    if b[k:].any():
        raise ContradictoryInput("surplus equations are inconsistent with the solution")
    return b[:k].copy()
