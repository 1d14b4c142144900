"""Arithmetic in the binary extension fields GF(2^m), 1 <= m <= 8.

Elements are plain integers in polynomial-basis bit representation; the
primitive element is 2 (the polynomial ``x``).  A :class:`FieldSpec` owns the
exp/log tables plus dense ``mul``/``inv`` lookup arrays that the matrix
kernels index directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "DEFAULT_POLYS",
    "FieldElement",
    "FieldSpec",
    "field_new",
    "is_irreducible",
    "poly_mulmod",
]

# x^m + ... ; all primitive, so 2 generates the multiplicative group
DEFAULT_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
}


def _degree(p):
    return p.bit_length() - 1


def _polymod(a, b):
    db = _degree(b)
    while a and _degree(a) >= db:
        a ^= b << (_degree(a) - db)
    return a


def is_irreducible(poly):
    """True if ``poly`` (bit-encoded over GF(2)) has no factor of degree <= m/2.

    Exhaustive trial division; cheap for the degrees supported here.
    """
    m = _degree(poly)
    if m < 1:
        return False
    for d in range(1, m // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if _polymod(poly, f) == 0:
                return False
    return True


def poly_mulmod(a, b, poly):
    """Carry-less product of ``a`` and ``b`` reduced modulo ``poly``."""
    m = _degree(poly)
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m & 1:
            a ^= poly
    return r


@dataclass(frozen=True, eq=False)
class FieldSpec:
    m: int
    poly: int
    q: int = field(init=False)
    exp_table: tuple = field(init=False, repr=False)
    log_table: tuple = field(init=False, repr=False)
    mul_table: np.ndarray = field(init=False, repr=False)
    inv_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.m <= 8:
            raise ValueError(f"extension degree must be in 1..8, got {self.m}")
        if _degree(self.poly) != self.m:
            raise ValueError(f"polynomial {self.poly:#b} does not have degree {self.m}")
        if not is_irreducible(self.poly):
            raise ValueError(f"polynomial {self.poly:#b} is reducible over GF(2)")
        q = 1 << self.m
        object.__setattr__(self, "q", q)

        exp, log = (), ()
        if self.m > 1:
            exp_l = [0] * (q - 1)
            log_l = [0] * q
            x = 1
            for i in range(q - 1):
                if i and x == 1:
                    raise ValueError(f"polynomial {self.poly:#b} is not primitive")
                exp_l[i] = x
                log_l[x] = i
                x = poly_mulmod(x, 2, self.poly)
            exp, log = tuple(exp_l), tuple(log_l)
        object.__setattr__(self, "exp_table", exp)
        object.__setattr__(self, "log_table", log)

        mul = np.zeros((q, q), dtype=np.uint8)
        inv = np.zeros(q, dtype=np.uint8)
        if self.m == 1:
            mul[1, 1] = 1
            inv[1] = 1
        else:
            la = np.array(log, dtype=np.int64)
            ea = np.array(exp, dtype=np.uint8)
            s = (la[1:, None] + la[None, 1:]) % (q - 1)
            mul[1:, 1:] = ea[s]
            inv[1:] = ea[(-la[1:]) % (q - 1)]
        mul.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul_table", mul)
        object.__setattr__(self, "inv_table", inv)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.m, self.poly) == (other.m, other.poly)

    def __hash__(self):
        return hash((self.m, self.poly))

    @property
    def mask(self):
        return self.q - 1

    def check(self, a):
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of GF({self.q})")
        return a

    def add(self, a, b):
        return a ^ b

    sub = add

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self.m == 1:
            return 1
        return self.exp_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        if self.m == 1:
            return 1
        return self.exp_table[-self.log_table[a] % (self.q - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        if a == 0:
            return 1 if e == 0 else 0
        if self.m == 1:
            return 1
        return self.exp_table[(self.log_table[a] * e) % (self.q - 1)]

    def alpha_pow(self, e):
        """The primitive element raised to ``e``."""
        if self.m == 1:
            return 1
        return self.exp_table[e % (self.q - 1)]

    def element(self, value):
        return FieldElement(self.check(value), self)


@lru_cache(maxsize=None)
def field_new(m, poly=None):
    """Field of order 2^m with the default (or given) irreducible polynomial."""
    if not isinstance(m, int) or not 1 <= m <= 8:
        raise ValueError(f"extension degree must be in 1..8, got {m!r}")
    return FieldSpec(m, DEFAULT_POLYS[m] if poly is None else poly)


def field_of_order(q):
    if q < 2 or q & (q - 1):
        raise ValueError(f"field order must be a power of two, got {q}")
    return field_new(q.bit_length() - 1)


@dataclass(frozen=True)
class FieldElement:
    """Operator-friendly wrapper around an element of a :class:`FieldSpec`."""

    value: int
    field: FieldSpec

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("elements belong to different fields")
            return other.value
        return self.field.check(other)

    def __add__(self, other):
        return FieldElement(self.value ^ self._coerce(other), self.field)

    __radd__ = __sub__ = __rsub__ = __add__

    def __mul__(self, other):
        return FieldElement(self.field.mul(self.value, self._coerce(other)), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field.div(self.value, self._coerce(other)), self.field)

    def __pow__(self, e):
        return FieldElement(self.field.pow(self.value, e), self.field)

    def inverse(self):
        return FieldElement(self.field.inv(self.value), self.field)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF{self.field.q}({self.value})"
