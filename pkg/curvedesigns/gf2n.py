"""
CURVE-DESIGNS Field Core
Exact arithmetic in F_{2^n} for 2 <= n <= 16
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Tuple

import numpy as np
from sympy import primefactors

logger = logging.getLogger(__name__)

MIN_N = 2
MAX_N = 16


class FieldError(ValueError):
    """Invalid field parameters or an undefined field operation"""


# --- GF(2)[x] helpers -----------------------------------------------------

def poly_mod(a: int, m: int) -> int:
    """Remainder of a modulo m in GF(2)[x]"""
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit-encoded polynomials"""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        b >>= 1
    return result


def is_irreducible(poly: int) -> bool:
    """Exhaustive trial division by every polynomial of degree <= deg/2"""
    degree = poly.bit_length() - 1
    if degree < 1:
        return False
    for d in range(1, degree // 2 + 1):
        for divisor in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, divisor) == 0:
                return False
    return True


@lru_cache(maxsize=None)
def default_modulus(n: int) -> int:
    """Lexicographically smallest irreducible polynomial of degree n"""
    _check_degree(n)
    for candidate in range((1 << n) | 1, 1 << (n + 1), 2):
        if is_irreducible(candidate):
            return candidate
    raise FieldError(f"no irreducible polynomial of degree {n}")  # unreachable


def _check_degree(n: int) -> None:
    if not isinstance(n, int) or not MIN_N <= n <= MAX_N:
        raise FieldError(f"n must be an integer in [{MIN_N}, {MAX_N}], got {n!r}")


# --- Field context ----------------------------------------------------------

@dataclass(frozen=True)
class _FieldTables:
    generator: int
    exp: np.ndarray   # exp[i] = g^i for 0 <= i < 2(q-1)
    log: np.ndarray   # log[x] = i with g^i = x; log[0] = 0 (masked by callers)


@lru_cache(maxsize=32)
def _field_tables(n: int, modulus: int) -> _FieldTables:
    start = time.perf_counter()
    q = 1 << n
    order = q - 1
    factors = primefactors(order) if order > 1 else []

    def mulmod(x: int, y: int) -> int:
        return poly_mod(clmul(x, y), modulus)

    def powmod(x: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = mulmod(result, x)
            x = mulmod(x, x)
            e >>= 1
        return result

    generator = next(
        g for g in range(2, q)
        if all(powmod(g, order // p) != 1 for p in factors)
    )

    exp = np.zeros(2 * order, dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    value = 1
    for i in range(order):
        exp[i] = value
        log[value] = i
        value = poly_mod(clmul(value, generator), modulus)
    exp[order:] = exp[:order]
    exp.flags.writeable = False
    log.flags.writeable = False

    logger.debug("Built tables for F_%d (modulus %#x, generator %#x) in %.3fs",
                 q, modulus, generator, time.perf_counter() - start)
    return _FieldTables(generator=generator, exp=exp, log=log)


@dataclass(frozen=True)
class FieldCtx:
    """The field F_{2^n} realised as GF(2)[x] / (modulus)"""
    n: int
    modulus: int

    def __post_init__(self):
        _check_degree(self.n)
        if self.modulus.bit_length() - 1 != self.n:
            raise FieldError(f"modulus {self.modulus:#x} does not have degree {self.n}")
        if not is_irreducible(self.modulus):
            raise FieldError(f"modulus {self.modulus:#x} is reducible over F_2")

    @property
    def q(self) -> int:
        return 1 << self.n

    @property
    def order(self) -> int:
        """Order of the multiplicative group, q - 1"""
        return (1 << self.n) - 1

    @property
    def tables(self) -> _FieldTables:
        return _field_tables(self.n, self.modulus)

    @property
    def generator(self) -> FieldElement:
        """Smallest primitive element"""
        return FieldElement(self.tables.generator, self)

    def element(self, value: int) -> FieldElement:
        return FieldElement(int(value), self)

    @property
    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    @property
    def one(self) -> FieldElement:
        return FieldElement(1, self)

    def elements(self) -> Iterator[FieldElement]:
        return (FieldElement(v, self) for v in range(self.q))

    def nonzero(self) -> Iterator[FieldElement]:
        return (FieldElement(v, self) for v in range(1, self.q))

    # Vectorised arithmetic on numpy arrays of element values.

    def mul_array(self, xs, ys) -> np.ndarray:
        xs, ys = np.broadcast_arrays(np.asarray(xs, dtype=np.int64),
                                     np.asarray(ys, dtype=np.int64))
        t = self.tables
        out = t.exp[t.log[xs] + t.log[ys]]
        return np.where((xs == 0) | (ys == 0), 0, out)

    def square_array(self, xs) -> np.ndarray:
        return self.mul_array(xs, xs)

    def inv_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if np.any(xs == 0):
            raise FieldError("zero has no multiplicative inverse")
        t = self.tables
        return t.exp[(self.order - t.log[xs]) % self.order]

    def log_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if np.any(xs == 0):
            raise FieldError("discrete log of zero")
        return self.tables.log[xs]

    def __repr__(self) -> str:
        return f"FieldCtx(n={self.n}, modulus={self.modulus:#x})"


def new_field_ctx(n: int, modulus: Optional[int] = None) -> FieldCtx:
    """Field context for F_{2^n}; the default modulus is the smallest irreducible one"""
    _check_degree(n)
    if modulus is None:
        modulus = default_modulus(n)
    elif modulus.bit_length() != n + 1:
        raise FieldError(f"modulus {modulus:#x} is not an {n + 1}-bit polynomial")
    return FieldCtx(n=n, modulus=modulus)


# --- Elements ------------------------------------------------------------------

@dataclass(frozen=True, order=False)
class FieldElement:
    """An element of F_q; bit i of value is the coefficient of x^i"""
    value: int
    ctx: FieldCtx

    def __post_init__(self):
        if not 0 <= self.value < self.ctx.q:
            raise FieldError(f"value {self.value} outside F_{self.ctx.q}")

    def _same_field(self, other: FieldElement) -> None:
        if not isinstance(other, FieldElement) or other.ctx != self.ctx:
            raise FieldError("elements belong to different fields")

    def __add__(self, other: FieldElement) -> FieldElement:
        return add(self, other)

    __sub__ = __add__

    def __mul__(self, other: FieldElement) -> FieldElement:
        return mul(self, other)

    def __truediv__(self, other: FieldElement) -> FieldElement:
        return mul(self, inv(other))

    def __pow__(self, e: int) -> FieldElement:
        return power(self, e)

    def __neg__(self) -> FieldElement:
        return self

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __lt__(self, other: FieldElement) -> bool:
        self._same_field(other)
        return self.value < other.value

    def inverse(self) -> FieldElement:
        return inv(self)

    def frobenius(self) -> FieldElement:
        return frobenius(self)

    def __repr__(self) -> str:
        return f"<{self.value:#x} in F_{self.ctx.q}>"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    a._same_field(b)
    return FieldElement(a.value ^ b.value, a.ctx)


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    """Carry-less multiply, then reduce by the modulus"""
    a._same_field(b)
    return FieldElement(poly_mod(clmul(a.value, b.value), a.ctx.modulus), a.ctx)


def power(a: FieldElement, e: int) -> FieldElement:
    """Square-and-multiply exponentiation; negative exponents invert first"""
    if e < 0:
        if not a:
            raise FieldError("zero raised to a negative power")
        return power(inv(a), -e)
    result = a.ctx.one
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return result


def inv(a: FieldElement) -> FieldElement:
    """Inverse as a^(q-2)"""
    if not a:
        raise FieldError("zero has no multiplicative inverse")
    return power(a, a.ctx.q - 2)


def inv_euclid(a: FieldElement) -> FieldElement:
    """Inverse via the extended Euclidean algorithm in GF(2)[x]"""
    if not a:
        raise FieldError("zero has no multiplicative inverse")
    r0, r1 = a.ctx.modulus, a.value
    s0, s1 = 0, 1
    while r1 != 1:
        shift = r0.bit_length() - r1.bit_length()
        if shift < 0:
            r0, r1, s0, s1 = r1, r0, s1, s0
            continue
        r0 ^= r1 << shift
        s0 ^= s1 << shift
        if r0.bit_length() < r1.bit_length():
            r0, r1, s0, s1 = r1, r0, s1, s0
    return FieldElement(poly_mod(s1, a.ctx.modulus), a.ctx)


def frobenius(a: FieldElement) -> FieldElement:
    """x -> x^2"""
    return mul(a, a)


def trace(a: FieldElement) -> int:
    """Absolute trace a + a^2 + ... + a^(2^(n-1)), an element of F_2"""
    total = a.ctx.zero
    x = a
    for _ in range(a.ctx.n):
        total = add(total, x)
        x = frobenius(x)
    return total.value


def multiplicative_order(a: FieldElement) -> int:
    if not a:
        raise FieldError("zero has no multiplicative order")
    order = a.ctx.order
    for p in primefactors(order) if order > 1 else []:
        while order % p == 0 and power(a, order // p).value == 1:
            order //= p
    return order


def is_primitive(a: FieldElement) -> bool:
    return bool(a) and multiplicative_order(a) == a.ctx.order


def trace_array(ctx: FieldCtx, xs) -> np.ndarray:
    """Absolute trace of every entry of xs"""
    xs = np.asarray(xs, dtype=np.int64)
    total = np.zeros_like(xs)
    for _ in range(ctx.n):
        total ^= xs
        xs = ctx.square_array(xs)
    return total


def gf2_rank(vectors) -> int:
    """Rank over F_2 of integers read as bit vectors"""
    basis = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)  # distinct leading bits, highest first
    return len(basis)


def element_values(ctx: FieldCtx, nonzero: bool = True) -> np.ndarray:
    """Element values as an int64 array in increasing order"""
    return np.arange(1 if nonzero else 0, ctx.q, dtype=np.int64)


def field_summary(ctx: FieldCtx) -> Tuple[int, int, int, int]:
    """(n, q, modulus, generator) for reports"""
    return ctx.n, ctx.q, ctx.modulus, ctx.tables.generator
