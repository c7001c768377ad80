"""GF(2^m) arithmetic with log/antilog tables.

Binary polynomials are Python ints with bit ``c`` holding the coefficient
of ``x^c``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

# One primitive polynomial per degree, bit-mask form (x^8+x^4+x^3+x^2+1 -> 0x11D).
PRIMITIVE_POLYS = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}
MAX_DEGREE = max(PRIMITIVE_POLYS)


class GF2m:
    """The field GF(2^m) generated by the root ``alpha`` of a primitive polynomial."""

    def __init__(self, m: int, prim: int | None = None):
        if m not in PRIMITIVE_POLYS and prim is None:
            raise ValueError(f"no primitive polynomial tabulated for degree {m}")
        self.m = m
        self.prim = PRIMITIVE_POLYS[m] if prim is None else prim
        self.order = (1 << m) - 1
        exp = np.zeros(2 * self.order, dtype=np.int32)
        log = np.full(self.order + 1, -1, dtype=np.int32)
        x = 1
        for e in range(self.order):
            exp[e] = x
            if log[x] != -1:
                raise ValueError(f"polynomial {self.prim:#x} is not primitive")
            log[x] = e
            x <<= 1
            if x >> m:
                x ^= self.prim
        exp[self.order:] = exp[:self.order]
        self.exp = exp
        self.log = log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % self.order])

    def element_order(self, a: int) -> int:
        """Multiplicative order of a nonzero element."""
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        k, x = 1, a
        while x != 1:
            x = self.mul(x, a)
            k += 1
        return k

    def cyclotomic_coset(self, s: int) -> list[int]:
        coset, e = [], s % self.order
        while e not in coset:
            coset.append(e)
            e = (2 * e) % self.order
        return coset

    def minimal_polynomial(self, s: int) -> int:
        """Minimal polynomial of ``alpha^s`` over GF(2), as a bit mask."""
        poly = [1]  # GF(2^m) coefficients, low degree first
        for e in self.cyclotomic_coset(s):
            root = self.alpha_pow(e)
            nxt = [0] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] ^= c
                nxt[i] ^= self.mul(c, root)
            poly = nxt
        if any(c not in (0, 1) for c in poly):
            raise ArithmeticError("minimal polynomial has non-binary coefficients")
        return sum(c << i for i, c in enumerate(poly))


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)


def poly_degree(a: int) -> int:
    return a.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    """Carry-less product of two binary polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, g: int) -> int:
    dg = poly_degree(g)
    while a and poly_degree(a) >= dg:
        a ^= g << (poly_degree(a) - dg)
    return a
