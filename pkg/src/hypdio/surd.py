"""Exact real quadratic surds (a + b*sqrt(D)) / c with integer a, b, c and squarefree D >= 2."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath


def _squarefree_split(n):
    """Return (k, m) with n = k^2 * m and m squarefree."""
    k, m, p = 1, n, 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
            k *= p
        p += 1
    return k, m


@dataclass(frozen=True)
class Surd:
    a: int
    b: int
    D: int
    c: int = 1

    @classmethod
    def make(cls, a, b, D, c=1):
        if c == 0:
            raise ZeroDivisionError("surd denominator is zero")
        if D < 0:
            raise ValueError("only real surds are supported")
        k, m = _squarefree_split(D) if D > 0 else (0, 1)
        b *= k
        D = m
        if D == 1:
            a, b = a + b, 0
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        return cls(a // g, b // g, D if b else 1, c // g)

    @property
    def rational(self):
        return self.b == 0

    def __float__(self):
        return (self.a + self.b * math.sqrt(self.D)) / self.c

    def mp(self):
        return (self.a + self.b * mpmath.sqrt(self.D)) / self.c

    def floor(self):
        # exact floor of (a + b sqrt D)/c
        if self.b == 0:
            return self.a // self.c
        s = math.isqrt(self.b * self.b * self.D)
        # b sqrt D lies in (s, s+1) if b > 0, in (-s-1, -s) if b < 0
        lo = self.a + s if self.b > 0 else self.a - s - 1
        f = lo // self.c
        # refine: floor may be f or f+1
        while self._cmp_int(f + 1) >= 0:
            f += 1
        while self._cmp_int(f) < 0:
            f -= 1
        return f

    def _cmp_int(self, n):
        """sign of self - n."""
        # a + b sqrt D - n c  vs 0
        u = self.a - n * self.c
        v = self.b
        return _sign_sum(u, v, self.D)

    def sub_int(self, n):
        return Surd(self.a - n * self.c, self.b, self.D, self.c)

    def reciprocal(self):
        # c / (a + b sqrt D) = c (a - b sqrt D) / (a^2 - b^2 D)
        den = self.a * self.a - self.b * self.b * self.D
        return Surd.make(self.c * self.a, -self.c * self.b, self.D, den)

    def cmp_fraction(self, fr):
        fr = Fraction(fr)
        u = self.a * fr.denominator - fr.numerator * self.c
        v = self.b * fr.denominator
        return _sign_sum(u, v, self.D)

    def sub_fraction_abs(self, fr, dps=50):
        """|self - fr| as an mpf at the requested precision."""
        with mpmath.workdps(dps):
            return abs(self.mp() - mpmath.mpf(Fraction(fr).numerator) / Fraction(fr).denominator)

    def __str__(self):
        if self.b == 0:
            return str(Fraction(self.a, self.c))
        return f"({self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*sqrt({self.D}))/{self.c}"


def _sign_sum(u, v, D):
    """Sign of u + v*sqrt(D) exactly."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return (v > 0) - (v < 0)
    if (u > 0) == (v > 0):
        return 1 if u > 0 else -1
    # opposite signs: compare u^2 with v^2 D
    lhs, rhs = u * u, v * v * D
    if lhs == rhs:
        return 0
    if u > 0:
        return 1 if lhs > rhs else -1
    return -1 if lhs > rhs else 1


SQRT2 = Surd.make(0, 1, 2)
GOLDEN = Surd.make(1, 1, 5, 2)
