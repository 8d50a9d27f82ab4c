"""Small numeric helpers that work on float, int, Fraction and mpmath numbers.

Exact types stay exact for + - * /; transcendental functions return float
unless the input is an mpmath number, in which case the current mp context
is used.
"""
import math
from fractions import Fraction

import mpmath

mpf_type = mpmath.mpf


def is_mp(x):
    return isinstance(x, (mpmath.mpf, mpmath.mpc))


def log(x):
    if is_mp(x):
        return mpmath.log(x)
    if isinstance(x, Fraction):
        if x <= 0:
            raise ValueError("log of nonpositive number")
        # math.log accepts arbitrarily large ints
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def exp(x):
    if is_mp(x):
        return mpmath.exp(x)
    return math.exp(x)


def sqrt(x):
    if is_mp(x):
        return mpmath.sqrt(x)
    if isinstance(x, (Fraction, int)):
        if x == 0:
            return 0.0
        try:
            return math.sqrt(float(x))
        except OverflowError:
            return math.exp(0.5 * log(Fraction(x)))
    return math.sqrt(x)


def acosh1p(t):
    """arccosh(1 + t) for t >= 0, accurate for tiny and huge t."""
    if is_mp(t):
        return mpmath.acosh(1 + t) if t > 1 else mpmath.log1p(t + mpmath.sqrt(t * (t + 2)))
    if t < 0:
        if t > -1e-12:
            return 0.0
        raise ValueError("acosh argument below 1")
    if t > 1e8:
        # t + sqrt(t^2 + 2t) = t (1 + sqrt(1 + 2/t))
        return log(t) + math.log(1.0 + math.sqrt(1.0 + 2.0 / float(t)))
    t = float(t)
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def to_float(x):
    if isinstance(x, Fraction):
        try:
            return float(x)
        except OverflowError:
            return math.inf if x > 0 else -math.inf
    return float(x)


def atan2(y, x):
    if is_mp(y) or is_mp(x):
        return mpmath.atan2(y, x)
    return math.atan2(float(y), float(x))
