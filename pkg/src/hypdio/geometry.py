"""Concrete hyperbolic models: upper half-plane, Poincare ball, regular tree, block Hilbert space.

Each model supplies closed forms for distance, Gromov products (interior and
boundary), Busemann functions, visual and Hamenstadt metametrics.  Boundary
quantities are never computed as limits of sequences; the closed forms below
are exact in these models.

Point conventions
-----------------
UHP       interior: HPoint(x, y) or a Python complex; boundary: a real number
          (int, float, Fraction, mpf) or the sentinel INF.
Ball      interior: tuple/ndarray with norm < 1; boundary: unit vector.
Tree      interior: reduced tuple of letters in range(q+1); boundary: End.
BlockHilb interior: BlockVector; boundary: INF only.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath

from . import _num as N


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class MetametricValue:
    value: float
    reflexivity_defect: float = 0.0

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------- UHP points

@dataclass(frozen=True)
class HPoint:
    x: object
    y: object

    def __post_init__(self):
        if not self.y > 0:
            raise GeometryError(f"imaginary part must be positive, got {self.y}")

    @classmethod
    def of(cls, z):
        if isinstance(z, HPoint):
            return z
        if isinstance(z, tuple):
            return cls(z[0], z[1])
        if isinstance(z, mpmath.mpc):
            return cls(z.real, z.imag)
        if isinstance(z, complex):
            return cls(z.real, z.imag)
        raise GeometryError(f"not an upper half-plane point: {z!r}")

    def __complex__(self):
        return complex(N.to_float(self.x), N.to_float(self.y))


def _div(a, b):
    # keeps integer / Fraction arithmetic exact
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / b
    return a / b


def _is_real(v):
    return isinstance(v, (int, float, Fraction, mpmath.mpf)) and not isinstance(v, bool)


# ---------------------------------------------------------------- tree ends

@dataclass(frozen=True)
class End:
    """An end of the regular tree: prefix followed by a repeated period or a stream.

    ``stream(i)`` gives the letter at absolute index i >= len(prefix).
    """
    prefix: tuple = ()
    period: tuple = ()
    stream: Optional[Callable[[int], int]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.period and self.stream is None:
            raise GeometryError("an end needs a period or a stream")
        if self.period:
            p = self.period
            for i in range(len(p)):
                if p[i] == p[(i + 1) % len(p)]:
                    raise GeometryError("period is not reduced when repeated")
            if self.prefix and self.prefix[-1] == p[0]:
                raise GeometryError("prefix and period backtrack")
        _check_reduced(self.prefix)

    def letter(self, i):
        n = len(self.prefix)
        if i < n:
            return self.prefix[i]
        if self.period:
            return self.period[(i - n) % len(self.period)]
        return self.stream(i)

    def truncate(self, n):
        return tuple(self.letter(i) for i in range(n))


def _check_reduced(w):
    for a, b in zip(w, w[1:]):
        if a == b:
            raise GeometryError(f"word {w} is not reduced")


def tree_reduce(w):
    out = []
    for a in w:
        if out and out[-1] == a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def _lcp(u, v):
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


# ---------------------------------------------------------------- block Hilbert vectors

@dataclass(frozen=True)
class BlockVector:
    """Finitely supported vector; blocks maps block index n >= 1 to a tuple of Fractions."""
    blocks: tuple = ()  # sorted tuple of (n, coords)

    def as_dict(self):
        return dict(self.blocks)

    def norm2(self):
        return sum((sum((c * c for c in v), Fraction(0)) for _, v in self.blocks), Fraction(0))

    def sub(self, other):
        a, b = self.as_dict(), other.as_dict()
        out = {}
        for n in set(a) | set(b):
            va = a.get(n)
            vb = b.get(n)
            m = len(va) if va is not None else len(vb)
            va = va or (Fraction(0),) * m
            vb = vb or (Fraction(0),) * m
            out[n] = tuple(x - y for x, y in zip(va, vb))
        return BlockVector(tuple(sorted(out.items())))


ZERO_BLOCK = BlockVector()


# ---------------------------------------------------------------- spaces

class Space:
    model = "abstract"

    def __init__(self, basepoint, base=math.e):
        if base <= 1:
            raise GeometryError("visual base must exceed 1")
        self.base = base
        self.o = basepoint
        if self.is_boundary(basepoint):
            raise GeometryError("basepoint must be an interior point")

    # subclasses implement: is_boundary, dist, busemann, _gp_boundary, _gp_mixed (optional)
    def is_boundary(self, p):
        raise NotImplementedError

    def same(self, p, q):
        return p == q

    def logb(self, v):
        return N.log(v) if self.base == math.e else N.log(v) / math.log(self.base)

    def powb(self, v):
        # b ** v
        if self.base == math.e:
            return N.exp(v)
        return N.exp(v * math.log(self.base))

    def gromov_product(self, x, y, z):
        if self.is_boundary(z):
            raise GeometryError("Gromov product needs an interior base point")
        bx, by = self.is_boundary(x), self.is_boundary(y)
        if not bx and not by:
            return (self.dist(x, z) + self.dist(y, z) - self.dist(x, y)) / 2
        if bx and by:
            return self._gp_boundary(x, y, z)
        if bx:
            x, y = y, x
        # x interior, y boundary: <x|y>_z = (d(x,z) + beta_y(z,x)) / 2
        return (self.dist(x, z) + self.busemann(y, z, x)) / 2

    def visual_dist(self, z, xi, eta):
        v = self._visual(z, xi, eta)
        return MetametricValue(v, self._reflexive(xi, z))

    def _visual(self, z, xi, eta):
        g = self.gromov_product(xi, eta, z)
        if g == math.inf:
            return 0.0
        return self.powb(-g)

    def _reflexive(self, p, z):
        if self.is_boundary(p):
            return 0.0
        return self.powb(-self.dist(p, z))

    def hamenstadt_dist(self, xi, o, y1, y2):
        if not self.is_boundary(xi):
            raise GeometryError("Hamenstadt metametric needs a boundary point xi")
        for y in (y1, y2):
            if self.is_boundary(y) and self.same(y, xi):
                raise GeometryError("y1 and y2 must differ from xi")
        v = self._hamenstadt(xi, o, y1, y2)
        r = 0.0 if self.is_boundary(y1) else self._hamenstadt(xi, o, y1, y1)
        return MetametricValue(v, r)

    def _hamenstadt(self, xi, o, y1, y2):
        if self.is_boundary(y1) and self.is_boundary(y2) and self.same(y1, y2):
            return 0.0
        e = self.gromov_product(y1, y2, o) - self.gromov_product(y1, xi, o) - self.gromov_product(y2, xi, o)
        return self.powb(-e)

    def derivative(self, g, y):
        """g'(y) = b^{beta_y(o, g^{-1}(o))}."""
        return self.powb(self.busemann(y, self.o, g.inverse()(self.o)))

    # sampling, used by audits
    def random_point(self, rng):
        raise NotImplementedError

    def random_boundary(self, rng):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(o={self.o!r}, b={self.base})"


class UpperHalfPlane(Space):
    model = "uhp"

    def __init__(self, basepoint=None):
        super().__init__(HPoint(0, 1) if basepoint is None else HPoint.of(basepoint), math.e)

    def is_boundary(self, p):
        return p is INF or _is_real(p)

    def point(self, p):
        return p if self.is_boundary(p) else HPoint.of(p)

    def dist(self, p, q):
        p, q = HPoint.of(p), HPoint.of(q)
        dx, dy = p.x - q.x, p.y - q.y
        t = _div(dx * dx + dy * dy, 2 * p.y * q.y)
        return N.acosh1p(t)

    def busemann(self, xi, x, y):
        x, y = HPoint.of(x), HPoint.of(y)
        if xi is INF:
            return N.log(_div(y.y, x.y))
        if not _is_real(xi):
            raise GeometryError("busemann needs a boundary point")
        px = _div(x.y, (x.x - xi) ** 2 + x.y ** 2)
        py = _div(y.y, (y.x - xi) ** 2 + y.y ** 2)
        return N.log(_div(py, px))

    def _exp_neg_gp_boundary(self, xi, eta, z):
        z = HPoint.of(z)
        if xi is INF and eta is INF:
            return 0
        if eta is INF:
            xi, eta = eta, xi
        if xi is INF:
            return z.y / N.sqrt((eta - z.x) ** 2 + z.y ** 2)
        if xi == eta:
            return 0
        num = z.y * abs(xi - eta)
        den = N.sqrt(((xi - z.x) ** 2 + z.y ** 2) * ((eta - z.x) ** 2 + z.y ** 2))
        return num / den

    def _gp_boundary(self, xi, eta, z):
        v = self._exp_neg_gp_boundary(xi, eta, z)
        if v == 0:
            return math.inf
        return -N.log(v)

    def _visual(self, z, xi, eta):
        if self.is_boundary(xi) and self.is_boundary(eta):
            v = self._exp_neg_gp_boundary(xi, eta, z)
            return v
        return super()._visual(z, xi, eta)

    def same(self, p, q):
        if p is INF or q is INF:
            return p is q
        return p == q

    def random_point(self, rng):
        y = math.exp(rng.uniform(math.log(0.25), math.log(4.0)))
        return HPoint(rng.uniform(-4.0, 4.0), y)

    def random_boundary(self, rng):
        # uniform on the circle through the Cayley map, so INF is never hit exactly
        th = rng.uniform(-math.pi, math.pi)
        return from_disk_angle(th)


class PoincareBall(Space):
    model = "ball"

    def __init__(self, dim=2):
        # dim is the ambient dimension d+1
        if dim < 2:
            raise GeometryError("ball dimension must be at least 2")
        self.dim = dim
        super().__init__(tuple([0.0] * dim), math.e)

    @staticmethod
    def _n2(v):
        return sum(c * c for c in v)

    def is_boundary(self, p):
        if len(p) != self.dim:
            raise GeometryError("point dimension does not match the ball")
        n2 = self._n2(p)
        if n2 > 1 + 1e-9:
            raise GeometryError("point outside the closed ball")
        return abs(n2 - 1) <= 1e-9

    def _d2(self, u, v):
        return sum((a - b) ** 2 for a, b in zip(u, v))

    def dist(self, x, y):
        t = 2 * self._d2(x, y) / ((1 - self._n2(x)) * (1 - self._n2(y)))
        return N.acosh1p(t)

    def _horo(self, xi, x):
        return N.log(self._d2(xi, x) / (1 - self._n2(x)))

    def busemann(self, xi, x, y):
        return self._horo(xi, x) - self._horo(xi, y)

    def _exp_neg_gp_boundary(self, xi, eta, z):
        num = 0.5 * math.sqrt(self._d2(xi, eta)) * (1 - self._n2(z))
        den = math.sqrt(self._d2(xi, z) * self._d2(eta, z))
        return num / den

    def _gp_boundary(self, xi, eta, z):
        v = self._exp_neg_gp_boundary(xi, eta, z)
        return math.inf if v == 0 else -math.log(v)

    def _visual(self, z, xi, eta):
        if self.is_boundary(xi) and self.is_boundary(eta):
            return self._exp_neg_gp_boundary(xi, eta, z)
        return super()._visual(z, xi, eta)

    def random_boundary(self, rng):
        while True:
            v = [rng.gauss(0, 1) for _ in range(self.dim)]
            n = math.sqrt(self._n2(v))
            if n > 1e-6:
                return tuple(c / n for c in v)

    def random_point(self, rng):
        u = self.random_boundary(rng)
        r = math.tanh(rng.uniform(0.0, 3.0) / 2)
        return tuple(r * c for c in u)


class RegularTree(Space):
    """(q+1)-regular tree, edge length 1; vertices are reduced words in letters 0..q."""
    model = "tree"

    def __init__(self, q=2, base=math.e, max_compare=4096):
        if q < 2:
            raise GeometryError("tree degree must be at least 3")
        self.q = q
        self.max_compare = max_compare
        super().__init__((), base)

    def is_boundary(self, p):
        if isinstance(p, End):
            return True
        if isinstance(p, tuple):
            if any((not isinstance(a, int)) or a < 0 or a > self.q for a in p):
                raise GeometryError("letter outside the alphabet")
            _check_reduced(p)
            return False
        raise GeometryError(f"not a tree point: {p!r}")

    def dist(self, x, y):
        return len(x) + len(y) - 2 * _lcp(x, y)

    def end_lcp(self, xi, eta):
        """Common prefix length of two ends, math.inf if they coincide."""
        if xi.period and eta.period:
            horizon = max(len(xi.prefix), len(eta.prefix)) + math.lcm(len(xi.period), len(eta.period))
        else:
            horizon = self.max_compare
        for i in range(horizon):
            if xi.letter(i) != eta.letter(i):
                return i
        return math.inf

    def _gp_boundary(self, xi, eta, z):
        k = self.end_lcp(xi, eta)
        if k == math.inf:
            return math.inf
        n = k + len(z) + 1
        a, b = xi.truncate(n), eta.truncate(n)
        return (self.dist(a, z) + self.dist(b, z) - self.dist(a, b)) // 2

    def gromov_product(self, x, y, z):
        if self.is_boundary(z):
            raise GeometryError("Gromov product needs an interior base point")
        bx, by = self.is_boundary(x), self.is_boundary(y)
        if bx and by:
            return self._gp_boundary(x, y, z)
        if bx or by:
            if bx:
                x, y = y, x
            n = max(len(x), len(z)) + 1
            y = y.truncate(n)
        return (self.dist(x, z) + self.dist(y, z) - self.dist(x, y)) // 2

    def busemann(self, xi, x, y):
        n = max(len(x), len(y)) + 1
        w = xi.truncate(n)
        return self.dist(w, x) - self.dist(w, y)

    def same(self, p, q):
        if isinstance(p, End) and isinstance(q, End):
            return self.end_lcp(p, q) == math.inf
        return p == q

    def random_point(self, rng, max_len=12):
        n = rng.randint(0, max_len)
        w = []
        for _ in range(n):
            choices = [a for a in range(self.q + 1) if not w or a != w[-1]]
            w.append(rng.choice(choices))
        return tuple(w)

    def random_boundary(self, rng, prefix_len=10):
        pre = list(self.random_point(rng, prefix_len))
        # period of length 2 or 3 compatible with the prefix
        while True:
            k = rng.choice((2, 3))
            per = tuple(rng.randrange(self.q + 1) for _ in range(k))
            try:
                return End(tuple(pre), per)
            except GeometryError:
                continue


class BlockHilbert(Space):
    """Infinite-dimensional space split into finite blocks.

    Distances use the ambient Hilbert norm as a proxy; the only boundary point is INF.
    """
    model = "block"

    def __init__(self):
        super().__init__(ZERO_BLOCK, math.e)

    def is_boundary(self, p):
        if p is INF:
            return True
        if isinstance(p, BlockVector):
            return False
        raise GeometryError(f"not a block Hilbert point: {p!r}")

    def dist2(self, x, y):
        return x.sub(y).norm2()

    def dist(self, x, y):
        return N.sqrt(self.dist2(x, y))

    def busemann(self, xi, x, y):
        raise GeometryError("Busemann functions are not provided in the block model")

    def gromov_product(self, x, y, z):
        if self.is_boundary(x) or self.is_boundary(y):
            raise GeometryError("block model supports boundary queries only through hamenstadt_dist at INF")
        return super().gromov_product(x, y, z)

    def _hamenstadt(self, xi, o, y1, y2):
        # Euclidean proxy for the parabolic Hamenstadt metametric at INF
        return self.dist(y1, y2)


# ---------------------------------------------------------------- coordinates helpers

def to_disk(z):
    """Cayley map C(z) = (z - i)/(z + i) from the closed UHP to the closed unit disk."""
    if z is INF:
        return complex(1.0, 0.0)
    if _is_real(z):
        x = N.to_float(z)
        return (x - 1j) / (x + 1j)
    p = HPoint.of(z)
    w = complex(p)
    return (w - 1j) / (w + 1j)


def disk_angle(xi):
    """Argument of the Cayley image of a boundary point of the UHP, in (-pi, pi]."""
    if xi is INF:
        return 0.0
    if isinstance(xi, mpmath.mpf):
        return mpmath.atan2(-2 * xi, xi * xi - 1)
    if isinstance(xi, Fraction):
        return math.atan2(-2 * N.to_float(xi), N.to_float(xi * xi - 1))
    x = float(xi)
    # (x - i)^2 / (x^2 + 1) = (x^2 - 1 - 2ix)/(x^2+1)
    return math.atan2(-2 * x, x * x - 1)


def from_disk_angle(th):
    """Inverse of disk_angle: boundary point of the UHP with Cayley angle th."""
    if isinstance(th, mpmath.mpf):
        if th == 0:
            return INF
        return -mpmath.cot(th / 2)
    if th == 0:
        return INF
    # C^{-1}(w) = i(1+w)/(1-w); for w = e^{i th} this is -cot(th/2)
    return -math.cos(th / 2) / math.sin(th / 2)


# ---------------------------------------------------------------- identity audit

IDENTITIES = ("a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "f_boundary", "four_point")


def _beta_int(space, x, z, w):
    # Busemann function with an interior base point: d(z, x) - d(w, x)
    return space.dist(z, x) - space.dist(w, x)


def identity_audit(space, sample_count=1000, seed=0, quadruples=None):
    """Maximum defect of each identity/inequality over random configurations.

    Equalities report |lhs - rhs|; inequalities report max(0, violation).
    ``four_point`` is the Gromov four-point defect max(0, min(<x|y>_w, <y|z>_w) - <x|z>_w).
    ``f_boundary`` checks the base-change identity with both x and y on the boundary.
    """
    if sample_count < 1:
        raise GeometryError("sample_count must be positive")
    rng = random.Random(seed)
    exact = isinstance(space, RegularTree)
    zero = Fraction(0) if exact else 0.0
    worst = {k: zero for k in IDENTITIES}
    gp = space.gromov_product
    d = space.dist

    def half(v):
        return Fraction(v, 2) if exact else v / 2

    def upd(k, v):
        v = abs(v) if k in "abfghij" or k == "f_boundary" else max(zero, v)
        if v > worst[k]:
            worst[k] = v

    for _ in range(sample_count):
        x, y, z, w = (space.random_point(rng) for _ in range(4))
        if exact:
            G = lambda a, b, c: Fraction(d(a, c) + d(b, c) - d(a, b), 2)
        else:
            G = gp
        gxyz = G(x, y, z)
        upd("a", gxyz - G(y, x, z))
        upd("b", d(y, z) - (G(y, x, z) + G(z, x, y)))
        upd("c", -gxyz)
        upd("c", gxyz - min(d(x, z), d(y, z)))
        upd("d", gxyz - (G(x, y, w) + d(z, w)))
        upd("e", G(x, y, w) - (G(x, z, w) + d(y, z)))
        upd("f", gxyz - (G(x, y, w) + half(_beta_int(space, x, z, w) + _beta_int(space, y, z, w))))
        upd("g", gxyz - half(d(x, z) + _beta_int(space, y, z, x)))
        upd("h", _beta_int(space, x, y, z) - (G(z, x, y) - G(y, x, z)))
        upd("i", gxyz - (G(x, y, w) + d(z, w) - G(x, z, w) - G(y, z, w)))
        upd("j", gxyz - (G(x, y, w) + G(x, w, z) - G(y, z, w)))
        if not isinstance(space, BlockHilbert):
            xi, eta = space.random_boundary(rng), space.random_boundary(rng)
            if not space.same(xi, eta):
                lhs = gp(xi, eta, z)
                rhs = gp(xi, eta, w) + half(space.busemann(xi, z, w) + space.busemann(eta, z, w))
                upd("f_boundary", lhs - rhs)
    nq = sample_count if quadruples is None else quadruples
    for _ in range(nq):
        x, y, z, w = (space.random_point(rng) for _ in range(4))
        upd("four_point", min(gp(x, y, w), gp(y, z, w)) - gp(x, z, w))
    if not exact:
        worst = {k: float(v) for k, v in worst.items()}
    return {"model": space.model, "samples": sample_count, "quadruples": nq, "seed": seed, "defects": worst}
