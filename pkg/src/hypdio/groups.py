"""Isometry groups given by generators: orbits, counting functions, Poincare series.

Supported kinds: sl2z, schottky (rank k, circles orthogonal to the unit circle),
tree (free product of q+1 involutions acting simply transitively on the
(q+1)-regular tree), block (parabolic group on a block Hilbert space with
prescribed orbital counting), vwazero (truncated Fuchsian group with
generator disks at +-2^{n!}).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath
import numpy as np

from . import _num as N
from .geometry import (INF, BlockHilbert, BlockVector, End, GeometryError, HPoint, RegularTree,
                       UpperHalfPlane, tree_reduce, _is_real)
from .surd import Surd


class GroupError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


# ------------------------------------------------------------------ isometries

class Mobius:
    """Real Mobius map z -> (az+b)/(cz+d) acting on the upper half-plane."""
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d
        # float products lose the determinant to cancellation; only exact input is checked
        if isinstance(a, (int, Fraction)) and isinstance(d, (int, Fraction)) and not self.det() > 0:
            raise GroupError("Mobius matrix needs positive determinant")

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, o):
        return Mobius(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                      self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def __call__(self, p):
        a, b, c, d = self.a, self.b, self.c, self.d
        if p is INF:
            return INF if c == 0 else _q(a, c)
        if _is_real(p):
            den = c * p + d
            return INF if den == 0 else _q(a * p + b, den)
        z = HPoint.of(p)
        x, y = z.x, z.y
        den = (c * x + d) ** 2 + (c * y) ** 2
        re = a * c * (x * x + y * y) + (a * d + b * c) * x + b * d
        return HPoint(_q(re, den), _q(self.det() * y, den))

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def key(self):
        """Normal form of the projective class, exact for rational entries."""
        e = self.entries()
        if all(isinstance(v, (int, Fraction)) for v in e):
            det = self.det()
            if det == 1:
                s = next(v for v in e if v != 0)
                return tuple(v if s > 0 else -v for v in e)
            s = next(v for v in e if v != 0)
            return tuple(Fraction(v) / s for v in e)
        f = [float(v) for v in e]
        sc = math.sqrt(abs(f[0] * f[3] - f[1] * f[2]))
        s = next(v for v in f if abs(v) > 1e-12)
        sg = 1.0 if s > 0 else -1.0
        return tuple(round(sg * v / sc, 9) + 0.0 for v in f)

    def normalized(self):
        """Scale to determinant 1 (exact when det is a rational square) and fix the sign."""
        det = self.det()
        if det == 1:
            e = self.entries()
        elif isinstance(det, (int, Fraction)):
            fr = Fraction(det)
            rn, rd = math.isqrt(fr.numerator), math.isqrt(fr.denominator)
            if rn * rn == fr.numerator and rd * rd == fr.denominator:
                r = Fraction(rn, rd)
                e = tuple(Fraction(v) / r for v in self.entries())
            else:
                r = N.sqrt(det)
                e = tuple(v / r for v in self.entries())
        else:
            r = N.sqrt(det)
            e = tuple(v / r for v in self.entries())
        s = next(v for v in e if v != 0)
        if s < 0:
            e = tuple(-v for v in e)
        return Mobius(*e)

    def to_mp(self):
        return Mobius(*[_to_mp(v) for v in self.entries()])

    def __eq__(self, o):
        return isinstance(o, Mobius) and self.key() == o.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Mobius({self.a}, {self.b}, {self.c}, {self.d})"


def _q(a, b):
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        r = Fraction(a) / b
        return r.numerator if r.denominator == 1 else r
    return a / b


def _to_mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def classify_and_fix(g):
    """Trace classification and fixed points of a Mobius map.

    Returns dict(kind=..., fixed=[...]); fixed points are INF, exact rationals or Surd objects
    for exact input, floats otherwise.
    """
    if not isinstance(g, Mobius):
        raise GroupError("classification is defined for Mobius maps only")
    a, b, c, d = g.entries()
    det = g.det()
    tr2 = g.trace() ** 2
    exact = all(isinstance(v, (int, Fraction)) for v in (a, b, c, d))
    if exact and c == 0 and b == 0 and a == d:
        raise GroupError("identity element has no classification")
    if not exact and abs(c) < 1e-15 and abs(b) < 1e-15 and abs(a - d) < 1e-15 * abs(a):
        raise GroupError("identity element has no classification")
    if exact:
        kind = "loxodromic" if tr2 > 4 * det else "parabolic" if tr2 == 4 * det else "elliptic"
    else:
        rel = (tr2 - 4 * det) / max(abs(4 * det), 1e-300)
        kind = "loxodromic" if rel > 1e-12 else "elliptic" if rel < -1e-12 else "parabolic"
    if kind == "elliptic":
        return {"kind": kind, "fixed": []}
    # c z^2 + (d - a) z - b = 0
    if c == 0:
        fixed = [INF]
        if a != d:
            fixed.append(_q(b, a - d))
        return {"kind": kind, "fixed": fixed}
    disc = (a - d) ** 2 + 4 * b * c
    if exact:
        fr = Fraction(disc)
        cf = Fraction(c)
        # ((a-d) +- sqrt(disc)) / (2c); clear denominators to integers
        L = math.lcm(Fraction(a - d).denominator, fr.denominator, cf.denominator)
        # sqrt(disc) = sqrt(disc*L^2)/L
        A = int(Fraction(a - d) * L)
        D2 = int(fr * L * L)
        C = int(2 * cf * L)
        if D2 == 0:
            return {"kind": kind, "fixed": [_q(A, C)]}
        r = math.isqrt(D2)
        if r * r == D2:
            fixed = [_q(A + r, C), _q(A - r, C)]
        else:
            fixed = [Surd.make(A, 1, D2, C), Surd.make(A, -1, D2, C)]
        return {"kind": kind, "fixed": fixed if kind == "loxodromic" else fixed[:1]}
    sq = N.sqrt(max(disc, 0))
    fixed = [(a - d + sq) / (2 * c), (a - d - sq) / (2 * c)]
    return {"kind": kind, "fixed": fixed if kind == "loxodromic" else fixed[:1]}


def attracting_fixed_point(g):
    """Attracting fixed point of a loxodromic map (float or mp)."""
    info = classify_and_fix(g)
    if info["kind"] != "loxodromic":
        raise GroupError("not loxodromic")
    best = None
    for p in info["fixed"]:
        pv = p.mp() if isinstance(p, Surd) else p
        if pv is INF:
            dv = _deriv_at(g, INF)
        else:
            dv = _deriv_at(g, pv)
        if dv < 1:
            best = pv
    return best


def _deriv_at(g, x):
    a, b, c, d = g.entries()
    det = g.det()
    if x is INF:
        # conjugate by z -> -1/z
        return abs(d * d / det) if c == 0 else math.inf
    den = c * x + d
    return abs(det / (den * den))


class TreeAut:
    """Element of the free product of q+1 copies of Z/2, a reduced word acting by left multiplication."""
    __slots__ = ("word",)

    def __init__(self, word):
        self.word = tuple(word)

    def __call__(self, p):
        if isinstance(p, End):
            w = self.word
            if p.period:
                reps = len(w) // len(p.period) + 2
                pre = p.prefix + p.period * reps
                return End(tree_reduce(w + pre), p.period)
            n = len(w) + len(p.prefix) + 1
            head = tree_reduce(w + p.truncate(n))
            shift = n - len(head)
            old = p
            return End(head, (), stream=lambda i, old=old, shift=shift: old.letter(i + shift))
        return tree_reduce(self.word + tuple(p))

    def inverse(self):
        return TreeAut(self.word[::-1])

    def __matmul__(self, o):
        return TreeAut(tree_reduce(self.word + o.word))

    def key(self):
        return self.word

    def __eq__(self, o):
        return isinstance(o, TreeAut) and o.word == self.word

    def __hash__(self):
        return hash(self.word)

    def __repr__(self):
        return f"TreeAut({self.word})"


class BlockIso:
    """Element (q_n) of the direct sum of cyclic groups Z/m_n acting blockwise.

    On block n (dimension m_n), the generator T_n is the cyclic shift plus 2^{n-1}(e_2 - e_1).
    """
    __slots__ = ("qs", "orders")

    def __init__(self, qs, orders):
        self.orders = orders
        self.qs = tuple(sorted((n, k % orders[n]) for n, k in dict(qs).items() if k % orders[n]))

    def __call__(self, x):
        if x is INF:
            return INF
        blocks = x.as_dict()
        for n, k in self.qs:
            m = self.orders[n]
            v = blocks.get(n, (Fraction(0),) * m)
            shifted = [v[(i - k) % m] for i in range(m)]
            h = Fraction(2) ** (n - 1)
            shifted[k % m] += h
            shifted[0] -= h
            blocks[n] = tuple(shifted)
        return BlockVector(tuple(sorted(blocks.items())))

    def inverse(self):
        return BlockIso({n: self.orders[n] - k for n, k in self.qs}, self.orders)

    def __matmul__(self, o):
        d = dict(self.qs)
        for n, k in o.qs:
            d[n] = d.get(n, 0) + k
        return BlockIso(d, self.orders)

    def word_length(self):
        return sum(min(k, self.orders[n] - k) for n, k in self.qs)

    def norm2_image0(self):
        """||g(0)||^2 = sum over nonzero q_n of 2 * 4^(n-1), exact integer."""
        return sum(2 * 4 ** (n - 1) for n, _ in self.qs)

    def key(self):
        return self.qs

    def __eq__(self, o):
        return isinstance(o, BlockIso) and o.qs == self.qs

    def __hash__(self):
        return hash(self.qs)

    def __repr__(self):
        return f"BlockIso({dict(self.qs)})"


# ------------------------------------------------------------------ group specs

@dataclass
class GroupSpec:
    name: str
    kind: str
    space: object
    generators: list
    letters: list            # generators followed by inverses in presentation order
    inverse_letter: list     # index of the inverse letter
    params: dict = field(default_factory=dict)
    free: bool = True        # reduced words are distinct elements
    notes: list = field(default_factory=list)

    def word_element(self, word):
        g = self.identity()
        for i in word:
            g = g @ self.letters[i]
        return g

    def identity(self):
        if self.kind == "tree":
            return TreeAut(())
        if self.kind == "block":
            return BlockIso({}, self.params["orders"])
        one = self.letters[0].a * 0 + 1
        zero = one - one
        return Mobius(one, zero, zero, one)

    def mp_letters(self, dps):
        """Generators rebuilt at mpmath precision dps (Schottky/SL2Z/VWA)."""
        if self.kind == "schottky":
            with mpmath.workdps(dps):
                gens = schottky_generators(self.params["pairs"], mp=True)
                return _with_inverses(gens)[0]
        return [g.to_mp() if isinstance(g, Mobius) else g for g in self.letters]

    def summary(self):
        return {"name": self.name, "kind": self.kind, "params": _jsonable(self.params),
                "generators": [repr(g) for g in self.generators], "notes": self.notes}


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if k in ("orders", "f"):
            out[k] = {str(a): b for a, b in v.items()} if isinstance(v, dict) else str(v)
        elif isinstance(v, (list, tuple)):
            out[k] = [list(x) if isinstance(x, tuple) else x for x in v]
        else:
            out[k] = v if isinstance(v, (int, float, str, bool)) or v is None else str(v)
    return out


def _with_inverses(gens):
    letters, inv = [], []
    for g in gens:
        letters.extend([g, g.inverse()])
    for i in range(len(letters)):
        inv.append(i ^ 1)
    return letters, inv


# ---- Schottky

def schottky_generators(pairs, mp=False):
    """UHP matrices for a classical Schottky group in the disk model.

    Each pair (theta, r) gives two circles of Euclidean radius r orthogonal to the unit
    circle, centred in directions theta + pi and theta; the generator maps the outside of
    the first onto the inside of the second.
    """
    m = mpmath if mp else None
    gens = []
    for theta, r in pairs:
        if mp:
            theta, r = mpmath.mpf(theta), mpmath.mpf(r)
            sq, ex = mpmath.sqrt, mpmath.expj
        else:
            sq = math.sqrt
            ex = lambda t: complex(math.cos(t), math.sin(t))
        a = sq(1 + r * r) - r
        t = 2 * a / (1 + a * a)
        # disk matrix: rotation(theta) . [[1, t], [t, 1]] . rotation(-theta)
        u = ex(theta / 2)
        uc = 1 / u
        Rm = ((u, 0), (0, uc))
        Ri = ((uc, 0), (0, u))
        Mt = ((1, t), (t, 1))
        G = _mm(_mm(Rm, Mt), Ri)
        # UHP conjugate: Cinv . G . C, C = [[1, -i], [1, i]], Cinv = [[i, i], [-1, 1]] / (2i)
        C = ((1, -1j), (1, 1j))
        Ci = ((1j, 1j), (-1, 1))
        H = _mm(_mm(Ci, G), C)
        ent = [H[0][0], H[0][1], H[1][0], H[1][1]]
        big = max(ent, key=abs)
        ph = big / abs(big)
        ent = [(e / ph) for e in ent]
        ent = [e.real for e in ent]
        det = ent[0] * ent[3] - ent[1] * ent[2]
        s = sq(det) if det > 0 else None
        if s is None:
            raise GroupError("Schottky construction produced an orientation-reversing matrix")
        ent = [e / s for e in ent]
        if ent[0] < 0 or (ent[0] == 0 and ent[1] < 0):
            ent = [-e for e in ent]
        gens.append(Mobius(*ent))
    return gens


def _mm(A, B):
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def schottky_arcs(pairs):
    """Boundary arcs (centre angle, half width) in the disk, in letter order g1, g1^-1, g2, ..."""
    arcs = []
    for theta, r in pairs:
        w = math.atan(r)
        # letter g has its attracting disk at theta, g^-1 at theta + pi
        arcs.append((_wrap(theta), w))
        arcs.append((_wrap(theta + math.pi), w))
    return arcs


def _wrap(t):
    t = math.fmod(t + math.pi, 2 * math.pi)
    if t <= 0:
        t += 2 * math.pi
    return t - math.pi


def _validate_schottky(pairs):
    arcs = schottky_arcs(pairs)
    for r in (p[1] for p in pairs):
        if not r > 0:
            raise GroupError("Schottky radii must be positive")
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            gap = abs(_wrap(arcs[i][0] - arcs[j][0]))
            if gap <= arcs[i][1] + arcs[j][1]:
                raise GroupError(f"Schottky disks {i} and {j} overlap")


# ---- block parabolic

F_TABLES = {
    "2^n": lambda n: 2 ** n,
    "4^n": lambda n: 4 ** n,
    "2^ceil(n^2/2)": lambda n: 2 ** ((n * n + 1) // 2),
}


def block_orders(f, nmax):
    """m_n = f(2^n)/f(2^{n-1}) for n = 1..nmax, with f(2^0) = 1."""
    orders = {}
    prev = 1
    if f(0) != 1:
        raise GroupError("the block table needs f(1) = 1")
    for n in range(1, nmax + 1):
        v = f(n)
        if v < prev:
            raise GroupError("f table must be nondecreasing")
        if v & (v - 1):
            raise GroupError(f"f(2^{n}) = {v} is not a power of two")
        orders[n] = v // prev
        prev = v
    return orders


# ---- VWA zero Fuchsian group

def vwa_a(n):
    return 2 ** math.factorial(n)


def vwazero_generators(depth):
    gens = []
    for n in range(1, depth + 1):
        a = vwa_a(n)
        rho = Fraction(1, vwa_a(n + 2))
        # (a z + a^2 - rho^2) / (z + a), divided by rho to get determinant 1
        gens.append(Mobius(Fraction(a) / rho, (a * a - rho * rho) / rho, 1 / rho, Fraction(a) / rho))
    return gens


def build_group(kind, **params):
    kind = kind.lower().replace("-", "")
    if kind == "sl2z":
        H = UpperHalfPlane()
        T, S = Mobius(1, 1, 0, 1), Mobius(0, -1, 1, 0)
        letters = [T, T.inverse(), S]
        return GroupSpec("SL2Z", "sl2z", H, [T, S], letters, [1, 0, 2], {}, free=False)
    if kind in ("tree", "treelattice"):
        q = int(params.get("q", 2))
        if q < 2:
            raise GroupError("tree lattice needs q >= 2")
        sp = RegularTree(q, base=params.get("base", math.e))
        letters = [TreeAut((i,)) for i in range(q + 1)]
        return GroupSpec(f"TreeLattice({q})", "tree", sp, letters, letters, list(range(q + 1)), {"q": q})
    if kind == "schottky":
        pairs = [tuple(map(float, p)) for p in params.get("pairs", DEFAULT_SCHOTTKY)]
        _validate_schottky(pairs)
        gens = schottky_generators(pairs)
        letters, inv = _with_inverses(gens)
        return GroupSpec(f"Schottky(rank {len(pairs)})", "schottky", UpperHalfPlane(), gens, letters, inv,
                         {"pairs": pairs})
    if kind in ("block", "blockparabolic"):
        f = params.get("f", "4^n")
        fname = f if isinstance(f, str) else getattr(f, "__name__", "custom")
        fn = F_TABLES[f] if isinstance(f, str) else f
        nmax = int(params.get("nmax", 12))
        orders = block_orders(fn, nmax)
        gens = [BlockIso({n: 1}, orders) for n in range(1, nmax + 1) if orders[n] > 1]
        letters, inv = _with_inverses(gens)
        g = GroupSpec(f"BlockParabolic({fname})", "block", BlockHilbert(), gens, letters, inv,
                      {"orders": orders, "f": fname, "nmax": nmax, "fn": fn}, free=False)
        g.notes.append(f"blocks truncated at n <= {nmax}")
        return g
    if kind in ("vwazero", "vwazerofuchsian"):
        depth = int(params.get("depth", 3))
        if depth < 1:
            raise GroupError("depth must be positive")
        gens = vwazero_generators(depth)
        for i in range(1, depth + 1):
            for j in range(i, depth + 1):
                ci, cj = vwa_a(i), vwa_a(j)
                ri, rj = Fraction(1, vwa_a(i + 2)), Fraction(1, vwa_a(j + 2))
                for si in (1, -1):
                    for sj in (1, -1):
                        if (i, si) == (j, sj):
                            continue
                        if abs(si * ci - sj * cj) <= ri + rj:
                            raise GroupError("generator disks overlap")
        letters, inv = _with_inverses(gens)
        g = GroupSpec(f"VWAZeroFuchsian(depth {depth})", "vwazero", UpperHalfPlane(), gens, letters, inv,
                      {"depth": depth})
        g.notes.append(f"infinitely generated group truncated to {depth} generator pairs")
        return g
    raise GroupError(f"unknown group kind {kind!r}")


DEFAULT_SCHOTTKY = ((0.0, 0.25), (math.pi / 2, 0.25))


# ------------------------------------------------------------------ orbits

@dataclass
class OrbitPoint:
    element: object
    image: object
    word_length: int
    distance: float
    word: tuple = ()


def _reduced_successors(group, word):
    last = word[-1] if word else None
    for i in range(len(group.letters)):
        if last is not None and group.inverse_letter[last] == i:
            continue
        yield i


def enumerate_orbit(group, max_word=None, max_distance=None, max_norm=None, budget=3_000_000,
                    with_distance=True):
    """Breadth-first orbit enumeration, ordered by word length then letter index.

    For the block group, ``max_norm`` caps ||g(0)|| (exactly, by integer comparison) and the
    enumeration is over coefficient sequences instead of words.
    """
    if group.kind == "block":
        yield from _enumerate_block(group, max_word, max_norm, budget)
        return
    if max_word is None:
        if group.kind == "tree" and max_distance is not None:
            max_word = int(math.floor(max_distance))
        else:
            raise GroupError("enumeration needs a finite word cap")
    sp = group.space
    o = sp.o
    count = 0
    if group.free:
        # words grow on the left so each image is one generator applied to a known image;
        # this keeps float images accurate where long matrix products would not be
        level = [((), group.identity(), o)]
        for L in range(max_word + 1):
            level.sort(key=lambda t: t[0])
            nxt = []
            for w, g, img in level:
                dist = sp.dist(o, img) if with_distance else None
                if max_distance is None or dist <= max_distance:
                    count += 1
                    if count > budget:
                        raise ResourceError(f"orbit enumeration exceeded {budget} elements")
                    yield OrbitPoint(g, img, L, dist, w)
                if L < max_word:
                    first = w[0] if w else None
                    for i in range(len(group.letters)):
                        if first is not None and group.inverse_letter[i] == first:
                            continue
                        h = group.letters[i]
                        nxt.append(((i,) + w, h @ g, h(img)))
            level = nxt
        return
    # non-free: BFS with deduplication on normal forms
    e = group.identity()
    seen = {e.key()}
    level = [((), e)]
    for L in range(max_word + 1):
        nxt = []
        for w, g in level:
            img = g(o)
            dist = sp.dist(o, img) if with_distance else None
            if max_distance is None or dist <= max_distance:
                count += 1
                if count > budget:
                    raise ResourceError(f"orbit enumeration exceeded {budget} elements")
                yield OrbitPoint(g, img, L, dist, w)
            if L < max_word:
                for i in range(len(group.letters)):
                    h = g @ group.letters[i]
                    k = h.key()
                    if k not in seen:
                        seen.add(k)
                        nxt.append((w + (i,), h))
        level = nxt


def _enumerate_block(group, max_word, max_norm, budget):
    orders = group.params["orders"]
    sp = group.space
    if max_norm is None and max_word is None:
        raise GroupError("block enumeration needs a norm or word cap")
    cap2 = None
    if max_norm is not None:
        cap2 = Fraction(max_norm) ** 2
    blocks = [n for n in sorted(orders) if orders[n] > 1]
    if cap2 is not None:
        blocks = [n for n in blocks if 2 * 4 ** (n - 1) <= cap2]
    elif max_word is not None:
        pass
    out = []

    def rec(i, cur, norm2, wl):
        if len(out) > budget:
            raise ResourceError(f"orbit enumeration exceeded {budget} elements")
        if i == len(blocks):
            out.append(dict(cur))
            return
        n = blocks[i]
        m = orders[n]
        rec(i + 1, cur, norm2, wl)
        add = 2 * 4 ** (n - 1)
        if cap2 is not None and norm2 + add > cap2:
            return
        for k in range(1, m):
            dw = min(k, m - k)
            if max_word is not None and wl + dw > max_word:
                continue
            cur[n] = k
            rec(i + 1, cur, norm2 + add, wl + dw)
            del cur[n]

    rec(0, {}, 0, 0)
    res = []
    for qs in out:
        g = BlockIso(qs, orders)
        img = g(sp.o)
        res.append(OrbitPoint(g, img, g.word_length(), N.sqrt(img.norm2()), tuple(sorted(qs.items()))))
    res.sort(key=lambda p: (p.word_length, p.word))
    yield from res


# ------------------------------------------------------------------ counting

def tree_count_dp(q, t):
    """Number of reduced words of length <= t over q+1 involutive letters, via the last-letter automaton."""
    counts = [1] * (q + 1)  # words of length 1 ending in each letter
    total = 1
    if t >= 1:
        total += sum(counts)
    for _ in range(2, int(t) + 1):
        s = sum(counts)
        counts = [s - c for c in counts]
        total += sum(counts)
    return total


def tree_count_formula(q, t):
    t = int(t)
    return 1 + (q + 1) * (q ** t - 1) // (q - 1)


def orbital_counts(group, selector="fG", ts=None, R=None, xi=INF, method="auto", max_word=None,
                   metametric="exact"):
    """Counting tables.

    selector fG: {t: #{g : d(o, g o) <= t}}.
    selector f_xi: #{h in stabilizer of xi : Dist_{xi,o}(o, h o) <= R} for each R (SL2Z at INF).
    selector f_block: {N: #{g : ||g(0)|| <= 2^N}} computed by exact integer comparison.
    """
    if selector == "fG":
        ts = list(ts)
        if group.kind == "tree" and method in ("auto", "dp"):
            return {t: tree_count_dp(group.params["q"], math.floor(t)) for t in ts}
        if max_word is None:
            if group.kind == "tree":
                max_word = int(max(ts))
            else:
                raise GroupError("fG for this group needs max_word")
        dists = sorted(p.distance for p in enumerate_orbit(group, max_word=max_word))
        dists = np.asarray(dists, dtype=float)
        return {t: int(np.searchsorted(dists, t + 1e-12, side="right")) for t in ts}
    if selector == "f_xi":
        if group.kind != "sl2z" or xi is not INF:
            raise GroupError("f_xi is provided for SL2Z at INF (stabilizer generated by z -> z+1)")
        Rs = [R] if not isinstance(R, (list, tuple)) else list(R)
        sp = group.space
        out = {}
        for r in Rs:
            cnt = 0
            k = 0
            while True:
                hits = 0
                for kk in ({0} if k == 0 else {k, -k}):
                    img = Mobius(1, kk, 0, 1)(sp.o)
                    if metametric == "euclidean":
                        v = max(1, abs(kk))
                    else:
                        v = sp.hamenstadt_dist(INF, sp.o, sp.o, img).value
                    if v <= r + 1e-12:
                        hits += 1
                if hits == 0 and k > 0:
                    break
                cnt += hits
                k += 1
            out[r] = cnt
        return out
    if selector == "f_block":
        if group.kind != "block":
            raise GroupError("f_block needs a block parabolic group")
        Ns = list(ts)
        return {Nn: block_count(group, Nn, method=method) for Nn in Ns}
    raise GroupError(f"unknown selector {selector!r}")


def block_count(group, Ncap, method="auto"):
    """#{g : ||g(0)|| <= 2^N}: decided by sum_{q_n != 0} 4^n <= 2 * 4^N (integers)."""
    orders = group.params["orders"]
    bound = 2 * 4 ** Ncap
    if method == "enumerate":
        return sum(1 for _ in enumerate_orbit(group, max_norm=2 ** Ncap))
    # knapsack over blocks: map sum -> number of coefficient choices
    table = {0: 1}
    for n in sorted(orders):
        w = 4 ** n
        if w > bound or orders[n] == 1:
            continue
        new = dict(table)
        for s, c in table.items():
            if s + w <= bound:
                new[s + w] = new.get(s + w, 0) + c * (orders[n] - 1)
        table = new
    if max(orders) < Ncap:
        raise GroupError("block table truncated below the requested scale")
    return sum(table.values())


def poincare(group, s, max_word=None, max_distance=None):
    """Partial Poincare sum over the enumerated orbit: sum b^{-s d(o, g o)}."""
    if group.kind == "tree" and max_word is not None and max_distance is None:
        q = group.params["q"]
        b = group.space.base
        total = 1.0
        cnt = q + 1
        for L in range(1, max_word + 1):
            total += cnt * b ** (-s * L)
            cnt *= q
        return total
    b = group.space.base
    acc = 0.0
    for p in enumerate_orbit(group, max_word=max_word, max_distance=max_distance):
        acc += b ** (-s * float(p.distance))
    return acc


@dataclass
class ExponentEstimate:
    delta: float
    stderr: float
    interval: tuple
    residual: float
    window: tuple
    counts: dict


def poincare_exponent(group, ts=None, max_word=None, window=None):
    """Slope of log f_G(t) against t over the upper half of the t range (divided by log b)."""
    if ts is None:
        if group.kind == "tree":
            ts = list(range(1, 21))
        else:
            raise GroupError("supply a t grid")
    ts = sorted(ts)
    counts = orbital_counts(group, "fG", ts, max_word=max_word)
    if window is None:
        window = (ts[len(ts) // 2], ts[-1])
    xs = np.array([t for t in ts if window[0] <= t <= window[1]], dtype=float)
    ys = np.array([math.log(counts[t]) for t in ts if window[0] <= t <= window[1]])
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    slope = coef[0] / math.log(group.space.base)
    resid = ys - A @ coef
    n = len(xs)
    se = math.sqrt(float(resid @ resid) / max(n - 2, 1) / float(((xs - xs.mean()) ** 2).sum())) if n > 2 else 0.0
    return ExponentEstimate(float(slope), se, (float(slope - 3 * se), float(slope + 3 * se)),
                            float(np.sqrt(np.mean(resid ** 2))), tuple(window), counts)


def schottky_count_complete_below(group, max_word):
    """Distance below which word-length-capped counts are complete.

    Uses the smallest distance seen at word length max_word as a lower envelope for
    longer words (distances grow by at least the minimal per-letter increment).
    """
    levels = {}
    for p in enumerate_orbit(group, max_word=max_word):
        levels.setdefault(p.word_length, []).append(float(p.distance))
    mins = [min(levels[L]) for L in sorted(levels)]
    inc = min(b - a for a, b in zip(mins[1:], mins[2:])) if len(mins) > 2 else 0.0
    return mins[-1] + inc
