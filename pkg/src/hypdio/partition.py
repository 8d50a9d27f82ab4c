"""Partition structures: nested boundary sets indexed by words, the Ahlfors-regular
extraction algorithm, coding map, quasisymmetry audit and a shadow-based builder
for Schottky groups and tree lattices.

A structure is lazy: ``children(word)`` returns the child words (word + (a,), in stored
order) and ``node(word)`` returns its descriptor and diameter D.  Set descriptors provide
diameter, distance to another set, gap to the complement of the parent, and predicates
against metric balls.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import _num as N
from .geometry import INF, HPoint, UpperHalfPlane, from_disk_angle
from .groups import (GroupError, Mobius, ResourceError, attracting_fixed_point, enumerate_orbit,
                     poincare_exponent, schottky_count_complete_below)


class StructureError(ValueError):
    pass


# ------------------------------------------------------------------ descriptors

@dataclass(frozen=True)
class Cylinder:
    """Cylinder [w] in A^N with metric base^{-lcp}."""
    word: tuple
    base: int = 2

    def diameter(self):
        return Fraction(1, self.base ** len(self.word))

    def contains(self, other):
        return other.word[:len(self.word)] == self.word

    def disjoint(self, other):
        n = min(len(self.word), len(other.word))
        return self.word[:n] != other.word[:n]

    def gap_in(self, parent):
        """Dist(self, complement of parent); infinite when the parent is everything."""
        if len(parent.word) == 0:
            return math.inf
        # a point outside [parent] differs from self somewhere before len(parent)
        return Fraction(1, self.base ** (len(parent.word) - 1))

    def ball_depth(self, r):
        m = 0
        while Fraction(1, self.base ** m) > r:
            m += 1
        return m

    def within_ball(self, z, r):
        m = self.ball_depth(r)
        return len(self.word) >= m and self.word[:m] == tuple(z[:m])

    def meets_ball(self, z, r):
        m = min(self.ball_depth(r), len(self.word))
        return self.word[:m] == tuple(z[:m])

    def point(self, depth=None):
        return self.word


def cylinder_metric(base):
    def dist(p, q):
        n = min(len(p), len(q))
        i = 0
        while i < n and p[i] == q[i]:
            i += 1
        if i == n:
            # resolution limit: the points agree on all stored letters
            return Fraction(1, base ** n) if len(p) != len(q) or p != q else Fraction(0)
        return Fraction(1, base ** i)
    return dist


def _at_dps(fn):
    # evaluate at the arc's working precision (mp arcs are meaningless at default dps)
    def wrapped(self, *a):
        if self.dps is None:
            return fn(self, *a)
        with mpmath.workdps(self.dps):
            return fn(self, *a)
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


@dataclass(frozen=True)
class Arc:
    """Closed arc of the circle (disk chart at the basepoint), metric |sin(dtheta/2)|."""
    center: object
    half: object
    full: bool = False
    dps: int = None

    def _sin(self, v):
        return mpmath.sin(v) if N.is_mp(v) else math.sin(v)

    @_at_dps
    def diameter(self):
        if self.full:
            return 1.0
        h = self.half
        return self._sin(h) if h <= math.pi / 2 else 1.0

    def _delta(self, other):
        pi = mpmath.pi if N.is_mp(self.center) or N.is_mp(other.center) else math.pi
        d = (other.center - self.center + pi) % (2 * pi) - pi
        return abs(d)

    @_at_dps
    def contains(self, other):
        if self.full:
            return True
        if other.full:
            return False
        return self._delta(other) + other.half <= self.half

    @_at_dps
    def disjoint(self, other):
        if self.full or other.full:
            return False
        return self._delta(other) > self.half + other.half

    @_at_dps
    def set_gap(self, other):
        """Visual distance between two disjoint arcs."""
        if not self.disjoint(other):
            return 0.0
        g = self._delta(other) - self.half - other.half
        return self._sin(g / 2)

    @_at_dps
    def gap_in(self, parent):
        if parent.full:
            return math.inf
        g = parent.half - (self._delta(parent) + self.half)
        if g < 0:
            return -1.0
        return self._sin(g / 2)

    def _ball_half(self, r):
        if r >= 1:
            return None
        return 2 * (mpmath.asin(r) if N.is_mp(r) else math.asin(r))

    @_at_dps
    def within_ball(self, z, r):
        hb = self._ball_half(r)
        if hb is None:
            return True
        if self.full:
            return False
        return Arc(z, hb, False, self.dps)._delta(self) + self.half <= hb

    @_at_dps
    def meets_ball(self, z, r):
        hb = self._ball_half(r)
        if hb is None or self.full:
            return True
        return Arc(z, hb, False, self.dps)._delta(self) <= hb + self.half

    def point(self, depth=None):
        return self.center


def arc_metric(p, q):
    d = p - q
    if N.is_mp(d):
        return abs(mpmath.sin(d / 2))
    return abs(math.sin(d / 2))


# ------------------------------------------------------------------ structures

class PartitionStructure:
    """Base class.  Subclasses implement children(word) and node(word) -> (descriptor, D)."""
    kappa = None
    lam = None
    metric = None

    def children(self, word):
        raise NotImplementedError

    def node(self, word):
        raise NotImplementedError

    def diameter(self, word):
        return self.node(word)[1]

    def descriptor(self, word):
        return self.node(word)[0]

    def describe(self):
        return {"type": type(self).__name__, "kappa": _f(self.kappa), "lambda": _f(self.lam)}


def _f(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return v


class CylinderStructure(PartitionStructure):
    """Full k-ary cylinder tree in k^N with metric k^{-lcp}; D_w = k^{-|w|}."""

    def __init__(self, k=2, kappa=Fraction(1, 8), lam=Fraction(1, 2)):
        self.k = k
        self.kappa, self.lam = kappa, lam
        self.metric = cylinder_metric(k)
        self.root_diameter = Fraction(1)

    def children(self, word):
        return [word + (a,) for a in range(self.k)]

    def node(self, word):
        c = Cylinder(tuple(word), self.k)
        return c, c.diameter()

    def describe(self):
        return {"type": "cylinder", "k": self.k, "kappa": float(self.kappa), "lambda": float(self.lam)}


class ExplicitStructure(PartitionStructure):
    """Finite structure given by a dict word -> (descriptor, D); leaves have no children."""

    def __init__(self, nodes, kappa, lam, metric=None):
        self.nodes = {tuple(k): v for k, v in nodes.items()}
        self.kappa, self.lam = kappa, lam
        self.metric = metric
        for w in self.nodes:
            if w and w[:-1] not in self.nodes:
                raise StructureError(f"tree is not prefix closed at {w}")

    def children(self, word):
        out = []
        a = 0
        while word + (a,) in self.nodes:
            out.append(word + (a,))
            a += 1
        return out

    def node(self, word):
        return self.nodes[tuple(word)]


# ------------------------------------------------------------------ validation

@dataclass
class ValidationReport:
    passed: bool
    violation: object = None
    nodes: int = 0
    measured_kappa: float = None
    measured_lambda: float = None

    def as_json(self):
        return {"pass": self.passed, "violation": self.violation, "nodes": self.nodes,
                "measured_kappa": _f(self.measured_kappa), "measured_lambda": _f(self.measured_lambda)}


def validate_structure(ps, depth=6, words=None):
    """Check nesting (I), the gap bound and the diameter-ratio bounds on every edge to the depth.

    ``words`` optionally restricts checking to the given nodes (e.g. nodes along sampled paths).
    Returns the first violation, or pass.
    """
    kappa, lam = ps.kappa, ps.lam
    todo = [()] if words is None else sorted(set(words), key=lambda w: (len(w), w))
    seen = 0
    mk, ml = math.inf, 0.0
    stack = list(todo)
    while stack:
        w = stack.pop(0)
        kids = ps.children(w)
        seen += 1
        if not kids:
            continue
        P, D = ps.node(w)
        descs = []
        for c in kids:
            if c[:-1] != tuple(w):
                return ValidationReport(False, {"rule": "prefix", "node": list(c)}, seen)
            Pc, Dc = ps.node(c)
            if not P.contains(Pc):
                return ValidationReport(False, {"rule": "I", "node": list(c), "detail": "child not inside parent"}, seen)
            for prev_c, prev in descs:
                if not prev.disjoint(Pc):
                    return ValidationReport(False, {"rule": "I", "node": list(c), "detail": f"overlaps sibling {list(prev_c)}"}, seen)
            descs.append((c, Pc))
            gap = Pc.gap_in(P)
            if gap < kappa * D:
                return ValidationReport(False, {"rule": "kappa", "node": list(c), "gap": _f(gap), "bound": _f(kappa * D)}, seen)
            if Dc < kappa * D:
                return ValidationReport(False, {"rule": "lambda", "node": list(c), "detail": "child diameter below kappa D"}, seen)
            if Dc > lam * D:
                return ValidationReport(False, {"rule": "lambda", "node": list(c), "detail": "child diameter above lambda D"}, seen)
            r = Dc / D
            mk = min(mk, r, gap / D if gap != math.inf else math.inf)
            ml = max(ml, r)
            if words is None and len(c) <= depth - 1 + 0 and len(c) < depth:
                stack.append(c)
    return ValidationReport(True, None, seen, mk, ml)


def is_s_thick(ps, s, depth=6, words=None):
    todo = [()] if words is None else list(words)
    stack = list(todo)
    while stack:
        w = stack.pop()
        kids = ps.children(w)
        if not kids:
            continue
        D = ps.diameter(w)
        tot = sum(_pow(ps.diameter(c), s) for c in kids)
        if tot < _pow(D, s) * (1 - 1e-12 if not _exact(D, s) else 1):
            return False
        if words is None and len(w) + 1 < depth:
            stack.extend(kids)
    return True


def _exact(D, s):
    return isinstance(D, (int, Fraction)) and (isinstance(s, int) or (isinstance(s, Fraction) and s.denominator == 1))


def _pow(D, s):
    if _exact(D, s):
        return Fraction(D) ** int(s)
    if N.is_mp(D):
        return D ** s
    return float(D) ** float(s)


# ------------------------------------------------------------------ extraction

@dataclass
class ExtractionReport:
    s: object
    c: object
    k: int
    lower_constant: float
    upper_constant: float
    cutoffs: dict = field(default_factory=dict)


class Extraction:
    """Regular substructure and measure, computed lazily node by node.

    mu(root) = c D^s with c = 1 - lambda^s; at each retained node the first N children
    are kept, N the smallest integer with sum_{a<=N} D_{wa}^s > mu(w), and mass is split
    proportionally to D^s among them.
    """

    def __init__(self, ps, s, check_thick_depth=0):
        self.ps = ps
        self.s = s
        lam, kappa = ps.lam, ps.kappa
        self.c = 1 - _pow(lam, s)
        if check_thick_depth and not is_s_thick(ps, s, check_thick_depth):
            raise StructureError(f"structure is not {s}-thick")
        self.mu = {(): self.c * _pow(ps.diameter(()), s)}
        self.N = {}
        self._kids = {}
        k = 1
        while _pow(lam, k) > kappa ** 2:
            k += 1
        self.k = k
        self.lower_constant = float(self.c) * float(kappa) ** (float(s) * (k - 1))
        self.upper_constant = float(kappa) ** (-2 * float(s))

    def retained_children(self, w):
        w = tuple(w)
        if w in self._kids:
            return self._kids[w]
        if w not in self.mu:
            raise StructureError(f"node {w} is not in the extracted subtree")
        m = self.mu[w]
        kids = self.ps.children(w)
        if not kids:
            raise StructureError(f"leaf {w} reached")
        weights = [_pow(self.ps.diameter(c), self.s) for c in kids]
        acc = 0
        Nw = None
        for i, x in enumerate(weights):
            acc = acc + x
            if acc > m:
                Nw = i + 1
                break
        if Nw is None:
            raise StructureError(f"thickness fails at node {list(w)}: children carry {acc} <= {m}")
        tot = sum(weights[:Nw])
        out = kids[:Nw]
        for c, x in zip(out, weights[:Nw]):
            self.mu[c] = x * m / tot
        self.N[w] = Nw
        self._kids[w] = out
        return out

    def mass(self, w):
        w = tuple(w)
        if w not in self.mu:
            self.retained_children(w[:-1])
            if w not in self.mu:
                return 0
        return self.mu[w]

    def expand(self, depth):
        frontier = [()]
        for _ in range(depth):
            nxt = []
            for w in frontier:
                nxt.extend(self.retained_children(w))
            frontier = nxt
        return frontier

    def check_node(self, w, tol=1e-12):
        """Consistency and regularity at a node; returns a list of failures."""
        bad = []
        m = self.mu[w]
        kids = self.retained_children(w)
        tot = sum(self.mu[c] for c in kids)
        exact = isinstance(m, Fraction)
        if (tot != m) if exact else abs(tot - m) > tol * max(1.0, abs(float(m))):
            bad.append(("consistency", list(w)))
        D = self.ps.diameter(w)
        Ds = _pow(D, self.s)
        lo = self.c * Ds
        if exact:
            ok = lo <= m < Ds
        else:
            ok = float(lo) * (1 - 1e-9) <= float(m) < float(Ds) * (1 + 1e-12) if not N.is_mp(m) else lo * (1 - mpmath.mpf(10) ** -20) <= m < Ds
        if not ok:
            bad.append(("regularity", list(w)))
        return bad

    def report(self):
        return ExtractionReport(self.s, self.c, self.k, self.lower_constant, self.upper_constant,
                                {str(list(k)): v for k, v in list(self.N.items())[:64]})


def extract_regular_substructure(ps, s, depth=8, check_thick_depth=6):
    """Run the extraction to the given depth; returns (Extraction, report, failures)."""
    ex = Extraction(ps, s, check_thick_depth=check_thick_depth)
    frontier = [()]
    failures = []
    for _ in range(depth):
        nxt = []
        for w in frontier:
            ex.retained_children(w)
            failures.extend(ex.check_node(w))
            nxt.extend(ex.retained_children(w))
        frontier = nxt
    return ex, ex.report(), failures


# ------------------------------------------------------------------ coding map and audits

def pi_code(ex_or_ps, word, depth):
    """Point of P_{word[:depth]} and the radius D of that node."""
    ps = ex_or_ps.ps if isinstance(ex_or_ps, Extraction) else ex_or_ps
    w = tuple(word[:depth])
    if len(w) < depth:
        raise StructureError("word shorter than requested depth")
    if isinstance(ex_or_ps, Extraction):
        for i in range(depth):
            if w[: i + 1] not in ex_or_ps.retained_children(w[:i]):
                raise StructureError(f"word leaves the subtree at position {i}")
    else:
        for i in range(depth):
            if w[: i + 1] not in ps.children(w[:i]):
                raise StructureError(f"word leaves the structure at position {i}")
    P, D = ps.node(w)
    return P.point(), D


def random_path(ex, depth, rng):
    w = ()
    for _ in range(depth):
        kids = ex.retained_children(w)
        w = kids[rng.randrange(len(kids))]
    return w


def ball_mass(ex, z, r, depth_limit):
    """Lower and upper bounds for mu(B(z, r)) by descending the retained subtree."""
    ps = ex.ps
    lo = 0
    hi = 0
    stack = [()]
    while stack:
        w = stack.pop()
        P = ps.descriptor(w)
        if P.within_ball(z, r):
            m = ex.mass(w)
            lo += m
            hi += m
            continue
        if not P.meets_ball(z, r):
            continue
        if len(w) >= depth_limit:
            hi += ex.mass(w)
            continue
        stack.extend(ex.retained_children(w))
    return lo, hi


@dataclass
class AhlforsReport:
    passed: bool
    samples: int
    rejected: int
    min_ratio: float
    max_ratio: float
    C: float
    lower_constant: float
    upper_constant: float
    failures: list = field(default_factory=list)

    def as_json(self):
        return {k: getattr(self, k) for k in ("passed", "samples", "rejected", "min_ratio", "max_ratio", "C",
                                              "lower_constant", "upper_constant")} | {"failures": self.failures[:10]}


def verify_ahlfors(ex, samples=1000, seed=0, depth_limit=None, r_min_levels=None, point_depth=None, radii=None):
    """Two-sided check (lower const) r^s <= mu(B(z,r)) <= (upper const) r^s on sampled balls.

    z is a coded point of the extracted subtree, r is log-uniform in [r_min, kappa D_root].
    ``radii`` (list) overrides the sampled radius for testing; radii above kappa D_root are rejected.
    """
    rng = random.Random(seed)
    ps = ex.ps
    s = float(ex.s)
    kappa = float(ps.kappa)
    rmax = kappa * float(ps.diameter(()))
    levels = r_min_levels or 6
    pdepth = point_depth or levels + 4
    dl = depth_limit or pdepth
    lo_r, hi_r = math.inf, 0.0
    rejected = 0
    fails = []
    n = 0
    for i in range(samples):
        path = random_path(ex, pdepth, rng)
        z = ps.descriptor(path).point()
        if radii is not None:
            r = radii[i % len(radii)]
            if r > rmax:
                rejected += 1
                continue
        else:
            # scale range follows the node diameters along the path
            rmin = float(ps.diameter(path[:levels])) * kappa
            r = math.exp(rng.uniform(math.log(rmin), math.log(rmax)))
        rr = _coerce_r(ps, r)
        mlo, mhi = ball_mass(ex, z, rr, dl)
        a, b = float(mlo) / r ** s, float(mhi) / r ** s
        n += 1
        lo_r, hi_r = min(lo_r, a), max(hi_r, b)
        if a < ex.lower_constant * (1 - 1e-12) or b > ex.upper_constant * (1 + 1e-12):
            fails.append({"path": list(path), "r": r, "ratio_lo": a, "ratio_hi": b})
    C = max(hi_r, 1 / lo_r) if n and lo_r > 0 else math.inf
    return AhlforsReport(not fails and n > 0, n, rejected, lo_r, hi_r, C, ex.lower_constant, ex.upper_constant, fails)


def _coerce_r(ps, r):
    if isinstance(ps, (CylinderStructure,)):
        return Fraction(r)
    if getattr(ps, "dps", None):
        return mpmath.mpf(r)
    return r


def qs_modulus(kappa, lam):
    kappa, lam = float(kappa), float(lam)

    def eta(t):
        return (1 / kappa) * max(t ** (-math.log2(kappa)), t ** (-math.log2(lam)))
    return eta


def quasisymmetry_audit(ex, triples=500, seed=0, depth=12):
    """Check Dist(pi w, pi t1)/Dist(pi w, pi t2) <= eta(rho2(w,t1)/rho2(w,t2)) on sampled triples."""
    rng = random.Random(seed)
    ps = ex.ps
    eta = qs_modulus(ps.kappa, ps.lam)
    metric = ps.metric
    worst = 0.0
    viol = []
    for _ in range(triples):
        w = random_path(ex, depth, rng)
        t1 = _branch(ex, w, rng, depth)
        t2 = _branch(ex, w, rng, depth)
        l1, l2 = _lcp(w, t1), _lcp(w, t2)
        if l1 >= depth or l2 >= depth:
            continue
        pw, p1, p2 = (ps.descriptor(x).point() for x in (w, t1, t2))
        d1, d2 = float(metric(_pt(pw, ps), _pt(p1, ps))), float(metric(_pt(pw, ps), _pt(p2, ps)))
        if d2 == 0:
            continue
        t = 2.0 ** (-l1) / 2.0 ** (-l2)
        ratio = d1 / d2
        bound = eta(t)
        worst = max(worst, ratio / bound)
        if ratio > bound * (1 + 1e-9):
            viol.append({"w": list(w), "t1": list(t1), "t2": list(t2), "ratio": ratio, "bound": bound})
    return {"passed": not viol, "max_ratio_over_bound": worst, "violations": viol[:10],
            "eta_at_1": eta(1.0)}


def _pt(p, ps):
    return p


def _branch(ex, w, rng, depth):
    k = rng.randrange(depth)
    t = tuple(w[:k])
    for _ in range(depth - k):
        kids = ex.retained_children(t)
        t = kids[rng.randrange(len(kids))]
    return t


def _lcp(u, v):
    i = 0
    while i < min(len(u), len(v)) and u[i] == v[i]:
        i += 1
    return i


# ------------------------------------------------------------------ group-built structures

class TreeGroupStructure(PartitionStructure):
    """Shadows of tree-lattice orbit points seen from the root; children are depth-(|v|+k) descendants.

    With sigma < 1 the shadow of v is the cylinder of ends through v, D_v = b^{-|v|}.
    """

    def __init__(self, group, s, sigma=0.5, k=1):
        if sigma >= 1:
            raise StructureError("tree structure uses sigma < 1 so shadows are cylinders")
        q = group.params["q"]
        b = group.space.base
        self.q, self.b, self.k, self.sigma = q, b, k, sigma
        self.kappa = b ** (-k)
        self.lam = b ** (-k)
        delta = math.log(q) / math.log(b)
        if s >= delta:
            raise StructureError(f"s = {s} is not below the Poincare exponent {delta}")
        self.metric = lambda u, v: b ** (-_lcp(u, v)) if u != v else 0.0
        self.witness = {"kappa": self.kappa, "lambda": self.lam, "k": k, "sigma": sigma}

    def _vertex(self, word):
        v = []
        for a in word:
            v.extend(a)
        return tuple(v)

    def children(self, word):
        v = self._vertex(word)
        out = []
        exts = [()]
        for _ in range(self.k):
            exts = [e + (a,) for e in exts for a in range(self.q + 1)
                    if (e and a != e[-1]) or (not e and (not v or a != v[-1]))]
        return [tuple(word) + (e,) for e in exts]

    def node(self, word):
        v = self._vertex(word)
        return _TreeCone(v, self.b), self.b ** (-len(v))


@dataclass(frozen=True)
class _TreeCone:
    v: tuple
    b: float

    def contains(self, o):
        return o.v[:len(self.v)] == self.v

    def disjoint(self, o):
        n = min(len(self.v), len(o.v))
        return self.v[:n] != o.v[:n]

    def gap_in(self, parent):
        if not parent.v:
            return math.inf
        return self.b ** (-(len(parent.v) - 1))

    def _m(self, r):
        m = 0
        while self.b ** (-m) > r:
            m += 1
        return m

    def within_ball(self, z, r):
        m = self._m(r)
        return len(self.v) >= m and self.v[:m] == tuple(z[:m])

    def meets_ball(self, z, r):
        m = min(self._m(r), len(self.v))
        return self.v[:m] == tuple(z[:m])

    def point(self):
        return self.v


@dataclass
class SymNode:
    gword: tuple
    z: HPoint
    family: int


@dataclass
class _Node:
    element: Mobius     # mp matrix
    image: HPoint
    arc: Arc
    D: object
    gword: tuple        # generator word of the element


class SchottkyStructure(PartitionStructure):
    """Shadow partition structure for a Schottky group (children by the two-neighbourhood recipe).

    Nodes are orbit points x_w = g_w(o); P_w = Shad_o(x_w, sigma) as an arc of the circle in the
    disk chart at o; D_w is its exact visual diameter.  Children of w are g_w(S_i) where S_i is
    a separated subset of the orbit annulus {n <= d(o, s o) < n+1} inside the neighbourhood
    B_i = {<x|eta_i>_o >= rho} of a loxodromic fixed point, and i is chosen with g_w^{-1}(o) not in B_i.
    """

    def __init__(self, group, s, sigma=2.0, n=None, rho=None, tau=None, dps=100, search=None):
        self.group = group
        self.s = s
        self.sigma = sigma
        self.dps = dps
        self.metric = self._metric
        self._cache = {}
        self._sym = {}
        self.local_dps = 60
        self._orbit_cache = {}
        self.search_log = []
        with mpmath.workdps(dps):
            self.mp_letters = group.mp_letters(dps)
        with mpmath.workdps(self.local_dps):
            self.mp_local = group.mp_letters(self.local_dps)
            self.o = HPoint(mpmath.mpf(0), mpmath.mpf(1))
            a, b = self.mp_letters[0], self.mp_letters[2]
            self.etas = [attracting_fixed_point(a), attracting_fixed_point(b)]
        self.space = UpperHalfPlane()
        self._choose(n, rho, tau, search or {})

    def _metric(self, p, q):
        with mpmath.workdps(self.dps):
            return arc_metric(p, q)

    # -- low level geometry in mp
    def _arc_of(self, x, sigma=None):
        sigma = self.sigma if sigma is None else sigma
        with mpmath.workdps(self.dps):
            X = (mpmath.mpc(x.x, x.y) - 1j) / (mpmath.mpc(x.x, x.y) + 1j)
            rho = abs(X)
            if rho == 0:
                return Arc(mpmath.mpf(0), mpmath.pi, True, self.dps)
            omr2 = 4 * x.y / (x.x ** 2 + (x.y + 1) ** 2)
            omr = omr2 / (1 + rho)
            s2 = omr ** 2 * mpmath.expm1(2 * sigma) / (4 * rho)
            if s2 >= 1:
                return Arc(mpmath.mpf(0), mpmath.pi, True, self.dps)
            return Arc(mpmath.arg(X), 2 * mpmath.asin(mpmath.sqrt(s2)), False, self.dps)

    def _gp(self, x, eta):
        with mpmath.workdps(self.dps):
            return self.space.gromov_product(x, eta, self.o)

    def _make(self, gword, element):
        with mpmath.workdps(self.dps):
            img = element(self.o)
            arc = self._arc_of(img)
            return _Node(element, img, arc, arc.diameter(), gword)

    # -- parameter search
    def _annulus(self, n, rho, i, width=1.0):
        eta = self.etas[i]
        cand = []
        first = 2 * i  # words beginning with the generator whose attracting point is eta_i
        maxw = min(int(math.ceil((n + width) / 3.0)) + 2, 10)
        if maxw not in self._orbit_cache:
            self._orbit_cache[maxw] = [(p.word, float(p.distance)) for p in enumerate_orbit(self.group, max_word=maxw)]
        for word, dist in self._orbit_cache[maxw]:
            if not word or word[0] != first:
                continue
            if not (n <= dist < n + width):
                continue
            cand.append(word)
        out = []
        with mpmath.workdps(self.dps):
            for w in cand:
                g = self._word_element(w)
                x = g(self.o)
                if self._gp(x, eta) >= rho:
                    out.append((w, g))
        return out

    def _word_element(self, w):
        with mpmath.workdps(self.dps):
            g = Mobius(mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1))
            for i in w:
                g = g @ self.mp_letters[i]
            return g

    def _select(self, cands, tau):
        """Greedy separated subset: keep a candidate when its enlarged shadow Shad_o(s o, sigma + tau)
        is disjoint from those kept.  The enlargement absorbs the change of light source from o to
        any z outside B_i, so siblings stay disjoint after translation by g_w."""
        kept, wide = [], []
        for w, g in cands:
            nd = self._make(w, g)
            with mpmath.workdps(self.dps):
                big = self._arc_of(nd.image, self.sigma + tau)
            if all(big.disjoint(k) for k in wide):
                kept.append(nd)
                wide.append(big)
        return kept

    def _choose(self, n, rho, tau, search):
        ns = [n] if n is not None else list(range(search.get("n_min", 8), search.get("n_max", 20)))
        rhos = [rho] if rho is not None else search.get("rhos", [2.0, 3.0])
        taus = [tau] if tau is not None else search.get("taus", [1.0, 2.0, 3.0])
        width = search.get("width", 2.0)
        depth = search.get("check_depth", 3)
        last = None
        for nn in ns:
            for rr, tt in [(r_, t_) for r_ in rhos for t_ in taus]:
                ann = [self._annulus(nn, rr, i, width) for i in (0, 1)]
                S = [self._select(a, tt) for a in ann]
                rec = {"n": nn, "width": width, "rho": rr, "tau": tt, "sizes": [len(S[0]), len(S[1])]}
                if min(rec["sizes"]) < 2:
                    rec["fail"] = "too few separated annulus points"
                    self.search_log.append(rec)
                    continue
                self.n, self.rho, self.tau, self.width, self.S = nn, rr, tt, width, S
                self._cache = {(): self._make((), self._word_element(()))}
                self._sym = {}
                ok, info = self._measure_constants(depth=depth)
                rec.update(info)
                self.search_log.append(rec)
                if ok:
                    return
                last = info
        raise StructureError(f"builder search exhausted: {self.search_log}")

    def _which_z(self, z):
        """Index i with the light source z = g_w^{-1}(o) outside B_i (first one tried first)."""
        with mpmath.workdps(self.local_dps):
            for i in (0, 1):
                if self._gp(z, self.etas[i]) < self.rho:
                    return i
        raise StructureError("light source lies in both neighbourhoods")

    def sym(self, word):
        """Symbolic node: group word of g_w, the light source z = g_w^{-1}(o) and the child family.

        z is propagated by applying inverse letters one at a time, which keeps relative precision
        at any depth (products of deep matrices would need precision growing with depth)."""
        word = tuple(word)
        hit = self._sym.get(word)
        if hit is not None:
            return hit
        if not word:
            with mpmath.workdps(self.local_dps):
                z = HPoint(mpmath.mpf(0), mpmath.mpf(1))
                nd = SymNode((), z, self._which_z(z))
        else:
            parent = self.sym(word[:-1])
            sn = self.S[parent.family][word[-1]]
            with mpmath.workdps(self.local_dps):
                z = parent.z
                inv = self.group.inverse_letter
                for l in sn.gword:
                    z = self.mp_local[inv[l]](z)
                nd = SymNode(parent.gword + sn.gword, z, self._which_z(z))
        if len(self._sym) > 2_000_000:
            raise ResourceError("symbolic node cache exceeded")
        self._sym[word] = nd
        return nd

    def children(self, word):
        word = tuple(word)
        i = self.sym(word).family
        return [word + (j,) for j in range(len(self.S[i]))]

    def node_data(self, word):
        word = tuple(word)
        if word in self._cache:
            return self._cache[word]
        parent = self.node_data(word[:-1])
        i = self.sym(word[:-1]).family
        sn = self.S[i][word[-1]]
        with mpmath.workdps(self.dps):
            g = parent.element @ sn.element
        nd = self._make(parent.gword + sn.gword, g)
        if len(self._cache) > 500000:
            raise ResourceError("structure cache exceeded")
        self._cache[word] = nd
        return nd

    def node(self, word):
        nd = self.node_data(word)
        return nd.arc, nd.D

    def _measure_constants(self, depth):
        kmin, lmax, thick = math.inf, 0.0, math.inf
        frontier = [()]
        with mpmath.workdps(self.dps):
            for _ in range(depth):
                nxt = []
                for w in frontier:
                    P, D = self.node(w)
                    kids = self.children(w)
                    tot = 0
                    for k, c in enumerate(kids):
                        Pc, Dc = self.node(c)
                        if not P.contains(Pc):
                            return False, {"fail": "child shadow not inside parent", "node": list(c)}
                        for c2 in kids[:k]:
                            if not self.node(c2)[0].disjoint(Pc):
                                return False, {"fail": "sibling shadows overlap", "node": list(c)}
                        gap = Pc.gap_in(P)
                        kmin = min(kmin, float(Dc / D), float(gap / D) if gap != math.inf else math.inf)
                        lmax = max(lmax, float(Dc / D))
                        tot += (Dc / D) ** self.s
                    thick = min(thick, float(tot))
                    nxt.extend(kids)
                frontier = nxt
        if thick < 1:
            return False, {"fail": "thickness sum below 1", "thickness": thick}
        if not (kmin > 0 and lmax < 1):
            return False, {"fail": "ratio constants degenerate", "kappa": kmin, "lambda": lmax}
        # safety margins for deeper levels (bounded distortion)
        self.kappa = kmin / 2
        self.lam = min(1.0, lmax * 2) if lmax * 2 < 1 else (1 + lmax) / 2
        self.witness = {"kappa": self.kappa, "lambda": self.lam, "n": self.n, "rho": self.rho, "tau": self.tau, "width": self.width,
                        "sigma": self.sigma, "measured_kappa": kmin, "measured_lambda": lmax,
                        "min_thickness": thick, "children": [len(self.S[0]), len(self.S[1])]}
        return True, {"kappa": kmin, "lambda": lmax, "thickness": thick}

    def max_step(self):
        """alpha: largest d(x_w, x_wa) over the two child families (equals max d(o, s o))."""
        with mpmath.workdps(self.dps):
            return max(float(self.space.dist(self.o, nd.image)) for S in self.S for nd in S)

    def boundary_point(self, word):
        """UHP coordinate of the centre of P_word."""
        with mpmath.workdps(self.dps):
            return from_disk_angle(self.node(word)[0].center)

    def describe(self):
        d = {"type": "schottky-shadows", "dps": self.dps}
        d.update(self.witness)
        return d


def estimate_delta(group, max_word=10):
    """Poincare exponent estimate for a Schottky group from counts complete below a certified t."""
    tmax = schottky_count_complete_below(group, max_word)
    ts = [t * 0.5 for t in range(8, int(2 * tmax))]
    est = poincare_exponent(group, ts=ts, max_word=max_word)
    return est, tmax


def certify_divergence(group, eta, t, caps=(2, 4, 8), radius=1.0):
    """Partial sums of sum_{g o near eta} b^{-t d(o, g o)} over doubling word caps; must keep growing."""
    sp = group.space
    sums = []
    for cap in caps:
        acc = 0.0
        for p in enumerate_orbit(group, max_word=cap):
            if p.word_length == 0:
                continue
            if float(sp.gromov_product(p.image, eta, sp.o)) >= radius:
                acc += math.exp(-t * float(p.distance))
        sums.append(acc)
    incs = [b - a for a, b in zip(sums, sums[1:])]
    ok = all(i > 0 for i in incs) and len(incs) >= 2 and incs[-1] >= 0.5 * incs[0]
    return {"t": t, "caps": list(caps), "partial_sums": sums, "increments": incs, "certified": ok}


def build_group_structure(group, s=None, s_fraction=0.5, sigma=2.0, n=None, rho=None, tau=None, dps=100,
                          delta=None, search=None):
    """Build the shadow structure; s defaults to s_fraction * (estimated Poincare exponent)."""
    if group.kind == "tree":
        q = group.params["q"]
        dl = math.log(q) / math.log(group.space.base)
        s = s if s is not None else s_fraction * dl
        return TreeGroupStructure(group, s, sigma=sigma if sigma < 1 else 0.5), {"delta": dl, "s": s}
    if group.kind != "schottky":
        raise GroupError("group structures are built for Schottky groups and tree lattices")
    if delta is None:
        est, tmax = estimate_delta(group)
        delta = est.delta
        info = {"delta": delta, "delta_interval": est.interval, "counts_complete_below": tmax}
    else:
        info = {"delta": delta}
    if s is None:
        s = s_fraction * delta
    if s >= delta:
        raise StructureError(f"s = {s} must be below the Poincare exponent estimate {delta}")
    ps = SchottkyStructure(group, s, sigma=sigma, n=n, rho=rho, tau=tau, dps=dps, search=search)
    t = (s + delta) / 2
    certs = [certify_divergence(group, eta, t) for eta in
             [float(e) if e is not INF else INF for e in ps.etas]]
    if not all(c["certified"] for c in certs):
        raise StructureError(f"divergence certificate failed: {certs}")
    info.update({"s": s, "witness": ps.witness, "search": ps.search_log, "divergence": certs})
    return ps, info


def coded_point_check(ps, word, sigma=None, extra=4, rng=None):
    """Classify the orbit sequence x_0 = o, x_n = x_{word[:n]} toward the coded point pi(word).

    The boundary point is the centre of a node ``extra`` levels below ``word`` (extended by first
    children, or randomly with ``rng``), so it lies in every P_{word[:n]}.
    """
    from .shadows import convergence_classify
    w = tuple(word)
    tail = w
    for _ in range(extra):
        kids = ps.children(tail)
        tail = kids[0] if rng is None else kids[rng.randrange(len(kids))]
    if sigma is None:
        sigma = max(ps.sigma, ps.max_step() + 1e-9)
    with mpmath.workdps(ps.dps):
        xi = ps.boundary_point(tail)
        seq = [ps.node_data(w[:n]).image for n in range(len(w) + 1)]
        rep = convergence_classify(ps.space, seq, xi, sigma=sigma, starts_at_o=True)
    return rep
