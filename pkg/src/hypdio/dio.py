"""Diophantine experiments on orbits: Dirichlet witnesses, badly approximable constants,
irrationality exponents, Ford-circle checks, Hausdorff contents, P_xi slopes, Jarnik
dimension formulas and Khinchin-type series.

Boundary distances in the upper half-plane are visual distances from o = i with b = e, i.e. the
chordal form |x - y| / sqrt((1 + x^2)(1 + y^2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .geometry import INF, HPoint
from .groups import Mobius, enumerate_orbit, schottky_count_complete_below
from .surd import Surd


class DioError(ValueError):
    pass


# ------------------------------------------------------------------ numbers

def _mp(x):
    """mpf from int / Fraction / Surd / float / mpf / decimal string (current precision)."""
    if isinstance(x, mpmath.mpf):
        return x
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, Surd):
        return x.mp()
    if isinstance(x, str):
        return _mp(parse_exact(x))
    return mpmath.mpf(x)


def parse_exact(x):
    """Exact value of a decimal string / int / Fraction / Surd (floats are refused)."""
    if isinstance(x, (Fraction, Surd)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as e:
            raise DioError(f"malformed number {x!r}") from e
    raise DioError(f"cf_oracle needs an exact input, got {type(x).__name__}")


def chordal(x, y):
    """Visual distance between boundary points of the upper half-plane seen from i (b = e)."""
    if x is INF and y is INF:
        return mpmath.mpf(0)
    if x is INF:
        x, y = y, x
    x = _mp(x)
    if y is INF:
        return 1 / mpmath.sqrt(1 + x * x)
    y = _mp(y)
    return abs(x - y) / mpmath.sqrt((1 + x * x) * (1 + y * y))


def boundary_dist(space, a, b):
    if space.model == "uhp":
        return chordal(a, b)
    return mpmath.mpf(float(space._visual(space.o, a, b)))


# ------------------------------------------------------------------ continued fractions

@dataclass
class CFReport:
    quotients: list
    convergents: list           # Fractions p_k/q_k
    min_q2: object              # min q^2 |x - p/q| over q <= Q (mpf) or None
    argmin: Fraction = None
    Q: int = None
    exhaustive: bool = False
    tail_min: object = None     # min over convergents with sqrt(Q) <= q <= Q (liminf estimate)


def _quotients_fraction(x, n):
    out = []
    for _ in range(n):
        a = x.numerator // x.denominator
        out.append(a)
        x = x - a
        if x == 0:
            break
        x = 1 / x
    return out


def _quotients_surd(x, n):
    out = []
    for _ in range(n):
        a = x.floor()
        out.append(a)
        r = x.sub_int(a)
        if r.a == 0 and r.b == 0:
            break
        x = r.reciprocal()
    return out


def convergents(qs):
    p0, q0, p1, q1 = 1, 0, qs[0], 1
    out = [Fraction(p1, q1)]
    for a in qs[1:]:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(Fraction(p1, q1))
    return out


def _abs_diff(x, fr, dps=60):
    """|x - fr|: exact for rational x, mpf at dps for surds."""
    if isinstance(x, Fraction):
        return abs(x - fr)
    with mpmath.workdps(dps):
        return x.sub_fraction_abs(fr, dps)


def cf_oracle(x, n=40, Q=None, dps=60):
    """Partial quotients and convergents of an exact real, and min q^2 |x - p/q| over q <= Q.

    Any p/q with q^2 |x - p/q| < 1/2 is a convergent (Legendre), so the minimum over convergents is
    the classical minimum whenever it is below 1/2; otherwise all q <= Q are scanned.
    """
    if n < 1:
        raise DioError("n must be >= 1")
    x = parse_exact(x)
    if isinstance(x, Surd) and x.rational:
        x = Fraction(x.a, x.c)
    qs = []
    if Q is None:
        qs = _quotients_fraction(x, n) if isinstance(x, Fraction) else _quotients_surd(x, n)
        return CFReport(qs, convergents(qs), None)
    # enough quotients to pass Q
    m = max(n, 8)
    while True:
        qs = _quotients_fraction(x, m) if isinstance(x, Fraction) else _quotients_surd(x, m)
        cv = convergents(qs)
        if cv[-1].denominator > Q or len(qs) < m:
            break
        m *= 2
    best, arg, tail = None, None, None
    qlo = math.isqrt(Q)
    with mpmath.workdps(dps):
        for c in cv:
            if c.denominator > Q:
                break
            d = _abs_diff(x, c, dps)
            if d == 0:
                continue
            v = c.denominator ** 2 * d
            if best is None or v < best:
                best, arg = v, c
            if c.denominator >= qlo and (tail is None or v < tail):
                tail = v
        exhaustive = False
        if best is None or best >= 0.5:
            if Q > 10 ** 6:
                raise DioError("minimum above 1/2 and Q too large for the exhaustive scan")
            exhaustive = True
            for q in range(1, Q + 1):
                p = round(x * q) if isinstance(x, Fraction) else round(float(x) * q)
                # exact hits p/q = x are excluded; the next candidate is then a neighbour
                cands = [(d, c) for c in (Fraction(p + j, q) for j in (-1, 0, 1))
                         for d in [_abs_diff(x, c, dps)] if d != 0]
                d, c = min(cands, key=lambda t: t[0])
                v = q * q * d
                if best is None or v < best:
                    best, arg = v, c
    return CFReport(qs[:n], cv[:n], best, arg, Q, exhaustive, tail)


def liouville_constant(terms=7):
    """sum_{n=1}^{terms} 10^{-n!} as an exact Fraction."""
    return sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, terms + 1))


def cubic_lacunary(terms=5):
    """sum_{k=1}^{terms} 10^{-3^k} as an exact Fraction."""
    return sum(Fraction(1, 10 ** (3 ** k)) for k in range(1, terms + 1))


# ------------------------------------------------------------------ SL2Z helpers

def ford_best(p, q):
    """Element g of PSL2Z with g(inf) = p/q minimising d(o, g o), exactly.

    g = [[p, b], [q, d]] with p d - b q = 1; the coset g T^n shifts (b, d) by n (p, q), and the norm
    p^2 + q^2 + b^2 + d^2 is minimised at the integer nearest the real optimum.
    """
    fr = Fraction(p, q)
    p, q = fr.numerator, fr.denominator
    g, u, v = _egcd(q, p)       # u q + v p = 1
    d0, b0 = v, -u              # p d0 - q b0 = p v + q u = 1
    t = -(b0 * p + d0 * q) / Fraction(p * p + q * q)
    cands = []
    for n in (math.floor(t), math.floor(t) + 1):
        b, d = b0 + n * p, d0 + n * q
        cands.append((p * p + q * q + b * b + d * d, (p, b, q, d)))
    cands.sort()
    if cands[0][0] == cands[1][0] and cands[0][1] != cands[1][1]:
        # tie: first in lexicographic entry order
        cands = sorted(cands[:2], key=lambda c: c[1])
    nrm, e = cands[0]
    return Mobius(*e), nrm


def _egcd(a, b):
    old_r, r, old_s, s, old_t, t = a, b, 1, 0, 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def exp_dist_from_norm(nrm):
    """e^{d(i, g i)} for det-1 g with a^2 + b^2 + c^2 + d^2 = nrm (cosh d = nrm / 2)."""
    with mpmath.workdps(40):
        h = mpmath.mpf(nrm) / 2
        return h + mpmath.sqrt(h * h - 1)


def _key(e):
    s = next(v for v in e if v != 0)
    return tuple(v if s > 0 else -v for v in e)


class SL2ZBall:
    """Exact word lengths in PSL2Z over the letters {T, T^-1, S} up to 2 * radius (meet in the middle)."""

    def __init__(self, radius=10):
        self.radius = radius
        T, Ti, S = (1, 1, 0, 1), (1, -1, 0, 1), (0, -1, 1, 0)
        self.letters = [T, Ti, S]
        self.length = {_key((1, 0, 0, 1)): 0}
        level = [(1, 0, 0, 1)]
        for L in range(1, radius + 1):
            nxt = []
            for g in level:
                for l in self.letters:
                    h = _key(_mul(g, l))
                    if h not in self.length:
                        self.length[h] = L
                        nxt.append(h)
            level = nxt

    def word_length(self, g, cap=None):
        """Exact word length if <= min(cap, 2 * radius), else None."""
        cap = 2 * self.radius if cap is None else min(cap, 2 * self.radius)
        e = _key(g.entries() if isinstance(g, Mobius) else g)
        if e in self.length:
            v = self.length[e]
            return v if v <= cap else None
        best = None
        for h, lh in self.length.items():
            if lh < self.radius:
                continue       # splits with |h| = radius suffice for lengths above radius
            rest = _key(_mul(_inv(h), e))
            lr = self.length.get(rest)
            if lr is not None and (best is None or lh + lr < best):
                best = lh + lr
        if best is None or best > cap:
            return None
        return best


def _mul(g, h):
    a, b, c, d = g
    e, f, gg, hh = h
    return (a * e + b * gg, a * f + b * hh, c * e + d * gg, c * f + d * hh)


def _inv(g):
    a, b, c, d = g
    return (d, -b, -c, a)


@dataclass
class FordReport:
    p_over_q: Fraction
    ratio: float
    min_exp_dist: object
    argmin: tuple
    argmin_word_length: int       # None when above the cap
    found_within_cap: bool
    cap: int


_BALL = {}


def _ball(radius):
    if radius not in _BALL:
        _BALL[radius] = SL2ZBall(radius)
    return _BALL[radius]


def ford_check(p_over_q, cap=20):
    """q^2 / min e^{d(o, g o)} over g with g(inf) = p/q; the minimiser is exact (Ford), and its
    word length in {T, T^-1, S} is computed exactly to decide whether a word-capped search finds it."""
    fr = Fraction(p_over_q)
    g, nrm = ford_best(fr.numerator, fr.denominator)
    ed = exp_dist_from_norm(nrm)
    q = fr.denominator
    ball = _ball(max(1, (cap + 1) // 2))
    wl = ball.word_length(g, cap)
    return FordReport(fr, float(q * q / ed), ed, g.entries(), wl, wl is not None, cap)


def ford_sweep(qmax=20, bound=1, cap=20):
    out = []
    for q in range(1, qmax + 1):
        for p in range(-bound * q, bound * q + 1):
            if math.gcd(p, q) == 1:
                out.append(ford_check(Fraction(p, q), cap))
    return out


# ------------------------------------------------------------------ orbit scans

def _orbit_boundary_scan(group, xi, cap, dps=40):
    """Yield (word, d(o, g o) as mpf, g(xi)) for reduced words up to length cap, in mp arithmetic
    with left multiplication of images (keeps relative accuracy)."""
    with mpmath.workdps(dps):
        if group.kind == "schottky":
            L = group.mp_letters(dps)
        else:
            L = [g.to_mp() for g in group.letters]
        o = HPoint(mpmath.mpf(0), mpmath.mpf(1))
        x0 = INF if xi is INF else _mp(xi)
        sp = group.space
        if group.free:
            level = [((), o, x0)]
            for n in range(cap + 1):
                nxt = []
                for w, img, bx in level:
                    yield w, sp.dist(o, img), bx
                    if n < cap:
                        first = w[0] if w else None
                        for i, h in enumerate(L):
                            if first is not None and group.inverse_letter[i] == first:
                                continue
                            nxt.append(((i,) + w, h(img), h(bx) if bx is not INF else h(INF)))
                level = nxt
            return
    # non-free (SL2Z): exact matrices, deduplicated
    for p in enumerate_orbit(group, max_word=cap):
        g = p.element
        bx = g(xi)
        with mpmath.workdps(dps):
            nrm = sum(v * v for v in g.normalized().entries()) if isinstance(g, Mobius) else None
            dist = mpmath.log(exp_dist_from_norm(nrm)) if nrm is not None else mpmath.mpf(float(p.distance))
        yield p.word, dist, bx


def ba_epsilon(group, xi, eta, cap=10, dps=40):
    """inf over enumerated g of b^{d(o, g o)} Dist(g xi, eta); running minima per word length."""
    best = None
    arg = None
    per_level = {}
    with mpmath.workdps(dps):
        for w, d, bx in _orbit_boundary_scan(group, xi, cap, dps):
            v = mpmath.exp(d) * chordal(bx, eta)
            L = len(w)
            if best is None or v < best:
                best, arg = v, w
            per_level[L] = best
    running = [float(per_level[L]) for L in sorted(per_level)]
    return {"epsilon": float(best), "argmin_word": list(arg), "running_min": running, "cap": cap,
            "trivial": best == 0}


def ba_classical(x, Q):
    """min q^2 |x - p/q| over q <= Q via the continued-fraction oracle."""
    return cf_oracle(x, n=1, Q=Q)


@dataclass
class Witness:
    g: tuple
    distance: float
    dist_boundary: float
    point: object


def dirichlet_witnesses(group, xi, eta, C=1.0, cap=8, dps=40):
    """All enumerated g with Dist(g xi, eta) <= C b^{-d(o, g o)}.

    SL2Z with xi = inf: cap is the denominator bound; each reduced p/q is taken with its coset
    g T^n, and p ranges over the window where the inequality can hold at all.
    Other groups: reduced words of length <= cap.
    """
    out = []
    with mpmath.workdps(dps):
        if group.kind == "sl2z" and xi is INF:
            e = _mp(eta)
            win = 2 * abs(e) + 1
            pmax = math.isqrt(int(8 * C * float(mpmath.sqrt(1 + e * e)))) + 1
            for q in range(1, cap + 1):
                lo = min(math.floor((e - win) * q), -pmax)
                hi = max(math.ceil((e + win) * q), pmax)
                for p in range(int(lo), int(hi) + 1):
                    if math.gcd(p, q) != 1:
                        continue
                    g, nrm = ford_best(p, q)
                    a, b, c, d = g.entries()
                    dist_b = chordal(Fraction(p, q), e)
                    # walk the coset in both directions while the inequality can hold
                    for sgn in (1, -1):
                        n = 0 if sgn == 1 else -1
                        while True:
                            bb, dd = b + n * a, d + n * c
                            ed = exp_dist_from_norm(a * a + bb * bb + c * c + dd * dd)
                            if dist_b * ed > C:
                                break
                            out.append(Witness((a, bb, c, dd), float(mpmath.log(ed)), float(dist_b),
                                               Fraction(p, q)))
                            n += sgn
            return out
        for w, d, bx in _orbit_boundary_scan(group, xi, cap, dps):
            db = chordal(bx, eta) if group.space.model == "uhp" else None
            if db <= C * mpmath.exp(-d):
                out.append(Witness(tuple(w), float(d), float(db), bx))
    return out


def dirichlet_constructive(seq, h, xi, eta, space=None, sigma=None):
    """For radial g~_n emit g_n in {g~_n, g~_n h} (smaller ratio b^{d} Dist(g xi, eta); ties keep g~_n)
    and the measured constant C = max_n of the chosen ratios."""
    from .geometry import UpperHalfPlane
    from .shadows import convergence_classify
    space = space or UpperHalfPlane()
    hx = h(xi)
    if (hx is INF and xi is INF) or (hx is not INF and xi is not INF and hx == xi):
        raise DioError("h must move xi")
    with mpmath.workdps(40):
        pts = [g(space.o) for g in seq]
        pts = [HPoint(_mp(p.x), _mp(p.y)) for p in pts]
        rep = convergence_classify(space, pts, _mp(eta), sigma=sigma)
    if not rep.radial:
        raise DioError("input sequence is not radial toward eta")
    rows = []
    C = 0.0
    with mpmath.workdps(40):
        for g in seq:
            best = None
            for tag, gg in (("g", g), ("gh", g @ h)):
                x = gg(xi)
                img = gg(space.o)
                d = _mp(space.dist(space.o, img)) if not isinstance(space.dist(space.o, img), float) \
                    else mpmath.mpf(space.dist(space.o, img))
                r = mpmath.exp(d) * chordal(x, eta)
                if best is None or r < best[1]:
                    best = (tag, r, float(d))
            rows.append({"branch": best[0], "ratio": float(best[1]), "distance": best[2]})
            C = max(C, float(best[1]))
    return {"C": C, "rows": rows, "sigma": rep.sigma_radial}


# ------------------------------------------------------------------ exponents

@dataclass
class ExponentReport:
    omega: float                  # running max over non-trivial g with d >= d_min (inf if a trivial hit)
    nontrivial: float             # same, ignoring exact hits
    cap_ladder: list
    ladder_values: list
    witnesses: list = field(default_factory=list)
    trivial_hits: int = 0
    d_min: float = 0.0


def omega_estimate(group, xi, eta, caps=(4, 6, 8), d_min=20.0, dps=None):
    """Running max of -log_b Dist(g xi, eta) / d(o, g o) over g with d(o, g o) >= d_min.

    SL2Z at xi = inf with an exact eta: caps are denominator bounds and the candidates are the
    continued-fraction convergents (each taken with its Ford-minimal g); any approximation with
    exponent above the Dirichlet one is a convergent, so the ladder is exact above 1.
    """
    vals, wits = [], []
    hits = 0
    best = -math.inf
    if group.kind == "sl2z" and xi is INF and isinstance(eta, (Fraction, Surd, str)):
        x = parse_exact(eta)
        cmax = max(caps)
        cf = cf_oracle(x, n=10 ** 6 if isinstance(x, Fraction) else 200)
        prec = 50 + 4 * max(len(str(c.denominator)) for c in cf.convergents)
        cv = [c for c in cf.convergents if c.denominator <= cmax]
        with mpmath.workdps(dps or prec):
            scored = []
            for c in cv:
                g, nrm = ford_best(c.numerator, c.denominator)
                d = mpmath.log(exp_dist_from_norm_prec(nrm))
                db = chordal(c, _mp(x))
                if db == 0:
                    hits += 1
                    scored.append((c.denominator, None, c, d))
                    continue
                scored.append((c.denominator, float(-mpmath.log(db) / d) if d > 0 else math.inf, c, d))
        nontriv = -math.inf
        for cap in sorted(caps):
            for qd, v, c, d in scored:
                if qd <= cap and v is not None and d >= d_min:
                    if v > nontriv:
                        nontriv = v
                        wits.append((str(c), float(d), v))
            vals.append(nontriv)
        omega = math.inf if hits else nontriv
        return ExponentReport(omega, nontriv, list(sorted(caps)), vals, wits, hits, d_min)
    with mpmath.workdps(dps or 40):
        levels = {}
        for w, d, bx in _orbit_boundary_scan(group, xi, max(caps), dps or 40):
            db = chordal(bx, eta)
            if db == 0:
                hits += 1
                continue
            if d < d_min:
                continue
            v = float(-mpmath.log(db) / d)
            L = len(w)
            levels[L] = max(levels.get(L, -math.inf), v)
            if v > best:
                best = v
                wits.append((list(w), float(d), v))
        run = -math.inf
        cum = {}
        for L in range(max(caps) + 1):
            run = max(run, levels.get(L, -math.inf))
            cum[L] = run
        vals = [cum[c] for c in sorted(caps)]
    return ExponentReport(math.inf if hits else best, best, list(sorted(caps)), vals, wits, hits, d_min)


def exp_dist_from_norm_prec(nrm):
    h = mpmath.mpf(nrm) / 2
    return h + mpmath.sqrt(h * h - 1)


# ------------------------------------------------------------------ Hausdorff content

@dataclass
class ContentReport:
    s: float
    lower: float
    upper: float
    cover: str
    scale: float = None
    flag: str = None

    def as_row(self):
        return {"r": self.scale, "s": self.s, "H_lower": self.lower, "H_upper": self.upper}


def _tree_shell(q, depth, s, b, K=200):
    """Content of a depth-`depth` cylinder of the (q+1)-regular tree ends (visual metric b^{-gp}).

    upper: min over k of (#subcylinders at depth depth+k) * diam^s; lower: the uniform measure
    restricted to the cylinder, mu(E) / sup_A mu(A)/diam(A)^s, the sup over subcylinders (every
    set of ends lies in a cylinder of the same diameter).
    """
    lb = math.log(b)
    if depth == 0:
        # whole boundary: diam 1, q+1 branches at the root then q
        ups = [1.0] + [(q + 1) * q ** (k - 1) * math.exp(-k * s * lb) for k in range(1, K)]
        mus = [1.0] + [1.0 / ((q + 1) * q ** (k - 1)) / math.exp(-k * s * lb) for k in range(1, K)]
        return min(ups), 1.0 / max(mus)
    ups = [q ** k * math.exp(-(depth + k) * s * lb) for k in range(K)]
    mus = [q ** (-k) / math.exp(-(depth + k) * s * lb) for k in range(K)]
    return min(ups), 1.0 / max(mus)


def hausdorff_content(descriptor, s, scales=None):
    """descriptor: dict with kind in {"tree", "structure", "points", "arcs"}.

    tree: {"q", "depth", "b"} a cylinder of the tree boundary (depth 0 = all ends).
    structure: {"structure", "extraction", "depth"}: limit set of a partition structure; upper
    by the level covers, lower by the extracted measure.
    points: {"points"} reals; greedy interval covers at the given scales, lower bound unavailable.
    arcs: {"arcs": [(center, half)]} a family of disk-chart arcs covering the set.
    """
    if s < 0:
        raise DioError("s must be >= 0")
    kind = descriptor["kind"]
    if kind == "tree":
        q, depth, b = descriptor["q"], descriptor.get("depth", 0), descriptor.get("b", math.e)
        up, lo = _tree_shell(q, depth, s, b)
        return ContentReport(s, lo, up, "tree cylinders", math.exp(-depth * math.log(b)))
    if kind == "structure":
        ps = descriptor["structure"]
        ex = descriptor.get("extraction")
        depth = descriptor.get("depth", 8)
        level = [()]
        best_up = float(ps.diameter(())) ** s if s > 0 else 1.0
        sup_ratio = 0.0
        total_mass = None
        for n in range(depth + 1):
            if n > 0:
                nxt = []
                for w in level:
                    nxt.extend(ex.retained_children(w) if ex is not None else ps.children(w))
                level = nxt
            cover = sum(float(ps.diameter(w)) ** s for w in level)
            best_up = min(best_up, cover)
            if ex is not None:
                for w in level:
                    m = float(ex.mass(w))
                    if n == 0:
                        total_mass = m
                    dia = float(ps.diameter(w))
                    if dia > 0:
                        sup_ratio = max(sup_ratio, m / dia ** s)
        if ex is None:
            return ContentReport(s, 0.0, best_up, f"level covers to depth {depth}", flag="no mass distribution")
        return ContentReport(s, total_mass / sup_ratio, best_up, f"level covers to depth {depth}")
    if kind == "points":
        pts = sorted(float(p) for p in descriptor["points"])
        if not pts:
            return ContentReport(s, 0.0, 0.0, "empty")
        if s == 0:
            return ContentReport(s, 0.0, 1.0, "single set", flag="no mass distribution")
        diam = pts[-1] - pts[0]
        best = diam ** s if diam > 0 else 0.0
        for L in (scales or [diam / 2 ** k for k in range(1, 12)]):
            if L <= 0:
                continue
            n, i = 0, 0
            while i < len(pts):
                start = pts[i]
                n += 1
                while i < len(pts) and pts[i] <= start + L:
                    i += 1
            best = min(best, n * L ** s)
        return ContentReport(s, 0.0, best, "greedy interval covers", flag="no mass distribution")
    if kind == "arcs":
        arcs = descriptor["arcs"]
        fam = sum(min(1.0, math.sin(h)) ** s if s > 0 else 1.0 for _, h in arcs)
        return ContentReport(s, 0.0, min(1.0, fam), "arc family or single set", flag="no mass distribution")
    raise DioError(f"unknown descriptor kind {kind!r}")


# ------------------------------------------------------------------ P_xi

def _slope(xs, ys):
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def p_xi_estimate(group, xi, sigma=None, s=0.35, scales=None):
    """Slope of log H_{xi,sigma,s}(r) against log r on a scale ladder, both content bounds.

    Tree lattice: every end is uniformly radial (the group acts simply transitively on vertices),
    so B(xi, b^{-n}) meets the sigma-radial set in the full depth-n cylinder and the contents are
    the exact tree values.  UHP groups: the limit set near xi is sampled by orbit images of a
    fixed limit point, covered greedily; the lower bound is unavailable there.
    """
    rows = []
    if group.kind == "tree":
        q = group.params["q"]
        b = group.space.base
        ns = list(scales or range(1, 19))
        for n in ns:
            up, lo = _tree_shell(q, n, s, b)
            rows.append((b ** (-n), lo, up))
    else:
        rows = _sampled_contents(group, xi, s, scales)
    if len(rows) < 4:
        raise DioError("fewer than 4 usable scales")
    lr = np.log([r[0] for r in rows])
    lo_ok = all(r[1] > 0 for r in rows)
    up_slope, up_res = _slope(lr, np.log([r[2] for r in rows]))
    if lo_ok:
        lo_slope, lo_res = _slope(lr, np.log([r[1] for r in rows]))
    else:
        lo_slope, lo_res = None, None
    est = up_slope if lo_slope is None else 0.5 * (up_slope + lo_slope)
    if s == 0:
        est = 0.0
    return {"slope": est, "slope_upper_content": up_slope, "slope_lower_content": lo_slope,
            "residual": up_res, "table": [{"r": r, "H_lower": l, "H_upper": u} for r, l, u in rows],
            "sigma": sigma}


def _sampled_contents(group, xi, s, scales, max_word=8):
    """Contents of B(xi, r) intersected with sampled limit points g(eta0) (chordal metric)."""
    sp = group.space
    pts = []
    seed_pt = None
    for p in enumerate_orbit(group, max_word=2):
        if p.word_length == 1:
            seed_pt = p.element(INF) if xi is not INF else p.element(Fraction(0))
            break
    with mpmath.workdps(30):
        for p in enumerate_orbit(group, max_word=max_word):
            y = p.element(seed_pt)
            if y is INF:
                continue
            pts.append(y)
        ds = sorted(float(chordal(y, xi)) for y in pts)
    rs = scales or [10.0 ** (-k / 2) for k in range(1, 9)]
    rows = []
    for r in rs:
        inside = [d for d in ds if d <= r]
        if len(inside) < 2:
            continue
        rep = hausdorff_content({"kind": "points", "points": [y for y in pts if float(chordal(y, xi)) <= r]}, s)
        rows.append((r, 0.0, rep.upper))
    return rows


# ------------------------------------------------------------------ Jarnik formulas

class PTable:
    """Piecewise linear P on [0, delta] from (s, P(s)) samples, or a callable."""

    def __init__(self, f=None, points=None):
        self.f = f
        self.points = sorted(points) if points else None
        if self.points:
            vals = [v for _, v in self.points]
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise DioError("P table must be nondecreasing")
            if any(v < s for s, v in self.points):
                raise DioError("P table must satisfy P(s) >= s")

    def __call__(self, s):
        if self.f is not None:
            return self.f(s)
        pts = self.points
        for (s0, v0), (s1, v1) in zip(pts, pts[1:]):
            if s0 <= s <= s1:
                return v0 + (v1 - v0) * (s - s0) / (s1 - s0)
        raise DioError("s outside the P table")


def q_xi(P, c, delta, iters=200):
    """sup{s in (0, delta): P(s) <= (delta - s)/c} by bisection on s -> P(s) - (delta - s)/c
    (exact Fraction bisection when P returns exact values)."""
    if not 0 < delta < math.inf:
        raise DioError("need 0 < delta < inf")
    if not isinstance(P, PTable):
        P = PTable(f=P)
    lo = Fraction(0)
    hi = Fraction(delta) if isinstance(delta, (int, Fraction)) else Fraction(delta).limit_denominator(10 ** 12)
    c = Fraction(c) if isinstance(c, (int, Fraction)) else Fraction(c).limit_denominator(10 ** 12)

    top = hi

    def F(s):
        return P(s) - (top - s) / c
    if F(lo) > 0:
        return 0.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        v = F(mid)
        if v == 0:
            return mid
        if v < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < Fraction(1, 10 ** 15):
            break
    return (lo + hi) / 2


def velani_hill(delta, delta_xi, c):
    if c + 1 >= delta / (2 * delta_xi):
        return delta / (c + 1)
    return (delta + 2 * delta_xi * c) / (2 * c + 1)


def jarnik_formulas(mode, **kw):
    if mode == "q_xi":
        return q_xi(kw["P"], kw["c"], kw["delta"])
    if mode == "velani_hill":
        return velani_hill(kw["delta"], kw["delta_xi"], kw["c"])
    raise DioError(f"unknown mode {mode!r}")


def lipschitz_check(Q, delta, cs):
    """max over consecutive grid pairs of |Q(c2) - Q(c1)| - delta (c2 - c1)/c2 (<= 0 passes)."""
    worst = -math.inf
    cs = sorted(cs)
    for c1, c2 in zip(cs, cs[1:]):
        worst = max(worst, abs(float(Q(c2)) - float(Q(c1))) - delta * (c2 - c1) / c2)
    return worst


# ------------------------------------------------------------------ Khinchin series

@dataclass
class RateFunction:
    family: str
    c: float = 0.0
    eps: float = 0.0
    table: list = None

    def __call__(self, t):
        if self.family == "power":
            return t ** (-(1 + self.c))
        if self.family == "log_power":
            return t ** (-(1 + self.c)) * math.log(math.e + t) ** (-self.eps)
        if self.family == "custom":
            ts, vs = zip(*self.table)
            return float(np.exp(np.interp(math.log(t), np.log(ts), np.log(vs))))
        raise DioError(f"unknown rate family {self.family!r}")

    def check(self, grid=None):
        grid = grid or [math.exp(k / 4) for k in range(-8, 120)]
        vals = [t * self(t) for t in grid]
        if any(b > a * (1 + 1e-12) for a, b in zip(vals, vals[1:])):
            raise DioError("t Phi(t) must be nonincreasing")
        return True


@dataclass
class MeasureModel:
    kind: str
    delta: float = 1.0
    q: int = 2

    def __call__(self, r):
        if self.kind == "power_law":
            return r ** self.delta
        if self.kind == "tree_exact":
            if r >= 1:
                return 1.0
            n = math.ceil(-math.log(r) - 1e-12)
            return 1.0 / ((self.q + 1) * self.q ** (n - 1))
        raise DioError(f"unknown measure model {self.kind!r}")


def khinchin_series(group, xi, Phi, K, measure, mode="divergent_form", caps=(8, 16, 32), delta=None,
                    max_word=None, T=10.0):
    """Partial sums over the orbit up to distance caps (complete below the certified radius).

    divergent_form: sum b^{-delta d} Delta(b^d Phi(K b^d)).
    convergent_form: sum g'(xi)^delta Delta(Phi(K b^d) / g'(xi)).
    integral_reduction: int_0^T e^{delta t} Phi(e^t)^delta dt by adaptive quadrature.
    The report also carries the Poincare partial sums at delta (1 + c) for comparison.
    """
    Phi.check()
    delta = measure.delta if delta is None else delta
    if mode == "integral_reduction":
        val = mpmath.quad(lambda t: mpmath.e ** (delta * t) * mpmath.mpf(Phi(float(mpmath.e ** t))) ** delta,
                          [0, T])
        return {"mode": mode, "T": T, "value": float(val)}
    sp = group.space
    b = sp.base
    if max_word is None:
        max_word = 10 if group.kind == "schottky" else 8
    pts = list(enumerate_orbit(group, max_word=max_word))
    if group.kind == "schottky":
        complete = schottky_count_complete_below(group, max_word)
    elif group.kind == "tree":
        complete = float(max_word + 1)
    else:
        complete = math.inf
    if max(caps) >= complete:
        raise DioError(f"cap {max(caps)} exceeds the complete radius {complete:.2f}")
    c = Phi.c
    rows = []
    for cap in caps:
        s_main = 0.0
        s_poin = 0.0
        for p in pts:
            d = float(p.distance)
            if d > cap:
                continue
            bd = b ** d
            if mode == "divergent_form":
                s_main += b ** (-delta * d) * measure(bd * Phi(K * bd))
            elif mode == "convergent_form":
                gp = float(sp.derivative(p.element, xi))
                s_main += gp ** delta * measure(Phi(K * bd) / gp)
            else:
                raise DioError(f"unknown mode {mode!r}")
            s_poin += b ** (-delta * (1 + c) * d)
        rows.append({"cap": cap, "partial_sum": s_main, "poincare": s_poin, "ratio": s_main / s_poin})
    ratios = [r["ratio"] for r in rows]
    return {"mode": mode, "rows": rows, "ratio_spread": max(ratios) / min(ratios), "complete_below": complete}
