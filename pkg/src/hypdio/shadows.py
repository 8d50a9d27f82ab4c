"""Shadows, the four shadow lemmas as audits, convergence modes and the horospherical exponent.

In the half-plane every shadow is an arc of the boundary.  Arcs are expressed in the
disk chart centred at the light source z: move z to i by w -> (w - Re z)/Im z, then apply
the Cayley map.  Visual distances from z are |sin(dtheta/2)| in that chart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _num as N
from .geometry import (INF, End, GeometryError, HPoint, RegularTree, UpperHalfPlane, disk_angle,
                       from_disk_angle, _lcp)
from .groups import Mobius, enumerate_orbit


FULL = "full"


@dataclass
class ShadowParams:
    z: object
    x: object
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise GeometryError("sigma must be positive")


def shadow_contains(space, params, eta):
    """eta in Shad_z(x, sigma) iff <z|eta>_x <= sigma."""
    return space.gromov_product(params.z, eta, params.x) <= params.sigma


# ------------------------------------------------------------------ half-plane arcs

def chart_map(z):
    """Mobius map sending z to i (translation then dilation)."""
    z = HPoint.of(z)
    return Mobius(1, -z.x, 0, z.y)


def _disk_rho_angle(p):
    """Polar coordinates of the Cayley image of an interior point, with 1 - rho computed stably."""
    p = HPoint.of(p)
    x, y = N.to_float(p.x), N.to_float(p.y)
    den = x * x + (y + 1) ** 2
    one_minus_rho2 = 4 * y / den
    w = complex(x, y)
    c = (w - 1j) / (w + 1j)
    rho = abs(c)
    one_minus_rho = one_minus_rho2 / (1 + rho)
    return rho, one_minus_rho, math.atan2(c.imag, c.real)


def uhp_shadow_arc(z, x, sigma):
    """Shad_z(x, sigma) as (centre angle, half width) in the chart at z, or FULL.

    With light source at the disk origin and X = rho e^{i a}, eta = e^{i phi} is in the shadow iff
    4 rho sin^2((phi - a)/2) <= (1 - rho)^2 (e^{2 sigma} - 1).
    """
    X = chart_map(z)(x)
    rho, omr, ang = _disk_rho_angle(X)
    if rho == 0:
        return FULL
    s2 = omr * omr * math.expm1(2 * sigma) / (4 * rho)
    if s2 >= 1:
        return FULL
    return (ang, 2 * math.asin(math.sqrt(s2)))


def arc_diameter(arc):
    """Visual diameter (at the chart centre) of an arc with the given half width."""
    if arc == FULL:
        return 1.0
    h = arc[1]
    return math.sin(h) if h <= math.pi / 2 else 1.0


def _angdiff(a, b):
    d = math.fmod(a - b + math.pi, 2 * math.pi)
    if d < 0:
        d += 2 * math.pi
    return d - math.pi


def arcs_intersect(a1, a2):
    if a1 == FULL or a2 == FULL:
        return True
    return abs(_angdiff(a1[0], a2[0])) <= a1[1] + a2[1]


def arc_contains(arc, theta):
    return arc == FULL or abs(_angdiff(theta, arc[0])) <= arc[1]


# ------------------------------------------------------------------ tree shadows

def tree_shadow_vertex(tree, z, x, sigma):
    """Shad_z(x, sigma) in a tree is the set of ends whose ray from z passes through v.

    v is the vertex on [x, z] at distance floor(sigma) from x; returns None for the whole boundary.
    """
    dzx = tree.dist(z, x)
    k = math.floor(sigma)
    if dzx <= k:
        return None
    # walk from x towards z by k steps
    path = _tree_geodesic(x, z)
    return path[k]


def _tree_geodesic(x, y):
    c = _lcp(x, y)
    up = [x[:i] for i in range(len(x), c - 1, -1)]
    down = [y[:i] for i in range(c + 1, len(y) + 1)]
    return up + down


def tree_in_cone(z, v, eta_or_vertex):
    """Does the ray/segment from z to the target pass through v?"""
    if isinstance(eta_or_vertex, End):
        n = max(len(z), len(v)) + 1
        w = eta_or_vertex.truncate(n)
    else:
        w = eta_or_vertex
    path = _tree_geodesic(z, w)
    return v in path


# ------------------------------------------------------------------ diameters

@dataclass
class DiameterReport:
    lower: float
    upper: float
    exact: object = None
    method: str = ""
    empty: bool = False


def shadow_diameter(space, params, samples=4096):
    z, x, sigma = params.z, params.x, params.sigma
    if isinstance(space, RegularTree):
        v = tree_shadow_vertex(space, z, x, sigma)
        if v is None:
            val = 1.0
        else:
            val = space.powb(-space.dist(z, v))
        return DiameterReport(val, val, val, "tree-exact")
    if not isinstance(space, UpperHalfPlane):
        raise GeometryError("shadow diameters are provided for the half-plane and trees")
    # dense equispaced sampling in the chart at z
    h = chart_map(z)
    hinv = h.inverse()
    phis = [-math.pi + 2 * math.pi * (k + 0.5) / samples for k in range(samples)]
    inside = []
    for ph in phis:
        eta = hinv(from_disk_angle(ph))
        inside.append(space.gromov_product(z, eta, x) <= sigma)
    arc = uhp_shadow_arc(z, x, sigma)
    exact = arc_diameter(arc)
    n_in = sum(inside)
    cell = 2 * math.pi / samples
    if n_in == 0:
        return DiameterReport(0.0, min(1.0, math.sin(cell)), exact, "sampled", empty=True)
    if n_in == samples:
        return DiameterReport(1.0, 1.0, exact, "sampled")
    # shadows are arcs: find the cyclic run of in-samples
    start = next(i for i in range(samples) if inside[i] and not inside[i - 1])
    run = 0
    while inside[(start + run) % samples]:
        run += 1
    if run != n_in:
        raise GeometryError("sampled shadow is not connected")
    span_in = (run - 1) * cell
    span_out = (run + 1) * cell
    lo = math.sin(min(span_in / 2, math.pi / 2))
    hi = math.sin(min(span_out / 2, math.pi / 2))
    return DiameterReport(lo, hi, exact, "sampled")


# ------------------------------------------------------------------ lemma audits

@dataclass
class ShadowAuditReport:
    lemma: str
    constant: float
    samples: int
    passed: bool
    details: dict = field(default_factory=dict)

    def as_json(self):
        return {"lemma": self.lemma, "constant": self.constant, "samples": self.samples,
                "pass": self.passed, **self.details}


def _orbit_points(group, max_word):
    return [p for p in enumerate_orbit(group, max_word=max_word)]


def intersecting_audit(space, group, sigma=0.5, max_word=4, max_pairs=1000, seed=0):
    """max |d(x,y) - (d(z,y) - d(z,x))| over orbit pairs with intersecting shadows, d(z,x) <= d(z,y)."""
    rng = np.random.default_rng(seed)
    pts = _orbit_points(group, max_word)
    z = space.o
    worst = 0.0
    checked = 0
    idx = [(i, j) for i in range(len(pts)) for j in range(len(pts)) if i != j]
    order = rng.permutation(len(idx))
    for k in order:
        if checked >= max_pairs:
            break
        i, j = idx[k]
        x, y = pts[i].image, pts[j].image
        dzx, dzy = space.dist(z, x), space.dist(z, y)
        if dzx > dzy:
            continue
        if isinstance(space, RegularTree):
            vx = tree_shadow_vertex(space, z, x, sigma)
            vy = tree_shadow_vertex(space, z, y, sigma)
            meet = vx is None or vy is None or tree_in_cone(z, vx, vy) or tree_in_cone(z, vy, vx)
        else:
            meet = arcs_intersect(uhp_shadow_arc(z, x, sigma), uhp_shadow_arc(z, y, sigma))
        if not meet:
            continue
        checked += 1
        v = abs(space.dist(x, y) - (dzy - dzx))
        worst = max(worst, v)
    return ShadowAuditReport("intersecting", worst, checked, checked > 0 and math.isfinite(worst),
                             {"sigma": sigma, "max_word": max_word})


def bounded_distortion_audit(space, group, sigma=1.0, max_word=6, per_element=8):
    """Spread of g'(xi) b^{d(o, g o)} over xi in Shad_{g^-1 o}(o, sigma)."""
    if not isinstance(space, UpperHalfPlane):
        raise GeometryError("bounded distortion audit is provided for the half-plane")
    o = space.o
    lo, hi, n = math.inf, 0.0, 0
    for p in _orbit_points(group, max_word):
        if p.word_length == 0:
            continue
        g = p.element
        z = g.inverse()(o)
        arc = uhp_shadow_arc(z, o, sigma)
        hinv = chart_map(z).inverse()
        if arc == FULL:
            angles = [-math.pi + 2 * math.pi * (k + 0.5) / per_element for k in range(per_element)]
        else:
            angles = [arc[0] + arc[1] * (2 * k / (per_element - 1) - 1) for k in range(per_element)]
        for th in angles:
            xi = hinv(from_disk_angle(th))
            r = space.derivative(g, xi) * space.powb(p.distance)
            lo, hi, n = min(lo, r), max(hi, r), n + 1
    C = max(hi, 1 / lo) if n else math.inf
    return ShadowAuditReport("bounded_distortion", C, n, n > 0 and math.isfinite(C),
                             {"sigma": sigma, "min_ratio": lo, "max_ratio": hi})


def _complement_diameter(Zs, sigma, samples):
    """Upper bound for Diam_o of the boundary outside Shad_z(o, sigma), for light sources Zs (disk coords)."""
    phis = -np.pi + 2 * np.pi * (np.arange(samples) + 0.5) / samples
    eta = np.exp(1j * phis)
    worst = 0.0
    cell = 2 * np.pi / samples
    for Z in Zs:
        rho = abs(Z)
        if rho == 0:
            continue
        # <Z|eta>_0 = log((1 + rho)/|eta - Z|)
        gp = np.log((1 + rho) / np.abs(eta - Z))
        out = gp > sigma
        k = int(out.sum())
        if k == 0:
            continue
        if k == samples:
            return 1.0
        # complement is an arc: its diameter is bounded using one extra cell on each side
        span = (k + 1) * cell
        worst = max(worst, math.sin(min(span / 2, math.pi / 2)))
    return worst


def big_shadows_audit(space, group, eps=0.1, max_word=6, samples=4096, sigma_max=2 ** 10):
    """Doubling search for sigma with Diam(boundary minus Shad_z(o, sigma)) <= eps over orbit z."""
    if not isinstance(space, UpperHalfPlane):
        raise GeometryError("big shadows audit is provided for the half-plane")
    Zs = []
    for p in _orbit_points(group, max_word):
        w = complex(p.image)
        Zs.append((w - 1j) / (w + 1j))
    sigma = 1.0
    while sigma <= sigma_max:
        d = _complement_diameter(Zs, sigma, samples)
        if d <= eps:
            return ShadowAuditReport("big_shadows", sigma, len(Zs), True, {"eps": eps, "diameter": d})
        sigma *= 2
    return ShadowAuditReport("big_shadows", math.inf, len(Zs), False, {"eps": eps})


def diameter_audit(space, group, sigma=1.0, max_word=8):
    """Spread of Diam_o(Shad_o(g o, sigma)) * b^{d(o, g o)} over the orbit."""
    o = space.o
    ratios = []
    for p in _orbit_points(group, max_word):
        if isinstance(space, RegularTree):
            dm = shadow_diameter(space, ShadowParams(o, p.image, sigma)).exact
        else:
            dm = arc_diameter(uhp_shadow_arc(o, p.image, sigma))
        ratios.append(dm * space.powb(p.distance))
    lo, hi = min(ratios), max(ratios)
    C = max(hi, 1 / lo)
    return ShadowAuditReport("diameter", C, len(ratios), math.isfinite(C),
                             {"sigma": sigma, "min_ratio": lo, "max_ratio": hi})


def shadow_lemma_audit(space, group, lemma, **kw):
    fn = {"intersecting": intersecting_audit, "bounded_distortion": bounded_distortion_audit,
          "big_shadows": big_shadows_audit, "diameter": diameter_audit}.get(lemma)
    if fn is None:
        raise GeometryError(f"unknown lemma {lemma!r}")
    return fn(space, group, **kw)


# ------------------------------------------------------------------ convergence modes

@dataclass
class ConvergenceReport:
    converges: bool
    radial: bool
    sigma_radial: float
    uniform_radial: bool
    max_step: float
    horospherical: bool
    plain: bool
    cap: int
    details: dict = field(default_factory=dict)


def _quarter_trend(vals):
    n = len(vals)
    q = max(1, n // 4)
    return float(np.mean(vals[-q:]) - np.mean(vals[:q]))


def convergence_classify(space, seq, xi, sigma=None, margin=2.0, starts_at_o=None):
    """Classify how a finite sample of a sequence approaches xi.

    radial: sup_n <o|xi>_{x_n} <= sigma (with sigma given), or the shadow parameter shows no
    upward trend (sigma then reported as the observed sup).  uniform_radial adds
    d(x_n, x_{n+1}) <= sigma and x_1 = o.  horospherical: beta_xi(o, x_n) trends upward by margin.
    """
    o = space.o
    seq = list(seq)
    if len(seq) < 4:
        raise GeometryError("need at least 4 terms")
    toward = [space.gromov_product(x, xi, o) for x in seq]
    conv = _quarter_trend(toward) > margin
    if not conv:
        raise GeometryError("sequence does not approach xi")
    shadow_par = [space.gromov_product(o, xi, x) for x in seq]
    sup = max(float(v) for v in shadow_par)
    steps = [float(space.dist(a, b)) for a, b in zip(seq, seq[1:])]
    mstep = max(steps)
    if starts_at_o is None:
        starts_at_o = float(space.dist(seq[0], o)) < 1e-12
    if sigma is None:
        radial = _quarter_trend(shadow_par) <= margin
        uni = radial and starts_at_o
        sig = max(sup, mstep) if uni else sup
    else:
        radial = sup <= sigma
        uni = radial and starts_at_o and mstep <= sigma
        sig = sigma
    bus = [float(space.busemann(xi, o, x)) for x in seq]
    horo = _quarter_trend(bus) > margin
    return ConvergenceReport(conv, radial, sig, uni, mstep, horo, not radial and not horo, len(seq),
                             {"shadow_parameter_sup": sup})


def beta_horospherical(group, xi, max_word):
    """max over enumerated g != id of <g o|xi>_o / d(o, g o), a lower estimate of the limsup."""
    sp = group.space
    o = sp.o
    best = 0.0
    for p in enumerate_orbit(group, max_word=max_word):
        if p.word_length == 0 or float(p.distance) == 0:
            continue
        v = float(sp.gromov_product(p.image, xi, o)) / float(p.distance)
        best = max(best, v)
    return {"beta": best, "cap": max_word}


def horoball_contains(space, xi, level, x):
    """x lies in the horoball {beta_xi(x, o) < level}."""
    return space.busemann(xi, x, space.o) < level
