"""Ball games (Schmidt, absolute, modified absolute, H-absolute, H-potential), the symbolic
m-step game on a partition structure, explicit Alice strategies and strategy conversions.

Balls are formal pairs (center, radius): B(z2, r2) counts as inside B(z1, r1) when
d(z1, z2) + r2 <= r1, and two closed balls are disjoint when d > r1 + r2.  On interval arenas
centres and radii are Fractions so legality checks are exact.  Radii that are astronomically
small are carried as logarithms (``LogRadius``).
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import _num as N
from .geometry import INF, HPoint, UpperHalfPlane


class GameError(ValueError):
    pass


class IllegalMove(GameError):
    def __init__(self, who, rule, detail=""):
        super().__init__(f"{who} violated {rule}: {detail}")
        self.who, self.rule, self.detail = who, rule, detail


# ------------------------------------------------------------------ numbers

@dataclass(frozen=True)
class LogRadius:
    """A positive radius stored as its natural logarithm."""
    log: float

    def __float__(self):
        return math.exp(self.log) if self.log > -745 else 0.0


def log_of(r):
    if isinstance(r, LogRadius):
        return r.log
    return N.log(Fraction(r)) if isinstance(r, (int, Fraction)) else math.log(r)


def _le_sum(d, r, R):
    """d + r <= R with d exact and r, R possibly LogRadius."""
    if isinstance(R, LogRadius):
        ld = log_of(d) if d > 0 else -math.inf
        lr = log_of(r) if isinstance(r, LogRadius) or r > 0 else -math.inf
        m = max(ld, lr)
        if m == -math.inf:
            return True
        return m + math.log(math.exp(ld - m) + math.exp(lr - m)) <= R.log
    if not isinstance(r, LogRadius):
        return d + r <= R
    if d > R:
        return False
    gap = R - d
    return gap > 0 and log_of(gap) >= r.log


def _gt_sum(d, r, R):
    """d > r + R with d, R exact and r possibly a LogRadius."""
    if not isinstance(r, LogRadius):
        return d > r + R
    if d <= R:
        return False
    return log_of(d - R) > r.log


def fr(v):
    """Exact Fraction from int/float/str/Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10 ** 15) if v != int(v) else Fraction(int(v))
    return Fraction(v)


# ------------------------------------------------------------------ arenas

class IntervalArena:
    """A compact interval [lo, hi] of the real line with the euclidean metric.

    c_up = 1/2: for z in the interval and r < hi - lo there is a point at distance exactly r/2.
    """

    kind = "interval"

    def __init__(self, lo=0, hi=1):
        self.lo, self.hi = fr(lo), fr(hi)
        self.c_up = Fraction(1, 2)

    def dist(self, x, y):
        return abs(x - y)

    def contains_ball(self, outer, inner):
        (z1, r1), (z2, r2) = outer, inner
        return _le_sum(self.dist(z1, z2), r2, r1)

    def disjoint(self, b1, b2):
        (z1, r1), (z2, r2) = b1, b2
        if isinstance(r1, LogRadius):
            (z1, r1), (z2, r2) = (z2, r2), (z1, r1)
        if isinstance(r1, LogRadius):
            return self.dist(z1, z2) > 0 and log_of(self.dist(z1, z2)) > max(r1.log, r2.log) + math.log(2)
        return _gt_sum(self.dist(z1, z2), r2, r1)

    def meets(self, b1, b2):
        return not self.disjoint(b1, b2)

    def inside(self, ball):
        z, r = ball
        return self.lo <= z - r and z + r <= self.hi

    def perfect_witness(self, z, r_in, r_out):
        """A point w of the arena with r_in <= |w - z| < r_out (first to the right, then left)."""
        for w in (z + r_in, z - r_in):
            if self.lo <= w <= self.hi and r_in < r_out:
                return w
        return None

    def describe(self):
        return {"arena": "interval", "lo": str(self.lo), "hi": str(self.hi), "c_up": str(self.c_up)}


@dataclass
class HFamily:
    kind: str = "points"
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise GameError("hyperplane family needs d >= 1")
        if self.kind not in ("points", "hyperplanes"):
            raise GameError(f"unknown family {self.kind!r}")
        if self.kind == "hyperplanes" and self.d == 1:
            self.kind = "points"


# ------------------------------------------------------------------ parameters and transcripts

VARIANTS = ("schmidt", "absolute", "modified_absolute", "h_absolute", "h_potential")


@dataclass
class GameParams:
    variant: str
    beta: Fraction
    alpha: Fraction = None
    c: float = None
    family: HFamily = field(default_factory=HFamily)
    rounds: int = 20
    default_floor: Fraction = None     # r_n above this for 10 straight rounds -> default win

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise GameError(f"unknown variant {self.variant!r}")
        self.beta = fr(self.beta)
        if not 0 < self.beta < 1:
            raise GameError("beta must lie in (0, 1)")
        if self.variant == "schmidt":
            if self.alpha is None:
                raise GameError("schmidt game needs alpha")
            self.alpha = fr(self.alpha)
            if not 0 < self.alpha < 1:
                raise GameError("alpha must lie in (0, 1)")
        if self.variant == "h_potential" and (self.c is None or self.c <= 0):
            raise GameError("potential game needs c > 0")

    def as_json(self):
        return {"variant": self.variant, "beta": str(self.beta),
                "alpha": None if self.alpha is None else str(self.alpha), "c": self.c,
                "family": {"kind": self.family.kind, "d": self.family.d}, "rounds": self.rounds}

    @classmethod
    def from_json(cls, d):
        return cls(d["variant"], Fraction(d["beta"]), None if d.get("alpha") is None else Fraction(d["alpha"]),
                   d.get("c"), HFamily(**d.get("family", {})), d.get("rounds", 20))


def _enc(v):
    if isinstance(v, Fraction):
        return {"q": str(v)}
    if isinstance(v, LogRadius):
        return {"log": repr(v.log)}
    if isinstance(v, (list, tuple)):
        return [_enc(x) for x in v]
    if isinstance(v, float):
        return {"f": repr(v)}
    return v


def _dec(v):
    if isinstance(v, dict):
        if "q" in v:
            return Fraction(v["q"])
        if "log" in v:
            return LogRadius(float(v["log"]))
        if "f" in v:
            return float(v["f"])
        return {k: _dec(x) for k, x in v.items()}
    if isinstance(v, list):
        return tuple(_dec(x) for x in v)
    return v


@dataclass
class Transcript:
    params: dict
    moves: list = field(default_factory=list)     # dicts {player, kind, data}
    outcome: object = None
    default_reason: str = None
    violation: dict = None
    seed: int = None
    notes: dict = field(default_factory=dict)

    def as_json(self):
        return {"params": self.params, "moves": [{"player": m["player"], "kind": m["kind"], "data": _enc(m["data"])}
                                                  for m in self.moves],
                "outcome": _enc(self.outcome), "default_reason": self.default_reason,
                "violation": self.violation, "seed": self.seed, "notes": _jsonable(self.notes)}

    def dumps(self):
        return json.dumps(self.as_json(), indent=1)

    @classmethod
    def from_json(cls, d):
        moves = [{"player": m["player"], "kind": m["kind"], "data": _dec(m["data"])} for m in d["moves"]]
        return cls(d["params"], moves, _dec(d["outcome"]), d.get("default_reason"), d.get("violation"),
                   d.get("seed"), d.get("notes", {}))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (mpmath.mpf,)):
        return float(v)
    return v


# ------------------------------------------------------------------ rule checks

def check_alice(params, arena, B, A):
    """A is a ball (schmidt/absolute variants) or a list of balls (potential game)."""
    v = params.variant
    z, r = B
    if v == "schmidt":
        w, ra = A
        if ra != params.alpha * r:
            raise IllegalMove("alice", "schmidt-radius", f"{ra} != alpha r")
        if not arena.contains_ball(B, A):
            raise IllegalMove("alice", "schmidt-inclusion", "A not inside B")
    elif v in ("absolute", "h_absolute"):
        w, ra = A
        if not (0 < _val(ra) and _le_radius(ra, params.beta * r)):
            raise IllegalMove("alice", "absolute-radius", "needs 0 < r~ <= beta r")
    elif v == "modified_absolute":
        w, ra = A
        if ra != params.beta * r:
            raise IllegalMove("alice", "modified-radius", "needs r~ = beta r")
    elif v == "h_potential":
        if len(A) > 10_000:
            raise IllegalMove("alice", "potential-cap", "more than 1e4 sets in one round")
        c = params.c
        budget = c * log_of(params.beta * r)
        exact = all(not isinstance(ra, LogRadius) for _, ra in A) and c == int(c)
        if exact:
            tot = sum(Fraction(ra) ** int(c) for _, ra in A)
            if tot > (params.beta * r) ** int(c):
                raise IllegalMove("alice", "potential-budget", f"sum {tot} exceeds (beta r)^c")
        elif A:
            lg = _logsumexp([c * log_of(ra) for _, ra in A])
            if lg > budget + 1e-12:
                raise IllegalMove("alice", "potential-budget", f"log sum {lg} exceeds {budget}")


def _val(r):
    return float(r) if isinstance(r, LogRadius) else r


def _le_radius(a, b):
    if isinstance(a, LogRadius):
        return a.log <= log_of(b)
    return a <= b


def _logsumexp(xs):
    m = max(xs)
    return m + math.log(sum(math.exp(x - m) for x in xs))


def check_bob(params, arena, prev_B, A, B):
    v = params.variant
    z, r = B
    if not arena.inside(B):
        raise IllegalMove("bob", "arena", "ball leaves the arena")
    if v == "schmidt":
        if r != params.beta * A[1]:
            raise IllegalMove("bob", "schmidt-radius", "needs r = beta * alice radius")
        if not arena.contains_ball(A, B):
            raise IllegalMove("bob", "schmidt-inclusion", "B not inside A")
        return
    if not arena.contains_ball(prev_B, B):
        raise IllegalMove("bob", "inclusion", "B_{n+1} not inside B_n")
    if v == "modified_absolute":
        if r != params.beta * A[1]:
            raise IllegalMove("bob", "modified-radius", "needs r_{n+1} = beta r~_n")
    elif v == "absolute":
        if r < params.beta * _val(A[1]) if not isinstance(A[1], LogRadius) else False:
            raise IllegalMove("bob", "absolute-radius", "needs r_{n+1} >= beta r~_n")
    elif v in ("h_absolute", "h_potential"):
        if r < params.beta * prev_B[1]:
            raise IllegalMove("bob", "h-radius", "needs r_{n+1} >= beta r_n")
    if v in ("absolute", "modified_absolute", "h_absolute"):
        if not arena.disjoint(A, B):
            raise IllegalMove("bob", "avoidance", "B_{n+1} meets Alice's deletion")


# ------------------------------------------------------------------ driver

class Strategy:
    """Base class: subclasses implement move(state) and may keep per-run memory via reset()."""
    name = "strategy"

    def reset(self, params, arena, seed=0):
        pass


@dataclass
class GameState:
    params: GameParams
    arena: object
    bob: list = field(default_factory=list)
    alice: list = field(default_factory=list)
    round: int = 0


def run_game(params, arena, alice, bob, start=None, rounds=None, seed=0, record=None):
    """Play ``rounds`` rounds; returns a Transcript.  ``start`` is Bob's first ball."""
    rounds = params.rounds if rounds is None else rounds
    alice.reset(params, arena, seed)
    bob.reset(params, arena, seed)
    st = GameState(params, arena)
    tr = Transcript(params.as_json() | {"arena": arena.describe()}, seed=seed)
    B = start if start is not None else bob.first(st)
    B = (fr(B[0]), fr(B[1]))
    try:
        if not arena.inside(B):
            raise IllegalMove("bob", "arena", "first ball leaves the arena")
    except IllegalMove as e:
        tr.violation = {"player": e.who, "rule": e.rule, "detail": e.detail}
        return tr
    st.bob.append(B)
    tr.moves.append({"player": "bob", "kind": "ball", "data": B})
    floor = params.default_floor if params.default_floor is not None else B[1] / 1000
    above = 0
    for n in range(rounds):
        st.round = n
        try:
            A = alice.move(st)
            check_alice(params, arena, st.bob[-1], A)
        except IllegalMove as e:
            tr.violation = {"player": e.who, "rule": e.rule, "detail": e.detail, "round": n}
            return tr
        st.alice.append(A)
        tr.moves.append({"player": "alice", "kind": "delete", "data": A})
        try:
            Bn = bob.move(st)
            if Bn is None:
                tr.default_reason = "bob has no legal move"
                tr.notes["rounds_played"] = n + 1
                return tr
            check_bob(params, arena, st.bob[-1], A, Bn)
        except IllegalMove as e:
            tr.violation = {"player": e.who, "rule": e.rule, "detail": e.detail, "round": n}
            return tr
        st.bob.append(Bn)
        tr.moves.append({"player": "bob", "kind": "ball", "data": Bn})
        if record is not None:
            record(st)
        above = above + 1 if Bn[1] >= floor else 0
        if above >= 10:
            tr.default_reason = "radii stay above the floor for 10 consecutive rounds (heuristic r_n -/-> 0)"
    last = st.bob[-1]
    tr.outcome = last[0]
    tr.notes["final_radius"] = last[1]
    if params.variant == "h_potential" and tr.default_reason is None:
        for m, lst in enumerate(st.alice):
            for (w, ra) in lst:
                if arena.contains_ball((w, ra), (last[0], 0)) and _outcome_inside(arena, (w, ra), last):
                    tr.default_reason = f"outcome lies in a set chosen at round {m}"
                    break
            if tr.default_reason:
                break
    return tr


def _outcome_inside(arena, ball, last):
    # the outcome is pinned to within the last radius; require the whole last ball inside
    return arena.contains_ball(ball, last)


def replay(transcript, arena=None):
    """Re-validate every move of a transcript; returns (ok, outcome, first violation)."""
    p = GameParams.from_json(transcript.params)
    a = transcript.params.get("arena", {})
    arena = arena or IntervalArena(Fraction(a.get("lo", "0")), Fraction(a.get("hi", "1")))
    moves = transcript.moves
    if not moves:
        return False, None, {"rule": "empty"}
    B = moves[0]["data"]
    A = None
    try:
        for m in moves[1:]:
            if m["player"] == "alice":
                A = _as_move(p, m["data"])
                check_alice(p, arena, B, A)
            else:
                Bn = tuple(m["data"])
                check_bob(p, arena, B, A, Bn)
                B = Bn
    except IllegalMove as e:
        return False, None, {"player": e.who, "rule": e.rule, "detail": e.detail}
    outcome = B[0]
    return outcome == transcript.outcome or transcript.violation is not None, outcome, None


def _as_move(p, data):
    if p.variant == "h_potential":
        return [tuple(x) for x in data]
    return tuple(data)


# ------------------------------------------------------------------ legal moves and covers

def bob_legal_move(arena, B1, A1, beta):
    """Ball of radius beta r1 inside B1 and disjoint from A1, by the two-candidate construction."""
    beta = fr(beta)
    c = arena.c_up
    if beta > c / 5:
        raise GameError(f"beta = {beta} exceeds c/5 = {c / 5} for this arena")
    z1, r = fr(B1[0]), fr(B1[1])
    if A1 is not None and A1[1] > beta * r:
        raise GameError("Alice's radius exceeds beta r")
    U1 = (z1, beta * r)
    if A1 is None:
        return U1
    w2 = arena.perfect_witness(z1, c * (1 - beta) * r, (1 - beta) * r)
    if w2 is None:
        raise GameError("no perfectness witness at the required scale")
    U2 = (w2, beta * r)
    for U in (U1, U2):
        if arena.disjoint(U, A1):
            return U
    raise GameError("both candidates meet A1 (arena constant c is wrong)")


def nf_cover(arena, ball, beta, family=None):
    """Finite family F for the covering assumption: a maximal beta r/3-separated set of the ball.

    Points on an interval: greedy left to right with step exactly beta r/3.  Hyperplanes in R^d
    (d >= 2, ball normalised to the unit ball): greedy beta/3-separated subset of a grid on
    S^{d-1} x [-(1 + beta/3), 1 + beta/3] (maximal relative to the grid); entries are (v, t).
    """
    family = family or HFamily()
    beta = fr(beta)
    z, r = fr(ball[0]), fr(ball[1])
    if family.kind == "points":
        step = beta * r / 3
        lo = max(arena.lo, z - r)
        hi = min(arena.hi, z + r)
        out = []
        p = lo
        while p <= hi:
            out.append(p)
            p += step
        return out
    return _hyperplane_net(float(beta), family.d)


def _hyperplane_net(beta, d, grid=None):
    import numpy as np
    T = 1 + beta / 3
    sep = beta / 3
    rng = np.random.default_rng(0)
    if d == 2:
        k = int(math.ceil(2 * math.pi / (sep / 2)))
        th = np.linspace(0, 2 * math.pi, k, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], 1)
    else:
        g = rng.normal(size=(grid or 4000, d))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    ts = np.arange(-T, T + 1e-12, sep / 2)
    net = []
    for v in dirs:
        for t in ts:
            if all(max(np.linalg.norm(v - u), abs(t - s)) >= sep for u, s in net):
                net.append((v, float(t)))
    return [(tuple(float(x) for x in v), t) for v, t in net]


def nf_containment_check(arena, ball, beta, samples=2000, seed=0):
    """Sampled check: each point-ball of radius beta r/3 meeting the ball lies in B(z2, beta r), z2 in F."""
    F = nf_cover(arena, ball, beta)
    beta = fr(beta)
    z, r = fr(ball[0]), fr(ball[1])
    rng = random.Random(seed)
    rad = beta * r / 3
    bad = 0
    for _ in range(samples):
        t = Fraction(rng.randrange(10 ** 6), 10 ** 6)
        z1 = (z - r - rad) + t * (2 * r + 2 * rad)
        if not arena.meets((z1, rad), (z, r)):
            continue
        if not any(arena.contains_ball((w, beta * r), (z1, rad)) for w in F):
            bad += 1
    return {"net_size": len(F), "failures": bad, "samples": samples}


# ------------------------------------------------------------------ potential function (conversion mode)

def phi_conversion(arena, history, B, A=None, c=1):
    """phi(B) or phi(B; A): sum of r^c over chosen sets meeting B (and inside A when given).

    history: list over rounds of lists of (center, radius).  Exact when c is an integer and radii
    are exact; otherwise float computed through logarithms.
    """
    exact = c == int(c)
    tot_exact = Fraction(0)
    logs = []
    for lst in history:
        for ball in lst:
            if not arena.meets(ball, B):
                continue
            if A is not None and not arena.contains_ball(A, ball):
                continue
            ra = ball[1]
            if exact and not isinstance(ra, LogRadius):
                tot_exact += Fraction(ra) ** int(c)
            else:
                logs.append(c * log_of(ra))
    if not logs:
        return tot_exact if exact else float(tot_exact)
    return float(tot_exact) + math.exp(_logsumexp(logs))


# ------------------------------------------------------------------ simple strategies

class DummyAlice(Strategy):
    """Deletes a ball of the required radius at the right edge of Bob's ball (or nothing)."""
    name = "dummy"

    def reset(self, params, arena, seed=0):
        self.params = params

    def move(self, st):
        z, r = st.bob[-1]
        p = st.params
        if p.variant == "h_potential":
            return []
        if p.variant == "schmidt":
            return (z, p.alpha * r)
        ra = p.beta * r
        return (z + r - ra, ra)


class ScriptedAlice(Strategy):
    """Schmidt game: picks the left (0) or right (1) sub-ball of radius alpha r per a script."""
    name = "scripted"

    def __init__(self, script):
        self.script = list(script)

    def move(self, st):
        z, r = st.bob[-1]
        p = st.params
        ra = p.alpha * r if p.variant == "schmidt" else p.beta * r
        side = self.script[st.round % len(self.script)]
        return (z - r + ra, ra) if side == 0 else (z + r - ra, ra)


class ExtensionAlice(Strategy):
    """Potential game: one ball of radius beta r_n centred at Bob's centre (equality case)."""
    name = "single-ball"

    def move(self, st):
        z, r = st.bob[-1]
        return [(z, st.params.beta * r)]


def bob_radius(params, st):
    if params.variant == "schmidt":
        return params.beta * st.alice[-1][1]
    if params.variant == "modified_absolute":
        return params.beta * st.alice[-1][1]
    if params.variant == "absolute":
        a = st.alice[-1][1]
        return max(params.beta * _val(a), params.beta * st.bob[-1][1]) if not isinstance(a, LogRadius) \
            else params.beta * st.bob[-1][1]
    return params.beta * st.bob[-1][1]


def bob_candidates(st, k=9):
    """Legal balls of the adversary radius, centres on an evenly spaced grid (left to right)."""
    p = st.params
    arena = st.arena
    prev = st.alice[-1] if p.variant == "schmidt" else st.bob[-1]
    z, r = prev
    r2 = bob_radius(p, st)
    out = []
    for j in range(k):
        c = z - r + r2 + Fraction(j, k - 1) * (2 * r - 2 * r2)
        B = (c, r2)
        try:
            check_bob(p, arena, st.bob[-1], st.alice[-1], B)
        except IllegalMove:
            continue
        out.append(B)
    return out


class ShrinkLeftBob(Strategy):
    name = "shrink-left"

    def first(self, st):
        return (Fraction(1, 2), Fraction(1, 2))

    def move(self, st):
        c = bob_candidates(st)
        return c[0] if c else None


class RandomBob(Strategy):
    name = "random"

    def reset(self, params, arena, seed=0):
        self.rng = random.Random(seed)

    def first(self, st):
        return (Fraction(1, 2), Fraction(1, 2))

    def move(self, st):
        c = bob_candidates(st)
        return self.rng.choice(c) if c else None


class GreedyBob(Strategy):
    """Moves toward a target point (ties to the left)."""
    name = "greedy"

    def __init__(self, target=Fraction(1, 3)):
        self.target = fr(target)

    def first(self, st):
        return (Fraction(1, 2), Fraction(1, 2))

    def move(self, st):
        c = bob_candidates(st)
        return min(c, key=lambda B: abs(B[0] - self.target)) if c else None


class ScriptedBob(Strategy):
    """Follows a list of candidate indices (modulo the number of legal candidates)."""
    name = "scripted"

    def __init__(self, script):
        self.script = list(script)

    def first(self, st):
        return (Fraction(1, 2), Fraction(1, 2))

    def move(self, st):
        c = bob_candidates(st)
        if not c:
            return None
        return c[self.script[st.round % len(self.script)] % len(c)]


class HalvingBob(Strategy):
    """Schmidt game with alpha = beta = 1/2: Bob takes the sub-ball sharing the side Alice chose."""
    name = "halving"

    def first(self, st):
        return (Fraction(1, 2), Fraction(1, 2))

    def move(self, st):
        w, ra = st.alice[-1]
        z, r = st.bob[-1]
        r2 = st.params.beta * ra
        return (w - ra + r2, r2) if w < z else (w + ra - r2, r2)


# ------------------------------------------------------------------ conversion: potential -> absolute

@dataclass
class ConversionConstants:
    beta: Fraction
    N: int
    eps: Fraction
    c_threshold: float
    c: float
    C: float
    log_beta_inner: float

    def as_json(self):
        return {"beta": str(self.beta), "N": self.N, "eps": str(self.eps), "c_threshold": self.c_threshold,
                "c": self.c, "C": self.C, "log_beta_inner": self.log_beta_inner}


def conversion_constants(arena, beta, c=None, c_fraction=0.5):
    """eps = min(beta/3, 1/N), c below the threshold (1 - eps) beta^{-c} < 1, beta~ = eps / C^{1/c}.

    C is the constant from iterating the one-step bound psi_{n+1} <= beta^{-c}((1-eps) psi_n + beta~^c)
    from psi_0 = 0: psi_n <= beta~^c * beta^{-c} / (1 - (1-eps) beta^{-c}).
    """
    beta = fr(beta)
    Nb = int(2 * 3 / beta) + 1      # net size bound on an interval (step beta r/3 over length 2r)
    eps = min(beta / 3, Fraction(1, Nb))
    thr = math.log(1 / (1 - float(eps))) / math.log(1 / float(beta))
    if c is None:
        c = c_fraction * thr
    if c >= thr:
        raise GameError(f"c = {c} is not below the threshold {thr}")
    q = (1 - float(eps)) * float(beta) ** (-c)
    C = float(beta) ** (-c) / (1 - q)
    lbt = math.log(float(eps)) - math.log(C) / c
    return ConversionConstants(beta, Nb, eps, thr, c, C, lbt)


class DeletionLedger:
    """Sets chosen so far in a potential game on an interval, kept as per-round arrays sorted by
    centre.  phi queries include the bulk of sets by float windows and decide the sets near a
    window edge with the exact arena tests."""

    EDGE = 1e-9

    def __init__(self, arena):
        self.arena = arena
        self.chunks = []      # (float centres, log radii, exact list)

    def add(self, sets):
        if not sets:
            return
        xs = np.array([float(cn) for cn, _ in sets])
        order = np.argsort(xs, kind="stable")
        sets = [sets[i] for i in order]
        xs = xs[order]
        lr = np.array([log_of(rd) for _, rd in sets])
        self.chunks.append((xs, lr, sets))

    def log_phi(self, B, A=None, c=1.0):
        """log of sum r^c over sets meeting B (and inside A when given); -inf when empty."""
        z, r = B
        terms = []
        for xs, lr, sets in self.chunks:
            pad = float(np.exp(lr.max())) + self.EDGE
            lo, hi = float(z - r), float(z + r)
            if A is None:
                inner_lo, inner_hi = lo + pad, hi - pad

                def exact(i):
                    return self.arena.meets(sets[i], B)
            else:
                a, ra = A
                lo, hi = max(lo, float(a - ra)), min(hi, float(a + ra))
                # a set deep inside both A and B is inside A and meets B
                inner_lo, inner_hi = lo + pad, hi - pad

                def exact(i):
                    return self.arena.contains_ball(A, sets[i]) and self.arena.meets(sets[i], B)
            i0 = int(np.searchsorted(xs, lo - pad, side="left"))
            i1 = int(np.searchsorted(xs, hi + pad, side="right"))
            if inner_lo < inner_hi:
                j0 = int(np.searchsorted(xs, inner_lo, side="left"))
                j1 = int(np.searchsorted(xs, inner_hi, side="right"))
                terms.append(c * lr[j0:j1])
                edge = list(range(i0, j0)) + list(range(j1, i1))
            else:
                edge = list(range(i0, i1))
            sel = [i for i in edge if exact(i)]
            if sel:
                terms.append(c * lr[sel])
        allt = np.concatenate(terms) if terms else np.zeros(0)
        if allt.size == 0:
            return -math.inf
        m = allt.max()
        return float(m + math.log(np.exp(allt - m).sum()))


class RationalPotentialAlice(Strategy):
    """Inner potential-game strategy on an interval: at Bob's B(z, r) choose B(p/q, eps_in/q^2) for
    reduced p/q (q <= qmax) with r0/r <= q^2 < r0/(beta~ r) that meet B(z, r).

    eps_in is fixed a priori so that the budget sum_i r_i^c <= (beta~ r)^c holds in every round:
    the number of chosen sets is at most the number R of rationals of height <= qmax in the arena,
    each with r_i <= eps_in, so eps_in = beta~ r_min R^{-1/c} suffices for balls down to r_min.
    """
    name = "rationals"

    def __init__(self, log_beta, c, qmax=1000, r_min_log=None):
        self.log_beta = log_beta
        self.c = c
        self.qmax = qmax
        self.r_min_log = r_min_log

    def reset(self, params, arena, seed=0):
        self.arena = arena
        self.xs, self.ps, self.qs = _rational_table(arena.lo, arena.hi, self.qmax)
        self.r0 = None
        self.log_eps_in = None

    def certify(self, r0, r_min_log):
        R = len(self.xs)
        self.log_eps_in = self.log_beta + r_min_log - math.log(R) / self.c
        return self.log_eps_in

    def choose(self, B):
        z, r = B
        if self.r0 is None:
            self.r0 = r
            self.certify(r, self.r_min_log if self.r_min_log is not None else log_of(r) - 200)
        qlo2 = self.r0 / r
        lhi = log_of(self.r0 / r) - self.log_beta
        pad = math.exp(self.log_eps_in) + DeletionLedger.EDGE
        i0 = int(np.searchsorted(self.xs, float(z - r) - pad, side="left"))
        i1 = int(np.searchsorted(self.xs, float(z + r) + pad, side="right"))
        q = self.qs[i0:i1]
        lq2 = 2 * np.log(q.astype(float))
        # float prefilter on the height window, exact test within 1e-9 of either end
        keep = (lq2 >= math.log(float(qlo2)) - 1e-9) & (lq2 < lhi + 1e-9)
        out = []
        for k in np.nonzero(keep)[0]:
            i = i0 + int(k)
            qi = int(self.qs[i])
            q2 = qi * qi
            if abs(lq2[k] - math.log(float(qlo2))) <= 1e-9 and q2 < qlo2:
                continue
            if abs(lq2[k] - lhi) <= 1e-9 and math.log(q2) >= lhi:
                continue
            rad = LogRadius(self.log_eps_in - math.log(q2))
            x = self.xs[i]
            if float(z - r) + pad <= x <= float(z + r) - pad:
                out.append((Fraction(int(self.ps[i]), qi), rad))
                continue
            pq = Fraction(int(self.ps[i]), qi)
            if self.arena.meets((pq, rad), B):
                out.append((pq, rad))
        return out


_RATIONALS = {}


def _rational_table(lo, hi, qmax):
    """Reduced p/q in [lo, hi] with q <= qmax, sorted; float order is exact (gaps >= 1/qmax^2)."""
    key = (lo, hi, qmax)
    if key not in _RATIONALS:
        ps, qs = [], []
        for q in range(1, qmax + 1):
            p = np.arange(math.ceil(lo * q), math.floor(hi * q) + 1)
            p = p[np.gcd(p, q) == 1]
            ps.append(p)
            qs.append(np.full(p.size, q))
        ps, qs = np.concatenate(ps), np.concatenate(qs)
        xs = ps / qs
        order = np.argsort(xs, kind="stable")
        _RATIONALS[key] = (xs[order], ps[order], qs[order])
    return _RATIONALS[key]


class PotentialToAbsolute(Strategy):
    """Outer absolute-game Alice built from an inner potential-game Alice.

    Each round the inner strategy answers Bob's ball (same ball in both games); the outer
    deletion is B(a, beta r_n) with a in the nf_cover net maximising phi(B_n; B(a, beta r_n)).
    Per-round checks: phi(B_n) <= (eps r_n)^c and, when it holds, phi(B_n; A_n) >= eps phi(B_n).
    """
    name = "potential->absolute"

    def __init__(self, inner, consts):
        self.inner = inner
        self.k = consts

    def reset(self, params, arena, seed=0):
        self.arena = arena
        self.params = params
        self.ledger = DeletionLedger(arena)
        self.log = []
        self.inner.reset(params, arena, seed)

    def move(self, st):
        B = st.bob[-1]
        z, r = B
        chosen = self.inner.choose(B)
        self.ledger.add(chosen)
        c = self.k.c
        lphi = self.ledger.log_phi(B, c=c)
        lbound = c * (log_of(self.k.eps) + log_of(r))
        F = nf_cover(self.arena, B, self.params.beta)
        rad = self.params.beta * r
        best, best_a = -math.inf, F[0]
        for a in F:
            v = self.ledger.log_phi(B, A=(a, rad), c=c)
            if v > best:
                best, best_a = v, a
        ok_inv = lphi <= lbound + 1e-12
        if lphi == -math.inf:
            claim = True
        else:
            claim = (best >= log_of(self.k.eps) + lphi - 1e-9) if ok_inv else None
        self.log.append({"round": st.round, "log_phi": lphi, "log_bound": lbound, "invariant": ok_inv,
                         "log_phi_A": best, "claim": claim, "inner_sets": len(chosen), "net": len(F)})
        return (best_a, rad)


class ModifiedToAbsolute(Strategy):
    """Positional ladder: Bob's B(z, r) with (beta/2)^{2n+1} <= r < (beta/2)^{2n-1} is answered by
    F(B(z, (beta/2)^{2n})) = B(w, (beta/2)^{2n+2}), played as B(w, 2 (beta/2)^{2n+2}).

    ``inner`` is a positional strategy for the beta^2/4-modified game: a callable ball -> ball.
    """
    name = "modified->absolute"

    def __init__(self, inner):
        self.inner = inner

    def reset(self, params, arena, seed=0):
        self.params = params
        self.ladder = []

    def move(self, st):
        z, r = st.bob[-1]
        h = self.params.beta / 2
        n = ladder_index(r, h)
        Bt = (z, h ** (2 * n))
        w, rr = self.inner(Bt)
        if rr != h ** (2 * n + 2):
            raise IllegalMove("alice", "inner-radius", "inner positional move has the wrong radius")
        self.ladder.append({"n": n, "inner_radius": rr})
        return (w, 2 * rr)


def ladder_index(r, h):
    """Unique n with h^{2n+1} <= r < h^{2n-1}."""
    r = fr(r)
    n = 0
    while r < h ** (2 * n + 1):
        n += 1
    while n > -10 ** 6 and r >= h ** (2 * n - 1):
        n -= 1
    return n


def dummy_positional(h):
    """Positional inner strategy deleting the right-edge ball of the forced radius."""
    def F(B):
        z, r = B
        rr = r * h * h
        return (z + r - rr, rr)
    return F


# ------------------------------------------------------------------ symbolic game on a partition structure

class SymbolicGameError(GameError):
    pass


@dataclass
class SymbolicTranscript:
    m: int
    moves: list = field(default_factory=list)    # (bob word, alice word) per round
    phi: list = field(default_factory=list)
    outcome_word: tuple = None
    notes: dict = field(default_factory=dict)

    def as_json(self):
        return {"m": self.m, "moves": [{"bob": list(b), "alice": list(a) if a is not None else None}
                                       for b, a in self.moves],
                "phi": self.phi, "outcome_word": list(self.outcome_word or ()), "notes": _jsonable(self.notes)}


def extensions(ps, word, m):
    out = [tuple(word)]
    for _ in range(m):
        out = [c for w in out for c in ps.children(w)]
    return out


def run_symbolic_game(ps, alice, bob, rounds, m, start=()):
    """m-step symbolic game: Alice deletes an extension of Bob's word of length |w| + m, Bob plays
    a different extension of the same length.  Both strategies are callables (ps, word, ...)."""
    tr = SymbolicTranscript(m)
    w = tuple(start)
    for n in range(rounds):
        ext = extensions(ps, w, m)
        if not ext:
            raise SymbolicGameError(f"word {w} has no extensions")
        tau = alice(ps, w, ext)
        if tau not in ext:
            raise IllegalMove("alice", "symbolic-extension", f"{tau} is not an extension of length {len(w) + m}")
        legal = [e for e in ext if e != tau]
        if not legal:
            tr.notes["default"] = "bob has no legal move"
            tr.moves.append((w, tau))
            return tr
        nxt = bob(ps, w, legal, n)
        if nxt not in legal:
            raise IllegalMove("bob", "symbolic-avoidance", "bob played the deleted extension")
        tr.moves.append((w, tau))
        w = nxt
    tr.outcome_word = w
    return tr


def symbolic_random_bob(seed=0):
    rng = random.Random(seed)

    def bob(ps, w, legal, n):
        return legal[rng.randrange(len(legal))]
    bob.name = "random"
    return bob


def symbolic_greedy_bob(score):
    """Greedy toward the target: pick the legal extension with the largest score (first on ties)."""
    def bob(ps, w, legal, n):
        best = max(range(len(legal)), key=lambda i: (score(legal[i]), -i))
        return legal[best]
    bob.name = "greedy"
    return bob


def symbolic_scripted_bob(script):
    def bob(ps, w, legal, n):
        return legal[script[n % len(script)] % len(legal)]
    bob.name = "scripted"
    return bob


# ------------------------------------------------------------------ phi in tree mode

class UncertifiedTail(GameError):
    pass


@dataclass
class PhiValue:
    value: float          # enumerated part
    tail: float           # certified upper bound on the omitted part
    terms: int

    @property
    def upper(self):
        return self.value + self.tail


def phi_tree_enumerate(group, xi, x, c, sigma, max_word=8, tol=1e-9):
    """phi(x) by orbit enumeration (word cap) plus a tail bound for the omitted orbit points.

    Terms: g with <g o|g xi>_o <= d(o, x) and g xi in Shad_o(x, sigma), weight b^{-c (d(o,go) - d(o,x))}.
    The tail follows the annulus argument: qualifying g have xi in Shad(g^{-1} o, d(o, x)), the
    orbit points of that set in each unit annulus have diameter <= tau, so annulus n contributes
    at most M b^{-c (n - tau)} with M = #{g : d(o, g o) <= tau}.  tau is measured on the enumerated
    part; n0 is the radius below which the enumeration is complete.
    """
    from .groups import enumerate_orbit
    sp = group.space
    o = sp.o
    dox = float(sp.dist(o, x))
    pts = list(enumerate_orbit(group, max_word=max_word))
    n0 = completeness_radius(group, max_word, pts)
    tot, n = 0.0, 0
    shells = {}
    for p in pts:
        d = float(p.distance)
        if d >= n0:
            continue
        gx = p.element(xi)
        if float(sp.gromov_product(p.image, gx, o)) > dox + tol:
            continue
        if float(sp.gromov_product(o, gx, x)) > sigma + tol:
            continue
        tot += math.exp(-c * (d - dox))
        n += 1
    # S_rho with rho = d(o, x): points z = g^{-1} o with xi in Shad_z... i.e. <o|xi>_{z} <= rho
    for p in pts:
        d = float(p.distance)
        if d >= n0:
            continue
        if float(sp.gromov_product(o, xi, p.image)) <= dox + tol:
            shells.setdefault(int(d), []).append(p.image)
    tau = 1.0
    for zs in shells.values():
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                tau = max(tau, float(sp.dist(zs[i], zs[j])))
    if tau >= n0:
        raise UncertifiedTail(f"measured tau = {tau:.3f} is not below the complete radius {n0:.3f}")
    M = sum(1 for p in pts if float(p.distance) <= tau)
    start = math.floor(n0)
    lb = math.log(sp.base)
    tail = M * math.exp(c * lb * (dox + tau - start)) / (1 - math.exp(-c * lb))
    return PhiValue(tot, tail, n)


def completeness_radius(group, max_word, pts):
    """Distance below which the word-capped enumeration contains every orbit point."""
    if group.kind == "schottky":
        from .groups import schottky_count_complete_below
        return schottky_count_complete_below(group, max_word)
    if group.kind == "sl2z":
        return _sl2z_complete_radius(pts)
    if group.kind == "tree":
        return float(max_word + 1)
    raise UncertifiedTail(f"no completeness certificate for {group.kind}")


def _sl2z_complete_radius(pts):
    # cosh d(i, g i) = (a^2 + b^2 + c^2 + d^2) / 2, so orbit points within R come from the finitely
    # many integer matrices of that norm; compare with the enumerated set
    have = {p.element.normalized().key() for p in pts}
    R = max(float(p.distance) for p in pts)
    nmax = int(math.floor(2 * math.cosh(R))) + 1
    best = R
    B = math.isqrt(nmax) + 1
    for cc in range(0, B + 1):
        for dd in range(-B, B + 1):
            if cc == 0 and dd <= 0 or math.gcd(cc, dd) != 1:
                continue
            # particular solution of a dd - b cc = 1
            g, u, v = _egcd(dd, -cc)
            a0, b0 = u * g, v * g
            # general: a = a0 + t cc, b = b0 + t dd; minimise the norm over t around the real optimum
            den = cc * cc + dd * dd
            t0 = -(a0 * cc + b0 * dd) / den
            for t in range(math.floor(t0) - B, math.ceil(t0) + B + 1):
                a, b = a0 + t * cc, b0 + t * dd
                nrm = a * a + b * b + cc * cc + dd * dd
                if nrm > nmax:
                    continue
                key = _key(a, b, cc, dd)
                if key not in have:
                    d = math.acosh(nrm / 2)
                    best = min(best, d)
    return best


def _egcd(a, b):
    """(g, u, v) with u a + v b = g = +-1 for coprime a, b."""
    old_r, r, old_s, s, old_t, t = a, b, 1, 0, 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _key(a, b, c, d):
    e = (a, b, c, d)
    s = next(v for v in e if v != 0)
    return tuple(v if s > 0 else -v for v in e)


class CosetPhi:
    """phi(x) for a Schottky structure with xi the attracting fixed point of letter ``letter``
    whose axis passes through o, evaluated in the local frame of x.

    With z = g_x^{-1}(o) and h = g_x^{-1} g, phi(x) = sum over h of b^{-c Delta_h} where
    Delta_h = d(z, h o) - d(z, o), subject to
        <z | h xi>_o <= sigma                                  (g xi in Shad_o(x, sigma))
        Delta_h + beta_{h xi}(o, h o) <= 2 <z | h xi>_o         (<g o|g xi>_o <= d(o, x)).
    h runs over u a^k with u a reduced word of length <= U not ending in a^{+-1} and k in Z.
    After conjugating by u the points a^k o lie on the imaginary axis and
        cosh d(z', e^{k l} i) = cosh h_z cosh(k l - log|z'|),  sinh h_z = |Re z'| / Im z',
    so each coset sum is evaluated directly near its peak and by a geometric series beyond
    |s| > s_cut with two-sided bounds.
    """

    def __init__(self, ps, letter=0, c=None, sigma=None, U=3, s_cut=30.0, dps=None):
        self.ps = ps
        self.group = ps.group
        self.letter = letter
        self.c = c
        self.sigma = ps.sigma if sigma is None else sigma
        self.U = U
        self.s_cut = s_cut
        self.dps = dps or ps.local_dps
        self.space = UpperHalfPlane()
        with mpmath.workdps(self.dps):
            L = self.group.mp_letters(self.dps)
            self.L = L
            A = L[letter]
            fx = _fixed_points(A)
            self.o = HPoint(mpmath.mpf(0), mpmath.mpf(1))
            if not _axis_through(fx, self.o):
                raise GameError("coset evaluation needs xi fixed by a generator whose axis passes through o")
            tr = abs(A.a + A.d) / mpmath.sqrt(A.det())
            self.ell = 2 * mpmath.acosh(tr / 2)          # translation length
            self.M = _axis_frame(fx)                     # maps 0 -> repelling, inf -> attracting
            self.Minv = self.M.inverse()
            self.xi = fx[1]
        self._cosets = self._coset_reps()

    def _coset_reps(self):
        inv = self.group.inverse_letter
        a, ai = self.letter, inv[self.letter]
        words = [()]
        frontier = [()]
        for _ in range(self.U):
            nxt = []
            for w in frontier:
                for l in range(len(self.L)):
                    if w and l == inv[w[-1]]:
                        continue
                    nxt.append(w + (l,))
            words.extend(nxt)
            frontier = nxt
        reps = [w for w in words if not w or w[-1] not in (a, ai)]
        out = []
        with mpmath.workdps(self.dps):
            for w in reps:
                g = Mobius_id(self.dps)
                for l in w:
                    g = g @ self.L[l]
                out.append((w, g, g.inverse()))
        return out

    def value(self, z):
        """PhiValue for the node with local light source z (coset length grows until no
        qualifying coset has maximal length, up to U = 8)."""
        while True:
            try:
                return self._value(z)
            except UncertifiedTail:
                if self.U >= 8:
                    raise
                self.U += 1
                self._cosets = self._coset_reps()

    def _value(self, z):
        c = self.c
        with mpmath.workdps(self.dps):
            D0 = self.space.dist(z, self.o)
            o_frame = self.Minv(self.o)
            ly0 = mpmath.log(o_frame.y)           # a^k o = e^{k l} y0 i in the axis frame
            tol = mpmath.mpf(10) ** (20 - self.dps)    # boundary cases (equality) count as qualifying
            tot = mpmath.mpf(0)
            tail = mpmath.mpf(0)
            n = 0
            for w, g, gi in self._cosets:
                eta = _apply_boundary(g, self.xi)
                G = self.space.gromov_product(z, eta, self.o)
                if G > self.sigma + tol:
                    continue
                zp = self.Minv(gi(z))
                op = self.Minv(gi(self.o))
                hz = mpmath.asinh(abs(zp.x) / zp.y)
                tz = mpmath.log(abs(mpmath.mpc(zp.x, zp.y)))
                ch = mpmath.cosh(hz)
                # beta_{u xi}(o, u a^k o) = k l + log y0 - log Im o'
                base = ly0 - mpmath.log(op.y)

                def s_of(k):
                    return k * self.ell + ly0 - tz

                def delta(k):
                    return mpmath.acosh(ch * mpmath.cosh(s_of(k))) - D0

                def f(k):
                    return delta(k) + k * self.ell + base - 2 * G
                # f increases strictly to +inf and tends to lim as k -> -inf
                lim = mpmath.log(ch) + tz - ly0 - D0 + base - 2 * G
                if lim > tol:
                    continue
                if w and len(w) == self.U:
                    raise UncertifiedTail(f"a qualifying coset has maximal length U = {self.U}")
                hi = int(mpmath.floor((tz - ly0) / self.ell))
                while f(hi) <= tol:
                    hi += max(1, abs(hi))
                lo = hi - 1
                while f(lo) > tol:
                    lo -= max(1, hi - lo)
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if f(mid) <= tol:
                        lo = mid
                    else:
                        hi = mid
                k = lo
                while s_of(k) >= -self.s_cut:
                    tot += mpmath.exp(-c * delta(k))
                    n += 1
                    k -= 1
                # omitted k: d >= hz + |s| - log 4, geometric in |s| with ratio e^{-c l}
                s1 = abs(s_of(k))
                tail += mpmath.exp(-c * (hz + s1 - mpmath.log(4) - D0)) / (1 - mpmath.exp(-c * self.ell))
            return PhiValue(float(tot), float(tail), n)


def Mobius_id(dps):
    from .groups import Mobius
    one = mpmath.mpf(1)
    return Mobius(one, 0 * one, 0 * one, one)


def _fixed_points(A):
    """(repelling, attracting) fixed points of a hyperbolic real Mobius map (INF allowed)."""
    a, b, c, d = A.a, A.b, A.c, A.d
    if c == 0:
        # z -> (a z + b)/d: fixed points inf and b/(d - a)
        fin = b / (d - a)
        return (fin, INF) if abs(a) > abs(d) else (INF, fin)
    tr = a + d
    disc = mpmath.sqrt(tr * tr - 4 * (a * d - b * c))
    p1 = (a - d + disc) / (2 * c)
    p2 = (a - d - disc) / (2 * c)
    # derivative at fixed point p is 1/(c p + d)^2 (det 1 up to scale)
    det = a * d - b * c
    d1 = det / (c * p1 + d) ** 2
    return (p2, p1) if abs(d1) < 1 else (p1, p2)


def _axis_through(fx, o, tol=None):
    p, q = fx
    if p is INF or q is INF:
        fin = q if p is INF else p
        return abs(fin - o.x) < mpmath.mpf(10) ** (-20)
    # geodesic between reals p, q: semicircle centred (p+q)/2 of radius |p-q|/2
    cx, rad = (p + q) / 2, abs(p - q) / 2
    return abs((o.x - cx) ** 2 + o.y ** 2 - rad ** 2) < mpmath.mpf(10) ** (-20)


def _axis_frame(fx):
    """Mobius map sending 0 -> repelling fixed point and inf -> attracting one."""
    from .groups import Mobius
    rep, att = fx
    one = mpmath.mpf(1)
    if att is INF:
        return Mobius(one, rep, 0 * one, one)
    if rep is INF:
        return Mobius(att, -one, one, 0 * one)
    if att > rep:
        return Mobius(att, rep, one, one)
    return Mobius(att, -rep, one, -one)


def _apply_boundary(g, xi):
    if xi is INF:
        return g(INF)
    return g(xi)


# ------------------------------------------------------------------ the phi-maximising strategy

@dataclass
class PhiRun:
    transcript: SymbolicTranscript
    phi: list
    bound: float
    q: float
    C: float
    within: bool


class AlicePhiTree:
    """Alice for the m-step symbolic game: delete the length-(|w|+m) extension maximising phi
    (ties: first in stored order)."""

    def __init__(self, ps, xi_letter=0, m=2, c=None, alpha=None, U=3):
        self.ps = ps
        self.m = m
        self.alpha = alpha if alpha is not None else ps.max_step()
        b = math.e
        thr = math.log(2) / (math.log(b) * m * self.alpha)
        if c is None:
            c = 0.5 * thr
        if c >= thr:
            raise GameError(f"c = {c} must be below log_b 2 / (m alpha) = {thr}")
        self.c = c
        self.q = b ** (c * m * self.alpha) / 2
        self.cphi = CosetPhi(ps, letter=xi_letter, c=c, U=U)
        self._memo = {}

    def phi(self, word):
        word = tuple(word)
        v = self._memo.get(word)
        if v is None:
            v = self.cphi.value(self.ps.sym(word).z)
            self._memo[word] = v
        return v

    def __call__(self, ps, w, ext):
        vals = [self.phi(e).upper for e in ext]
        best = max(range(len(ext)), key=lambda i: (vals[i], -i))
        return ext[best]

    def audit_Cm(self, words):
        """max over the given nodes of sum_tau phi(tau) - b^{c m alpha} phi(w) (additive constant C_m)."""
        worst = -math.inf
        rows = []
        for w in words:
            ext = extensions(self.ps, w, self.m)
            s = sum(self.phi(e).upper for e in ext)
            v = s - (2 * self.q) * self.phi(w).value
            rows.append((list(w), v))
            worst = max(worst, v)
        return worst, rows

    def run(self, bob, rounds=30, Cm=None, audit_words=None):
        if Cm is None:
            Cm, _ = self.audit_Cm(audit_words or [()])
        C = max(Cm, 0.0) / 2
        tr = run_symbolic_game(self.ps, self, bob, rounds, self.m)
        phis = [self.phi(b).upper for b, _ in tr.moves] + [self.phi(tr.outcome_word).upper]
        bound = max(C / (1 - self.q), phis[0])
        tr.phi = phis
        tr.notes.update({"C_m": Cm, "C": C, "q": self.q, "bound": bound, "c": self.c, "alpha": self.alpha})
        return PhiRun(tr, phis, bound, self.q, C, all(p <= bound * (1 + 1e-12) for p in phis))


def coded_outcome(ps, word, dps=None):
    """x_word = g_word(o) by point iteration (mp HPoint); its real part approximates the coded point."""
    dps = dps or ps.local_dps
    gw = ps.sym(word).gword
    with mpmath.workdps(dps):
        L = ps.group.mp_letters(dps)
        x = HPoint(mpmath.mpf(0), mpmath.mpf(1))
        for l in reversed(gw):
            x = L[l](x)
        return x


# ------------------------------------------------------------------ potential BA strategy (points)

class AlicePotentialBA(Strategy):
    """H-potential game (H = points) on an interval with the visual metric replaced by the
    euclidean one (bi-Lipschitz on compact intervals of the real line).

    At Bob's B(z, r): for each enumerated g with
        -log_b(r/r0) <= <g o|g xi>_o < -log_b(beta r/r0)   and   B(g xi, eps b^{-d(o,go)}) meets B(z, r)
    choose B(g xi, eps b^{-d(o, g o)}).  The orbit list is precomputed with exact g xi when possible.
    """
    name = "potential-ba"

    def __init__(self, group, xi, beta, c, eps, max_word=8):
        from .groups import enumerate_orbit
        self.group = group
        self.xi = xi
        self.beta = fr(beta)
        self.c = c
        self.eps = eps
        sp = group.space
        self.items = []
        for p in enumerate_orbit(group, max_word=max_word):
            gx = p.element(xi)
            if gx is INF:
                continue
            gp = float(sp.gromov_product(p.image, gx, sp.o))
            self.items.append((fr(gx) if isinstance(gx, (int, Fraction)) else fr(float(gx)), gp,
                               float(p.distance)))
        self.max_word = max_word

    def reset(self, params, arena, seed=0):
        self.arena = arena
        self.r0 = None
        self.chosen = []

    def move(self, st):
        z, r = st.bob[-1]
        if self.r0 is None:
            self.r0 = r
        lo = -math.log(float(r / self.r0))
        hi = -math.log(float(self.beta * r / self.r0))
        out = []
        seen = set()
        for gx, gp, d in self.items:
            if not (lo <= gp < hi):
                continue
            rad = LogRadius(math.log(self.eps) - d)
            key = (gx, round(d, 9))
            if key in seen:
                continue
            if self.arena.meets((gx, rad), (z, r)):
                seen.add(key)
                out.append((gx, rad))
        if out:
            lg = _logsumexp([self.c * x.log for _, x in out])
            if lg > self.c * log_of(self.beta * r) + 1e-12:
                raise IllegalMove("alice", "potential-budget", "legality certificate fails at this cap")
        self.chosen.append(len(out))
        return out

    def legality_epsilon(self, r_grid):
        """Largest eps (log) keeping the budget over the given Bob radii, using the enumerated orbit."""
        worst = math.inf
        for r in r_grid:
            lo = -math.log(float(r / r_grid[0]))
            hi = -math.log(float(self.beta * r / r_grid[0]))
            ds = [d for _, gp, d in self.items if lo <= gp < hi]
            if not ds:
                continue
            s = _logsumexp([-self.c * d for d in ds])
            worst = min(worst, (self.c * log_of(self.beta * r) - s) / self.c)
        return worst


# ------------------------------------------------------------------ entry points

def phi_potential(mode, state, query):
    """mode "conversion": state = (arena, history, c), query = B or (B, A); exact sum.
    mode "tree": state = dict(group, xi, c, sigma, max_word) or an AlicePhiTree, query = x or a word."""
    if mode == "conversion":
        arena, history, c = state
        B, A = (query if len(query) == 2 and isinstance(query[0], tuple) else (query, None))
        return phi_conversion(arena, history, B, A, c)
    if mode == "tree":
        if isinstance(state, AlicePhiTree):
            return state.phi(query)
        return phi_tree_enumerate(state["group"], state["xi"], query, state["c"], state["sigma"],
                                  max_word=state.get("max_word", 8))
    raise GameError(f"unknown phi mode {mode!r}")


def alice_phi_tree_strategy(structure, xi_letter=0, m=2, c=None):
    return AlicePhiTree(structure, xi_letter=xi_letter, m=m, c=c)


def alice_potential_ba_strategy(group, xi, beta, c, eps, max_word=8):
    return AlicePotentialBA(group, xi, beta, c, eps, max_word=max_word)


def convert_strategy(kind, inner, params=None, arena=None):
    """potential_to_absolute: inner is a RationalPotentialAlice-like object with choose(B) and
    params a ConversionConstants; modified_to_absolute: inner is a positional callable."""
    if kind == "potential_to_absolute":
        if params is None:
            raise GameError("potential_to_absolute needs conversion constants")
        return PotentialToAbsolute(inner, params)
    if kind == "modified_to_absolute":
        return ModifiedToAbsolute(inner)
    raise GameError(f"unknown conversion {kind!r}")


class EmptyPotentialAlice:
    """Inner potential strategy that never deletes anything."""
    def reset(self, params, arena, seed=0):
        pass

    def choose(self, B):
        return []


def phi_strategy_experiment(ps, rounds=30, m=2, audit_nodes=12, seed=0, scan_cap=10, bobs=None):
    """Run the phi-maximising Alice against the three Bob adversaries and scan the outcomes."""
    from .dio import ba_epsilon
    al = AlicePhiTree(ps, m=m)
    rng = random.Random(seed)
    words = [()]
    for _ in range(audit_nodes):
        w = ()
        for _ in range(rng.randrange(1, 6)):
            w = rng.choice(ps.children(w))
        words.append(w)
    Cm, _ = al.audit_Cm(words)
    if bobs is None:
        bobs = [("random", symbolic_random_bob(seed + 1)),
                ("greedy", symbolic_greedy_bob(lambda w: al.phi(w).upper)),
                ("scripted", symbolic_scripted_bob([0, 3, 5, 1]))]
    out = []
    for name, bob in bobs:
        run = al.run(bob, rounds=rounds, Cm=Cm)
        x = coded_outcome(ps, run.transcript.outcome_word)
        ba = ba_epsilon(ps.group, INF if al.cphi.xi is INF else al.cphi.xi, x.x, cap=scan_cap)
        out.append({"bob": name, "within_bound": run.within, "bound": run.bound, "max_phi": max(run.phi),
                    "phi": run.phi, "outcome": x.x, "ba_epsilon": ba["epsilon"], "ba_report": ba,
                    "depth": len(run.transcript.outcome_word), "transcript": run.transcript})
    return {"C_m": Cm, "c": al.c, "q": al.q, "alpha": al.alpha, "runs": out}


def conversion_experiment(beta, rounds=30, qmax=1000, bob=None, seed=0, arena=None):
    """Potential -> absolute conversion on an interval with the rational inner strategy.

    Returns the transcript, the per-round invariant log and the outcome's
    min_{q <= qmax} q * dist(q x, Z) (= q^2 |x - p/q| at the best p).
    """
    arena = arena or IntervalArena(0, 1)
    beta = fr(beta)
    k = conversion_constants(arena, beta)
    params = GameParams("h_absolute", beta, rounds=rounds)
    params.default_floor = Fraction(0)
    start = (Fraction(1, 2), Fraction(1, 2))
    r_min_log = log_of(start[1]) + (rounds + 1) * log_of(beta)
    inner = RationalPotentialAlice(k.log_beta_inner, k.c, qmax=qmax, r_min_log=r_min_log)
    alice = PotentialToAbsolute(inner, k)
    bob = bob or RandomBob()
    tr = run_game(params, arena, alice, bob, start=start, seed=seed)
    tr.default_reason = None if tr.default_reason and "floor" in tr.default_reason else tr.default_reason
    x = tr.outcome
    eps_out = None
    if x is not None:
        eps_out = min(q * abs(q * x - round(q * x)) for q in range(1, qmax + 1))
    return {"constants": k, "transcript": tr, "log": alice.log, "outcome": x,
            "epsilon_prime": eps_out, "log_eps_inner": inner.log_eps_in,
            "max_log_phi_minus_bound": max(r["log_phi"] - r["log_bound"] for r in alice.log),
            "invariant_all": all(r["invariant"] for r in alice.log),
            "claim_all": all(r["claim"] for r in alice.log if r["claim"] is not None)}
