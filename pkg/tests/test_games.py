import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hypdio.games import (DummyAlice, EmptyPotentialAlice, ExtensionAlice, GameError, GameParams, HFamily,
                          HalvingBob, IntervalArena, RandomBob, ScriptedAlice, ShrinkLeftBob, Strategy, Transcript,
                          bob_legal_move, conversion_constants, convert_strategy, dummy_positional, extensions,
                          ladder_index, nf_containment_check, nf_cover, phi_conversion, phi_tree_enumerate, replay,
                          run_game, run_symbolic_game, symbolic_random_bob)
from hypdio.groups import build_group
from hypdio.geometry import INF
from hypdio.partition import CylinderStructure

I = IntervalArena(0, 1)


def bob_radii(tr):
    return [m["data"][1] for m in tr.moves if m["player"] == "bob"]


def test_bob_legal_move_example():
    B1, A1 = (F(1, 2), F(2, 5)), (F(1, 2), F(1, 25))
    z, r = bob_legal_move(I, B1, A1, F(1, 10))
    assert r == F(1, 25)
    assert abs(z - B1[0]) + r <= B1[1]
    assert abs(z - A1[0]) > r + A1[1]
    assert bob_legal_move(I, B1, None, F(1, 10)) == (F(1, 2), F(1, 25))
    with pytest.raises(GameError):
        bob_legal_move(I, B1, A1, F(1, 5))


@given(st.fractions(F(1, 5), F(4, 5)), st.fractions(F(1, 100), F(1, 5)), st.fractions(-1, 1),
       st.fractions(F(1, 100), F(1, 10)), st.fractions(F(1, 100), 1))
@settings(max_examples=300, deadline=None)
def test_bob_legal_move_property(z1, r1, t, beta, s):
    r1 = min(r1, z1, 1 - z1)
    A1 = (z1 + t * r1, s * beta * r1)
    z, r = bob_legal_move(I, (z1, r1), A1, beta)
    assert r == beta * r1
    assert abs(z - z1) + r <= r1
    assert abs(z - A1[0]) > r + A1[1]


def test_nf_cover_points():
    F_ = nf_cover(I, (F(1, 2), F(1, 2)), F(1, 2))
    assert len(F_) <= 13
    assert all(b - a == F(1, 12) for a, b in zip(F_, F_[1:]))
    assert nf_cover(I, (F(1, 2), F(1, 2)), F(1, 2), HFamily("hyperplanes", 1)) == F_
    assert nf_containment_check(I, (F(1, 2), F(1, 2)), F(1, 2), samples=500)["failures"] == 0


def test_phi_conversion():
    hist = [[(F(0), F(1, 10))]]
    assert phi_conversion(I, hist, (F(0), F(1, 2)), (F(0), F(1, 5)), c=1) == F(1, 10)
    assert phi_conversion(I, [], (F(0), F(1, 2)), c=1) == 0


def test_modified_absolute_dummy_shrink_left():
    p = GameParams("modified_absolute", F(1, 3), rounds=20)
    tr = run_game(p, I, DummyAlice(), ShrinkLeftBob())
    assert tr.violation is None
    rs = bob_radii(tr)
    assert all(b == a / 9 for a, b in zip(rs, rs[1:]))
    # Bob hugs the left end, so the outcome is the left endpoint pushed in by the last radius
    assert tr.outcome == rs[-1] == F(1, 2) / 9 ** 20


def test_h_potential_single_ball_is_legal():
    p = GameParams("h_potential", F(1, 4), c=0.5, rounds=10)
    tr = run_game(p, I, ExtensionAlice(), ShrinkLeftBob())
    assert tr.violation is None


@pytest.mark.parametrize("n", [6, 12])
def test_schmidt_script_outcome(n):
    p = GameParams("schmidt", F(1, 2), alpha=F(1, 2), rounds=n)
    script = [0, 1, 1]
    tr = run_game(p, I, ScriptedAlice(script), HalvingBob())
    # each round keeps an outer quarter: base-4 digit 0 (left) or 3 (right)
    digits = [3 * script[k % 3] for k in range(n)]
    left = sum(F(d, 4 ** (k + 1)) for k, d in enumerate(digits))
    assert tr.outcome == left + F(1, 2 * 4 ** n)
    assert abs(tr.outcome - F(5, 21)) <= F(1, 4 ** n)


@given(st.integers(0, 10 ** 6), st.sampled_from(["absolute", "modified_absolute"]))
@settings(max_examples=20, deadline=None)
def test_replay_roundtrip(seed, variant):
    p = GameParams(variant, F(1, 4), rounds=8)
    tr = run_game(p, I, DummyAlice(), RandomBob(), seed=seed)
    back = Transcript.from_json(json.loads(tr.dumps()))
    ok, out, viol = replay(back)
    assert ok and viol is None and out == tr.outcome
    assert back.dumps() == tr.dumps()


class GreedyAlice(Strategy):
    def move(self, st):
        z, r = st.bob[-1]
        return (z, r)


def test_illegal_alice_is_recorded():
    p = GameParams("absolute", F(1, 4), rounds=5)
    tr = run_game(p, I, GreedyAlice(), ShrinkLeftBob())
    assert tr.violation["player"] == "alice" and tr.violation["round"] == 0
    assert tr.outcome is None


@given(st.fractions(F(1, 10 ** 9), 1), st.sampled_from([F(1, 6), F(1, 8), F(1, 10)]))
def test_ladder_index_bracket(r, h):
    n = ladder_index(r, h)
    assert h ** (2 * n + 1) <= r < h ** (2 * n - 1)


def test_modified_to_absolute_ladder():
    beta = F(1, 4)
    h = beta / 2
    p = GameParams("absolute", beta, rounds=4)
    outer = convert_strategy("modified_to_absolute", dummy_positional(h))
    tr = run_game(p, I, outer, ShrinkLeftBob())
    assert tr.violation is None
    alice = [m["data"][1] for m in tr.moves if m["player"] == "alice"]
    for rec, ra in zip(outer.ladder, alice):
        assert rec["inner_radius"] == h ** (2 * rec["n"] + 2)
        assert ra == 2 * h ** (2 * rec["n"] + 2)
    assert alice[0] == F(1, 32)


def test_conversion_constants_quarter():
    k = conversion_constants(I, F(1, 4))
    assert (k.N, k.eps) == (25, F(1, 25))
    assert 0 < k.c < k.c_threshold


def test_potential_to_absolute_empty_inner():
    k = conversion_constants(I, F(1, 4))
    outer = convert_strategy("potential_to_absolute", EmptyPotentialAlice(), k)
    p = GameParams("h_absolute", F(1, 4), rounds=6)
    tr = run_game(p, I, outer, ShrinkLeftBob())
    assert tr.violation is None
    for row in outer.log:
        assert row["log_phi"] == -math.inf and row["invariant"]


def test_symbolic_game_avoids_deletions():
    ps = CylinderStructure(2)
    assert len(extensions(ps, (), 2)) == 4
    first = lambda ps_, w, ext: ext[0]
    tr = run_symbolic_game(ps, first, symbolic_random_bob(3), rounds=10, m=2)
    for (w, tau), (w2, _) in zip(tr.moves, tr.moves[1:] + [(tr.outcome_word, None)]):
        assert w2 != tau and len(w2) == len(w) + 2 and w2[:len(w)] == w
    assert len(tr.outcome_word) == 20


def test_phi_tree_sl2z_finite_with_tail():
    sl = build_group("sl2z")
    v = phi_tree_enumerate(sl, INF, sl.space.o, 1.0, 2.0, max_word=8)
    assert math.isfinite(v.value) and v.value > 0
    assert 0 <= v.tail < math.inf
    assert v.upper >= v.value
