import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hypdio.geometry import INF
from hypdio.groups import (F_TABLES, GroupError, Mobius, ResourceError, block_count, block_orders, build_group,
                           classify_and_fix, enumerate_orbit, orbital_counts, poincare, poincare_exponent,
                           tree_count_dp, tree_count_formula)
from hypdio.surd import Surd


def test_sl2z_presentation():
    g = build_group("sl2z")
    T, S = g.generators
    assert T.entries() == (1, 1, 0, 1)
    assert S.entries() == (0, -1, 1, 0)


def test_block_orders_4n():
    assert set(block_orders(F_TABLES["4^n"], 10).values()) == {4}


def test_vwazero_disks():
    g = build_group("vwazero", depth=3)
    for n, h in enumerate(g.generators, start=1):
        # the isometric circle of (a z + a^2 - rho^2)/(z + a) sits at -a with radius rho
        a, b, c, d = h.entries()
        centre, radius = -d / c, 1 / abs(c)
        assert centre == -(2 ** math.factorial(n))
        assert radius == Fraction(1, 2 ** math.factorial(n + 2))


def test_orbit_sizes():
    assert sum(1 for _ in enumerate_orbit(build_group("tree", q=2), max_word=2)) == 10
    assert sum(1 for _ in enumerate_orbit(build_group("sl2z"), max_word=1)) == 4
    assert sum(1 for _ in enumerate_orbit(build_group("block", f="2^n"), max_norm=8)) == 8


def test_counts():
    assert orbital_counts(build_group("block", f="4^n", nmax=8), "f_block", [3])[3] == 64
    assert orbital_counts(build_group("tree", q=2), "fG", [2])[2] == 10
    sl = build_group("sl2z")
    assert orbital_counts(sl, "f_xi", R=5, metametric="euclidean")[5] == 11
    # exact metametric: Dist(o, T^k o) = e^{d(i, i+k)/2}, which is <= 5 exactly for |k| <= 4
    exact = sum(1 for k in range(-10, 11) if math.exp(math.acosh(1 + k * k / 2) / 2) <= 5)
    assert orbital_counts(sl, "f_xi", R=5)[5] == exact == 9


def test_block_count_matches_enumeration():
    g = build_group("block", f="2^n", nmax=8)
    for N in range(1, 6):
        assert block_count(g, N) == block_count(g, N, method="enumerate") == 2 ** N


def test_poincare_tree():
    T = build_group("tree", q=2)
    assert poincare(T, 1, max_word=2) == pytest.approx(1 + 3 / math.e + 6 / math.e ** 2)
    assert poincare(T, 0, max_word=5) == pytest.approx(tree_count_formula(2, 5))
    est = poincare_exponent(T, ts=list(range(1, 16)))
    assert abs(est.delta - math.log(2)) <= 0.02


def test_classification():
    assert classify_and_fix(Mobius(1, 1, 0, 1)) == {"kind": "parabolic", "fixed": [INF]}
    r = classify_and_fix(Mobius(2, 1, 1, 1))
    assert r["kind"] == "loxodromic"
    got = sorted(float(f.mp()) for f in r["fixed"])
    assert got == pytest.approx(sorted([(1 + math.sqrt(5)) / 2, (1 - math.sqrt(5)) / 2]), abs=1e-14)
    assert all(isinstance(f, Surd) for f in r["fixed"])
    assert classify_and_fix(Mobius(0, -1, 1, 0))["kind"] == "elliptic"


def test_budget_and_errors():
    with pytest.raises(ResourceError):
        list(enumerate_orbit(build_group("sl2z"), max_word=30, budget=100))
    with pytest.raises(GroupError):
        build_group("tree", q=1)
    with pytest.raises(GroupError):
        build_group("nonsense")


@given(st.integers(2, 5), st.integers(0, 12))
def test_tree_count_dp_equals_formula(q, t):
    assert tree_count_dp(q, t) == tree_count_formula(q, t)


@given(st.integers(0, 6))
@settings(max_examples=7, deadline=None)
def test_tree_enumeration_equals_formula(t):
    assert sum(1 for _ in enumerate_orbit(build_group("tree", q=2), max_word=t)) == tree_count_formula(2, t)


@given(st.integers(1, 9))
@settings(max_examples=9, deadline=None)
def test_block_tables_exact(N):
    for name, f in F_TABLES.items():
        assert block_count(build_group("block", f=name, nmax=10), N) == f(N)
