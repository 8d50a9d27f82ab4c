import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hypdio.dio import (DioError, MeasureModel, PTable, RateFunction, ba_epsilon, cf_oracle, cubic_lacunary,
                        dirichlet_constructive, dirichlet_witnesses, ford_check, hausdorff_content, khinchin_series,
                        liouville_constant, omega_estimate, p_xi_estimate, q_xi, velani_hill)
from hypdio.geometry import INF, GeometryError
from hypdio.groups import Mobius, build_group
from hypdio.surd import Surd

GOLDEN = Surd.make(1, 1, 5, 2)
SQRT2 = Surd.make(0, 1, 2, 1)
SL = build_group("sl2z")


def brute_min_q2(x, Q):
    # exact hits p/q = x do not count as approximations
    best = None
    for q in range(1, Q + 1):
        for pp in range(math.floor(x * q) - 2, math.ceil(x * q) + 3):
            v = q * q * abs(x - F(pp, q))
            if v:
                best = v if best is None else min(best, v)
    return best


def ford_oracle(p, q):
    # g(inf) = p/q means first column (p, q); second column (b, d) with p d - b q = 1, free up to T^n
    a, c = p, q
    b0 = d0 = None
    for d in range(-abs(q) - 1, abs(q) + 2):
        if (p * d - 1) % q == 0:
            b0, d0 = (p * d - 1) // q, d
            break
    best = min((a * a + (b0 + n * a) ** 2 + c * c + (d0 + n * c) ** 2) for n in range(-50, 51))
    ch = best / 2
    return ch + math.sqrt(ch * ch - 1)


def test_cf_examples():
    assert cf_oracle(F(3, 2)).quotients == [1, 2]
    assert cf_oracle(SQRT2, n=5).quotients == [1, 2, 2, 2, 2]
    assert set(cf_oracle(GOLDEN, n=30).quotients) == {1}
    with pytest.raises(DioError):
        cf_oracle("1/x")
    with pytest.raises(DioError):
        cf_oracle(F(1, 2), n=0)


@given(st.fractions(-20, 20, max_denominator=10 ** 6))
def test_cf_convergents_reconstruct(x):
    r = cf_oracle(x, n=200)
    assert r.convergents[-1] == x
    for c in r.convergents[:-1]:
        assert abs(x - c) < F(1, c.denominator ** 2)


@given(st.fractions(0, 1, max_denominator=10 ** 4), st.integers(1, 40))
@settings(max_examples=100, deadline=None)
def test_cf_min_matches_brute_force(x, Q):
    assert cf_oracle(x, n=60, Q=Q).min_q2 == brute_min_q2(x, Q)


def test_golden_and_liouville():
    r = cf_oracle(GOLDEN, n=60, Q=10 ** 5)
    assert abs(float(r.tail_min) - 0.4472) <= 0.0005
    assert abs(float(r.tail_min) - 1 / math.sqrt(5)) <= 1e-5
    L = cf_oracle(liouville_constant(7), n=60, Q=10 ** 6)
    assert isinstance(L.min_q2, F) and L.min_q2 < F(1, 10 ** 10)


def test_ford_examples():
    r0 = ford_check(F(0, 1))
    assert r0.min_exp_dist == 1 and r0.ratio == 1
    r = ford_check(F(1, 2))
    assert float(r.min_exp_dist) == pytest.approx(3 + 2 * math.sqrt(2), abs=1e-12)
    assert r.ratio == pytest.approx(4 / (3 + 2 * math.sqrt(2)), abs=1e-12)
    assert 1 / 6 <= ford_check(F(1, 1)).ratio <= 6


@pytest.mark.parametrize("q", range(1, 9))
def test_ford_matches_oracle(q):
    for p in range(-q, q + 1):
        if math.gcd(p, q) == 1:
            assert float(ford_check(F(p, q)).min_exp_dist) == pytest.approx(ford_oracle(p, q), rel=1e-12)


def test_dirichlet_witnesses_golden():
    pts = {w.point for w in dirichlet_witnesses(SL, INF, GOLDEN, C=1.0, cap=100)}
    convs = [c for c in cf_oracle(GOLDEN, n=15).convergents if c.denominator <= 100]
    assert set(convs) <= pts
    assert len({c.denominator for c in convs}) == 10


def test_dirichlet_constructive():
    M = Mobius(2, 1, 1, 1)
    seq, P = [], M
    for _ in range(8):
        seq.append(P)
        P = P @ M
    with mpmath.workdps(40):
        fixed = dirichlet_constructive(seq, Mobius(1, 1, 0, 1), GOLDEN.mp(), GOLDEN)
    assert all(r["branch"] == "g" for r in fixed["rows"])
    moved = dirichlet_constructive(seq, Mobius(1, 1, 0, 1), F(0), GOLDEN)
    assert math.isfinite(moved["C"]) and moved["C"] < 2
    with pytest.raises((DioError, GeometryError)):
        dirichlet_constructive([Mobius(1, n, 0, 1) for n in range(1, 9)], Mobius(1, 1, 0, 1), F(0), GOLDEN)
    with pytest.raises(DioError):
        dirichlet_constructive(seq, Mobius(1, 1, 0, 1), INF, GOLDEN)


def test_ba_epsilon_trivial_hit():
    r = ba_epsilon(SL, INF, F(1, 2), cap=6)
    assert r["trivial"] and r["epsilon"] == 0


def test_omega():
    assert omega_estimate(SL, INF, F(1, 3)).omega == math.inf
    assert omega_estimate(SL, INF, GOLDEN).nontrivial <= 1.05
    om = omega_estimate(SL, INF, cubic_lacunary(5), caps=[10 ** 27, 10 ** 81, 10 ** 243])
    assert abs(float(om.nontrivial) - 1.5) <= 0.15


def test_contents():
    t = hausdorff_content({"kind": "tree", "q": 2, "depth": 0, "b": math.e}, math.log(2))
    assert t.lower == pytest.approx(1.0, abs=1e-12) and t.upper == pytest.approx(1.0, abs=1e-12)
    z = hausdorff_content({"kind": "points", "points": [0.1, 0.5, 0.9]}, 0)
    assert z.upper == 1 and z.lower == 0 and z.flag
    with pytest.raises(DioError):
        hausdorff_content({"kind": "points", "points": [0.1]}, -1)


def test_p_xi_tree():
    tree = build_group("tree", q=2)
    assert abs(p_xi_estimate(tree, None, s=0.35)["slope"] - 0.35) <= 0.05
    assert p_xi_estimate(tree, None, s=0.0)["slope"] == pytest.approx(0, abs=1e-12)


def test_q_xi_radial():
    assert q_xi(lambda s: s, 1, 1) == F(1, 2)


@given(st.fractions(F(1, 10), 3), st.fractions(F(1, 10), 4))
@settings(max_examples=100, deadline=None)
def test_q_xi_radial_closed_form(delta, c):
    # P(s) = s: s = (delta - s)/c at s = delta/(1 + c)
    assert abs(q_xi(lambda s: s, c, delta) - delta / (1 + c)) <= F(1, 10 ** 12)


def test_velani_hill():
    assert velani_hill(1.5, 0.5, 0.25) == pytest.approx(1.75 / 1.5, abs=1e-15)


@given(st.floats(0.2, 2.0), st.floats(0.05, 1.0))
def test_velani_hill_continuous_at_threshold(delta, dxi):
    c = delta / (2 * dxi) - 1
    if c <= 0:
        return
    a = delta / (c + 1)
    b = (delta + 2 * dxi * c) / (2 * c + 1)
    assert a == pytest.approx(b, rel=1e-12)
    assert velani_hill(delta, dxi, c) == pytest.approx(a, rel=1e-12)


def test_ptable_rejects_decreasing():
    with pytest.raises(DioError):
        PTable(points=[(0, 0.5), (0.5, 0.4)])
    with pytest.raises(DioError):
        PTable(points=[(0, 0), (0.5, 0.3)])


@pytest.mark.parametrize("c", [0.1, 0.5, 1.0])
def test_khinchin_integral_reduction(c):
    r = khinchin_series(None, None, RateFunction("power", c=c), 1, MeasureModel("power_law", delta=1),
                        mode="integral_reduction", T=10.0)
    assert r["value"] == pytest.approx((1 - math.exp(-10 * c)) / c, rel=1e-10)


def test_rate_function_check():
    with pytest.raises(DioError):
        RateFunction("power", c=-0.5).check()
