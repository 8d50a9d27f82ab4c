import math

import pytest

from hypdio.geometry import INF, End, HPoint, RegularTree, UpperHalfPlane
from hypdio.groups import Mobius, build_group
from hypdio.shadows import (ShadowParams, beta_horospherical, convergence_classify, horoball_contains,
                            shadow_contains, shadow_diameter, shadow_lemma_audit)

H = UpperHalfPlane()
T = RegularTree(2)


def test_shadow_contains_tree():
    eta = End((0, 1, 2), (0, 1))
    assert shadow_contains(T, ShadowParams((), (0, 1, 2), 0.5), eta)
    assert not shadow_contains(T, ShadowParams((), (0, 1, 2), 0.5), End((1, 0), (1, 2)))


def test_shadow_contains_uhp():
    # <i|inf>_{2i} = 0 since 2i lies on the geodesic from i to inf
    assert shadow_contains(H, ShadowParams(1j, 2j, 1.0), INF)


def test_shadow_diameter_tree_exact():
    for n in range(1, 5):
        x = tuple([0, 1] * 3)[:n]
        rep = shadow_diameter(T, ShadowParams((), x, 0.5))
        assert float(rep.upper) == pytest.approx(math.exp(-n), rel=1e-12)
        assert float(rep.lower) == pytest.approx(math.exp(-n), rel=1e-12)


def test_shadow_diameter_uhp():
    rep = shadow_diameter(H, ShadowParams(1j, math.exp(2) * 1j, 1.0))
    assert rep.lower <= rep.upper
    assert math.exp(-2) / 10 <= rep.upper <= 10 * math.exp(-2)
    assert math.exp(-2) / 10 <= rep.lower


def test_lemma_audits():
    tree = build_group("tree", q=2)
    r = shadow_lemma_audit(tree.space, tree, "intersecting", max_word=4, max_pairs=1000, seed=0)
    assert r.constant == 0
    sl = build_group("sl2z")
    d = shadow_lemma_audit(sl.space, sl, "diameter", max_word=8)
    assert d.passed if hasattr(d, "passed") else d.as_json()["pass"]
    assert d.constant <= 20
    b = shadow_lemma_audit(sl.space, sl, "big_shadows", eps=0.1, max_word=4)
    assert b.constant <= 6


def test_classify_axis_orbit():
    M = Mobius(2, 1, 1, 1)
    seq = [HPoint.of(1j)]
    for _ in range(12):
        seq.append(M(seq[-1]))
    rep = convergence_classify(H, seq, (1 + math.sqrt(5)) / 2)
    assert rep.converges and rep.radial


def test_classify_plain_and_horospherical():
    plain = convergence_classify(H, [HPoint(2.0 ** n, 1.0) for n in range(1, 30)], INF)
    assert plain.converges and not plain.radial and not plain.horospherical
    horo = convergence_classify(H, [HPoint(4.0 ** n, 2.0 ** n) for n in range(1, 20)], INF)
    assert horo.horospherical and not horo.radial


def test_beta_horospherical_golden():
    sl = build_group("sl2z")
    assert beta_horospherical(sl, (1 + math.sqrt(5)) / 2, 10)["beta"] >= 0.9


def test_horoball():
    # beta_inf(10 i, i) = -log 10 < -1
    assert horoball_contains(H, INF, -1, HPoint.of(10j))
    assert not horoball_contains(H, INF, -1, HPoint.of(2j))
