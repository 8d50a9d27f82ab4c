import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypdio.geometry import (INF, End, GeometryError, HPoint, PoincareBall, RegularTree, UpperHalfPlane,
                             identity_audit)
from hypdio.groups import Mobius

H = UpperHalfPlane()
T = RegularTree(2)


def uhp_dist_oracle(p, q):
    # cosh d = 1 + |p - q|^2 / (2 Im p Im q)
    p, q = complex(p), complex(q)
    return math.acosh(1 + abs(p - q) ** 2 / (2 * p.imag * q.imag))


def test_uhp_distances():
    assert H.dist(1j, 2j) == pytest.approx(math.log(2), abs=1e-15)
    assert H.dist(1j, 1 + 1j) == pytest.approx(math.acosh(1.5), abs=1e-15)
    assert H.dist(1j, 1 + 1j) == pytest.approx(0.962424, abs=1e-6)


def test_tree_distance_and_busemann():
    assert T.dist((), (0, 1, 0)) == 3
    xi = End((), (0, 1))
    # sign convention: beta_xi(x, y) = lim d(w, x) - d(w, y), so moving toward xi is +1
    assert T.busemann(xi, (), (0,)) == 1
    assert T.busemann(xi, (0, 1), (0, 1)) == 0


def test_gromov_products_closed_forms():
    B = PoincareBall(2)
    assert float(B.gromov_product((1.0, 0.0), (-1.0, 0.0), B.o)) == pytest.approx(0.0, abs=1e-15)
    assert float(B.gromov_product((1.0, 0.0), (0.0, 1.0), B.o)) == pytest.approx(0.5 * math.log(2), abs=1e-12)
    assert float(H.gromov_product(2j, 2j, 1j)) == pytest.approx(math.log(2), abs=1e-15)


def test_busemann_uhp():
    assert float(H.busemann(INF, 1j, 2j)) == pytest.approx(math.log(2), abs=1e-15)
    assert float(H.busemann(INF, 3 + 1j, 3 + 1j)) == 0


def test_visual_metrics():
    B = PoincareBall(2)
    assert B.visual_dist(B.o, (1.0, 0.0), (-1.0, 0.0)).value == pytest.approx(1.0, abs=1e-15)
    v = T.visual_dist((), End((0, 1, 2), (0, 1)), End((0, 1, 0), (1, 2))).value
    assert float(v) == pytest.approx(math.exp(-2), rel=1e-12)
    e = End((0, 1), (2, 0))
    assert T.visual_dist((), e, e).value == 0


def test_visual_tree_branch_depth():
    # ends sharing exactly n letters branch at depth n
    for n in range(1, 7):
        p = tuple([0, 1] * n)[:n]
        x, y = [c for c in range(3) if c != p[-1]]
        a, b = End(p + (x,), (y, x)), End(p + (y,), (x, y))
        assert float(T.visual_dist((), a, b).value) == pytest.approx(math.exp(-n), rel=1e-12)


def test_hamenstadt_uhp():
    o = H.o
    assert H.hamenstadt_dist(INF, o, 0, 1).value == pytest.approx(1.0, abs=1e-14)
    assert H.hamenstadt_dist(INF, o, 3, 3).value == 0
    for x in (1.0, 2.0, 5.0, 20.0):
        v = H.hamenstadt_dist(INF, o, o, x).value
        # comparable to sqrt(1 + x^2)
        assert 0.25 <= v / math.sqrt(1 + x * x) <= 4


def test_derivatives():
    dil = Mobius(2, 0, 0, 1)
    assert float(H.derivative(dil, INF)) == pytest.approx(0.5)
    assert float(H.derivative(dil, 0)) == pytest.approx(2.0)
    assert float(H.derivative(Mobius(1, 1, 0, 1), INF)) == pytest.approx(1.0)


def test_identity_audit_tree_exact():
    rep = identity_audit(T, 300, seed=5)
    assert all(v == 0 for v in rep["defects"].values())


def test_identity_audit_rejects_nonpositive():
    with pytest.raises(GeometryError):
        identity_audit(H, 0)


def test_hpoint_rejects_lower_half_plane():
    with pytest.raises(GeometryError):
        HPoint(0, -1)


finite = st.floats(-50, 50, allow_nan=False)
heights = st.floats(0.01, 50, allow_nan=False)


@given(finite, heights, finite, heights)
@settings(max_examples=200, deadline=None)
def test_uhp_dist_matches_oracle(x1, y1, x2, y2):
    p, q = complex(x1, y1), complex(x2, y2)
    assert float(H.dist(p, q)) == pytest.approx(uhp_dist_oracle(p, q), rel=1e-9, abs=1e-9)


@given(finite, heights, finite, heights, st.integers(-5, 5), st.booleans())
@settings(max_examples=200, deadline=None)
def test_mobius_is_isometry(x1, y1, x2, y2, k, inv):
    g = Mobius(0, -1, 1, k) if inv else Mobius(1, k, 0, 1)
    p, q = HPoint.of(complex(x1, y1)), HPoint.of(complex(x2, y2))
    a, b = float(H.dist(p, q)), float(H.dist(g(p), g(q)))
    assert b == pytest.approx(a, rel=1e-7, abs=1e-7)


@given(st.lists(st.integers(0, 2), min_size=0, max_size=8), st.lists(st.integers(0, 2), min_size=0, max_size=8))
def test_tree_distance_is_reduced_length(u, v):
    def reduce(w):
        out = []
        for a in w:
            if out and out[-1] == a:
                out.pop()
            else:
                out.append(a)
        return tuple(out)
    u, v = reduce(u), reduce(v)
    k = 0
    while k < min(len(u), len(v)) and u[k] == v[k]:
        k += 1
    assert T.dist(u, v) == len(u) + len(v) - 2 * k


@given(st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_ball_visual_is_half_chord(seed):
    B = PoincareBall(3)
    rng = random.Random(seed)
    a, b = B.random_boundary(rng), B.random_boundary(rng)
    assert float(B.visual_dist(B.o, a, b).value) == pytest.approx(0.5 * np.linalg.norm(np.subtract(a, b)), abs=1e-12)
