import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hypdio.groups import build_group
from hypdio.partition import (Cylinder, CylinderStructure, ExplicitStructure, StructureError, build_group_structure,
                              extract_regular_substructure, is_s_thick, pi_code, qs_modulus, quasisymmetry_audit,
                              validate_structure, verify_ahlfors)

BIN = CylinderStructure(2)


def test_binary_validates():
    rep = validate_structure(BIN, depth=6)
    assert rep.passed and rep.measured_lambda == F(1, 2)


def test_overlapping_sibling_is_rule_I():
    nodes = {(): (Cylinder(()), F(1)), (0,): (Cylinder((0,)), F(1, 2)), (1,): (Cylinder((0,)), F(1, 2))}
    rep = validate_structure(ExplicitStructure(nodes, F(1, 8), F(1, 2)))
    assert not rep.passed and rep.violation["rule"] == "I"


def test_oversized_child_is_rule_lambda():
    nodes = {(): (Cylinder(()), F(1)), (0,): (Cylinder((0,)), F(3, 4)), (1,): (Cylinder((1,)), F(1, 2))}
    rep = validate_structure(ExplicitStructure(nodes, F(1, 8), F(1, 2)))
    assert not rep.passed and rep.violation["rule"] == "lambda"


def test_not_prefix_closed():
    with pytest.raises(StructureError):
        ExplicitStructure({(): (Cylinder(()), F(1)), (0, 1): (Cylinder((0, 1)), F(1, 4))}, F(1, 8), F(1, 2))


def test_thickness_examples():
    assert is_s_thick(BIN, 1)
    assert not is_s_thick(BIN, 1.1)
    assert is_s_thick(BIN, 0.5)


@given(st.floats(0.01, 1.0))
def test_binary_thick_below_one(s):
    assert is_s_thick(BIN, s, depth=4)


@given(st.floats(1.001, 3.0))
def test_binary_not_thick_above_one(s):
    assert not is_s_thick(BIN, s, depth=4)


def test_binary_extraction_exact():
    ex, rep, fails = extract_regular_substructure(BIN, 1, depth=8)
    assert not fails
    assert rep.c == F(1, 2)
    for w in ex.expand(6):
        assert ex.mass(w) == F(1, 2 ** (len(w) + 1))
    assert set(ex.N.values()) == {2}


@given(st.lists(st.integers(0, 1), max_size=12))
@settings(max_examples=50, deadline=None)
def test_binary_mass_formula(w):
    ex, _, _ = extract_regular_substructure(BIN, 1, depth=1)
    for i in range(len(w)):
        ex.retained_children(tuple(w[:i]))
    assert ex.mass(tuple(w)) == F(1, 2 ** (len(w) + 1))


def test_ternary_extraction():
    # D/3 per child with lambda kept at 1/2: c = 1/2, mu(root) = 1/2, and 1/3 + 1/3 > 1/2 gives N = 2
    ps = CylinderStructure(3, kappa=F(1, 8), lam=F(1, 2))
    ex, rep, fails = extract_regular_substructure(ps, 1, depth=5)
    assert not fails
    assert ex.N[()] == 2
    assert ex.mass((0,)) == ex.mass((1,)) == F(1, 4)
    # level one: weights 1/9 each against mass 1/4 need three children
    assert ex.N[(0,)] == 3
    for w in ex.expand(4):
        D = ps.diameter(w)
        assert rep.c * D <= ex.mass(w) < D


def test_thin_chain_rejected():
    nodes = {(): (Cylinder(()), F(1))}
    w = ()
    for _ in range(6):
        nodes[w + (0,)] = (Cylinder(w + (0,)), F(1, 2 ** (len(w) + 1)))
        w = w + (0,)
    ps = ExplicitStructure(nodes, F(1, 8), F(1, 2))
    assert not is_s_thick(ps, 0.5, depth=5)
    with pytest.raises(StructureError):
        extract_regular_substructure(ps, 0.5, depth=3, check_thick_depth=5)


def test_ahlfors_binary():
    ex, rep, _ = extract_regular_substructure(BIN, 1, depth=2)
    ah = verify_ahlfors(ex, samples=300, seed=1)
    assert ah.passed and ah.rejected == 0
    assert ah.upper_constant == pytest.approx(64)
    assert ah.lower_constant <= ah.min_ratio and ah.max_ratio <= ah.upper_constant
    big = verify_ahlfors(ex, samples=4, radii=[0.5])
    assert big.rejected == 4


def test_pi_code_binary():
    ex, _, _ = extract_regular_substructure(BIN, 1, depth=1)
    p, D = pi_code(ex, (0,) * 12, 10)
    assert p == (0,) * 10 and D == F(1, 2 ** 10)
    assert pi_code(BIN, (), 0) == ((), 1)
    with pytest.raises(StructureError):
        pi_code(BIN, (0, 1), 5)


def test_pi_code_leaves_subtree():
    ex, _, _ = extract_regular_substructure(CylinderStructure(3, kappa=F(1, 8), lam=F(1, 2)), 1, depth=1)
    with pytest.raises(StructureError):
        pi_code(ex, (2, 0), 1)


def test_quasisymmetry():
    assert qs_modulus(F(1, 4), F(1, 2))(1.0) == 4
    ex, _, _ = extract_regular_substructure(BIN, 1, depth=1)
    rep = quasisymmetry_audit(ex, triples=300, seed=2, depth=10)
    assert rep["passed"] and rep["eta_at_1"] == 8


def test_tree_group_structure():
    g = build_group("tree", q=2)
    ps, info = build_group_structure(g, s=0.5, sigma=0.5)
    assert len(ps.children(())) == 3
    for w in ps.children(()):
        assert len(ps.children(w)) == 2
        assert ps.diameter(w) == pytest.approx(math.exp(-1))
    assert is_s_thick(ps, 0.5, depth=4)
    assert validate_structure(ps, depth=4).passed
    with pytest.raises(StructureError):
        build_group_structure(g, s=math.log(2), sigma=0.5)
