from fractions import Fraction

import pytest

from twistorcert.hermitian import ComplexStructureField, MetricField, StructureError
from twistorcert.quaternionic import (canonical_decompositions, holomorphic_symplectic_form, lift_scalar,
                                      make_model, omega_A, parse_polynomial, quaternionic_frame,
                                      standard_triple, symmetrize_metric)
from twistorcert.ringforms import Frame, PolyRing


def unit_quaternion(u, v):
    """Rational point of the unit sphere by inverse stereographic projection."""
    d = u * u + v * v + 1
    return (2 * u / d, 2 * v / d, (u * u + v * v - 1) / d)


@pytest.mark.parametrize("k", [1, 2])
def test_standard_triple_relations(k):
    m = make_model("flat", k)
    assert m.triple.relation_failures() == []


def test_triple_rejects_bad_relations():
    from twistorcert.quaternionic import QuaternionicTriple
    m = make_model("flat", 1)
    with pytest.raises(StructureError):
        QuaternionicTriple(m.triple.I, m.triple.J, m.triple.I)


def test_standard_triple_dimension_check():
    with pytest.raises(ValueError):
        standard_triple(Frame(PolyRing(["a", "b", "c"])), 1)


def test_sphere_of_structures(gen):
    m = make_model("flat", 1)
    wI, wJ, wK = m.hermitian_forms()
    for _ in range(50):
        A = unit_quaternion(gen.rng.rational(-3, 3, 5), gen.rng.rational(-3, 3, 5))
        S = ComplexStructureField(m.frame, m.triple.combination(*A))
        assert S.squares_to_minus_one()
        assert m.metric.is_hermitian(S)
        assert omega_A(m.metric, m.triple, A) == wI * A[0] + wJ * A[1] + wK * A[2]


def test_omega_A_rejects_non_unit():
    m = make_model("flat", 1)
    with pytest.raises(ValueError):
        omega_A(m.metric, m.triple, (Fraction(1), Fraction(1), Fraction(0)))
    with pytest.raises(ValueError):
        omega_A(m.metric, m.triple, (0.5, 0.5, 0.5))


def test_omega_A_float_matches_exact():
    m = make_model("flat", 1)
    A = unit_quaternion(Fraction(1, 2), Fraction(1, 3))
    exact = omega_A(m.metric, m.triple, A)
    approx = omega_A(m.metric, m.triple, tuple(float(a) for a in A))
    assert (exact - approx).evaluate([0, 0, 0, 0]).max_abs() < 1e-15


def test_symmetrized_metric_is_hyperhermitian(gen):
    m = make_model("flat", 1)
    for _ in range(20):
        B = gen.rational_matrix(4)
        gram = [[sum(B[k][i] * B[k][j] for k in range(4)) + int(i == j) for j in range(4)] for i in range(4)]
        g = symmetrize_metric(MetricField(m.frame, gram), m.triple)
        assert all(g.is_hermitian(S) for S in m.triple)


@pytest.mark.parametrize("name", ["flat", "conformal"])
def test_hyperhermitian_models(name):
    m = make_model(name, 1)
    assert all(m.metric.is_hermitian(S) for S in m.triple)
    closed = all(not f.d() for f in m.hermitian_forms())
    assert closed == (name == "flat") == m.hyperkahler


def test_holomorphic_symplectic_type():
    m = make_model("conformal", 1)
    omega = holomorphic_symplectic_form(m.metric, m.triple)
    assert m.triple.I.project(omega, 2, 0) == omega


@pytest.mark.parametrize("k", [1, 2])
def test_exact_coframe_decompositions(gen, k):
    m = make_model("flat", k)
    for _ in range(5):
        p = gen.rational_point(4 * k)
        cof = quaternionic_frame(m.metric, m.triple, p)
        assert cof.exact
        res = canonical_decompositions(cof, m.metric, m.triple)
        assert all(not r for r in res.values())


def test_numeric_coframe_decompositions():
    m = make_model("conformal", 1, lam={"1": 1, "q1": "1/3"})
    p = [Fraction(1, 2), Fraction(0), Fraction(1, 5), Fraction(0)]
    cof = quaternionic_frame(m.metric, m.triple, p)
    res = canonical_decompositions(cof, m.metric, m.triple)
    assert max(r.max_abs() for r in res.values()) < 1e-12


def test_parse_polynomial():
    ring = PolyRing(["q1", "q2"])
    p = parse_polynomial(ring, {"1": 2, "q1*q2^2": "1/3"})
    assert p == ring.const(2) + ring.monomial({"q1": 1, "q2": 2}, Fraction(1, 3))
    assert parse_polynomial(ring, "3/4") == ring.const(Fraction(3, 4))
    with pytest.raises(ValueError):
        parse_polynomial(ring, {"z3": 1})


def test_conformal_factor_must_be_positive():
    with pytest.raises(ValueError):
        make_model("conformal", 1, lam={"1": "1/10", "q1": 1})
    with pytest.raises(ValueError):
        make_model("conformal", 1, lam={"q1": 1}, box=(0.0, 1.0))
    with pytest.raises(ValueError):
        make_model("sphere", 1)
    with pytest.raises(ValueError):
        make_model("flat", 0)


def test_torus_grid_is_periodic():
    m = make_model("torus", 1)
    pts = m.sample_grid(4)
    assert [p[0] for p in pts] == [0.0, 0.25, 0.5, 0.75]


def test_lift_scalar_prefix():
    small = PolyRing(["q1"])
    big = PolyRing(["q1", "x", "y"], chart=("x", "y"))
    s = small.scalar(small.var("q1"))
    lifted = lift_scalar(s, big)
    assert lifted == big.scalar(big.var("q1"))
    with pytest.raises(ValueError):
        lift_scalar(s, PolyRing(["x", "q1"]))
