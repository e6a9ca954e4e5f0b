from fractions import Fraction

import numpy as np
import pytest

from conftest import TRIALS
from twistorcert.ringforms import (DegreeOverflowError, ExteriorForm, FormEvaluator, Frame,
                                   FrameMismatchError, GaussianRational, PolyRing, TwistorScalar,
                                   indices_of, mask_of, wedge)


def _sign(p, q):
    return -1 if (p * q) % 2 else 1


@pytest.mark.parametrize("frame_name", ["plain_frame", "chart_frame"])
def test_d_squared_vanishes(gen, frame_name, request):
    frame = request.getfixturevalue(frame_name)
    for _ in range(TRIALS):
        p = gen.rng.randint(0, frame.dim - 2)
        a = gen.form(frame, p)
        assert not a.d().d()


@pytest.mark.parametrize("frame_name", ["plain_frame", "chart_frame"])
def test_leibniz(gen, frame_name, request):
    frame = request.getfixturevalue(frame_name)
    for _ in range(TRIALS):
        p = gen.rng.randint(0, 2)
        q = gen.rng.randint(0, frame.dim - p - 1)
        a, b = gen.form(frame, p), gen.form(frame, q)
        lhs = a.wedge(b).d()
        rhs = a.d().wedge(b) + a.wedge(b.d()) * (-1) ** p
        assert lhs == rhs


@pytest.mark.parametrize("frame_name", ["plain_frame", "chart_frame"])
def test_graded_commutativity(gen, frame_name, request):
    frame = request.getfixturevalue(frame_name)
    for _ in range(TRIALS):
        p = gen.rng.randint(0, 3)
        q = gen.rng.randint(0, frame.dim - p)
        a, b = gen.form(frame, p), gen.form(frame, q)
        assert a.wedge(b) == b.wedge(a) * _sign(p, q)


def test_wedge_associative(gen, plain_frame):
    for _ in range(50):
        a, b, c = (gen.form(plain_frame, 1) for _ in range(3))
        assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))
        assert wedge(a, b, c) == a.wedge(b).wedge(c)


def test_odd_form_squares_to_zero(gen, plain_frame):
    for _ in range(50):
        a = gen.form(plain_frame, 1, terms=3)
        assert not a.wedge(a)


def test_determinant_pairing(plain_frame):
    dx, dy = plain_frame.covector(0), plain_frame.covector(1)
    w = dx.wedge(dy)
    one = plain_frame.ring.scalar(1)
    zero = plain_frame.ring.scalar(0)
    e1 = [one, zero, zero, zero, zero]
    e2 = [zero, one, zero, zero, zero]
    assert w(e1, e2) == one
    assert w(e2, e1) == -one


def test_interior_is_antiderivation(gen, plain_frame):
    ring = plain_frame.ring
    for _ in range(50):
        p = gen.rng.randint(1, 2)
        a, b = gen.form(plain_frame, p), gen.form(plain_frame, 2)
        v = [ring.scalar(gen.poly(ring, 1, 1)) for _ in range(plain_frame.dim)]
        lhs = a.wedge(b).interior(v)
        rhs = a.interior(v).wedge(b) + a.wedge(b.interior(v)) * (-1) ** p
        assert lhs == rhs


def test_from_components_resigns(plain_frame):
    one = plain_frame.ring.scalar(1)
    f = ExteriorForm.from_components(plain_frame, {(2, 0): one})
    assert f.component((0, 2)) == -one
    assert f.component((2, 0)) == one
    assert mask_of((0, 2)) == 0b101
    assert indices_of(0b101) == (0, 2)


def test_frame_mismatch(plain_frame, chart_frame):
    with pytest.raises(FrameMismatchError):
        plain_frame.covector(0) + chart_frame.covector(0)


def test_gaussian_against_complex_fractions(gen):
    for _ in range(TRIALS):
        a, b = gen.gauss(), gen.gauss()
        ar, ai = Fraction(int(a.re.numerator), int(a.re.denominator)), Fraction(int(a.im.numerator), int(a.im.denominator))
        br, bi = Fraction(int(b.re.numerator), int(b.re.denominator)), Fraction(int(b.im.numerator), int(b.im.denominator))
        prod = a * b
        assert prod.re == ar * br - ai * bi
        assert prod.im == ar * bi + ai * br
        if b:
            assert (a / b) * b == a


def test_twistor_scalar_reduces(chart_frame, gen):
    ring = chart_frame.ring
    D = ring.denom()
    for _ in range(50):
        p = gen.poly(ring)
        k = gen.rng.randint(0, 2)
        s = TwistorScalar(p * D, k + 1)
        assert s == TwistorScalar(p, k)
        assert s.k == k or not p


def test_exact_evaluation_is_a_homomorphism(gen, chart_frame):
    ring = chart_frame.ring
    for _ in range(TRIALS):
        a, b = gen.scalar(ring), gen.scalar(ring)
        pt = gen.rational_point(ring.nvars)
        assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt)
        assert (a + b).evaluate(pt) == a.evaluate(pt) + b.evaluate(pt)


def test_derivative_against_difference_quotient(gen, chart_frame):
    ring = chart_frame.ring
    h = 1e-6
    for _ in range(50):
        s = gen.scalar(ring)
        pt = np.array([float(v) for v in gen.rational_point(ring.nvars)])
        for var in range(ring.nvars):
            e = np.zeros(ring.nvars)
            e[var] = h
            f = FormEvaluator(ExteriorForm(chart_frame, {0: s}))
            fd = (f(pt + e)[0, 0] - f(pt - e)[0, 0]) / (2 * h) if f.masks else 0.0
            got = complex(s.diff(var).evaluate([Fraction(v).limit_denominator(10**9) for v in pt]))
            assert abs(got - fd) < 1e-5 * max(1.0, abs(got))


def test_form_evaluator_matches_exact(gen, chart_frame):
    for _ in range(50):
        f = gen.form(chart_frame, 2, terms=3)
        pt = gen.rational_point(chart_frame.ring.nvars)
        ev = FormEvaluator(f)
        vals = ev(np.array([[float(v) for v in pt]]))[0]
        exact = f.evaluate(pt)
        for m, v in zip(ev.masks, vals):
            assert abs(complex(exact.coeffs.get(m, 0)) - v) < 1e-12 * max(1.0, abs(v))


def test_degree_cap():
    ring = PolyRing(["a"], degree_cap=4)
    a = ring.var("a")
    with pytest.raises(DegreeOverflowError):
        a ** 5


def test_power_counts_factorial(plain_frame):
    ring = plain_frame.ring
    w = plain_frame.covector(0).wedge(plain_frame.covector(1)) + plain_frame.covector(2).wedge(plain_frame.covector(3))
    top = w.power(2)
    assert top.coeffs == {0b1111: ring.scalar(2)}
    assert not w.power(3)


def test_conjugation_and_real_parts(gen, chart_frame):
    for _ in range(50):
        f = gen.form(chart_frame, 1)
        assert f.real_part() + f.imag_part() * GaussianRational(0, 1) == f
        assert f.conjugate().conjugate() == f
