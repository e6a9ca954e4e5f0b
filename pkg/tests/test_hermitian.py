from fractions import Fraction

import numpy as np
import pytest

from conftest import TRIALS, spd
from twistorcert.hermitian import (ComplexStructureField, DegenerateMetricError, HermitianPair,
                                   MetricField, NotHermitianError, StructureError, balanced_report,
                                   codifferential_omega, exact_inverse, hodge_star_at_point,
                                   hodge_star_numeric, pfaffian, positive_definite, project_pq,
                                   torsion_trace_bismut, torsion_trace_chern, volume_density)
from twistorcert.quaternionic import make_model
from twistorcert.ringforms import ExteriorForm, Frame, GaussianRational, PolyRing
from twistorcert.twistor import TwistorSpace

I_UNIT = GaussianRational(0, 1)


@pytest.fixture(scope="module")
def flat1():
    return make_model("flat", 1)


@pytest.fixture(scope="module")
def conformal1():
    return make_model("conformal", 1)


@pytest.fixture(scope="module")
def twistor1(flat1):
    return TwistorSpace(flat1)


def _numeric_form(gen, frame, degree, terms=3):
    coeffs = {}
    for _ in range(terms):
        coeffs[gen.mask(frame.dim, degree)] = gen.gauss()
    return ExteriorForm(frame, coeffs)


def _upper_gram(gen, n):
    """``B^T B`` for a rational upper-triangular ``B``; ``det`` is a rational square."""
    B = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        B[i][i] = Fraction(gen.rng.randint(1, 4), gen.rng.randint(1, 3))
        for j in range(i + 1, n):
            B[i][j] = gen.rng.rational(-1, 1, 3)
    return [[GaussianRational(sum(B[k][i] * B[k][j] for k in range(n))) for j in range(n)] for i in range(n)]


@pytest.mark.parametrize("model_name", ["flat1", "twistor1"])
def test_projector_completeness(gen, model_name, request):
    obj = request.getfixturevalue(model_name)
    J = obj.structure if isinstance(obj, TwistorSpace) else obj.triple.I
    frame = J.frame
    trials = TRIALS if model_name == "flat1" else 40
    for _ in range(trials):
        deg = gen.rng.randint(1, 3)
        f = gen.form(frame, deg, terms=2, maxdeg=1)
        parts = J.bigrade(f)
        total = ExteriorForm(frame, {})
        for (p, q), piece in parts.items():
            assert p + q == deg
            # I acts on (p, q)-forms by i^(q - p)
            assert J.act(piece) == piece * I_UNIT ** ((q - p) % 4)
            total = total + piece
        assert total == f


def test_projectors_are_idempotent(gen, flat1):
    J = flat1.triple.I
    for _ in range(50):
        f = gen.form(J.frame, 2, maxdeg=1)
        p11 = project_pq(f, J, 1, 1)
        assert project_pq(p11, J, 1, 1) == p11
        assert not project_pq(p11, J, 2, 0)


def test_project_pq_rejects_degree_mismatch(gen, flat1):
    f = gen.form(flat1.frame, 2)
    with pytest.raises(ValueError):
        project_pq(f, flat1.triple.I, 2, 1)


@pytest.mark.parametrize("dim", [4, 5])
def test_double_star_sign_law(gen, dim):
    frame = Frame(PolyRing([f"u{i}" for i in range(dim)]))
    for _ in range(TRIALS):
        gram = _upper_gram(gen, dim)
        dens = volume_density(gram, None, None)
        assert isinstance(dens, GaussianRational)
        k = gen.rng.randint(0, dim)
        a = _numeric_form(gen, frame, k)
        twice = hodge_star_numeric(hodge_star_numeric(a, gram, dens), gram, dens)
        assert twice == a * (-1) ** (k * (dim - k))


def test_star_pairing_is_symmetric(gen):
    frame = Frame(PolyRing([f"u{i}" for i in range(4)]))
    for _ in range(50):
        gram = _upper_gram(gen, 4)
        dens = volume_density(gram, None, None)
        a, b = _numeric_form(gen, frame, 2), _numeric_form(gen, frame, 2)
        assert a.wedge(hodge_star_numeric(b, gram, dens)) == b.wedge(hodge_star_numeric(a, gram, dens))


def test_pfaffian_squares_to_determinant(gen):
    for _ in range(50):
        n = 2 * gen.rng.randint(1, 3)
        m = gen.rational_matrix(n)
        a = [[GaussianRational(m[i][j] - m[j][i]) for j in range(n)] for i in range(n)]
        _, det = exact_inverse(a)
        pf = pfaffian(a)
        assert (pf * pf).re == det


def test_exact_inverse(gen):
    for _ in range(50):
        m = gen.rational_matrix(4)
        inv, det = exact_inverse([[GaussianRational(v) for v in row] for row in m])
        if det == 0:
            continue
        for i in range(4):
            for j in range(4):
                assert sum(m[i][k] * inv[k][j] for k in range(4)) == int(i == j)


def test_positive_definite(np_rng):
    assert positive_definite([[GaussianRational(2), GaussianRational(1)], [GaussianRational(1), GaussianRational(1)]])
    assert not positive_definite([[GaussianRational(1), GaussianRational(2)], [GaussianRational(2), GaussianRational(1)]])
    assert positive_definite(spd(np_rng, 4).tolist())


def test_structure_validation():
    frame = Frame(PolyRing(["a", "b"]))
    with pytest.raises(StructureError):
        ComplexStructureField(frame, [[1, 0], [0, 1]])
    J = ComplexStructureField(frame, [[0, -1], [1, 0]])
    g = MetricField(frame, [[1, 0], [0, 2]])
    with pytest.raises(NotHermitianError):
        HermitianPair(g, J)
    with pytest.raises(StructureError):
        MetricField(frame, [[1, 1], [0, 1]])


def test_holomorphic_form_convention():
    frame = Frame(PolyRing(["a", "b"]))
    J = ComplexStructureField(frame, [[0, -1], [1, 0]])
    dz = frame.covector(0) + frame.covector(1) * I_UNIT
    assert J.act(dz) == dz * (-I_UNIT)
    assert J.project(dz, 1, 0) == dz


@pytest.mark.parametrize("k", [1, 2])
def test_twistor_structure_is_integrable(k):
    ts = TwistorSpace(make_model("flat", k))
    assert ts.structure.is_integrable()


def test_nijenhuis_detects_non_integrable():
    ring = PolyRing(["a", "b", "c", "d"])
    frame = Frame(ring)
    a, c = ring.var("a"), ring.var("c")
    # J = P J0 P^-1 with P = 1 + a E_20 + c E_31 - unipotent so the inverse is polynomial
    J0 = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    zero = ring.zero()
    P = [[ring.const(int(i == j)) for j in range(4)] for i in range(4)]
    Pinv = [[ring.const(int(i == j)) for j in range(4)] for i in range(4)]
    P[2][0], Pinv[2][0] = a, -a
    P[3][1], Pinv[3][1] = c * c, -(c * c)
    PJ = [[sum((P[i][k] * J0[k][j] for k in range(4)), zero) for j in range(4)] for i in range(4)]
    J = [[sum((PJ[i][k] * Pinv[k][j] for k in range(4)), zero) for j in range(4)] for i in range(4)]
    field = ComplexStructureField(frame, J)
    assert not field.is_integrable()


def test_dc_matches_bigraded_definition(gen, twistor1):
    J = twistor1.structure
    for _ in range(10):
        f = gen.form(J.frame, 1, terms=2, maxdeg=1)
        assert J.dc(f) == J.dc_bigraded(f)
        _, _, leak = J.partial_dbar(f)
        assert not leak


def test_ddc_is_two_i_ddbar(gen, flat1):
    J = flat1.triple.I
    for _ in range(50):
        f = gen.form(J.frame, 2, maxdeg=2)
        assert J.dc(f).d() == J.partial(J.dbar(f)) * (2 * I_UNIT)


def test_flat_balanced_conformal_not(flat1, conformal1, gen):
    pts = [tuple(gen.rational_point(4, -1, 1)) for _ in range(10)]
    rep = balanced_report(flat1.metric, flat1.triple.I, pts)
    assert rep.balanced and rep.exact_closedness
    rep = balanced_report(conformal1.metric, conformal1.triple.I, pts)
    assert rep.consistent and not rep.balanced
    assert not any(v.vanishes for v in rep.verdicts.values())
    assert rep.identity_residuals["tau_bismut_plus_codiff"] < 1e-12
    assert rep.identity_residuals["tau_chern_plus_i_dbar_star"] < 1e-12


def test_codifferential_against_finite_differences(conformal1, gen):
    g, J = conformal1.metric, conformal1.triple.I
    for _ in range(10):
        p = gen.rational_point(4, -1, 1)
        sym = codifferential_omega(g, J, p)
        fd = codifferential_omega(g, J, [float(v) for v in p], method="finite-difference")
        assert np.max(np.abs(np.asarray(sym, dtype=complex) - np.asarray(fd, dtype=complex))) < 1e-8
        tb = torsion_trace_bismut(g, J, p)
        assert np.max(np.abs(np.asarray(tb) + np.asarray(sym, dtype=complex))) < 1e-12


def test_chern_trace_nonzero_exactly_when_bismut_is(conformal1, flat1):
    p = [Fraction(1, 3), Fraction(-1, 2), Fraction(0), Fraction(1, 5)]
    assert np.max(np.abs(torsion_trace_chern(conformal1.metric, conformal1.triple.I, p))) > 1e-3
    assert np.max(np.abs(torsion_trace_chern(flat1.metric, flat1.triple.I, p))) == 0


def test_codifferential_rejects_tiny_step(conformal1):
    with pytest.raises(ValueError):
        codifferential_omega(conformal1.metric, conformal1.triple.I, [0.1, 0, 0, 0],
                             method="finite-difference", step=1e-12)


def test_degenerate_metric_raises():
    frame = Frame(PolyRing(["a", "b"]))
    g = MetricField(frame, [[1, 0], [0, 0]])
    with pytest.raises(DegenerateMetricError):
        hodge_star_at_point(frame.covector(0), g, [0, 0])


def test_volume_density_pfaffian_is_sqrt_det(conformal1):
    p = [Fraction(1, 2), Fraction(1, 3), Fraction(0), Fraction(-1, 4)]
    gram = conformal1.metric.evaluate(p)
    dens = volume_density(gram, conformal1.triple.I, p)
    det = np.linalg.det(np.real(np.array(gram, dtype=complex)))
    assert abs(complex(dens) - np.sqrt(det)) < 1e-12
