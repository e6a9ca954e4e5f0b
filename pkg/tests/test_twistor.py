import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from twistorcert.quaternionic import make_model
from twistorcert.ringforms import FormEvaluator
from twistorcert.twistor import (OutOfChartError, TwistorSpace, antipode, antipode_symbolic_check,
                                 chart_ring, chart_transition_check, ddc_power, ddc_twistor,
                                 derivative_table, fubini_study, fubini_study_chain, nabla_vertical,
                                 proportionality, psi_identity, sphere_constraint_derivative_check,
                                 sphere_functions, verify_theorem1, volume_form_Z)
from twistorcert.ringforms import Frame


@pytest.fixture(scope="module")
def flat1():
    return TwistorSpace(make_model("flat", 1))


@pytest.fixture(scope="module")
def flat2():
    return TwistorSpace(make_model("flat", 2))


@pytest.fixture(scope="module")
def conf1():
    return TwistorSpace(make_model("conformal", 1))


@pytest.fixture(scope="module")
def chart_frame():
    return Frame(chart_ring())


def _sphere_numeric(z):
    d = 1 + abs(z) ** 2
    return np.array([2 * z.real / d, -2 * z.imag / d, (abs(z) ** 2 - 1) / d])


def test_sphere_functions_land_on_sphere(chart_frame):
    sf = sphere_functions(chart_frame.ring)
    assert not sf.constraint_residual()
    vals = [f.evaluate([1, 0]) for f in sf]
    assert vals == [1, 0, 0]
    assert [f.evaluate([0, 0]) for f in sf] == [0, 0, -1]


def test_derivative_table_exact(chart_frame):
    table = derivative_table(chart_frame)
    assert len(table) == 9
    assert all(not r for r in table.values())


def test_derivative_table_against_finite_differences(np_rng):
    # d/dz = (d/dx - i d/dy)/2 applied to the explicit sphere map
    h = 1e-6
    for _ in range(50):
        z = complex(np_rng.uniform(-2, 2), np_rng.uniform(-2, 2))
        ddx = (_sphere_numeric(z + h) - _sphere_numeric(z - h)) / (2 * h)
        ddy = (_sphere_numeric(z + 1j * h) - _sphere_numeric(z - 1j * h)) / (2 * h)
        dz = 0.5 * (ddx - 1j * ddy)
        zb = z.conjugate()
        d2 = (1 + abs(z) ** 2) ** 2
        expected = np.array([(1 - zb ** 2) / d2, 1j * (1 + zb ** 2) / d2, 2 * zb / d2])
        assert np.max(np.abs(dz - expected)) < 1e-8


def test_sphere_constraint_derivatives(chart_frame):
    assert not sphere_constraint_derivative_check(chart_frame)


def test_fubini_study_chain_and_area(chart_frame):
    assert all(not r for r in fubini_study_chain(chart_frame).values())
    fs = fubini_study(chart_frame)
    ev = FormEvaluator(fs)
    area, _ = integrate.quad(lambda r: 2 * math.pi * r * ev(np.array([[r, 0.0]]))[0, 0].real, 0, np.inf)
    assert abs(area - 2 * math.pi) < 1e-9


def test_antipode(chart_frame):
    assert all(not r for r in antipode_symbolic_check(chart_frame.ring).values())
    z = complex(0.3, -1.2)
    w = antipode(z)
    assert np.allclose(_sphere_numeric(complex(*w)), -_sphere_numeric(z))
    with pytest.raises(OutOfChartError):
        antipode(0j)


def test_chart_transition():
    m = make_model("flat", 1)
    dev = chart_transition_check(m, [0.5 + 0.2j, -1.5j, 3 - 1j])
    assert max(dev.values()) < 1e-12
    with pytest.raises(OutOfChartError):
        chart_transition_check(m, [0j])


@pytest.mark.parametrize("name", ["flat1", "flat2"])
def test_nabla_vertical(name, request):
    ts = request.getfixturevalue(name)
    res = nabla_vertical(ts)
    assert not res["pairing_residual"]
    assert not res["type_residual"]
    assert not res["fs_identity_residual"]


def test_twistor_metric_is_hermitian(flat1, conf1):
    assert flat1.metric.is_hermitian(flat1.structure)
    assert conf1.metric.is_hermitian(conf1.structure)


@pytest.mark.parametrize("name", ["flat1", "flat2", "conf1"])
def test_fiber_ddc_power(name, request):
    ts = request.getfixturevalue(name)
    r = ddc_power(ts)
    assert not r["residual"]
    assert r["measured"] == -4


def test_twistor_ddc_has_opposite_sign(flat1):
    power = flat1.omega_M.power(flat1.n - 1)
    assert proportionality(ddc_twistor(flat1, power), flat1.omega_FS.wedge(power)) == 4


def test_twistor_ddc_is_exact_on_conformal_base(conf1):
    value = ddc_twistor(conf1, conf1.omega_M)
    assert not value.d()


def test_psi_identity(flat2, gen):
    pts = [gen.rational_point(flat2.ring.nvars) for _ in range(5)]
    res = psi_identity(flat2, pts)
    assert res["triple_ok"]
    assert not res["symbolic_residual"]
    assert not res["at_z1_residual"]
    assert not res["psi_at_z1_residual"]
    assert all(not r for _, r in res["point_residuals"])
    assert res["measured"] == Fraction(2, 3)
    assert res["measured_at_z1"] == Fraction(2, 3)


def test_psi_identity_other_constant_fails(flat2):
    res = psi_identity(flat2, coefficient=2)
    assert res["at_z1_residual"]
    assert res["symbolic_residual"]


def test_psi_identity_needs_n4(flat1):
    with pytest.raises(ValueError):
        psi_identity(flat1)


@pytest.mark.parametrize("name", ["flat1", "flat2"])
def test_theorem1_flat(name, request):
    rec = verify_theorem1(request.getfixturevalue(name))
    assert rec.holds
    assert all(rec.term_ok(t) for t in rec.terms)


def test_theorem1_conformal_negative_control(conf1):
    rec = verify_theorem1(conf1)
    assert not rec.holds
    assert not rec.term_ok("d_M omega_M")
    assert not rec.hyperkahler


@pytest.mark.parametrize("name", ["flat1", "conf1"])
def test_volume_form(name, request):
    res = volume_form_Z(request.getfixturevalue(name))
    assert not res["residual"]
    assert not res["omega_M_overflow"]
    assert not res["fs_square"]
    assert not res["Omega_M_vs_volume"]


def test_proportionality(flat1):
    a = flat1.omega_M
    assert proportionality(a * 3, a) == 3
    assert proportionality(a + flat1.omega_FS, a) is None
    assert proportionality(a * 0, a) == 0
