"""Twistor chart machinery on ``Z = M x CP^1``.

The sphere of complex structures is covered by the stereographic chart
``z = x + iy`` (chart ``N``) with

    x1 = (z + zbar)/(1 + |z|^2),  x2 = i(z - zbar)/(1 + |z|^2),
    x3 = (|z|^2 - 1)/(1 + |z|^2),

so ``z = 1`` is ``I`` and ``z = 0`` is ``-K``.  Chart ``S`` uses ``w = 1/z``.
Fiber operators act on chart variables only with base forms held constant:
``partial_nabla = dz ^ d/dz`` and ``dbar_nabla = dzbar ^ d/dzbar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .hermitian import ComplexStructureField, MetricField
from .hermitian.structures import matmul
from .quaternionic import HyperhermitianModel, QuaternionicTriple, lift_scalar
from .ringforms import ChartPolynomial, ExteriorForm, Frame, GaussianRational, PolyRing, TwistorScalar

__all__ = [
    "OutOfChartError",
    "SphereFunctions",
    "TwistorSpace",
    "antipode",
    "chart_ring",
    "derivative_table",
    "ddc_nabla",
    "ddc_power",
    "ddc_twistor",
    "proportionality",
    "fiber_dc",
    "fiber_d",
    "fiber_dbar",
    "fiber_partial",
    "fubini_study",
    "fubini_study_chain",
    "nabla_vertical",
    "psi_identity",
    "sphere_functions",
    "twistor_structure",
    "verify_theorem1",
    "volume_form_Z",
    "chart_transition_check",
    "antipode_symbolic_check",
    "sphere_constraint_derivative_check",
    "psi_forms",
]

_I = GaussianRational(0, 1)
_HALF = GaussianRational(1) / 2


class OutOfChartError(ValueError):
    """A point has no image in the requested chart."""


def chart_ring(prefix: Sequence[str] = (), degree_cap: int = 16) -> PolyRing:
    return PolyRing(list(prefix) + ["x", "y"], chart=("x", "y"), degree_cap=degree_cap)


@dataclass(frozen=True)
class SphereFunctions:
    x1: TwistorScalar
    x2: TwistorScalar
    x3: TwistorScalar
    chart: str = "N"

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))

    def constraint_residual(self) -> TwistorScalar:
        return self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3 - 1


def _zz(ring: PolyRing):
    x = ring.scalar(ring.var("x"))
    y = ring.scalar(ring.var("y"))
    return x + y * _I, x - y * _I, x, y


def _over_denom(ring: PolyRing, num: TwistorScalar, k: int) -> TwistorScalar:
    return TwistorScalar(num.num, num.k + k)


def sphere_functions(ring: PolyRing, chart: str = "N") -> SphereFunctions:
    """``(x1, x2, x3)`` as ring elements of denominator power 1."""
    z, zb, x, y = _zz(ring)
    r2 = x * x + y * y
    if chart == "N":
        nums = (z + zb, (z - zb) * _I, r2 - 1)
    elif chart == "S":
        # w = 1/z in chart variables (x, y)
        nums = (z + zb, (zb - z) * _I, 1 - r2)
    else:
        raise ValueError("chart must be 'N' or 'S'")
    return SphereFunctions(*(_over_denom(ring, n, 1) for n in nums), chart=chart)


def antipode(z):
    """``z -> -1/conj(z)`` in chart ``N`` (exact for rational input)."""
    if isinstance(z, tuple):
        x, y = z
    else:
        x, y = z.real, z.imag
    r2 = x * x + y * y
    if r2 == 0:
        raise OutOfChartError("the antipode of z = 0 is the chart's missing point")
    return (-x / r2, -y / r2)


def antipode_symbolic_check(ring: PolyRing) -> dict:
    """Cleared-denominator identities ``x_i(antipode) + x_i = 0`` in the ring.

    For ``x_i = N_i/D`` with ``deg N_i <= 2`` the composition equals
    ``N_i(-x/r^2, -y/r^2) r^2 / (r^2 + 1)``, so the identity reads
    ``r^2 N_i(-x/r^2, -y/r^2) + N_i = 0`` after clearing ``D``.
    """
    sf = sphere_functions(ring)
    x = ring.var("x")
    y = ring.var("y")
    r2 = x * x + y * y
    out = {}
    for name, f in zip(("x1", "x2", "x3"), sf):
        num = f.num
        total = ring.zero()
        deg = 2
        for key, (a, b) in num.terms.items():
            ex, ey = ring.exponent(key, ring.ix), ring.exponent(key, ring.iy)
            sign = (-1) ** (ex + ey)
            mono = ring.monomial({"x": ex, "y": ey}, GaussianRational(a, b) * sign)
            total = total + mono * (r2 ** (deg - ex - ey))
        # N_i(-x/r^2, -y/r^2) r^(2*deg) / r^(2*(deg-1)) = r^2 N_i(...)
        out[name] = total + num * (r2 ** (deg - 1))
    return {k: v for k, v in out.items()}


def fubini_study(frame: Frame) -> ExteriorForm:
    """``i dz ^ dzbar / (1+|z|^2)^2 = 2 dx ^ dy / (1+|z|^2)^2``."""
    ring = frame.ring
    coeff = TwistorScalar(ring.const(2), 2)
    return frame.monomial([ring.ix, ring.iy], coeff)


def _dz(frame: Frame):
    ring = frame.ring
    dx = frame.covector(ring.ix)
    dy = frame.covector(ring.iy)
    return dx + dy * _I, dx - dy * _I


def fiber_partial(form: ExteriorForm) -> ExteriorForm:
    """``dz ^ d/dz`` with ``d/dz = (d/dx - i d/dy)/2``."""
    ring = form.frame.ring
    dz, _ = _dz(form.frame)
    dzf = (form.partial(ring.ix) - form.partial(ring.iy) * _I) * _HALF
    return dz.wedge(dzf)


def fiber_dbar(form: ExteriorForm) -> ExteriorForm:
    """``dzbar ^ d/dzbar``."""
    ring = form.frame.ring
    _, dzb = _dz(form.frame)
    dzf = (form.partial(ring.ix) + form.partial(ring.iy) * _I) * _HALF
    return dzb.wedge(dzf)


def fiber_d(form: ExteriorForm) -> ExteriorForm:
    ring = form.frame.ring
    return form.d([ring.ix, ring.iy])


def fiber_dc(form: ExteriorForm) -> ExteriorForm:
    """``i (dbar_nabla - partial_nabla) = dy ^ d/dx - dx ^ d/dy``."""
    ring = form.frame.ring
    dx = form.frame.covector(ring.ix)
    dy = form.frame.covector(ring.iy)
    return dy.wedge(form.partial(ring.ix)) - dx.wedge(form.partial(ring.iy))


def ddc_nabla(form: ExteriorForm) -> ExteriorForm:
    """``d_CP1 d^c_CP1`` built from the fiber connection."""
    return fiber_d(fiber_dc(form))


def fubini_study_chain(frame: Frame) -> dict:
    """Residuals of ``omega_FS = i partial dbar log(1+|z|^2) = i partial(z dzbar/(1+|z|^2))``.

    ``dbar log(1+|z|^2) = z dzbar/(1+|z|^2)`` is entered directly (it is the
    only step leaving the ring).
    """
    ring = frame.ring
    z, zb, _, _ = _zz(ring)
    _, dzb = _dz(frame)
    inner = dzb * _over_denom(ring, z, 1)
    step = fiber_partial(inner) * _I
    fs = fubini_study(frame)
    dz, dzbar = _dz(frame)
    displayed = dz.wedge(dzbar) * (_I * TwistorScalar(ring.const(1), 2))
    return {
        "i_partial_inner_minus_fs": step - fs,
        "displayed_minus_fs": displayed - fs,
        "d_fs": fs.d(),
    }


def derivative_table(frame: Frame) -> dict:
    """Residuals (computed minus closed form) for the nine fiber derivatives of ``x_i``."""
    ring = frame.ring
    sf = sphere_functions(ring)
    z, zb, x, y = _zz(ring)
    dz, dzb = _dz(frame)
    dzdzb = dz.wedge(dzb)
    one = ring.scalar(1)
    r2 = z * zb
    closed = {
        "partial x1": dz * _over_denom(ring, one - zb * zb, 2),
        "dbar x1": dzb * _over_denom(ring, one - z * z, 2),
        "partial x2": dz * _over_denom(ring, (one + zb * zb) * _I, 2),
        "dbar x2": dzb * _over_denom(ring, (one + z * z) * (-_I), 2),
        "partial x3": dz * _over_denom(ring, zb * 2, 2),
        "dbar x3": dzb * _over_denom(ring, z * 2, 2),
        "partial dbar x1": dzdzb * _over_denom(ring, (z + zb) * (-2), 3),
        "partial dbar x2": dzdzb * _over_denom(ring, (z - zb) * (-2 * _I), 3),
        "partial dbar x3": dzdzb * _over_denom(ring, (r2 - 1) * (-2), 3),
    }
    out = {}
    for i, f in enumerate(sf, start=1):
        fn = frame.function(f)
        out[f"partial x{i}"] = fiber_partial(fn) - closed[f"partial x{i}"]
        out[f"dbar x{i}"] = fiber_dbar(fn) - closed[f"dbar x{i}"]
        out[f"partial dbar x{i}"] = fiber_partial(fiber_dbar(fn)) - closed[f"partial dbar x{i}"]
    return out


def sphere_constraint_derivative_check(frame: Frame) -> ExteriorForm:
    """``sum x_i partial dbar x_i + sum partial x_i ^ dbar x_i`` (zero by ``sum x_i^2 = 1``)."""
    sf = sphere_functions(frame.ring)
    total = ExteriorForm(frame, {})
    for f in sf:
        fn = frame.function(f)
        total = total + fiber_partial(fiber_dbar(fn)) * f + fiber_partial(fn).wedge(fiber_dbar(fn))
    return total


class TwistorSpace:
    """Chart model of the twistor space of a catalog base manifold.

    The frame is ``(dq_1 .. dq_4k, dx, dy)``.  The structure acts as
    ``A(z) = x1 I + x2 J + x3 K`` on base directions and by ``d/dx -> d/dy``
    on the fiber, so ``dz`` is a (1,0)-form.
    """

    def __init__(self, model: HyperhermitianModel, chart: str = "N", degree_cap: int = 16):
        self.model = model
        self.k = model.k
        self.n = model.n
        self.chart = chart
        base = model.ring
        self.ring = chart_ring(base.names, degree_cap)
        self.frame = Frame(self.ring)
        N = 4 * self.k
        self.dim = N + 2
        self.sphere = sphere_functions(self.ring, chart)

        def lift_matrix(mat):
            return [[lift_scalar(v, self.ring) for v in row] for row in mat]

        self.base_structures = [lift_matrix(S.matrix) for S in model.triple]
        x1, x2, x3 = self.sphere
        I, J, K = self.base_structures
        self.A = [[I[r][c] * x1 + J[r][c] * x2 + K[r][c] * x3 for c in range(N)] for r in range(N)]
        zero = self.ring.scalar(0)
        one = self.ring.scalar(1)
        full = [[zero] * self.dim for _ in range(self.dim)]
        for r in range(N):
            for c in range(N):
                full[r][c] = self.A[r][c]
        full[N + 1][N] = one
        full[N][N + 1] = -one
        self.structure = ComplexStructureField(self.frame, full)
        gm = lift_matrix(model.metric.gram)
        gfs = TwistorScalar(self.ring.const(2), 2)
        gram = [[zero] * self.dim for _ in range(self.dim)]
        for r in range(N):
            for c in range(N):
                gram[r][c] = gm[r][c]
        gram[N][N] = gram[N + 1][N + 1] = gfs
        self.metric = MetricField(self.frame, gram)
        self.base_forms = tuple(self._lift_form(f) for f in model.hermitian_forms())
        wI, wJ, wK = self.base_forms
        self.omega_M = wI * x1 + wJ * x2 + wK * x3
        self.omega_FS = fubini_study(self.frame)
        self.omega = self.omega_M + self.omega_FS
        self.base_vars = list(range(N))
        self.fiber_vars = [self.ring.ix, self.ring.iy]

    def _lift_form(self, form: ExteriorForm) -> ExteriorForm:
        return ExteriorForm(self.frame, {m: lift_scalar(c, self.ring) for m, c in form.coeffs.items()})

    def d_M(self, form: ExteriorForm) -> ExteriorForm:
        return form.d(self.base_vars)

    def d_CP(self, form: ExteriorForm) -> ExteriorForm:
        return form.d(self.fiber_vars)

    def omega_of(self, a1, a2, a3) -> ExteriorForm:
        wI, wJ, wK = self.base_forms
        return wI * a1 + wJ * a2 + wK * a3

    def vertical_block_at(self, point) -> list:
        return [[v.evaluate(point) for v in row] for row in self.A]

    def point(self, q: Sequence, z) -> tuple:
        zx, zy = (z.real, z.imag) if isinstance(z, complex) else z
        return tuple(q) + (zx, zy)


def twistor_structure(model: HyperhermitianModel, chart: str = "N") -> TwistorSpace:
    return TwistorSpace(model, chart)


def nabla_vertical(ts: TwistorSpace) -> dict:
    """Fiber-connection derivatives of ``omega_M`` and the checks built on them."""
    wM = ts.omega_M
    p = fiber_partial(wM)
    pb = fiber_dbar(wM)
    ppb = fiber_partial(pb)
    frame = ts.frame
    ring = ts.ring
    # pairing law at z = 1 with V = (1/2) d/dx: nabla_{dzbar-direction} omega_M
    d_zbar = (wM.partial(ring.ix) + wM.partial(ring.iy) * _I) * _HALF
    q0 = [0] * (4 * ts.k)
    at_one = d_zbar.evaluate(q0 + [1, 0])
    wI, wJ, wK = ts.base_forms
    # V = (1/2) d/dx maps to K/2 and AV = (1/2) d/dy maps to -J/2 at z = 1
    expected = (wK * _HALF + wJ * (-_HALF * _I)).evaluate(q0 + [1, 0])
    # (2,0)-type of d/dzbar omega_M with respect to A: contraction with (0,1) vectors vanishes
    type_res = ExteriorForm(frame, {})
    N = 4 * ts.k
    for a in range(N):
        col = [ts.A[r][a] for r in range(N)]
        vec = [ring.scalar(0)] * ts.dim
        for r in range(N):
            vec[r] = col[r] * _I
        vec[a] = vec[a] + 1
        type_res = type_res + d_zbar.interior(vec)
    fs_res = ppb * _I + ts.omega_FS.wedge(wM) * 2
    return {
        "partial": p,
        "dbar": pb,
        "partial_dbar": ppb,
        "pairing_residual": at_one - expected,
        "type_residual": type_res,
        "fs_identity_residual": fs_res,
    }


@dataclass
class Theorem1Record:
    n: int
    residual: ExteriorForm
    terms: dict
    hyperkahler: bool

    @property
    def holds(self) -> bool:
        return not self.residual

    def term_ok(self, name: str) -> bool:
        return not any(self.terms[name])


def verify_theorem1(ts: TwistorSpace) -> Theorem1Record:
    """``omega^(n-1) ^ d omega`` and the four vanishing terms of its expansion.

    Terms: ``d_M omega_M``; the pullback terms ``d_M omega_FS`` and
    ``d_CP omega_FS``; the vertical-overflow products
    ``omega_M^(n-1) ^ (partial|dbar)_nabla omega_M``; the horizontal-overflow
    products ``omega_M^(n-2) ^ omega_FS ^ (partial|dbar)_nabla omega_M``.
    """
    n = ts.n
    wM, wFS = ts.omega_M, ts.omega_FS
    p, pb = fiber_partial(wM), fiber_dbar(wM)
    wMp = wM.power(n - 1)
    hp = wM.power(n - 2).wedge(wFS) * (n - 1)
    terms = {
        "d_M omega_M": [ts.d_M(wM)],
        "pullback": [ts.d_M(wFS), ts.d_CP(wFS)],
        "vertical overflow": [wMp.wedge(p), wMp.wedge(pb)],
        "horizontal overflow": [hp.wedge(p), hp.wedge(pb)],
    }
    residual = ts.omega.power(n - 1).wedge(ts.omega.d())
    return Theorem1Record(n, residual, terms, ts.model.hyperkahler)


def proportionality(value: ExteriorForm, base: ExteriorForm):
    """Exact ``c`` with ``value = c * base``, or ``None`` if the forms are not proportional.

    A candidate is read off at a rational point and then certified by exact
    subtraction, so the answer never depends on the sample.
    """
    if not base:
        return Fraction(0) if not value else None
    m0, b0 = next(iter(base.coeffs.items()))
    v0 = value.coeffs.get(m0)
    if v0 is None:
        return Fraction(0) if not value else None
    nvar = len(base.frame.ring.names)
    for trial in range(1, 6):
        pt = [Fraction(trial + 2 * i, 7 + i) for i in range(nvar)]
        bv = b0.evaluate(pt)
        if bv:
            c = v0.evaluate(pt) / bv
            break
    else:
        return None
    if value - base * c:
        return None
    if not c.im:
        return Fraction(int(c.re.numerator), int(c.re.denominator))
    return complex(c)


def ddc_twistor(ts: TwistorSpace, form: ExteriorForm) -> ExteriorForm:
    """``d d^c`` on ``Z`` with ``d^c`` built from the twistor complex structure."""
    return ts.structure.dc(form).d()


def ddc_power(ts: TwistorSpace, coefficient=-4) -> dict:
    """``d_CP d^c_CP (omega_M^(n-1))`` compared with ``c * omega_FS ^ omega_M^(n-1)``.

    The fiber operators hold the base forms constant.  On hyperkahler bases
    the exact value is ``-4 omega_FS ^ omega_M^(n-1)`` in every dimension, so
    that is the default target.  ``measured`` is the exact proportionality
    constant (``None`` when the value is not a multiple of the target shape).
    """
    n = ts.n
    if n % 2:
        raise ValueError("n must be even")
    power = ts.omega_M.power(n - 1)
    value = ddc_nabla(power)
    base = ts.omega_FS.wedge(power)
    target = base * coefficient
    return {"value": value, "target": target, "residual": value - target,
            "measured": proportionality(value, base)}


def psi_forms(ts: TwistorSpace):
    """``Psi = omega_B - i omega_C`` with ``B = (D/2) dA/dx``, ``C = (D/2) dA/dy``.

    ``D = 1 + |z|^2``; ``(A, B, C)`` is a quaternionic triple at every chart point.
    """
    ring = ts.ring
    D = ring.scalar(ring.denom()) * _HALF
    xs = list(ts.sphere)
    B = [f.diff(ring.ix) * D for f in xs]
    C = [f.diff(ring.iy) * D for f in xs]
    psi = ts.omega_of(*B) - ts.omega_of(*C) * _I
    return psi, B, C


def psi_identity(ts: TwistorSpace, points: Sequence = (), coefficient=None) -> dict:
    """``Psi ^ conj(Psi) ^ omega_M^(n-3) = c omega_M^(n-1)`` for ``n >= 4``.

    The default ``c`` is ``2/(n-1)``, the value obtained by expanding in the
    coframe ``dzeta, dxi`` (each ``Psi``-block contributes ``4 tau_zeta tau_xi``
    and every ``(n-1)``-subset of ``tau``'s contains ``k-1`` such blocks).

    Checked symbolically over the chart, at ``z = 1`` in the form
    ``(omega_J + i omega_K) ^ (omega_J - i omega_K) ^ omega_I^(n-3)``, and at
    the given rational chart points.  Also certifies that ``(A, B, C)`` is a
    quaternionic triple.
    """
    n = ts.n
    if n < 4:
        raise ValueError("the identity needs n >= 4")
    ring = ts.ring
    psi, B, C = psi_forms(ts)
    wM = ts.omega_M
    coef = Fraction(2, n - 1) if coefficient is None else Fraction(coefficient)
    lhs = psi.wedge(psi.conjugate()).wedge(wM.power(n - 3))
    rhs = wM.power(n - 1) * coef
    sym = lhs - rhs
    xs = list(ts.sphere)

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]

    def cross(u, v):
        return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]

    triple = {
        "|B|^2 - 1": dot(B, B) - 1,
        "|C|^2 - 1": dot(C, C) - 1,
        "A.B": dot(xs, B),
        "A.C": dot(xs, C),
        "AB - C": [a - c for a, c in zip(cross(xs, B), C)],
    }
    triple_ok = all((not v) if not isinstance(v, list) else not any(v) for v in triple.values())
    wI, wJ, wK = ts.base_forms
    at1 = (wJ + wK * _I).wedge(wJ - wK * _I).wedge(wI.power(n - 3)) - wI.power(n - 1) * coef
    q0 = [0] * (4 * ts.k)
    psi1 = psi.evaluate(q0 + [1, 0])
    expected_psi1 = (wK + wJ * _I).evaluate(q0 + [1, 0])
    pts = []
    for p in points:
        pts.append((tuple(p), (lhs.evaluate(p) - rhs.evaluate(p))))
    return {
        "symbolic_residual": sym,
        "at_z1_residual": at1,
        "psi_at_z1_residual": psi1 - expected_psi1,
        "point_residuals": pts,
        "triple_ok": triple_ok,
        "measured": proportionality(lhs, wM.power(n - 1)),
        "measured_at_z1": proportionality((wJ + wK * _I).wedge(wJ - wK * _I).wedge(wI.power(n - 3)),
                                          wI.power(n - 1)),
    }


def volume_form_Z(ts: TwistorSpace) -> dict:
    """``Omega_Z = omega^(n+1)/(n+1)! = Omega_M ^ omega_FS`` and two overflow zeros."""
    n = ts.n
    omega_Z = ts.omega.power(n + 1) / math.factorial(n + 1)
    Omega_M = ts.omega_M.power(n) / math.factorial(n)
    return {
        "Omega_Z": omega_Z,
        "residual": omega_Z - Omega_M.wedge(ts.omega_FS),
        "omega_M_overflow": ts.omega_M.power(n + 1),
        "fs_square": ts.omega_FS.wedge(ts.omega_FS),
        "Omega_M_vs_volume": Omega_M - _riemannian_volume(ts),
    }


def _riemannian_volume(ts: TwistorSpace) -> ExteriorForm:
    """``sqrt(det g_M) dq_1 ^ ... ^ dq_4k`` for diagonal conformal metrics."""
    model = ts.model
    N = 4 * ts.k
    if model.conformal_factor is None:
        density = ts.ring.scalar(1)
    else:
        lam = lift_scalar(model.ring.scalar(model.conformal_factor), ts.ring)
        density = lam ** N
    return ts.frame.monomial(list(range(N)), density)


def chart_transition_check(ts_model: HyperhermitianModel, points: Sequence) -> dict:
    """Compare charts N and S at points ``z`` (nonzero complex) via ``w = 1/z``.

    Returns the maximal deviation of the sphere functions, of the pulled-back
    Fubini-Study coefficient, and of the fiber structure under the Jacobian.
    """
    ringN = chart_ring()
    sfN = sphere_functions(ringN, "N")
    sfS = sphere_functions(ringN, "S")
    frame = Frame(ringN)
    fsN = fubini_study(frame)
    fs_coeff = fsN.coeffs[(1 << ringN.ix) | (1 << ringN.iy)]
    dev_sphere = dev_fs = dev_struct = 0.0
    for z in points:
        z = complex(z)
        if z == 0:
            raise OutOfChartError("z = 0 is not in chart S")
        w = 1 / z
        pn = (z.real, z.imag)
        ps = (w.real, w.imag)
        for fN, fS in zip(sfN, sfS):
            dev_sphere = max(dev_sphere, abs(_fval(fN, pn) - _fval(fS, ps)))
        # dw/dz = -1/z^2; pulled-back area factor |dw/dz|^2
        jac = abs(-1 / z ** 2) ** 2
        dev_fs = max(dev_fs, abs(_fval(fs_coeff, ps) * jac - _fval(fs_coeff, pn)))
        # Jacobian of (x, y) -> (u, v) commutes with the rotation d/dx -> d/dy
        a = -1 / z ** 2
        Jac = np.array([[a.real, -a.imag], [a.imag, a.real]])
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        dev_struct = max(dev_struct, float(np.max(np.abs(Jac @ rot - rot @ Jac))))
    return {"sphere": dev_sphere, "fubini_study": dev_fs, "structure": dev_struct}


def _fval(s: TwistorScalar, pt) -> float:
    from .hermitian.pointwise import float_value
    return float_value(s, np.array(pt, dtype=float)).real
