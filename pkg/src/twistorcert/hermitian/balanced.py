"""Torsion forms, their traces, the codifferential of the Hermitian form and
the four-way balancedness report."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..ringforms import ExteriorForm, GaussianRational, TwistorScalar
from .pointwise import (DegenerateMetricError, _point_array, evaluate_form, evaluate_matrix,
                        hodge_star_numeric, is_exact_point, pfaffian, positive_definite,
                        volume_density)
from .structures import (BigradedForm, ComplexStructureField, MetricField, NotHermitianError,
                         bigrade_with, induced_action, projector_rows)

__all__ = [
    "BalancedReport",
    "HermitianJet",
    "HermitianPair",
    "balanced_report",
    "bismut_torsion",
    "chern_torsion",
    "codifferential_omega",
    "jet_from_callable",
    "orthonormal_frame",
    "torsion_trace_bismut",
    "torsion_trace_chern",
]

_I = GaussianRational(0, 1)


class HermitianPair:
    """A metric and a complex structure it is Hermitian for, with cached forms."""

    def __init__(self, g: MetricField, J: ComplexStructureField, *, check: bool = True):
        if g.frame is not J.frame:
            raise ValueError("metric and structure live on different frames")
        if check and not g.is_hermitian(J):
            raise NotHermitianError("g(JX, JY) != g(X, Y)")
        self.g = g
        self.J = J
        self.n = g.dim // 2
        self._cache: dict = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def omega(self) -> ExteriorForm:
        return self._get("omega", lambda: self.g.hermitian_form(self.J))

    @property
    def domega(self) -> ExteriorForm:
        return self._get("domega", lambda: self.omega.d())

    @property
    def omega_pow(self) -> ExteriorForm:
        """``omega^(n-1)``."""
        return self._get("omega_pow", lambda: self.omega.power(self.n - 1))

    @property
    def d_omega_pow(self) -> ExteriorForm:
        return self._get("d_omega_pow", lambda: self.omega_pow.d())

    @property
    def star_omega(self) -> ExteriorForm:
        """``*omega = omega^(n-1)/(n-1)!`` as a symbolic form."""
        return self._get("star_omega", lambda: self.omega_pow / math.factorial(self.n - 1))

    def jet(self, point) -> "HermitianJet":
        om = evaluate_form(self.omega, point)
        dom = evaluate_form(self.domega, point)
        jm = evaluate_matrix(self.J.matrix, point)
        return HermitianJet.build(self.g.frame, _as_array(jm), om, dom, point)


def chern_torsion(g: MetricField, J: ComplexStructureField) -> BigradedForm:
    """``T^Ch = -i partial omega`` as a bigraded 3-form (type (2,1))."""
    pair = g if isinstance(g, HermitianPair) else HermitianPair(g, J)
    dpart = pair.J.partial(pair.omega)
    t = dpart * (-_I)
    return pair.J.bigraded(t)


def bismut_torsion(g: MetricField, J: ComplexStructureField) -> ExteriorForm:
    """``T^B = d^c omega`` as a real 3-form."""
    pair = g if isinstance(g, HermitianPair) else HermitianPair(g, J)
    return pair.J.dc(pair.omega)


def _as_array(mat) -> np.ndarray:
    return np.array([[complex(v) for v in row] for row in mat], dtype=complex)


def _form_matrix(form: ExteriorForm, n: int) -> np.ndarray:
    mat = np.zeros((n, n), dtype=complex)
    for m, c in form.coeffs.items():
        a, b = [i for i in range(n) if m >> i & 1]
        mat[a, b] = complex(c)
        mat[b, a] = -complex(c)
    return mat


def _form_from_matrix(frame, mat: np.ndarray) -> ExteriorForm:
    n = mat.shape[0]
    return ExteriorForm(frame, {(1 << a) | (1 << b): complex(mat[a, b])
                                for a in range(n) for b in range(a + 1, n) if mat[a, b] != 0})


def orthonormal_frame(gram: np.ndarray, jm: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Real g-orthonormal vectors ``e_1..e_n`` with ``{e_i, J e_i}`` a full frame.

    Gram-Schmidt over the coordinate vectors in index order; each accepted
    vector also removes its ``J``-image from the remaining candidates.
    """
    g = np.real(gram)
    J = np.real(jm)
    N = g.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(g)))))
    basis: list[np.ndarray] = []
    out: list[np.ndarray] = []
    for a in range(N):
        v = np.zeros(N)
        v[a] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - (v @ g @ b) * b
        nrm2 = v @ g @ v
        if nrm2 <= tol * scale:
            continue
        e = v / math.sqrt(nrm2)
        je = J @ e
        basis.extend([e, je])
        out.append(e)
        if len(out) == N // 2:
            break
    if len(out) != N // 2:
        raise DegenerateMetricError((), "orthonormal frame construction failed")
    return out


class HermitianJet:
    """Numeric first-order data of a Hermitian structure at one point.

    Holds ``omega`` and ``d omega`` at the point plus the structure matrix;
    every quantity of the balancedness report is algebraic in these.
    """

    def __init__(self, frame, jm: np.ndarray, omega: ExteriorForm, domega: ExteriorForm, point):
        self.frame = frame
        self.N = frame.dim
        self.n = self.N // 2
        self.jm = jm
        self.omega = omega.to_complex()
        self.domega = domega.to_complex()
        self.point = tuple(point.values()) if isinstance(point, dict) else tuple(point)
        self.omega_mat = _form_matrix(self.omega, self.N)
        self.gram = np.real(self.omega_mat @ jm)
        if not positive_definite(self.gram.tolist()):
            raise DegenerateMetricError(self.point)
        self.density = complex(pfaffian(self.omega_mat.tolist())).real
        self._rows = [{b: -complex(jm[a, b]) for b in range(self.N) if jm[a, b] != 0}
                      for a in range(self.N)]
        self._proj = projector_rows(self._rows, 0.5 + 0j, 0.5j)

    @classmethod
    def build(cls, frame, jm, omega, domega, point):
        return cls(frame, jm, omega, domega, point)

    # pointwise operators --------------------------------------------------
    def act(self, form: ExteriorForm) -> ExteriorForm:
        return induced_action(self._rows, form)

    def bigrade(self, form: ExteriorForm) -> dict:
        return bigrade_with(self._proj, form)

    def star(self, form: ExteriorForm) -> ExteriorForm:
        return hodge_star_numeric(form, self.gram.tolist(), self.density)

    def _omega_pow_scaled(self, k: int) -> ExteriorForm:
        """``omega^k / k!``."""
        return self.omega.power(k) / math.factorial(k)

    # torsion and its traces -------------------------------------------------
    @property
    def bismut(self) -> ExteriorForm:
        return self.act(self.domega)

    @property
    def partial_omega(self) -> ExteriorForm:
        return self.bigrade(self.domega).get((2, 1), ExteriorForm(self.frame, {}))

    @property
    def chern(self) -> ExteriorForm:
        return self.partial_omega * (-1j)

    def frame_vectors(self) -> list[np.ndarray]:
        return orthonormal_frame(self.gram, self.jm)

    def tau_bismut(self) -> np.ndarray:
        """``tau^B(d_a) = sum_i T^B(d_a, e_i, J e_i)``."""
        T = self.bismut
        J = np.real(self.jm)
        out = np.zeros(self.N, dtype=complex)
        for e in self.frame_vectors():
            contracted = T.interior(list(e)).interior(list(J @ e))
            # iota_Je iota_e T = T(e, Je, .) = T(., e, Je)
            for m, c in contracted.coeffs.items():
                out[m.bit_length() - 1] += c
        return out

    def tau_chern(self) -> np.ndarray:
        """``tau^Ch(d_a) = sum_i T^Ch(X^{1,0}, e_i^{1,0}, e_i^{0,1})``, ``X = d_a``.

        The complex frame is unitary: ``e^{1,0} = (e - iJe)/sqrt(2)`` and
        ``e^{0,1} = (e + iJe)/sqrt(2)``.  With this normalisation
        ``tau^Ch = -i dbar* omega`` holds; the split ``e = e^{1,0} + e^{0,1}``
        would give half of it.
        """
        T = self.chern
        J = np.real(self.jm)
        vals = np.zeros(self.N, dtype=complex)
        for e in self.frame_vectors():
            je = J @ e
            e10 = (e - 1j * je) / math.sqrt(2)
            e01 = (e + 1j * je) / math.sqrt(2)
            contracted = T.interior(list(e10)).interior(list(e01))
            for m, c in contracted.coeffs.items():
                vals[m.bit_length() - 1] += c
        # restrict to X^{1,0} = (d_a - i J d_a)/2
        P10 = (np.eye(self.N) - 1j * J) / 2
        return P10.T @ vals

    # codifferential and powers --------------------------------------------
    def d_omega_pow(self) -> ExteriorForm:
        """``d(omega^(n-1)) = (n-1) omega^(n-2) ^ d omega``."""
        return self.omega.power(self.n - 2).wedge(self.domega) * (self.n - 1)

    def codiff(self) -> np.ndarray:
        """``d* omega = -* d * omega`` using ``*omega = omega^(n-1)/(n-1)!``."""
        beta = self._omega_pow_scaled(self.n - 2).wedge(self.domega)
        return _one_form_array(self.star(beta) * -1, self.N)

    def dbar_star(self) -> np.ndarray:
        """``dbar* omega = -* partial * omega``."""
        beta = self._omega_pow_scaled(self.n - 2).wedge(self.partial_omega)
        return _one_form_array(self.star(beta) * -1, self.N)


def _one_form_array(form: ExteriorForm, N: int) -> np.ndarray:
    out = np.zeros(N, dtype=complex)
    for m, c in form.coeffs.items():
        if bin(m).count("1") != 1:
            raise ValueError("expected a 1-form")
        out[m.bit_length() - 1] = complex(c)
    return out


def jet_from_callable(frame, omega_at: Callable, J_at: Callable, point,
                      step: float = 1e-4) -> HermitianJet:
    """Jet of a numerically given Hermitian form.

    ``omega_at(p)`` returns the antisymmetric matrix of omega at ``p``;
    ``d omega`` comes from Richardson-extrapolated central differences.
    """
    p0 = np.asarray(point, dtype=float)
    N = frame.dim
    grads = []
    for a in range(N):
        def diff(h):
            e = np.zeros(N)
            e[a] = h
            return (np.asarray(omega_at(p0 + e)) - np.asarray(omega_at(p0 - e))) / (2 * h)
        grads.append((4 * diff(step / 2) - diff(step)) / 3)
    om = np.asarray(omega_at(p0))
    dom: dict = {}
    for a in range(N):
        for b in range(N):
            for c in range(b + 1, N):
                if a in (b, c):
                    continue
                idx = sorted((a, b, c))
                sign = _perm_sign((a, b, c), idx)
                m = (1 << a) | (1 << b) | (1 << c)
                dom[m] = dom.get(m, 0) + sign * grads[a][b, c]
    domega = ExteriorForm(frame, {m: complex(v) for m, v in dom.items() if v != 0})
    return HermitianJet(frame, np.asarray(J_at(p0), dtype=complex),
                        _form_from_matrix(frame, om), domega, tuple(p0))


def _perm_sign(seq, target) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        j = seq.index(target[i], i)
        if j != i:
            seq[i], seq[j] = seq[j], seq[i]
            sign = -sign
    return sign


# public per-point operations -------------------------------------------------

def _pair(g, J) -> HermitianPair:
    return g if isinstance(g, HermitianPair) else HermitianPair(g, J)


def torsion_trace_bismut(g, J, point) -> np.ndarray:
    return _pair(g, J).jet(point).tau_bismut()


def torsion_trace_chern(g, J, point) -> np.ndarray:
    return _pair(g, J).jet(point).tau_chern()


def codifferential_omega(g, J, point, method: str = "symbolic", step: float = 1e-4) -> np.ndarray:
    """``d* omega`` at a point as a coordinate 1-form array.

    ``symbolic`` differentiates ``omega^(n-1)/(n-1)!`` exactly and applies the
    star at the point.  ``finite-difference`` is an independent oracle: the
    general Hodge star of omega at displaced points, Richardson-extrapolated
    central differences for ``d``, then the star again.
    """
    pair = _pair(g, J)
    if method == "symbolic":
        beta = evaluate_form(pair.d_omega_pow, point) / math.factorial(pair.n - 1)
        gram = evaluate_matrix(pair.g.gram, point)
        if not positive_definite(gram):
            raise DegenerateMetricError(tuple(point))
        dens = volume_density(gram, pair.J, point)
        return -_one_form_array(hodge_star_numeric(beta, gram, dens), pair.g.dim)
    if method != "finite-difference":
        raise ValueError(f"unknown method {method!r}")
    if step < 1e-8:
        raise ValueError("finite-difference step underflow")
    frame = pair.g.frame
    N = frame.dim
    p0 = _point_array(frame.ring, point)
    sign = 1 if complex(volume_density(evaluate_matrix(pair.g.gram, list(p0)), pair.J, list(p0))).real > 0 else -1

    def star_omega(p):
        gram = evaluate_matrix(pair.g.gram, list(p))
        om = evaluate_form(pair.omega, list(p))
        dens = sign * math.sqrt(np.linalg.det(np.real(_as_array(gram))))
        return hodge_star_numeric(om, gram, dens)

    d_star: dict = {}
    for a in range(N):
        def diff(h):
            e = np.zeros(N)
            e[a] = h
            plus, minus = star_omega(p0 + e), star_omega(p0 - e)
            return (plus - minus) / (2 * h)
        da = diff(step / 2) * (4 / 3) - diff(step) * (1 / 3)
        term = ExteriorForm(frame, {1 << a: 1.0 + 0j}).wedge(da)
        for m, c in term.coeffs.items():
            d_star[m] = d_star.get(m, 0) + c
    gram = evaluate_matrix(pair.g.gram, list(p0))
    dens = sign * math.sqrt(np.linalg.det(np.real(_as_array(gram))))
    return -_one_form_array(hodge_star_numeric(ExteriorForm(frame, d_star), gram, dens), N)


# report -------------------------------------------------------------------------

@dataclass
class ConditionVerdict:
    name: str
    max_magnitude: float
    vanishes: bool


@dataclass
class BalancedReport:
    """Sampled values of the four balancedness conditions."""

    points: list
    tau_chern: list
    tau_bismut: list
    codiff_omega: list
    d_omega_pow: list
    tolerance: float
    verdicts: dict = field(default_factory=dict)
    identity_residuals: dict = field(default_factory=dict)
    exact_closedness: bool | None = None

    @property
    def consistent(self) -> bool:
        flags = {v.vanishes for v in self.verdicts.values()}
        return len(flags) == 1

    @property
    def balanced(self) -> bool:
        return self.consistent and all(v.vanishes for v in self.verdicts.values())


def balanced_report(source, J: ComplexStructureField | None = None, grid: Sequence = (),
                    tol: float = 1e-8) -> BalancedReport:
    """Evaluate the four equivalent balancedness conditions on a grid.

    ``source`` is a :class:`HermitianPair`, a :class:`MetricField` (with ``J``)
    or a callable returning a :class:`HermitianJet` for a grid point.
    """
    if not grid:
        raise ValueError("empty sample grid")
    exact = None
    if callable(source) and not isinstance(source, (MetricField, HermitianPair)):
        jet_at = source
    else:
        pair = _pair(source, J)
        jet_at = pair.jet
        exact = not pair.d_omega_pow
    tch, tb, cod, dpow = [], [], [], []
    res_b, res_ch = 0.0, 0.0
    for p in grid:
        jet = jet_at(p)
        a, b = jet.tau_chern(), jet.tau_bismut()
        c = jet.codiff()
        dp = jet.d_omega_pow().max_abs()
        tch.append(a)
        tb.append(b)
        cod.append(c)
        dpow.append(dp)
        res_b = max(res_b, float(np.max(np.abs(b + c))))
        res_ch = max(res_ch, float(np.max(np.abs(a + 1j * jet.dbar_star()))))
    mags = {
        "tau_chern": max(float(np.max(np.abs(v))) for v in tch),
        "tau_bismut": max(float(np.max(np.abs(v))) for v in tb),
        "codiff_omega": max(float(np.max(np.abs(v))) for v in cod),
        "d_omega_pow": max(dpow),
    }
    verdicts = {k: ConditionVerdict(k, v, v <= tol) for k, v in mags.items()}
    return BalancedReport(list(grid), tch, tb, cod, dpow, tol, verdicts,
                          {"tau_bismut_plus_codiff": res_b, "tau_chern_plus_i_dbar_star": res_ch},
                          exact)
