"""Quaternionic triples, hyperhermitian metrics and the model catalog."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from gmpy2 import is_square, isqrt, mpq

from .hermitian import ComplexStructureField, MetricField, evaluate_matrix, positive_definite
from .hermitian.pointwise import DegenerateMetricError, is_exact_point
from .hermitian.structures import StructureError, matmul, transpose
from .ringforms import ChartPolynomial, ExteriorForm, Frame, GaussianRational, PolyRing, TwistorScalar

__all__ = [
    "QuaternionicTriple",
    "QuaternionicCoframe",
    "HyperhermitianModel",
    "standard_triple",
    "symmetrize_metric",
    "omega_A",
    "quaternionic_frame",
    "canonical_decompositions",
    "holomorphic_symplectic_form",
    "flat_model",
    "torus_model",
    "conformal_model",
    "make_model",
    "parse_polynomial",
    "lift_scalar",
]

# left multiplication by i, j, k on H = R^4 with coordinates (a, b, c, d)
_LEFT = {
    "I": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
    "J": [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
    "K": [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
}


def _block_matrix(ring: PolyRing, block, k: int, size: int, offset: int = 0):
    zero = ring.scalar(0)
    mat = [[zero] * size for _ in range(size)]
    for h in range(k):
        base = offset + 4 * h
        for a in range(4):
            for b in range(4):
                if block[a][b]:
                    mat[base + a][base + b] = ring.scalar(block[a][b])
    return mat


def _matrix_equal(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


class QuaternionicTriple:
    """Three complex structures with ``IJ = -JI = K``, checked exactly."""

    def __init__(self, I: ComplexStructureField, J: ComplexStructureField, K: ComplexStructureField,
                 *, check: bool = True):
        self.I, self.J, self.K = I, J, K
        self.frame = I.frame
        if check:
            bad = self.relation_failures()
            if bad:
                raise StructureError(f"quaternion relations fail: {', '.join(bad)}")

    def relation_failures(self) -> list[str]:
        zero = self.frame.ring.scalar(0)
        I, J, K = self.I.matrix, self.J.matrix, self.K.matrix
        negK = [[-v for v in row] for row in K]
        out = []
        for name, S in (("I^2", self.I), ("J^2", self.J), ("K^2", self.K)):
            if not S.squares_to_minus_one():
                out.append(f"{name} != -1")
        if not _matrix_equal(matmul(I, J, zero), K):
            out.append("IJ != K")
        if not _matrix_equal(matmul(J, I, zero), negK):
            out.append("JI != -K")
        return out

    def __iter__(self):
        return iter((self.I, self.J, self.K))

    def combination(self, a1, a2, a3):
        """Matrix of ``a1 I + a2 J + a3 K`` (coefficients exact or ring elements)."""
        return [[self.I.matrix[r][c] * a1 + self.J.matrix[r][c] * a2 + self.K.matrix[r][c] * a3
                 for c in range(self.frame.dim)] for r in range(self.frame.dim)]


def standard_triple(frame: Frame, k: int) -> QuaternionicTriple:
    """Left multiplication by i, j, k on each factor of ``H^k``."""
    if frame.dim != 4 * k:
        raise ValueError(f"frame has dimension {frame.dim}, expected {4 * k}")
    mats = [ComplexStructureField(frame, _block_matrix(frame.ring, _LEFT[s], k, 4 * k))
            for s in "IJK"]
    return QuaternionicTriple(*mats)


def symmetrize_metric(g0: MetricField, Q: QuaternionicTriple) -> MetricField:
    """``g(X,Y) = g0(X,Y) + g0(IX,IY) + g0(JX,JY) + g0(KX,KY)``."""
    zero = g0.frame.ring.scalar(0)
    total = g0.gram
    for S in Q:
        pulled = matmul(matmul(transpose(S.matrix), g0.gram, zero), S.matrix, zero)
        total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(total, pulled)]
    return MetricField(g0.frame, total)


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction, TwistorScalar, GaussianRational)) or type(v).__name__ == "mpq"


def omega_A(g: MetricField, Q: QuaternionicTriple, A: Sequence, tol: float = 1e-12) -> ExteriorForm:
    """``omega_A(X, Y) = g(AX, Y)`` for ``A = a1 I + a2 J + a3 K`` on the unit sphere.

    Exact coefficients (rationals or ring elements) give a symbolic form and
    the unit condition is checked exactly; floats are checked to ``tol``.
    """
    a1, a2, a3 = A
    if all(_is_exact(a) for a in A):
        norm = a1 * a1 + a2 * a2 + a3 * a3
        if norm != 1:
            raise ValueError("A is not a unit imaginary quaternion")
        mat = Q.combination(a1, a2, a3)
        zero = g.frame.ring.scalar(0)
        return ExteriorForm.from_matrix(g.frame, matmul(transpose(mat), g.gram, zero))
    if abs(a1 * a1 + a2 * a2 + a3 * a3 - 1) > tol:
        raise ValueError("A is not a unit imaginary quaternion")
    # a float is an exact binary rational, so the combination stays symbolic
    out = ExteriorForm(g.frame, {})
    for a, S in zip(A, Q):
        out = out + g.hermitian_form(S) * Fraction(float(a))
    return out


@dataclass
class QuaternionicCoframe:
    """Quaternionic orthonormal frame at a point and the complex coframe it induces.

    ``vectors`` lists ``e_1, Ie_1, Je_1, Ke_1, e_2, ...`` as columns of
    coordinate components; ``dual`` holds the dual covectors as rows.
    """

    point: tuple
    vectors: list
    dual: list
    exact: bool

    @property
    def k(self) -> int:
        return len(self.vectors) // 4

    def _cov(self, row, frame: Frame) -> ExteriorForm:
        return ExteriorForm(frame, {1 << a: c for a, c in enumerate(row) if c})

    def dzeta(self, i: int, frame: Frame) -> ExteriorForm:
        """``e_i^* + i (Ie_i)^*``."""
        return self._cov(self.dual[4 * i], frame) + self._cov(self.dual[4 * i + 1], frame) * self._i()

    def dxi(self, i: int, frame: Frame) -> ExteriorForm:
        """``(Je_i)^* + i (Ke_i)^*``."""
        return self._cov(self.dual[4 * i + 2], frame) + self._cov(self.dual[4 * i + 3], frame) * self._i()

    def _i(self):
        return GaussianRational(0, 1) if self.exact else 1j


def _sqrt_exact(v: mpq):
    if v > 0 and is_square(v.numerator) and is_square(v.denominator):
        return mpq(isqrt(v.numerator), isqrt(v.denominator))
    return None


def quaternionic_frame(g: MetricField, Q: QuaternionicTriple, point, tol: float = 1e-10) -> QuaternionicCoframe:
    """Index-order Gram-Schmidt over H.

    Each coordinate vector is projected off the quaternionic span of the
    accepted vectors; the first with squared norm above ``tol`` is accepted.
    Arithmetic stays exact while every norm is a rational square.
    """
    gram = evaluate_matrix(g.gram, point)
    if not positive_definite(gram):
        raise DegenerateMetricError(tuple(point))
    mats = [evaluate_matrix(S.matrix, point) for S in Q]
    N = g.dim
    exact = is_exact_point(point)
    if exact:
        G = [[v.re for v in row] for row in gram]
        Ms = [[[v.re for v in row] for row in m] for m in mats]
    else:
        G = np.real(np.array(gram, dtype=complex))
        Ms = [np.real(np.array(m, dtype=complex)) for m in mats]

    def ip(u, v):
        return sum(u[a] * G[a][b] * v[b] for a in range(N) for b in range(N) if u[a] and v[b])

    def apply(M, v):
        return [sum(M[r][c] * v[c] for c in range(N) if v[c]) for r in range(N)]

    basis: list = []
    for a in range(N):
        v = [mpq(int(a == c)) if exact else float(a == c) for c in range(N)]
        for _ in range(1 if exact else 2):
            for b in basis:
                c = ip(v, b)
                v = [x - c * y for x, y in zip(v, b)]
        n2 = ip(v, v)
        if n2 <= tol:
            continue
        root = _sqrt_exact(n2) if exact else None
        if exact and root is None:
            return quaternionic_frame(g, Q, [float(p) for p in point], tol)
        e = [x / root for x in v] if exact else [x / math.sqrt(n2) for x in v]
        basis.extend([e, apply(Ms[0], e), apply(Ms[1], e), apply(Ms[2], e)])
        if len(basis) == N:
            break
    if len(basis) != N:
        raise DegenerateMetricError(tuple(point), "quaternionic frame construction failed")
    if exact:
        cols = [[GaussianRational(x) for x in vec] for vec in basis]
        from .hermitian.pointwise import exact_inverse
        B = [[basis[j][i] for j in range(N)] for i in range(N)]
        inv, _ = exact_inverse([[GaussianRational(x) for x in row] for row in B])
        dual = [[GaussianRational(x) for x in row] for row in inv]
    else:
        cols = [list(map(float, vec)) for vec in basis]
        B = np.array(cols).T
        dual = np.linalg.inv(B).tolist()
    pt = tuple(point.values()) if isinstance(point, dict) else tuple(point)
    return QuaternionicCoframe(pt, cols, dual, exact)


def canonical_decompositions(coframe: QuaternionicCoframe, g: MetricField, Q: QuaternionicTriple) -> dict:
    """Residuals of the four coframe decompositions at the coframe's point.

    Keys: ``omega_I``, ``omega_J``, ``omega_K``, ``Omega_I``.  Each value is the
    difference (form) between the Hermitian form at the point and the sum
    over the coframe; exact zero when the coframe is exact.
    """
    frame = g.frame
    point = list(coframe.point)
    exact = coframe.exact
    half = GaussianRational(1, 0) / 2 if exact else 0.5
    ihalf = GaussianRational(0, 1) / 2 if exact else 0.5j
    I = GaussianRational(0, 1) if exact else 1j
    forms = {}
    for name, S in zip("IJK", Q):
        f = g.hermitian_form(S).evaluate(point) if exact else _float_form(g.hermitian_form(S), point)
        forms[name] = f
    zero = ExteriorForm(frame, {})
    sI, sJ, sK, sO = zero, zero, zero, zero
    for i in range(coframe.k):
        z = coframe.dzeta(i, frame)
        x = coframe.dxi(i, frame)
        zb, xb = z.conjugate(), x.conjugate()
        sI = sI + z.wedge(zb) * ihalf + x.wedge(xb) * ihalf
        sJ = sJ + z.wedge(x) * half + zb.wedge(xb) * half
        sK = sK + z.wedge(x) * (-ihalf) + zb.wedge(xb) * ihalf
        sO = sO + z.wedge(x)
    return {
        "omega_I": forms["I"] - sI,
        "omega_J": forms["J"] - sJ,
        "omega_K": forms["K"] - sK,
        "Omega_I": forms["J"] + forms["K"] * I - sO,
    }


def _float_form(form: ExteriorForm, point) -> ExteriorForm:
    from .hermitian.pointwise import evaluate_form
    return evaluate_form(form, [float(p) for p in point])


def holomorphic_symplectic_form(g: MetricField, Q: QuaternionicTriple) -> ExteriorForm:
    """``Omega_I = omega_J + i omega_K``."""
    return g.hermitian_form(Q.J) + g.hermitian_form(Q.K) * GaussianRational(0, 1)


# model catalog --------------------------------------------------------------------

_MONO = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\^\s*(\d+))?\s*$")


def parse_polynomial(ring: PolyRing, spec) -> ChartPolynomial:
    """Polynomial from ``{"1": 1, "q1": "1/10", "q1*q2^2": 3}`` or a number."""
    if isinstance(spec, ChartPolynomial):
        return spec
    if not isinstance(spec, Mapping):
        return ring.const(Fraction(str(spec)))
    out = ring.zero()
    for mono, coeff in spec.items():
        c = Fraction(str(coeff))
        exps: dict[str, int] = {}
        text = str(mono).strip()
        if text not in ("", "1"):
            for factor in text.split("*"):
                m = _MONO.match(factor)
                if not m or m.group(1) not in ring.index:
                    raise ValueError(f"bad monomial {mono!r}")
                exps[m.group(1)] = exps.get(m.group(1), 0) + int(m.group(2) or 1)
        out = out + ring.monomial(exps, c)
    return out


def lift_scalar(s: TwistorScalar, ring: PolyRing) -> TwistorScalar:
    """Re-home a ring element whose variables form a prefix of ``ring``'s."""
    src = s.num.ring
    if src is ring:
        return s
    if ring.names[:src.nvars] != src.names:
        raise ValueError("target ring must extend the source variables as a prefix")
    if s.k and (src.ix != ring.ix or src.iy != ring.iy):
        raise ValueError("denominator needs matching chart variables")
    return TwistorScalar(ChartPolynomial(ring, dict(s.num.terms)), s.k, reduce=False)


@dataclass
class HyperhermitianModel:
    """A catalog base manifold: chart data for ``H^k`` with a hyperhermitian metric."""

    name: str
    k: int
    ring: PolyRing
    frame: Frame
    triple: QuaternionicTriple
    metric: MetricField
    conformal_factor: ChartPolynomial | None = None
    periodic: bool = False
    box: tuple = (-1.0, 1.0)
    hyperkahler: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        """Complex dimension ``2k``."""
        return 2 * self.k

    def hermitian_forms(self) -> tuple[ExteriorForm, ExteriorForm, ExteriorForm]:
        return tuple(self.metric.hermitian_form(S) for S in self.triple)

    def sample_grid(self, per_axis: int, axes: Sequence[int] = (0,)) -> list[tuple]:
        lo, hi = self.box
        if self.periodic:
            vals = [lo + (hi - lo) * i / per_axis for i in range(per_axis)]
        else:
            vals = list(np.linspace(lo, hi, per_axis))
        pts = []
        for combo in np.array(np.meshgrid(*[vals] * len(axes), indexing="ij")).reshape(len(axes), -1).T:
            p = [0.0] * self.ring.nvars
            for ax, v in zip(axes, combo):
                p[ax] = float(v)
            pts.append(tuple(p))
        return pts


def _base_ring(k: int, extra: Sequence[str] = (), chart=None, degree_cap: int = 16) -> PolyRing:
    return PolyRing([f"q{i + 1}" for i in range(4 * k)] + list(extra), chart=chart, degree_cap=degree_cap)


def flat_model(k: int = 1, box=(-1.0, 1.0)) -> HyperhermitianModel:
    """``H^k`` with the Euclidean metric (hyperkaehler)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ring = _base_ring(k)
    frame = Frame(ring)
    Q = standard_triple(frame, k)
    g = MetricField(frame, [[ring.scalar(int(a == b)) for b in range(4 * k)] for a in range(4 * k)])
    return HyperhermitianModel("flat", k, ring, frame, Q, g, box=tuple(box))


def torus_model(k: int = 1) -> HyperhermitianModel:
    """Flat chart data sampled on a periodic grid of the unit cube."""
    m = flat_model(k, box=(0.0, 1.0))
    m.name = "torus"
    m.periodic = True
    return m


def conformal_model(k: int = 1, lam=None, box=(-1.0, 1.0)) -> HyperhermitianModel:
    """``lambda(q)^2 g_flat`` with polynomial ``lambda`` (hyperhermitian, not hyperkaehler).

    ``lam`` defaults to ``1 + q1/10``.  Positivity of ``lambda`` is checked on
    the corners of the box and on a coarse grid.
    """
    ring = _base_ring(k)
    frame = Frame(ring)
    lam_poly = parse_polynomial(ring, lam if lam is not None else {"1": 1, "q1": "1/10"})
    _check_positive(lam_poly, ring, box)
    lam_s = ring.scalar(lam_poly)
    l2 = lam_s * lam_s
    zero = ring.scalar(0)
    g = MetricField(frame, [[l2 if a == b else zero for b in range(4 * k)] for a in range(4 * k)])
    Q = standard_triple(frame, k)
    hk = not any(lam_poly.diff(i) for i in range(ring.nvars))
    return HyperhermitianModel("conformal", k, ring, frame, Q, g, conformal_factor=lam_poly,
                               box=tuple(box), hyperkahler=hk)


def _check_positive(poly: ChartPolynomial, ring: PolyRing, box, per_axis: int = 3):
    lo, hi = box
    vals = np.linspace(lo, hi, per_axis)
    exps, coeffs = poly.to_arrays()
    used = sorted(poly.variables())
    grids = np.array(np.meshgrid(*[vals] * max(1, len(used)), indexing="ij")).reshape(max(1, len(used)), -1).T
    for combo in grids:
        p = np.zeros(ring.nvars)
        for v, val in zip(used, combo):
            p[v] = val
        value = np.real(np.prod(p[None, :] ** exps, axis=1) @ coeffs) if len(coeffs) else 0.0
        if value <= 0:
            raise ValueError(f"conformal factor not positive at {tuple(float(v) for v in p)}")


def make_model(name: str, k: int = 1, **params) -> HyperhermitianModel:
    if name == "flat":
        return flat_model(k, box=params.get("box", (-1.0, 1.0)))
    if name == "torus":
        return torus_model(k)
    if name == "conformal":
        return conformal_model(k, params.get("lam"), box=params.get("box", (-1.0, 1.0)))
    raise ValueError(f"unknown model {name!r}")
