"""Pointwise linear algebra: Hodge star, codifferential, torsion traces.

Points given as rational numbers keep every step exact (Gram inverse,
Pfaffian volume density, star).  Float points switch to complex arithmetic.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from ..ringforms import ExteriorForm, GaussianRational, TwistorScalar, indices_of
from ..ringforms.forms import _wedge_sign
from .structures import ComplexStructureField, MetricField, induced_action

__all__ = [
    "DegenerateMetricError",
    "evaluate_matrix",
    "exact_inverse",
    "pfaffian",
    "positive_definite",
    "hodge_star_at_point",
    "is_exact_point",
]


class DegenerateMetricError(ValueError):
    """Gram matrix is not positive definite at a sample point."""

    def __init__(self, point, detail: str = ""):
        self.point = tuple(point)
        super().__init__(f"metric not positive definite at {self.point}{': ' + detail if detail else ''}")


def is_exact_point(point) -> bool:
    vals = point.values() if isinstance(point, dict) else point
    return all(isinstance(v, (int, Rational, GaussianRational)) or type(v).__name__ == "mpq"
               for v in vals)


_FLOAT_CACHE: dict = {}


def _float_tables(s: TwistorScalar):
    key = id(s)
    hit = _FLOAT_CACHE.get(key)
    if hit is not None and hit[0] is s:
        return hit[1]
    exps, coeffs = s.num.to_arrays()
    _FLOAT_CACHE[key] = (s, (exps, coeffs))
    return exps, coeffs


def float_value(s: TwistorScalar, vals: np.ndarray) -> complex:
    """Floating-point value of a ring element at a real point."""
    if not s:
        return 0j
    exps, coeffs = _float_tables(s)
    mono = np.prod(vals[None, :] ** exps, axis=1)
    v = complex(mono @ coeffs)
    if s.k:
        ring = s.ring
        v /= (1.0 + vals[ring.ix] ** 2 + vals[ring.iy] ** 2) ** s.k
    return v


def _point_array(ring, point) -> np.ndarray:
    if isinstance(point, dict):
        return np.array([float(point[n]) for n in ring.names])
    return np.asarray([float(v) for v in point], dtype=float)


def evaluate_matrix(mat, point):
    """Evaluate a matrix of ring elements: exact at rational points, complex otherwise."""
    if is_exact_point(point):
        return [[v.evaluate(point) for v in row] for row in mat]
    ring = mat[0][0].ring
    vals = _point_array(ring, point)
    return [[float_value(v, vals) for v in row] for row in mat]


def evaluate_form(form: ExteriorForm, point) -> ExteriorForm:
    if is_exact_point(point):
        return form.evaluate(point)
    vals = _point_array(form.frame.ring, point)
    return ExteriorForm(form.frame, {m: float_value(c, vals) for m, c in form.coeffs.items()})


def _real_q(v):
    if isinstance(v, GaussianRational):
        if v.im:
            raise ValueError("expected a real entry")
        return v.re
    return mpq(v) if not isinstance(v, (complex, float)) else complex(v).real


def exact_inverse(mat):
    """Inverse and determinant of a real matrix with exact (mpq) arithmetic."""
    n = len(mat)
    a = [[_real_q(v) for v in row] + [mpq(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    det = mpq(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None, mpq(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        inv_p = 1 / p
        a[col] = [v * inv_p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a], det


def positive_definite(mat) -> bool:
    """Sylvester test via exact elimination (or Cholesky for floats)."""
    if all(isinstance(v, GaussianRational) for row in mat for v in row):
        n = len(mat)
        a = [[_real_q(v) for v in row] for row in mat]
        for col in range(n):
            p = a[col][col]
            if p <= 0:
                return False
            for r in range(col + 1, n):
                f = a[r][col] / p
                if f:
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return True
    try:
        np.linalg.cholesky(np.real(np.array(mat, dtype=complex)))
        return True
    except np.linalg.LinAlgError:
        return False


def pfaffian(mat):
    """Pfaffian of an antisymmetric matrix by expansion along the first row."""
    n = len(mat)
    if n % 2:
        return 0

    def rec(idx: tuple):
        if not idx:
            return 1
        i0 = idx[0]
        total = 0
        for pos in range(1, len(idx)):
            j = idx[pos]
            a = mat[i0][j]
            if not a:
                continue
            rest = idx[1:pos] + idx[pos + 1:]
            term = a * rec(rest)
            total = total + term if pos % 2 == 1 else total - term
        return total

    return rec(tuple(range(n)))


def _as_number(v):
    if isinstance(v, GaussianRational):
        return v
    return complex(v)


def volume_density(gram, J: ComplexStructureField | None, point, orientation: int = 1):
    """Signed ``sqrt(det g)`` relative to ``dq_1 ^ ... ^ dq_N``.

    With a complex structure the density is the Pfaffian of the Hermitian
    form (exact) and the sign fixes the complex orientation.
    """
    n = len(gram)
    if J is not None:
        jm = evaluate_matrix(J.matrix, point)
        om = [[sum((jm[c][a] * gram[c][b] for c in range(n)), start=_zero_like(gram))
               for b in range(n)] for a in range(n)]
        return pfaffian(om)
    if all(isinstance(v, GaussianRational) for row in gram for v in row):
        _, det = exact_inverse(gram)
        from gmpy2 import is_square, isqrt
        num, den = det.numerator, det.denominator
        if det > 0 and is_square(num) and is_square(den):
            return GaussianRational(mpq(isqrt(num), isqrt(den)) * orientation)
        return orientation * math.sqrt(float(det))
    g = np.real(np.array(gram, dtype=complex))
    return orientation * math.sqrt(np.linalg.det(g))


def _zero_like(mat):
    v = mat[0][0]
    return GaussianRational(0) if isinstance(v, GaussianRational) else 0j


def hodge_star_numeric(form: ExteriorForm, gram, density) -> ExteriorForm:
    """Hodge star of a numeric form given the Gram matrix and signed density."""
    n = len(gram)
    exact = isinstance(density, GaussianRational) and all(
        isinstance(v, GaussianRational) for row in gram for v in row) and all(
        isinstance(c, GaussianRational) for c in form.coeffs.values())
    if exact:
        inv, _ = exact_inverse(gram)
        ginv = [[GaussianRational(v) for v in row] for row in inv]
    else:
        g = np.real(np.array(gram, dtype=complex))
        ginv = np.linalg.inv(g).tolist()
        density = complex(density)
        form = form.to_complex()
    rows = [{a: ginv[a][b] for a in range(n) if ginv[a][b]} for b in range(n)]
    raised = induced_action(rows, form)
    top = (1 << n) - 1
    out: dict = {}
    for m, c in raised.coeffs.items():
        comp = top & ~m
        t = c * density
        if _wedge_sign(m, comp) < 0:
            t = -t
        out[comp] = t
    return ExteriorForm(form.frame, out)


def hodge_star_at_point(form: ExteriorForm, g: MetricField, point,
                        J: ComplexStructureField | None = None) -> ExteriorForm:
    """``*form`` at a point, defined by ``alpha ^ *beta = g(alpha, beta) vol``.

    ``form`` may be symbolic (evaluated here) or already numeric.  The
    orientation comes from ``J`` when given, else from the frame.
    """
    gram = evaluate_matrix(g.gram, point)
    if not positive_definite(gram):
        raise DegenerateMetricError(_point_tuple(point))
    if any(isinstance(c, TwistorScalar) for c in form.coeffs.values()):
        form = evaluate_form(form, point)
    dens = volume_density(gram, J, point, g.frame.orientation)
    return hodge_star_numeric(form, gram, dens)


def _point_tuple(point):
    if isinstance(point, dict):
        return tuple(point.values())
    return tuple(point)


def interior_numeric(form: ExteriorForm, vector: Sequence) -> ExteriorForm:
    return form.interior(vector)


def mask_components(form: ExteriorForm, degree: int):
    return {indices_of(m): c for m, c in form.coeffs.items() if bin(m).count("1") == degree}
