"""Complex structures, metrics and the operators they induce on forms."""
from __future__ import annotations

from functools import cached_property
from typing import Sequence

from ..ringforms import ExteriorForm, Frame, GaussianRational, TwistorScalar, indices_of
from ..ringforms.forms import _wedge_sign

__all__ = [
    "BigradedForm",
    "ComplexStructureField",
    "MetricField",
    "NotHermitianError",
    "StructureError",
    "bigrade_with",
    "projector_rows",
    "induced_action",
    "matmul",
    "transpose",
]

_I = GaussianRational(0, 1)
_HALF = GaussianRational(1) / 2


class StructureError(ValueError):
    """Matrix data does not define the claimed structure."""


class NotHermitianError(StructureError):
    """Metric is not compatible with the complex structure."""


def matmul(a, b, zero):
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            s = zero
            for k in range(m):
                if a[i][k] and b[k][j]:
                    s = s + a[i][k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def transpose(a):
    return [list(r) for r in zip(*a)]


def induced_action(rows: Sequence[dict], form: ExteriorForm, cache: dict | None = None) -> ExteriorForm:
    """Apply ``e^a -> sum_b rows[a][b] e^b`` multiplicatively to a form.

    ``rows[a]`` is a sparse dict ``{b: coeff}``.  ``cache`` memoises the image
    of each basis monomial and may be shared between calls with the same map.
    """
    if cache is None:
        cache = {}
    out: dict = {}
    for m, c in form.coeffs.items():
        img = cache.get(m)
        if img is None:
            img = _monomial_image(rows, m)
            cache[m] = img
        for mm, cc in img.items():
            t = c * cc
            out[mm] = out[mm] + t if mm in out else t
    return ExteriorForm(form.frame, out)


def _monomial_image(rows, mask: int) -> dict:
    if not mask:
        return {0: 1}
    acc = {0: None}
    for a in indices_of(mask):
        nxt: dict = {}
        for m, c in acc.items():
            for b, cb in rows[a].items():
                bit = 1 << b
                if m & bit:
                    continue
                t = cb if c is None else c * cb
                if _wedge_sign(m, bit) < 0:
                    t = -t
                mm = m | bit
                nxt[mm] = nxt[mm] + t if mm in nxt else t
        acc = {m: c for m, c in nxt.items() if c}
        if not acc:
            return {}
    return acc


class ComplexStructureField:
    """Pointwise-varying almost complex structure.

    ``matrix[a][b]`` is the tangent action: ``(JX)^a = sum_b matrix[a][b] X^b``.
    On covectors the induced action is ``(I theta)(X) = -theta(JX)``, so
    ``I e^a = -sum_b matrix[a][b] e^b``; on forms it acts factor by factor.
    """

    def __init__(self, frame: Frame, matrix, *, check: bool = True):
        ring = frame.ring
        n = frame.dim
        if len(matrix) != n or any(len(r) != n for r in matrix):
            raise StructureError(f"structure matrix must be {n}x{n}")
        self.frame = frame
        self.matrix = [[ring.scalar(v) if not isinstance(v, TwistorScalar) else v for v in row]
                       for row in matrix]
        self.dim = n
        if n % 2:
            raise StructureError("complex structures need even dimension")
        if check and not self.squares_to_minus_one():
            raise StructureError("J^2 + Id is not zero")
        self._cov_cache: dict = {}
        self._inv_cache: dict = {}
        self._proj_cache: dict = {}

    # algebra ------------------------------------------------------------
    def squares_to_minus_one(self) -> bool:
        ring = self.frame.ring
        sq = matmul(self.matrix, self.matrix, ring.scalar(0))
        for a in range(self.dim):
            for b in range(self.dim):
                target = -1 if a == b else 0
                if sq[a][b] != ring.scalar(target):
                    return False
        return True

    def residual_square(self):
        """Matrix ``J^2 + Id`` (exactly zero for a valid structure)."""
        ring = self.frame.ring
        sq = matmul(self.matrix, self.matrix, ring.scalar(0))
        return [[sq[a][b] + (1 if a == b else 0) for b in range(self.dim)] for a in range(self.dim)]

    def apply_vector(self, vec: Sequence):
        zero = self.frame.ring.scalar(0)
        out = []
        for a in range(self.dim):
            s = zero
            for b in range(self.dim):
                if self.matrix[a][b] and vec[b]:
                    s = s + self.matrix[a][b] * vec[b]
            out.append(s)
        return out

    @cached_property
    def covector_rows(self) -> list[dict]:
        return [{b: -self.matrix[a][b] for b in range(self.dim) if self.matrix[a][b]}
                for a in range(self.dim)]

    def act(self, form: ExteriorForm) -> ExteriorForm:
        """``I(form)``: the covector action extended multiplicatively."""
        return induced_action(self.covector_rows, form, self._cov_cache)

    def act_inverse(self, form: ExteriorForm) -> ExteriorForm:
        out = ExteriorForm(form.frame, {})
        for k in form.degrees():
            part = self.act(form.homogeneous_part(k))
            out = out + (part if k % 2 == 0 else -part)
        return out

    def evaluate(self, point) -> list[list[GaussianRational]]:
        return [[v.evaluate(point) for v in row] for row in self.matrix]

    # bigrading ----------------------------------------------------------
    @cached_property
    def _projector_rows(self):
        ring = self.frame.ring
        return projector_rows(self.covector_rows, ring.scalar(_HALF), ring.scalar(_I * _HALF))

    def bigrade(self, form: ExteriorForm) -> dict[tuple[int, int], ExteriorForm]:
        """Split a form into its (p, q) components."""
        return bigrade_with(self._projector_rows, form, self._proj_cache)

    def bigraded(self, form: ExteriorForm) -> "BigradedForm":
        return BigradedForm(form, self, self.bigrade(form))

    def project(self, form: ExteriorForm, p: int, q: int) -> ExteriorForm:
        return self.bigrade(form).get((p, q), ExteriorForm(form.frame, {}))

    # derivative operators -----------------------------------------------
    def partial_dbar(self, form: ExteriorForm):
        """``(partial form, dbar form, leakage)`` computed by bigrading ``d``.

        ``leakage`` collects every component of ``d`` outside types
        (p+1, q) and (p, q+1); it vanishes for integrable structures.
        """
        frame = form.frame
        dpart = ExteriorForm(frame, {})
        dbar = ExteriorForm(frame, {})
        leak = ExteriorForm(frame, {})
        for (p, q), piece in self.bigrade(form).items():
            for (pp, qq), dp in self.bigrade(piece.d()).items():
                if (pp, qq) == (p + 1, q):
                    dpart = dpart + dp
                elif (pp, qq) == (p, q + 1):
                    dbar = dbar + dp
                else:
                    leak = leak + dp
        return dpart, dbar, leak

    def partial(self, form: ExteriorForm) -> ExteriorForm:
        return self.partial_dbar(form)[0]

    def dbar(self, form: ExteriorForm) -> ExteriorForm:
        return self.partial_dbar(form)[1]

    def dc_bigraded(self, form: ExteriorForm) -> ExteriorForm:
        """``i (dbar - partial)`` from the bigraded pieces."""
        dp, db, _ = self.partial_dbar(form)
        return (db - dp) * _I

    @cached_property
    def _connection_rows(self):
        """Rows of ``phi_a = -(d_a C) C`` for the covector action ``C``."""
        ring = self.frame.ring
        C = [[-v for v in row] for row in self.matrix]
        zero = ring.scalar(0)
        rows_by_var = {}
        for a in range(self.dim):
            dC = [[v.diff(a) for v in row] for row in C]
            if not any(v for row in dC for v in row):
                continue
            prod = matmul(dC, C, zero)
            rows_by_var[a] = [{d: -prod[b][d] for d in range(self.dim) if prod[b][d]}
                              for b in range(self.dim)]
        return rows_by_var

    def dc(self, form: ExteriorForm) -> ExteriorForm:
        """``d^c = I d I^{-1}``, expanded as ``sum_a (I e^a) ^ (d_a + D_a)``.

        ``D_a`` is the derivation induced by ``I o d_a(I^{-1})`` on covectors;
        it vanishes for constant structures.
        """
        frame = form.frame
        crow = self.covector_rows
        conn = self._connection_rows
        out = ExteriorForm(frame, {})
        for a in range(self.dim):
            inner = form.partial(a)
            if a in conn:
                inner = inner + _derivation(conn[a], form)
            if not inner:
                continue
            ie = ExteriorForm(frame, {1 << b: c for b, c in crow[a].items()})
            out = out + ie.wedge(inner)
        return out

    # integrability --------------------------------------------------------
    def nijenhuis(self):
        """``N(d_a, d_b)`` for all coordinate pairs, as vector components.

        ``N(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] - [X, Y]``.
        """
        n = self.dim
        cols = [[self.matrix[c][a] for c in range(n)] for a in range(n)]
        zero = self.frame.ring.scalar(0)
        out = {}
        for a in range(n):
            for b in range(a + 1, n):
                ja, jb = cols[a], cols[b]
                t1 = _bracket(ja, jb, zero)
                # [J d_a, d_b] = -d_b(J d_a); [d_a, J d_b] = d_a(J d_b)
                br2 = [-v.diff(b) for v in ja]
                br3 = [v.diff(a) for v in jb]
                t2 = self.apply_vector(br2)
                t3 = self.apply_vector(br3)
                vec = [t1[c] - t2[c] - t3[c] for c in range(n)]
                out[(a, b)] = vec
        return out

    def is_integrable(self) -> bool:
        return all(not v for vec in self.nijenhuis().values() for v in vec)


def _bracket(v, w, zero):
    n = len(v)
    out = []
    for c in range(n):
        s = zero
        for d in range(n):
            if v[d]:
                dw = w[c].diff(d)
                if dw:
                    s = s + v[d] * dw
            if w[d]:
                dv = v[c].diff(d)
                if dv:
                    s = s - w[d] * dv
        out.append(s)
    return out


def _derivation(rows, form: ExteriorForm) -> ExteriorForm:
    """Derivation of the exterior algebra extending ``e^b -> sum_d rows[b][d] e^d``."""
    out: dict = {}
    for m, c in form.coeffs.items():
        for pos, b in enumerate(indices_of(m)):
            rb = rows[b]
            if not rb:
                continue
            rest = m & ~(1 << b)
            for d, cd in rb.items():
                bit = 1 << d
                if rest & bit:
                    continue
                t = c * cd
                if (pos & 1) ^ (_wedge_sign(bit, rest) < 0):
                    t = -t
                mm = rest | bit
                out[mm] = out[mm] + t if mm in out else t
    return ExteriorForm(form.frame, out)


def projector_rows(covector_rows, half, ihalf):
    """Rows of ``P10 = (1 + iI)/2`` and ``P01 = (1 - iI)/2`` on covectors."""
    p10, p01 = [], []
    for a, row in enumerate(covector_rows):
        r10: dict = {a: half}
        r01: dict = {a: half}
        for b, c in row.items():
            t = c * ihalf
            r10[b] = r10[b] + t if b in r10 else t
            r01[b] = r01[b] - t if b in r01 else -t
        p10.append({b: v for b, v in r10.items() if v})
        p01.append({b: v for b, v in r01.items() if v})
    return p10, p01


def _bigrade_monomial(rows, mask: int) -> dict:
    p10, p01 = rows
    states = {(0, 0): None}
    for a in indices_of(mask):
        nxt: dict = {}
        for (p, m), c in states.items():
            for prow, dp in ((p10, 1), (p01, 0)):
                for b, cb in prow[a].items():
                    bit = 1 << b
                    if m & bit:
                        continue
                    t = cb if c is None else c * cb
                    if _wedge_sign(m, bit) < 0:
                        t = -t
                    key = (p + dp, m | bit)
                    nxt[key] = nxt[key] + t if key in nxt else t
        states = {k: v for k, v in nxt.items() if v}
    out: dict = {}
    for (p, m), c in states.items():
        out.setdefault(p, {})[m] = c
    return out


def bigrade_with(rows, form: ExteriorForm, cache: dict | None = None) -> dict:
    """(p, q) components of ``form`` for projector rows ``(P10, P01)``."""
    if cache is None:
        cache = {}
    parts: dict[tuple[int, int], dict] = {}
    for m, c in form.coeffs.items():
        k = bin(m).count("1")
        if k == 0:
            acc = parts.setdefault((0, 0), {})
            acc[0] = acc[0] + c if 0 in acc else c
            continue
        img = cache.get(m)
        if img is None:
            img = _bigrade_monomial(rows, m)
            cache[m] = img
        for p, pieces in img.items():
            acc = parts.setdefault((p, k - p), {})
            for mm, cc in pieces.items():
                t = c * cc
                acc[mm] = acc[mm] + t if mm in acc else t
    out = {}
    for pq, coeffs in parts.items():
        f = ExteriorForm(form.frame, coeffs)
        if f:
            out[pq] = f
    return out


class BigradedForm:
    """A form together with its (p, q) decomposition for one structure."""

    def __init__(self, base: ExteriorForm, structure: ComplexStructureField, parts: dict):
        self.base = base
        self.structure = structure
        self.parts = parts

    def part(self, p: int, q: int) -> ExteriorForm:
        return self.parts.get((p, q), ExteriorForm(self.base.frame, {}))

    def reassemble(self) -> ExteriorForm:
        out = ExteriorForm(self.base.frame, {})
        for f in self.parts.values():
            out = out + f
        return out

    def types(self) -> list[tuple[int, int]]:
        return sorted(self.parts)


class MetricField:
    """Symmetric Gram matrix of ring elements in the coordinate frame."""

    def __init__(self, frame: Frame, gram, *, check: bool = True):
        ring = frame.ring
        n = frame.dim
        if len(gram) != n or any(len(r) != n for r in gram):
            raise StructureError(f"Gram matrix must be {n}x{n}")
        self.frame = frame
        self.gram = [[ring.scalar(v) if not isinstance(v, TwistorScalar) else v for v in row]
                     for row in gram]
        self.dim = n
        if check:
            for a in range(n):
                for b in range(a + 1, n):
                    if self.gram[a][b] != self.gram[b][a]:
                        raise StructureError("Gram matrix is not symmetric")

    def is_hermitian(self, J: ComplexStructureField) -> bool:
        """Exact check of ``g(JX, JY) = g(X, Y)``."""
        zero = self.frame.ring.scalar(0)
        JT = transpose(J.matrix)
        pulled = matmul(matmul(JT, self.gram, zero), J.matrix, zero)
        return all(pulled[a][b] == self.gram[a][b] for a in range(self.dim) for b in range(self.dim))

    def hermitian_form(self, J: ComplexStructureField) -> ExteriorForm:
        """``omega(X, Y) = g(JX, Y)``, i.e. ``omega_ab = (J^T g)_ab``."""
        zero = self.frame.ring.scalar(0)
        om = matmul(transpose(J.matrix), self.gram, zero)
        return ExteriorForm.from_matrix(self.frame, om)

    def evaluate(self, point):
        return [[v.evaluate(point) for v in row] for row in self.gram]

    def __add__(self, other: "MetricField") -> "MetricField":
        return MetricField(self.frame, [[a + b for a, b in zip(r1, r2)]
                                        for r1, r2 in zip(self.gram, other.gram)])

    def scaled(self, factor) -> "MetricField":
        return MetricField(self.frame, [[v * factor for v in row] for row in self.gram], check=False)
