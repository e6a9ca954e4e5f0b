"""Graded exterior algebra over a coordinate coframe.

Basis monomials ``dq_{a1} ^ ... ^ dq_{ak}`` (``a1 < ... < ak``) are stored as
bitmasks.  Coefficients are usually :class:`TwistorScalar`, but every
algebraic operation only needs ``+``, ``-``, ``*`` and truthiness, so the same
class carries exact numbers (``GaussianRational``) or floats after evaluation.

The pairing convention is the determinant one: ``(a ^ b)(X, Y) =
a(X) b(Y) - a(Y) b(X)``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .scalars import GaussianRational, PolyRing, TwistorScalar, as_gaussian

__all__ = [
    "Frame",
    "FrameMismatchError",
    "ExteriorForm",
    "wedge",
    "exterior_derivative",
    "evaluate",
    "mask_of",
    "indices_of",
    "FormEvaluator",
]


class FrameMismatchError(ValueError):
    """Forms living on different coframes were combined."""


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@lru_cache(maxsize=None)
def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _wedge_sign(a: int, b: int) -> int:
    """Sign of reordering ``e^A ^ e^B`` into increasing order (A, B disjoint)."""
    swaps = 0
    for j in indices_of(b):
        swaps += bin(a >> (j + 1)).count("1")
    return -1 if swaps & 1 else 1


def _sort_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting a sequence of distinct integers."""
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv & 1 else 1


class Frame:
    """Coordinate coframe ``d<name>`` for each ring variable, in ring order.

    ``orientation`` is +1 when ``dq_1 ^ ... ^ dq_N`` is positively oriented
    for the complex structure of the model, -1 otherwise.
    """

    def __init__(self, ring: PolyRing, orientation: int = 1):
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.ring = ring
        self.orientation = orientation
        self.covectors = tuple("d" + name for name in ring.names)
        self.dim = len(self.covectors)

    def with_orientation(self, orientation: int) -> "Frame":
        if orientation == self.orientation:
            return self
        return Frame(self.ring, orientation)

    def index(self, name: str) -> int:
        if name in self.ring.index:
            return self.ring.index[name]
        if name.startswith("d") and name[1:] in self.ring.index:
            return self.ring.index[name[1:]]
        raise KeyError(name)

    def compatible(self, other: "Frame") -> bool:
        return self.ring is other.ring

    def covector(self, which, coeff=None) -> "ExteriorForm":
        i = which if isinstance(which, int) else self.index(which)
        c = self.ring.scalar(1) if coeff is None else coeff
        return ExteriorForm(self, {1 << i: c})

    def monomial(self, indices: Sequence[int], coeff=None) -> "ExteriorForm":
        if len(set(indices)) != len(indices):
            return ExteriorForm(self, {})
        c = self.ring.scalar(1) if coeff is None else coeff
        sign = _sort_sign(indices)
        return ExteriorForm(self, {mask_of(indices): c if sign > 0 else -c})

    def function(self, value) -> "ExteriorForm":
        """A 0-form."""
        s = self.ring.scalar(value) if not isinstance(value, TwistorScalar) else value
        return ExteriorForm(self, {0: s} if s else {})

    def top_mask(self) -> int:
        return (1 << self.dim) - 1

    def __repr__(self):
        return f"Frame({', '.join(self.covectors)}; orientation={self.orientation:+d})"


class ExteriorForm:
    """Immutable element of the exterior algebra over a :class:`Frame`."""

    __slots__ = ("frame", "coeffs")

    def __init__(self, frame: Frame, coeffs: Mapping[int, object]):
        self.frame = frame
        self.coeffs = {m: c for m, c in coeffs.items() if c}

    @classmethod
    def zero(cls, frame: Frame) -> "ExteriorForm":
        return cls(frame, {})

    @classmethod
    def from_components(cls, frame: Frame, comps: Mapping[tuple, object]) -> "ExteriorForm":
        """Build from ``{(i, j, ...): coeff}``; unordered index tuples are re-signed."""
        out: dict = {}
        for idx, c in comps.items():
            if len(set(idx)) != len(idx) or not c:
                continue
            m = mask_of(idx)
            c = c if _sort_sign(idx) > 0 else -c
            out[m] = out[m] + c if m in out else c
        return cls(frame, out)

    @classmethod
    def from_matrix(cls, frame: Frame, mat) -> "ExteriorForm":
        """2-form ``sum_{a<b} mat[a][b] e^a ^ e^b`` from an antisymmetric matrix."""
        n = frame.dim
        return cls(frame, {(1 << a) | (1 << b): mat[a][b]
                           for a in range(n) for b in range(a + 1, n)})

    # structure ----------------------------------------------------------
    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def degrees(self) -> set[int]:
        return {bin(m).count("1") for m in self.coeffs}

    @property
    def degree(self) -> int:
        """Degree of a homogeneous form (0 for the zero form)."""
        ds = self.degrees()
        if not ds:
            return 0
        if len(ds) > 1:
            raise ValueError(f"form is not homogeneous (degrees {sorted(ds)})")
        return ds.pop()

    def component(self, indices: Sequence[int]):
        m = mask_of(indices)
        c = self.coeffs.get(m)
        if c is None:
            return 0
        return c if _sort_sign(indices) > 0 else -c

    def components(self) -> list[tuple[tuple[int, ...], object]]:
        return sorted(((indices_of(m), c) for m, c in self.coeffs.items()),
                      key=lambda t: (len(t[0]), t[0]))

    def homogeneous_part(self, k: int) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: c for m, c in self.coeffs.items()
                                         if bin(m).count("1") == k})

    def filter(self, keep: Callable[[int], bool]) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: c for m, c in self.coeffs.items() if keep(m)})

    def map_coeffs(self, fn: Callable) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: fn(c) for m, c in self.coeffs.items()})

    def _same_frame(self, other: "ExteriorForm"):
        if not isinstance(other, ExteriorForm):
            raise TypeError(f"expected ExteriorForm, got {type(other).__name__}")
        if not self.frame.compatible(other.frame):
            raise FrameMismatchError("forms live on different coframes")

    # linear structure ---------------------------------------------------
    def __add__(self, other: "ExteriorForm") -> "ExteriorForm":
        self._same_frame(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            if m in out:
                s = out[m] + c
                if s:
                    out[m] = s
                else:
                    del out[m]
            else:
                out[m] = c
        return ExteriorForm(self.frame, out)

    def __neg__(self) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "ExteriorForm") -> "ExteriorForm":
        return self + (-other)

    def __mul__(self, scalar) -> "ExteriorForm":
        if isinstance(scalar, ExteriorForm):
            raise TypeError("use wedge() for the exterior product")
        return ExteriorForm(self.frame, {m: c * scalar for m, c in self.coeffs.items()})

    def __rmul__(self, scalar) -> "ExteriorForm":
        if isinstance(scalar, ExteriorForm):
            raise TypeError("use wedge() for the exterior product")
        return ExteriorForm(self.frame, {m: scalar * c for m, c in self.coeffs.items()})

    def __truediv__(self, scalar) -> "ExteriorForm":
        g = as_gaussian(scalar)
        if g is NotImplemented or any(isinstance(c, (complex, float)) for c in self.coeffs.values()):
            return ExteriorForm(self.frame, {m: c / scalar for m, c in self.coeffs.items()})
        inv = GaussianRational(1) / g
        return self * inv

    def __eq__(self, other):
        if not isinstance(other, ExteriorForm):
            return NotImplemented
        return self.frame.compatible(other.frame) and (self - other).is_zero()

    __hash__ = None

    def conjugate(self) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: c.conjugate() for m, c in self.coeffs.items()})

    def real_part(self) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: _real(c) for m, c in self.coeffs.items()})

    def imag_part(self) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: _imag(c) for m, c in self.coeffs.items()})

    def is_real(self) -> bool:
        return all(_is_real(c) for c in self.coeffs.values())

    # products -----------------------------------------------------------
    def wedge(self, other: "ExteriorForm") -> "ExteriorForm":
        self._same_frame(other)
        out: dict = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                if m1 & m2:
                    continue
                p = c1 * c2
                if _wedge_sign(m1, m2) < 0:
                    p = -p
                m = m1 | m2
                if m in out:
                    out[m] = out[m] + p
                else:
                    out[m] = p
        return ExteriorForm(self.frame, out)

    def power(self, k: int) -> "ExteriorForm":
        """``self ^ self ^ ... ^ self`` (k factors); ``power(0)`` is the constant 1."""
        if k < 0:
            raise ValueError("negative exterior power")
        out = ExteriorForm(self.frame, {0: _one_like(self)})
        for _ in range(k):
            out = out.wedge(self)
        return out

    def interior(self, vector: Sequence) -> "ExteriorForm":
        """Contraction ``iota_X`` with a vector given by components in the coordinate frame."""
        out: dict = {}
        for m, c in self.coeffs.items():
            idx = indices_of(m)
            for pos, a in enumerate(idx):
                va = vector[a]
                if not va:
                    continue
                term = c * va
                if pos & 1:
                    term = -term
                mm = m & ~(1 << a)
                out[mm] = out[mm] + term if mm in out else term
        return ExteriorForm(self.frame, out)

    def __call__(self, *vectors):
        """Evaluate a k-form on k vectors (coordinate components)."""
        form = self
        for v in vectors:
            form = form.interior(v)
        return form.coeffs.get(0, 0)

    # calculus -----------------------------------------------------------
    def partial(self, var) -> "ExteriorForm":
        """Differentiate every coefficient with respect to one coordinate."""
        return ExteriorForm(self.frame, {m: c.diff(var) for m, c in self.coeffs.items()})

    def d(self, variables: Iterable[int] | None = None) -> "ExteriorForm":
        """Exterior derivative; ``variables`` restricts to a partial sum of ``d``."""
        vs = range(self.frame.dim) if variables is None else variables
        out: dict = {}
        for a in vs:
            bit = 1 << a
            for m, c in self.coeffs.items():
                if m & bit:
                    continue
                dc = c.diff(a)
                if not dc:
                    continue
                if _wedge_sign(bit, m) < 0:
                    dc = -dc
                mm = m | bit
                out[mm] = out[mm] + dc if mm in out else dc
        return ExteriorForm(self.frame, out)

    def evaluate(self, point) -> "ExteriorForm":
        """Exact coefficients at a rational point."""
        return ExteriorForm(self.frame, {m: c.evaluate(point) for m, c in self.coeffs.items()})

    def to_complex(self) -> "ExteriorForm":
        return ExteriorForm(self.frame, {m: complex(c) for m, c in self.coeffs.items()})

    def max_abs(self) -> float:
        return max((abs(complex(c)) for c in self.coeffs.values()), default=0.0)

    def as_matrix(self) -> np.ndarray:
        """Antisymmetric complex matrix of a numeric 2-form."""
        n = self.frame.dim
        mat = np.zeros((n, n), dtype=complex)
        for m, c in self.coeffs.items():
            idx = indices_of(m)
            if len(idx) != 2:
                raise ValueError("as_matrix needs a 2-form")
            a, b = idx
            mat[a, b] = complex(c)
            mat[b, a] = -complex(c)
        return mat

    # rendering ----------------------------------------------------------
    def render(self) -> str:
        """Canonical text: components sorted by (degree, index tuple)."""
        if not self.coeffs:
            return "0"
        lines = []
        for idx, c in self.components():
            basis = "^".join(self.frame.covectors[i] for i in idx) or "1"
            lines.append(f"[{basis}] {c}")
        return "\n".join(lines)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"ExteriorForm(<{len(self.coeffs)} components>)"


def _one_like(form: ExteriorForm):
    for c in form.coeffs.values():
        if isinstance(c, TwistorScalar):
            return c.ring.scalar(1)
        return type(c)(1) if not isinstance(c, GaussianRational) else GaussianRational(1)
    return form.frame.ring.scalar(1)


def _real(c):
    if isinstance(c, (TwistorScalar, GaussianRational)):
        return c.real_part() if isinstance(c, TwistorScalar) else GaussianRational(c.re)
    return complex(c).real


def _imag(c):
    if isinstance(c, (TwistorScalar, GaussianRational)):
        return c.imag_part() if isinstance(c, TwistorScalar) else GaussianRational(c.im)
    return complex(c).imag


def _is_real(c) -> bool:
    if isinstance(c, (TwistorScalar, GaussianRational)):
        return c.is_real()
    return complex(c).imag == 0


def wedge(*forms: ExteriorForm) -> ExteriorForm:
    """Exterior product of one or more forms over the same frame."""
    if not forms:
        raise ValueError("wedge needs at least one form")
    out = forms[0]
    for f in forms[1:]:
        out = out.wedge(f)
    return out


def exterior_derivative(form: ExteriorForm) -> ExteriorForm:
    return form.d()


def evaluate(form: ExteriorForm, point) -> ExteriorForm:
    return form.evaluate(point)


class FormEvaluator:
    """Vectorised floating-point evaluation of a symbolic form on many points.

    All numerators share one monomial table, so each batch costs a single
    monomial evaluation plus a dense matrix product.
    """

    def __init__(self, form: ExteriorForm):
        self.frame = form.frame
        ring = form.frame.ring
        self.masks = sorted(form.coeffs, key=lambda m: (bin(m).count("1"), indices_of(m)))
        keys: dict[int, int] = {}
        rows, cols, vals = [], [], []
        self.powers = np.zeros(len(self.masks), dtype=np.int64)
        for r, m in enumerate(self.masks):
            c = form.coeffs[m]
            if not isinstance(c, TwistorScalar):
                c = ring.scalar(c)
            self.powers[r] = c.k
            for key, (a, b) in c.num.terms.items():
                j = keys.setdefault(key, len(keys))
                rows.append(r)
                cols.append(j)
                vals.append(complex(float(a), float(b)))
        self.exps = np.array([ring.unpack(k) for k in keys], dtype=np.int64).reshape(len(keys), ring.nvars)
        self.coef = np.zeros((len(self.masks), len(keys)), dtype=complex)
        np.add.at(self.coef, (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)), vals)
        self.ix, self.iy = ring.ix, ring.iy

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Complex coefficient array of shape ``(P, ncomponents)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.exps.size == 0:
            return np.zeros((pts.shape[0], len(self.masks)), dtype=complex)
        mono = np.ones((pts.shape[0], self.exps.shape[0]))
        for v in range(self.exps.shape[1]):
            e = self.exps[:, v]
            if np.any(e):
                mono *= pts[:, v:v + 1] ** e[None, :]
        vals = mono @ self.coef.T
        if self.ix is not None and np.any(self.powers):
            den = 1.0 + pts[:, self.ix] ** 2 + pts[:, self.iy] ** 2
            vals = vals / den[:, None] ** self.powers[None, :]
        return vals

    def forms(self, points: np.ndarray) -> Iterator[ExteriorForm]:
        vals = self(points)
        for row in vals:
            yield ExteriorForm(self.frame, {m: complex(v) for m, v in zip(self.masks, row)})
