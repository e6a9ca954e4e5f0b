"""Exact coefficient arithmetic.

Three layers, each closed under the operations the layer above needs:

``GaussianRational``
    An element of Q(i), stored as a pair of ``gmpy2.mpq``.
``ChartPolynomial``
    A sparse polynomial over Q(i) in the real chart variables of a
    :class:`PolyRing`.  Exponent vectors are packed into a single Python int
    (8 bits per variable) so monomial multiplication is integer addition.
``TwistorScalar``
    ``numerator / (1 + x^2 + y^2)^k`` kept in reduced form.  Because
    ``1 + x^2 + y^2`` is irreducible, products and derivatives of reduced
    fractions are reduced; only sums need a divisibility check.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np
from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "DegreeOverflowError",
    "PolyRing",
    "ChartPolynomial",
    "TwistorScalar",
    "as_gaussian",
]

_BITS = 8
_MASK = (1 << _BITS) - 1
_ZERO = mpq(0)
_ONE = mpq(1)


class DegreeOverflowError(ArithmeticError):
    """A product would exceed the configured per-variable degree cap."""


def _to_mpq(value) -> mpq:
    if isinstance(value, type(_ZERO)):
        return value
    if isinstance(value, (int, Fraction)):
        return mpq(value)
    if isinstance(value, Rational):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(Fraction(value))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


class GaussianRational:
    """Exact element ``re + i*im`` of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> "GaussianRational":
        obj = cls.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    def __add__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __mul__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return self * GaussianRational._raw(other.re / n, -other.im / n)

    def __rtruediv__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, e: int):
        if e < 0:
            return (GaussianRational(1) / self) ** (-e)
        out = GaussianRational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    def norm(self) -> mpq:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return abs(complex(self))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return _format_gaussian(self.re, self.im)


def as_gaussian(value):
    """Coerce exact scalars to :class:`GaussianRational` (``NotImplemented`` otherwise)."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction, type(_ZERO))) or isinstance(value, Rational):
        return GaussianRational._raw(_to_mpq(value), _ZERO)
    return NotImplemented


def _format_rational(q: mpq) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _format_gaussian(re: mpq, im: mpq) -> str:
    if im == 0:
        return _format_rational(re)
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{_format_rational(im)}*i"
    sign = "+" if im > 0 else "-"
    mag = abs(im)
    imag = "i" if mag == 1 else f"{_format_rational(mag)}*i"
    return f"({_format_rational(re)}{sign}{imag})"


class PolyRing:
    """Variable bookkeeping shared by every polynomial of one model.

    Parameters
    ----------
    names
        Real variable names in frame order.
    chart
        Names of the two stereographic chart variables ``(x, y)``, or ``None``
        for a ring without the twistor denominator.
    degree_cap
        Largest exponent any single variable may carry (at most 127).
    """

    def __init__(self, names: Iterable[str], chart: tuple[str, str] | None = None,
                 degree_cap: int = 16):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")
        if not 0 < degree_cap < 128:
            raise ValueError("degree_cap must lie in 1..127")
        self.degree_cap = degree_cap
        self.nvars = len(self.names)
        self.index = {name: i for i, name in enumerate(self.names)}
        if chart is not None:
            self.ix = self.index[chart[0]]
            self.iy = self.index[chart[1]]
        else:
            self.ix = self.iy = None
        self._denom_powers: dict[int, ChartPolynomial] = {}

    @property
    def has_chart(self) -> bool:
        return self.ix is not None

    def unit(self, i: int) -> int:
        return 1 << (_BITS * i)

    def pack(self, exps: Iterable[int]) -> int:
        key = 0
        for i, e in enumerate(exps):
            if e:
                key |= e << (_BITS * i)
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        return tuple((key >> (_BITS * i)) & _MASK for i in range(self.nvars))

    def exponent(self, key: int, i: int) -> int:
        return (key >> (_BITS * i)) & _MASK

    # constructors -------------------------------------------------------
    def zero(self) -> "ChartPolynomial":
        return ChartPolynomial(self, {})

    def const(self, c) -> "ChartPolynomial":
        g = as_gaussian(c)
        if not g:
            return self.zero()
        return ChartPolynomial(self, {0: (g.re, g.im)})

    def var(self, name: str) -> "ChartPolynomial":
        return ChartPolynomial(self, {self.unit(self.index[name]): (_ONE, _ZERO)})

    def monomial(self, exps: Mapping[str, int], coeff=1) -> "ChartPolynomial":
        g = as_gaussian(coeff)
        key = 0
        for name, e in exps.items():
            key += e * self.unit(self.index[name])
        return ChartPolynomial(self, {key: (g.re, g.im)} if g else {})

    def scalar(self, value) -> "TwistorScalar":
        """Lift an exact number or polynomial into the coefficient ring."""
        if isinstance(value, TwistorScalar):
            return value
        if isinstance(value, ChartPolynomial):
            return TwistorScalar(value, 0)
        return TwistorScalar(self.const(value), 0)

    def denom(self) -> "ChartPolynomial":
        """The polynomial ``1 + x^2 + y^2``."""
        if not self.has_chart:
            raise ValueError("ring has no chart variables")
        return self.denom_power(1)

    def denom_power(self, k: int) -> "ChartPolynomial":
        if k in self._denom_powers:
            return self._denom_powers[k]
        if k == 0:
            p = self.const(1)
        elif k == 1:
            p = ChartPolynomial(self, {0: (_ONE, _ZERO),
                                       2 * self.unit(self.ix): (_ONE, _ZERO),
                                       2 * self.unit(self.iy): (_ONE, _ZERO)})
        else:
            p = self.denom_power(k - 1) * self.denom_power(1)
        self._denom_powers[k] = p
        return p

    def __repr__(self):
        return f"PolyRing({self.names!r})"


class ChartPolynomial:
    """Sparse polynomial with Gaussian-rational coefficients.

    ``terms`` maps packed exponent keys to ``(re, im)`` pairs of ``mpq``; zero
    coefficients are never stored.
    """

    __slots__ = ("ring", "terms", "_maxexp")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms
        self._maxexp = None

    # structure ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def max_exponent(self) -> int:
        if self._maxexp is None:
            m = 0
            for key in self.terms:
                while key:
                    e = key & _MASK
                    if e > m:
                        m = e
                    key >>= _BITS
            self._maxexp = m
        return self._maxexp

    def _check(self, other: "ChartPolynomial"):
        if other.ring is not self.ring:
            raise ValueError("polynomials from different rings")

    def _coerce(self, other):
        if isinstance(other, ChartPolynomial):
            self._check(other)
            return other
        g = as_gaussian(other)
        if g is NotImplemented:
            return NotImplemented
        return self.ring.const(g)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for key, (c, d) in other.terms.items():
            cur = out.get(key)
            if cur is None:
                out[key] = (c, d)
            else:
                re, im = cur[0] + c, cur[1] + d
                if re or im:
                    out[key] = (re, im)
                else:
                    del out[key]
        return ChartPolynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return ChartPolynomial(self.ring, {k: (-a, -b) for k, (a, b) in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def scale(self, g: GaussianRational) -> "ChartPolynomial":
        if not g:
            return self.ring.zero()
        c, d = g.re, g.im
        if d == 0:
            if c == 1:
                return self
            return ChartPolynomial(self.ring, {k: (a * c, b * c) for k, (a, b) in self.terms.items()})
        return ChartPolynomial(self.ring, {k: (a * c - b * d, a * d + b * c)
                                           for k, (a, b) in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ChartPolynomial):
            g = as_gaussian(other)
            if g is NotImplemented:
                return NotImplemented
            return self.scale(g)
        self._check(other)
        if not self.terms or not other.terms:
            return self.ring.zero()
        cap = self.ring.degree_cap
        check = self.max_exponent() + other.max_exponent() > cap
        out: dict = {}
        get = out.get
        items2 = list(other.terms.items())
        for k1, (a, b) in self.terms.items():
            if b == 0:
                for k2, (c, d) in items2:
                    key = k1 + k2
                    cur = get(key)
                    if cur is None:
                        out[key] = (a * c, a * d)
                    else:
                        out[key] = (cur[0] + a * c, cur[1] + a * d)
            else:
                for k2, (c, d) in items2:
                    key = k1 + k2
                    re = a * c - b * d
                    im = a * d + b * c
                    cur = get(key)
                    if cur is None:
                        out[key] = (re, im)
                    else:
                        out[key] = (cur[0] + re, cur[1] + im)
        out = {k: v for k, v in out.items() if v[0] or v[1]}
        result = ChartPolynomial(self.ring, out)
        if check and result.max_exponent() > cap:
            raise DegreeOverflowError(
                f"exponent {result.max_exponent()} exceeds degree cap {cap}")
        return result

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of a polynomial")
        out = self.ring.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, TwistorScalar) else NotImplemented
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def conjugate(self) -> "ChartPolynomial":
        return ChartPolynomial(self.ring, {k: (a, -b) for k, (a, b) in self.terms.items()})

    def is_real(self) -> bool:
        return all(b == 0 for _, b in self.terms.values())

    def real_part(self) -> "ChartPolynomial":
        return ChartPolynomial(self.ring, {k: (a, _ZERO) for k, (a, b) in self.terms.items() if a})

    def imag_part(self) -> "ChartPolynomial":
        return ChartPolynomial(self.ring, {k: (b, _ZERO) for k, (a, b) in self.terms.items() if b})

    # calculus -----------------------------------------------------------
    def diff(self, var: int | str) -> "ChartPolynomial":
        i = self.ring.index[var] if isinstance(var, str) else var
        shift = _BITS * i
        unit = 1 << shift
        out = {}
        for key, (a, b) in self.terms.items():
            e = (key >> shift) & _MASK
            if e:
                out[key - unit] = (a * e, b * e)
        return ChartPolynomial(self.ring, out)

    def degree_in(self, var: int | str) -> int:
        i = self.ring.index[var] if isinstance(var, str) else var
        return max((self.ring.exponent(k, i) for k in self.terms), default=-1)

    def variables(self) -> set[int]:
        used = set()
        for key in self.terms:
            i = 0
            while key:
                if key & _MASK:
                    used.add(i)
                key >>= _BITS
                i += 1
        return used

    def divmod_denom(self) -> tuple["ChartPolynomial", "ChartPolynomial"]:
        """Divide by ``1 + x^2 + y^2`` (monic quadratic in ``x``).

        Returns ``(quotient, remainder)``; the remainder has ``x``-degree < 2.
        """
        ring = self.ring
        ix, iy = ring.ix, ring.iy
        xs = _BITS * ix
        x2 = 2 * ring.unit(ix)
        y2 = 2 * ring.unit(iy)
        rem = dict(self.terms)
        quot: dict = {}
        top = max(((k >> xs) & _MASK for k in rem), default=0)
        for a in range(top, 1, -1):
            level = [k for k in rem if (k >> xs) & _MASK == a]
            for key in level:
                c, d = rem.pop(key)
                qkey = key - x2
                _acc(quot, qkey, c, d)
                _acc(rem, qkey, -c, -d)
                _acc(rem, qkey + y2, -c, -d)
        return ChartPolynomial(ring, quot), ChartPolynomial(ring, rem)

    def maybe_divisible_by_denom(self) -> bool:
        """Cheap necessary test: the numerator must vanish on ``x = i, y = 0``."""
        ring = self.ring
        xs, ys = _BITS * ring.ix, _BITS * ring.iy
        acc: dict = {}
        for key, (a, b) in self.terms.items():
            if (key >> ys) & _MASK:
                continue
            e = (key >> xs) & _MASK
            rest = key - (e << xs)
            r = e & 3
            if r == 0:
                re, im = a, b
            elif r == 1:
                re, im = -b, a
            elif r == 2:
                re, im = -a, -b
            else:
                re, im = b, -a
            _acc(acc, rest, re, im)
        return not acc

    # evaluation ---------------------------------------------------------
    def evaluate(self, point) -> GaussianRational:
        """Exact value at a point (sequence or mapping of exact numbers)."""
        vals = _point_values(self.ring, point)
        re = _ZERO
        im = _ZERO
        cache: dict = {}
        for key, (a, b) in self.terms.items():
            mre, mim = _ONE, _ZERO
            i = 0
            k = key
            while k:
                e = k & _MASK
                if e:
                    p = cache.get((i, e))
                    if p is None:
                        p = vals[i] ** e
                        cache[(i, e)] = p
                    mre, mim = mre * p.re - mim * p.im, mre * p.im + mim * p.re
                k >>= _BITS
                i += 1
            re += a * mre - b * mim
            im += a * mim + b * mre
        return GaussianRational._raw(re, im)

    def to_arrays(self):
        """``(exponents[T, V], coeffs[T])`` for vectorised numeric evaluation."""
        keys = list(self.terms)
        exps = np.array([self.ring.unpack(k) for k in keys], dtype=np.int64).reshape(len(keys), self.ring.nvars)
        coeffs = np.array([complex(float(a), float(b)) for a, b in self.terms.values()], dtype=complex)
        return exps, coeffs

    # rendering ----------------------------------------------------------
    def sorted_terms(self):
        ring = self.ring
        return sorted(((ring.unpack(k), v) for k, v in self.terms.items()),
                      key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, (a, b) in self.sorted_terms():
            mono = "*".join(
                (name if e == 1 else f"{name}^{e}")
                for name, e in zip(self.ring.names, exps) if e)
            coeff = _format_gaussian(a, b)
            if not mono:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(mono)
            elif coeff == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{coeff}*{mono}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __repr__(self):
        return f"ChartPolynomial({self})"


def _acc(d: dict, key: int, re, im):
    cur = d.get(key)
    if cur is None:
        if re or im:
            d[key] = (re, im)
        return
    re = cur[0] + re
    im = cur[1] + im
    if re or im:
        d[key] = (re, im)
    else:
        del d[key]


def _point_values(ring: PolyRing, point) -> list[GaussianRational]:
    if isinstance(point, Mapping):
        missing = [name for name in ring.names if name not in point]
        if missing:
            raise KeyError(f"point lacks values for {missing}")
        vals = [point[name] for name in ring.names]
    else:
        vals = list(point)
        if len(vals) != ring.nvars:
            raise ValueError(f"point has {len(vals)} values, ring has {ring.nvars} variables")
    out = []
    for v in vals:
        g = as_gaussian(v)
        if g is NotImplemented:
            _bad_value(v)
        out.append(g)
    return out


def _bad_value(v):
    raise TypeError(f"exact evaluation needs rational inputs, got {v!r}")


class TwistorScalar:
    """``numerator / (1 + x^2 + y^2)^k`` in canonical reduced form."""

    __slots__ = ("num", "k")

    def __init__(self, num: ChartPolynomial, k: int = 0, *, reduce: bool = True):
        if k < 0:
            raise ValueError("denominator power must be nonnegative")
        if not num.terms:
            k = 0
        elif k and not num.ring.has_chart:
            raise ValueError("ring without chart variables cannot carry a denominator")
        self.num = num
        self.k = k
        if reduce and k:
            self._reduce()

    def _reduce(self):
        while self.k and self.num.maybe_divisible_by_denom():
            q, r = self.num.divmod_denom()
            if r.terms:
                break
            self.num = q
            self.k -= 1

    @property
    def ring(self) -> PolyRing:
        return self.num.ring

    def __bool__(self):
        return bool(self.num.terms)

    def is_zero(self) -> bool:
        return not self.num.terms

    def _coerce(self, other):
        if isinstance(other, TwistorScalar):
            if other.num.ring is not self.num.ring:
                raise ValueError("scalars from different rings")
            return other
        if isinstance(other, ChartPolynomial):
            return TwistorScalar(other, 0, reduce=False)
        g = as_gaussian(other)
        if g is NotImplemented:
            return NotImplemented
        return TwistorScalar(self.num.ring.const(g), 0, reduce=False)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        ring = self.num.ring
        if self.k == other.k:
            return TwistorScalar(self.num + other.num, self.k)
        if self.k < other.k:
            lo, hi = self, other
        else:
            lo, hi = other, self
        num = lo.num * ring.denom_power(hi.k - lo.k) + hi.num
        return TwistorScalar(num, hi.k)

    __radd__ = __add__

    def __neg__(self):
        return TwistorScalar(-self.num, self.k, reduce=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, TwistorScalar):
            if other.num.ring is not self.num.ring:
                raise ValueError("scalars from different rings")
            return TwistorScalar(self.num * other.num, self.k + other.k, reduce=False)
        if isinstance(other, ChartPolynomial):
            return TwistorScalar(self.num * other, self.k, reduce=True)
        g = as_gaussian(other)
        if g is NotImplemented:
            return NotImplemented
        return TwistorScalar(self.num.scale(g), self.k, reduce=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        g = as_gaussian(other)
        if g is NotImplemented:
            return NotImplemented
        return self * (GaussianRational(1) / g)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        return TwistorScalar(self.num ** e, self.k * e, reduce=False)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.k == other.k and self.num.terms == other.num.terms

    def __hash__(self):
        return hash((self.k, hash(self.num)))

    def conjugate(self) -> "TwistorScalar":
        return TwistorScalar(self.num.conjugate(), self.k, reduce=False)

    def is_real(self) -> bool:
        return self.num.is_real()

    def real_part(self) -> "TwistorScalar":
        return TwistorScalar(self.num.real_part(), self.k)

    def imag_part(self) -> "TwistorScalar":
        return TwistorScalar(self.num.imag_part(), self.k)

    def diff(self, var: int | str) -> "TwistorScalar":
        ring = self.num.ring
        i = ring.index[var] if isinstance(var, str) else var
        dn = self.num.diff(i)
        if self.k == 0 or (i != ring.ix and i != ring.iy):
            return TwistorScalar(dn, self.k, reduce=False)
        # d(N D^-k) = (N' D - k N D') D^-(k+1), with D' = 2*var
        two_k_var = ChartPolynomial(ring, {ring.unit(i): (mpq(2 * self.k), _ZERO)})
        num = dn * ring.denom() - self.num * two_k_var
        return TwistorScalar(num, self.k + 1, reduce=False)

    def evaluate(self, point) -> GaussianRational:
        value = self.num.evaluate(point)
        if self.k:
            ring = self.num.ring
            vals = _point_values(ring, point)
            dval = GaussianRational(1) + vals[ring.ix] * vals[ring.ix] + vals[ring.iy] * vals[ring.iy]
            value = value / dval ** self.k
        return value

    def __str__(self):
        if self.k == 0:
            return str(self.num)
        den = "(1+x^2+y^2)" if self.k == 1 else f"(1+x^2+y^2)^{self.k}"
        if self.ring.has_chart:
            xn, yn = self.ring.names[self.ring.ix], self.ring.names[self.ring.iy]
            den = den.replace("x^2", f"{xn}^2").replace("y^2", f"{yn}^2")
        return f"({self.num})/{den}"

    def __repr__(self):
        return f"TwistorScalar({self})"
