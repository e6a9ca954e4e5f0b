from fractions import Fraction

import numpy as np
import pytest

from twistorcert.ringforms import ExteriorForm, Frame, GaussianRational, PolyRing, TwistorScalar
from twistorcert.rng import XorShift64Star

SEED = 20240611
TRIALS = 200


class Gen:
    """Random exact polynomials and forms drawn from the portable generator."""

    def __init__(self, seed=SEED):
        self.rng = XorShift64Star(seed)

    def gauss(self, den=5):
        r = self.rng
        return GaussianRational(Fraction(r.randint(-4, 4), den), Fraction(r.randint(-2, 2), den))

    def poly(self, ring, terms=3, maxdeg=2):
        r = self.rng
        out = ring.zero()
        for _ in range(terms):
            exps = {name: r.randint(0, maxdeg) for name in ring.names if r.randint(0, 2) == 0}
            out = out + ring.monomial(exps, self.gauss())
        return out

    def scalar(self, ring, terms=3, maxdeg=2):
        k = self.rng.randint(0, 2) if ring.has_chart else 0
        return TwistorScalar(self.poly(ring, terms, maxdeg), k)

    def mask(self, dim, degree):
        idx = list(range(dim))
        chosen = []
        for _ in range(degree):
            j = self.rng.randint(0, len(idx) - 1)
            chosen.append(idx.pop(j))
        m = 0
        for c in chosen:
            m |= 1 << c
        return m

    def form(self, frame, degree, terms=2, **kw):
        coeffs = {}
        for _ in range(terms):
            m = self.mask(frame.dim, degree)
            coeffs[m] = self.scalar(frame.ring, **kw)
        return ExteriorForm(frame, coeffs)

    def rational_point(self, nvars, lo=-2, hi=2):
        return [self.rng.rational(lo, hi, 7) for _ in range(nvars)]

    def rational_matrix(self, n, lo=-2, hi=2):
        return [[self.rng.rational(lo, hi, 5) for _ in range(n)] for _ in range(n)]


@pytest.fixture
def gen():
    return Gen()


@pytest.fixture(scope="session")
def plain_frame():
    return Frame(PolyRing(["a", "b", "c", "d", "e"]))


@pytest.fixture(scope="session")
def chart_frame():
    return Frame(PolyRing(["q", "x", "y"], chart=("x", "y")))


@pytest.fixture
def np_rng():
    return XorShift64Star(SEED)


def spd(rng, n, shift=0.5):
    x = rng.normal_array(n, n)
    return x @ x.T + shift * np.eye(n)


# acceptance criteria bookkeeping: one line per criterion in the terminal summary
CRITERIA: dict = {}


def record_criterion(number: int, ok: bool, detail: str = ""):
    prev = CRITERIA.get(number)
    if prev is None:
        CRITERIA[number] = (ok, [detail] if detail else [])
    else:
        CRITERIA[number] = (prev[0] and ok, prev[1] + ([detail] if detail else []))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, details = CRITERIA[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}"
        if details:
            line += "  " + "; ".join(details)
        terminalreporter.write_line(line)
