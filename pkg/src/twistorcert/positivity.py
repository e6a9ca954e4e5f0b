"""Positive forms, root extraction and the positivity-margin search.

A real ``(m-1, m-1)``-form ``eta`` on a ``2m``-dimensional Hermitian space is
turned into a real 2-form by contracting a bivector into the Riemannian
volume form and lowering with ``g``.  In a ``g``-orthonormal ``J``-adapted
frame the correspondence is

    sum_i a_i e^1 ^ Ie^1 ^ .. (skip i) .. ^ e^m ^ Ie^m  <->  sum_i a_i e^i ^ Ie^i,

which agrees with the Hodge star.  Positivity of a real 2-form ``beta`` means
the symmetric matrix ``beta(X, JY)`` is positive definite.

Matrices follow the conventions of :mod:`twistorcert.hermitian`: ``J`` is the
tangent action ``(JX)^a = J[a][b] X^b`` and the 2-form matrix is
``beta[a][b] = beta(d_a, d_b)``, so ``beta(X, JY) = X^T beta J Y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import linalg

from .hermitian import ComplexStructureField, MetricField
from .rng import XorShift64Star
from .ringforms import ExteriorForm, FormEvaluator, Frame, PolyRing, TwistorScalar, indices_of

__all__ = [
    "NotOneOneError",
    "NotStrictlyPositiveError",
    "PreconditionError",
    "PositivityReport",
    "RootExtraction",
    "MarginSearch",
    "BalancedCandidate",
    "ExtractionReport",
    "MatrixEvaluator",
    "SIGN_TABLE",
    "synthesis_sign",
    "numeric_frame",
    "form_to_matrix",
    "matrix_to_form",
    "pfaffian_numeric",
    "signed_density",
    "is_strictly_positive_11",
    "is_strictly_positive_nn",
    "topminus_to_oneone",
    "oneone_to_topminus",
    "root_extract",
    "power_of_matrix",
    "find_T",
    "synthetic_cross_instance",
    "direction_grid",
    "direction_sweep_min",
    "twistor_grid",
    "synthesize_balanced_candidate",
    "extract_balanced_metric",
]


class NotOneOneError(ValueError):
    """The form has a (2,0)+(0,2) part beyond tolerance."""

    def __init__(self, point, residual: float):
        self.point = point
        self.residual = residual
        super().__init__(f"form is not of type (1,1) at {point}: residual {residual:.3e}")


class NotStrictlyPositiveError(ValueError):
    def __init__(self, point, min_eigen: float):
        self.point = point
        self.min_eigen = min_eigen
        super().__init__(f"form is not strictly positive at {point}: min eigenvalue {min_eigen:.3e}")


class PreconditionError(ValueError):
    def __init__(self, which: str, point, value: float):
        self.which = which
        self.point = point
        self.value = value
        super().__init__(f"precondition '{which}' fails at {point} (value {value:.3e})")


# numeric plumbing ---------------------------------------------------------

@lru_cache(maxsize=None)
def numeric_frame(dim: int) -> Frame:
    """A coframe ``e0 .. e(dim-1)`` for purely numeric forms."""
    return Frame(PolyRing([f"e{i}" for i in range(dim)]))


def form_to_matrix(form: ExteriorForm) -> np.ndarray:
    """Real antisymmetric matrix of a numeric 2-form."""
    return np.real(form.as_matrix())


def matrix_to_form(mat: np.ndarray, frame: Frame | None = None) -> ExteriorForm:
    mat = np.asarray(mat, dtype=float)
    frame = frame or numeric_frame(mat.shape[0])
    n = mat.shape[0]
    return ExteriorForm(frame, {(1 << a) | (1 << b): float(mat[a, b])
                                for a in range(n) for b in range(a + 1, n) if mat[a, b] != 0.0})


def power_of_matrix(mat: np.ndarray, k: int) -> dict:
    """``beta^k`` of a numeric 2-form as ``{mask: value}``."""
    return matrix_to_form(mat).power(k).coeffs


def pfaffian_numeric(mat: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix by pivoted skew elimination."""
    a = np.array(mat, dtype=float)
    n = a.shape[0]
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        p = k + 1 + int(np.argmax(np.abs(a[k, k + 1:])))
        if p != k + 1:
            a[[k + 1, p], :] = a[[p, k + 1], :]
            a[:, [k + 1, p]] = a[:, [p, k + 1]]
            pf = -pf
        piv = a[k, k + 1]
        if piv == 0.0:
            return 0.0
        pf *= piv
        if k + 2 < n:
            tau = a[k, k + 2:] / piv
            v = a[k + 1, k + 2:]
            # congruence that clears rows k, k+1 against the 2x2 pivot block
            a[k + 2:, k + 2:] += np.outer(v, tau) - np.outer(tau, v)
    return pf


def signed_density(gram: np.ndarray, jm: np.ndarray) -> float:
    """``sqrt(det g)`` with the sign of the complex orientation (Pfaffian of ``J^T g``)."""
    return pfaffian_numeric(jm.T @ gram)


class MatrixEvaluator:
    """Vectorised float evaluation of a matrix of ring elements."""

    def __init__(self, mat):
        self.shape = (len(mat), len(mat[0]))
        entries = {}
        ring = None
        for a, row in enumerate(mat):
            for b, v in enumerate(row):
                if isinstance(v, TwistorScalar):
                    ring = v.ring
                if v:
                    entries[(a, b)] = v
        self.index = list(entries)
        frame = Frame(ring) if ring is not None else numeric_frame(1)
        # one fake 1-form per entry keeps the shared-monomial evaluator
        self._forms = []
        for key in self.index:
            self._forms.append(FormEvaluator(ExteriorForm(frame, {1: entries[key]})))

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((pts.shape[0],) + self.shape)
        for (a, b), ev in zip(self.index, self._forms):
            out[:, a, b] = np.real(ev(pts)[:, 0])
        return out


def _pairing(beta: np.ndarray, jm: np.ndarray, point=None, tol: float = 1e-9) -> np.ndarray:
    s = beta @ jm
    asym = float(np.max(np.abs(s - s.T))) if s.size else 0.0
    scale = max(1.0, float(np.max(np.abs(s))))
    if asym > tol * scale:
        raise NotOneOneError(point, asym)
    return 0.5 * (s + s.T)


# positivity ---------------------------------------------------------------

@dataclass
class PositivityReport:
    min_eigen: float
    witness_point: tuple
    samples: int
    verdict: str
    margin: float
    kernel_dim: int = 0
    min_eigen_by_point: np.ndarray | None = field(default=None, repr=False)

    @property
    def positive(self) -> bool:
        return self.verdict == "positive"


def _eigen_report(mats: Sequence[np.ndarray], jms: Sequence[np.ndarray], grams, points,
                  margin: float, type_tol: float) -> PositivityReport:
    worst = math.inf
    witness = None
    kernel = 0
    verdict = "positive"
    per_point = np.empty(len(points))
    for idx, (beta, jm, pt) in enumerate(zip(mats, jms, points)):
        s = _pairing(beta, jm, tuple(pt), type_tol)
        if grams is not None:
            ev = linalg.eigh(s, grams[idx], eigvals_only=True)
        else:
            ev = np.linalg.eigvalsh(s)
        scale = max(float(np.max(np.abs(ev))), 1e-300)
        lo = float(ev[0])
        rel = lo / scale
        per_point[idx] = lo
        if rel < worst:
            worst = rel
            witness = tuple(float(v) for v in pt)
            kernel = int(np.sum(np.abs(ev) <= margin * scale))
            worst_abs = lo
    if worst > margin:
        verdict = "positive"
    elif worst >= -margin:
        verdict = "degenerate"
    else:
        verdict = "negative"
    return PositivityReport(worst_abs, witness, len(points), verdict, margin, kernel, per_point)


def is_strictly_positive_11(form: ExteriorForm, J: ComplexStructureField, grid,
                            g: MetricField | None = None, margin: float = 1e-10,
                            type_tol: float = 1e-9) -> PositivityReport:
    """Smallest eigenvalue of ``(X, Y) -> form(X, JY)`` over the grid.

    With ``g`` the eigenvalues are taken relative to the metric.  The verdict
    compares the smallest eigenvalue with ``margin`` times the largest one at
    the same point; ``kernel_dim`` counts near-zero eigenvalues at the witness.
    """
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    vals = FormEvaluator(form)(pts)
    masks = FormEvaluator(form).masks
    N = form.frame.dim
    mats = []
    for row in vals:
        beta = np.zeros((N, N))
        for m, v in zip(masks, row):
            a, b = indices_of(m)
            beta[a, b] = v.real
            beta[b, a] = -v.real
        mats.append(beta)
    jms = MatrixEvaluator(J.matrix)(pts)
    grams = MatrixEvaluator(g.gram)(pts) if g is not None else None
    return _eigen_report(mats, jms, grams, pts, margin, type_tol)


def topminus_to_oneone(eta, density: float, gram: np.ndarray | None = None) -> np.ndarray:
    """Contract ``eta = B -| Omega`` for the bivector ``B`` and lower it with ``g``.

    ``eta`` is a numeric ``(N-2)``-form (an :class:`ExteriorForm` or a
    ``{mask: value}`` map) and ``Omega = density * e^1 ^ .. ^ e^N``.  With
    ``iota_{d_a ^ d_b} = iota_b iota_a`` the component of ``eta`` on the
    complement of ``{a, b}`` equals ``density (-1)^(a+b-1) B^{ab}``.
    """
    coeffs = eta.coeffs if isinstance(eta, ExteriorForm) else eta
    N = gram.shape[0] if gram is not None else eta.frame.dim
    if abs(density) < 1e-300:
        raise ValueError("degenerate volume form")
    top = (1 << N) - 1
    B = np.zeros((N, N))
    for a in range(N):
        for b in range(a + 1, N):
            c = coeffs.get(top & ~((1 << a) | (1 << b)))
            if c is None:
                continue
            v = complex(c).real * (-1) ** (a + b - 1) / density
            B[a, b] = v
            B[b, a] = -v
    if gram is None:
        return B
    return gram @ B @ gram


def oneone_to_topminus(beta: np.ndarray, density: float, gram: np.ndarray | None = None) -> dict:
    """Inverse of :func:`topminus_to_oneone`, as ``{mask: value}``."""
    N = beta.shape[0]
    B = beta if gram is None else np.linalg.solve(gram, np.linalg.solve(gram, beta).T).T
    top = (1 << N) - 1
    out = {}
    for a in range(N):
        for b in range(a + 1, N):
            if B[a, b] != 0.0:
                out[top & ~((1 << a) | (1 << b))] = density * (-1) ** (a + b - 1) * B[a, b]
    return out


@dataclass
class RootExtraction:
    input_eta: dict = field(repr=False)
    diagonal_frame: np.ndarray = field(repr=False)
    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    output_omega: np.ndarray = field(repr=False)
    residual: float


def _adapted_basis(vecs: np.ndarray, jm: np.ndarray, gram: np.ndarray) -> list[np.ndarray]:
    """``J``-adapted ``g``-orthonormal pairs ``(e, Je)`` spanning a ``J``-invariant space."""
    accepted: list[np.ndarray] = []
    out = []
    for v in vecs.T:
        w = v.copy()
        for u in accepted:
            w = w - (u @ gram @ w) * u
        nrm = math.sqrt(max(float(w @ gram @ w), 0.0))
        if nrm < 1e-6:
            continue
        e = w / nrm
        je = jm @ e
        accepted.extend([e, je])
        out.append(e)
    return out


def root_extract(eta, gram: np.ndarray, jm: np.ndarray, density: float | None = None,
                 cluster_tol: float = 1e-9, check: bool = True) -> RootExtraction:
    """The strictly positive ``omega`` with ``omega^(m-1) = eta`` in real dimension ``2m``.

    The associated 2-form of ``eta`` is diagonalised against ``g``; its
    eigenvalues come in ``J``-pairs ``a_i``.  Then ``b_1`` solves
    ``a_1 = (m-1)! (a_1/a_2) .. (a_1/a_m) b_1^(m-1)`` and ``b_i = b_1 a_1/a_i``.
    """
    gram = np.asarray(gram, dtype=float)
    jm = np.asarray(jm, dtype=float)
    N = gram.shape[0]
    m = N // 2
    coeffs = eta.coeffs if isinstance(eta, ExteriorForm) else dict(eta)
    coeffs = {k: complex(v).real for k, v in coeffs.items()}
    if density is None:
        density = signed_density(gram, jm)
    beta = topminus_to_oneone(coeffs, density, gram)
    s = _pairing(beta, jm)
    evals, evecs = linalg.eigh(s, gram)
    scale = max(float(np.max(np.abs(evals))), 1e-300)
    if evals[0] <= 1e-10 * scale:
        raise NotStrictlyPositiveError(None, float(evals[0]))
    frame, a = [], []
    start = 0
    while start < N:
        stop = start + 1
        while stop < N and abs(evals[stop] - evals[start]) <= cluster_tol * scale:
            stop += 1
        pairs = _adapted_basis(evecs[:, start:stop], jm, gram)
        lam = float(np.mean(evals[start:stop]))
        for e in pairs:
            frame.append(e)
            a.append(lam)
        start = stop
    a = np.array(a)
    if len(a) != m:
        raise ValueError("eigenvalues do not pair up under J")
    # the Lemma 1 solve, in logarithms for stability
    log_b1 = (math.log(a[0]) - math.lgamma(m) - sum(math.log(a[0] / aj) for aj in a[1:])) / (m - 1) \
        if m > 1 else 0.0
    b = math.exp(log_b1) * a[0] / a
    omega = np.zeros((N, N))
    for bi, e in zip(b, frame):
        u = gram @ e
        w = gram @ (jm @ e)
        omega += bi * (np.outer(u, w) - np.outer(w, u))
    residual = 0.0
    if check:
        got = power_of_matrix(omega, m - 1)
        ref = max(max((abs(v) for v in coeffs.values()), default=0.0), 1e-300)
        keys = set(got) | set(coeffs)
        residual = max(abs(got.get(k, 0.0) - coeffs.get(k, 0.0)) for k in keys) / ref
    return RootExtraction(coeffs, np.array(frame).T, a, b, omega, residual)


# margin search -------------------------------------------------------------

@dataclass
class MarginSearch:
    T_cs: float
    T_sum_c2: float
    T_eig: float
    T_used: float
    per_point: dict = field(repr=False)
    grid: list = field(repr=False)
    cs_dominates: bool = True
    combined_min_eigen: float = 0.0
    safety: float = 1.05
    floor: float = 1e-3


def _restrict(s: np.ndarray, U: np.ndarray, V: np.ndarray | None = None) -> np.ndarray:
    return U.T @ s @ (U if V is None else V)


def _adapted_columns(basis: np.ndarray, jm: np.ndarray) -> np.ndarray:
    """Extend ``basis`` to ``span(basis, J basis)``, keeping independent columns."""
    cols = np.hstack([basis, jm @ basis])
    q, r = np.linalg.qr(cols)
    keep = np.abs(np.diag(r)) > 1e-10
    return cols[:, keep] if keep.sum() == basis.shape[1] else q[:, :np.linalg.matrix_rank(cols)]


def find_T(omegas: Sequence[np.ndarray], omega_primes: Sequence[np.ndarray],
           jms: Sequence[np.ndarray], E: np.ndarray, F: np.ndarray, grid=None,
           safety: float = 1.05, floor: float = 1e-3, tol: float = 1e-10) -> MarginSearch:
    """Smallest ``T`` with ``omega + T omega'`` positive, over a grid of points.

    ``E`` and ``F`` are column bases of complementary ``J``-invariant subspaces.
    Per point three numbers are produced:

    * ``T_eig``: the sharp value, the top eigenvalue of the pencil
      ``(S_FE S_EE^{-1} S_EF - S_FF, S'_FF)`` (Schur complement).
    * ``T_sum_c2``: ``sum c_ij^2`` for ``c_ij = omega(x_i, J y_j)`` in frames
      with ``S_EE = I`` and ``S'_FF = I``.
    * ``T_cs``: ``sum c_ij^2`` plus the negative part of the ``F``-block of
      ``omega`` in the same frame, a valid Cauchy-Schwarz bound.

    ``T_used = safety * max T_eig`` (``floor`` when that is not positive).
    """
    n_pts = len(omegas)
    grid = list(grid) if grid is not None else list(range(n_pts))
    t_eig = np.empty(n_pts)
    t_cs = np.empty(n_pts)
    t_c2 = np.empty(n_pts)
    for i in range(n_pts):
        s = _pairing(omegas[i], jms[i], grid[i])
        sp = _pairing(omega_primes[i], jms[i], grid[i])
        s_ee = _restrict(s, E)
        ev_e = np.linalg.eigvalsh(s_ee)
        if ev_e[0] <= tol * max(1.0, abs(ev_e[-1])):
            raise PreconditionError("omega positive on E", grid[i], float(ev_e[0]))
        sp_ff = _restrict(sp, F)
        ev_f = np.linalg.eigvalsh(sp_ff)
        if ev_f[0] <= tol * max(1.0, abs(ev_f[-1])):
            raise PreconditionError("omega' positive on F", grid[i], float(ev_f[0]))
        leak = float(np.max(np.abs(omega_primes[i] @ E))) if E.size else 0.0
        if leak > 1e-9 * max(1.0, float(np.max(np.abs(omega_primes[i])))):
            raise PreconditionError("E in ker omega'", grid[i], leak)
        s_ef = _restrict(s, E, F)
        s_ff = _restrict(s, F)
        q = s_ef.T @ np.linalg.solve(s_ee, s_ef) - s_ff
        t_eig[i] = float(linalg.eigh(q, sp_ff, eigvals_only=True)[-1])
        le = np.linalg.cholesky(s_ee)
        lf = np.linalg.cholesky(sp_ff)
        c = linalg.solve_triangular(le, s_ef, lower=True)
        c = linalg.solve_triangular(lf, c.T, lower=True).T
        w3 = linalg.solve_triangular(lf, linalg.solve_triangular(lf, s_ff, lower=True).T, lower=True).T
        neg3 = max(0.0, -float(np.linalg.eigvalsh(0.5 * (w3 + w3.T))[0]))
        t_c2[i] = float(np.sum(c * c))
        t_cs[i] = t_c2[i] + neg3
    teig_max = float(np.max(t_eig))
    T_used = safety * teig_max if teig_max > 0 else floor
    T_used = max(T_used, floor)
    combined = min(float(linalg.eigh(_pairing(omegas[i] + T_used * omega_primes[i], jms[i]),
                                     eigvals_only=True)[0]) for i in range(n_pts))
    return MarginSearch(
        T_cs=float(np.max(t_cs)), T_sum_c2=float(np.max(t_c2)), T_eig=teig_max, T_used=T_used,
        per_point={"T_eig": t_eig, "T_cs": t_cs, "T_sum_c2": t_c2}, grid=grid,
        cs_dominates=bool(np.all(t_cs >= t_eig - 1e-12 * np.maximum(1.0, np.abs(t_eig)))),
        combined_min_eigen=combined, safety=safety, floor=floor)


def synthetic_cross_instance(c: float = 0.8, omega3: float = 0.0):
    """``omega = e1^e2 + c(e1^f1 + e2^f2) + omega3 f1^f2`` and ``omega' = f1^f2`` on ``R^4``.

    Coordinates ``(e1, e2, f1, f2)`` with ``J e1 = e2``, ``J f1 = f2``.  The
    sharp margin is ``c^2 - omega3``.
    """
    jm = np.array([[0., -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
    w = np.zeros((4, 4))
    w[0, 1], w[0, 2], w[1, 3], w[2, 3] = 1.0, c, c, omega3
    w = w - w.T
    wp = np.zeros((4, 4))
    wp[2, 3] = 1.0
    wp = wp - wp.T
    E = np.eye(4)[:, :2]
    F = np.eye(4)[:, 2:]
    return w, wp, jm, E, F


def direction_grid(dim: int = 4, count: int = 10_000, seed: int = 0) -> np.ndarray:
    """Unit directions: a Hopf-coordinate lattice on ``S^3`` for ``dim = 4``, else random normals."""
    if dim == 4:
        # 16 angles per circle (multiples of pi/8); the rest of the budget refines psi
        n_ang = 16
        n_psi = max(2, count // (n_ang * n_ang))
        psi = (np.arange(n_psi) + 0.5) * (math.pi / 2) / n_psi
        th = np.arange(n_ang) * 2 * math.pi / n_ang
        P, T1, T2 = np.meshgrid(psi, th, th, indexing="ij")
        d = np.stack([np.cos(P) * np.cos(T1), np.cos(P) * np.sin(T1),
                      np.sin(P) * np.cos(T2), np.sin(P) * np.sin(T2)], axis=-1)
        return d.reshape(-1, 4)
    rng = XorShift64Star(seed)
    d = rng.normal_array(count, dim)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def direction_sweep_min(beta: np.ndarray, jm: np.ndarray, directions: np.ndarray) -> float:
    """``min beta(X, JX)`` over unit directions (brute force, no eigen-solver)."""
    jx = directions @ jm.T
    return float(np.min(np.einsum("pa,ab,pb->p", directions, beta, jx)))


# Theorem 2 pipeline ---------------------------------------------------------

# s in ``mu = T omega_M^n + s dd^c(omega_M^(n-1))``, with dd^c built from the
# twistor complex structure; its value is +4 omega_FS ^ omega_M^(n-1) on
# hyperkahler bases in every dimension, so both entries are +1.
SIGN_TABLE = {"n=2": 1, "n>2": 1}


def synthesis_sign(n: int) -> int:
    return SIGN_TABLE["n=2" if n == 2 else "n>2"]


def twistor_grid(ts, per_axis: int = 10, fiber_box=(-1.5, 1.5), base_axis: int = 0) -> np.ndarray:
    """``per_axis^3`` points on the axes ``(q_base_axis, x, y)``; other base coordinates at the box center."""
    lo, hi = ts.model.box
    if ts.model.periodic:
        qs = lo + (hi - lo) * np.arange(per_axis) / per_axis
    else:
        qs = np.linspace(lo, hi, per_axis)
    fs = np.linspace(fiber_box[0], fiber_box[1], per_axis)
    center = 0.5 * (lo + hi)
    Q, X, Y = np.meshgrid(qs, fs, fs, indexing="ij")
    pts = np.full((Q.size, ts.ring.nvars), center)
    pts[:, base_axis] = Q.ravel()
    pts[:, ts.ring.ix] = X.ravel()
    pts[:, ts.ring.iy] = Y.ravel()
    return pts


@dataclass
class BalancedCandidate:
    mu: ExteriorForm = field(repr=False)
    omega_M_power: ExteriorForm = field(repr=False)
    ddc: ExteriorForm = field(repr=False)
    T: float
    sign: int
    closed: bool
    closed_parts: dict
    margin: MarginSearch | None
    positivity: PositivityReport
    spot_checks: dict
    grid: np.ndarray = field(repr=False)

    @property
    def certified(self) -> bool:
        return self.closed and self.positivity.positive and self.spot_checks["min"] > 0


def _assoc_on_grid(form: ExteriorForm, grams, jms, dens, pts) -> list[np.ndarray]:
    ev = FormEvaluator(form)
    vals = ev(pts)
    out = []
    for row, G, d in zip(vals, grams, dens):
        out.append(topminus_to_oneone(dict(zip(ev.masks, row)), d, G))
    return out


def _geometry_on_grid(ts, pts):
    grams = MatrixEvaluator(ts.metric.gram)(pts)
    jms = MatrixEvaluator(ts.structure.matrix)(pts)
    dens = np.array([signed_density(G, J) for G, J in zip(grams, jms)])
    return grams, jms, dens


def is_strictly_positive_nn(form: ExteriorForm, ts, grid, margin: float = 1e-10) -> PositivityReport:
    """Positivity of a real top-minus-two form on ``Z`` through its associated 2-form."""
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    grams, jms, dens = _geometry_on_grid(ts, pts)
    mats = _assoc_on_grid(form, grams, jms, dens, pts)
    return _eigen_report(mats, jms, grams, pts, margin, 1e-8)


def synthesize_balanced_candidate(ts, grid=None, T: float | None = None, per_axis: int = 10,
                                  spot_checks: int = 100, seed: int = 7,
                                  sign: int | None = None) -> BalancedCandidate:
    """``mu = T omega_M^n + s dd^c(omega_M^(n-1))`` with exact closedness and sampled positivity.

    ``dd^c`` is ``d`` composed with ``d^c`` of the twistor complex structure.
    ``T`` comes from :func:`find_T` on the grid with ``E`` the base directions
    and ``F`` the fiber directions, unless given.
    """
    from .twistor import ddc_twistor

    n = ts.n
    s = synthesis_sign(n) if sign is None else sign
    A = ts.omega_M.power(n)
    ddc = ddc_twistor(ts, ts.omega_M.power(n - 1))
    dA, dB = A.d(), ddc.d()
    closed_parts = {"d(omega_M^n)": not dA, "d(ddc(omega_M^(n-1)))": not dB}
    pts = twistor_grid(ts, per_axis) if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    grams, jms, dens = _geometry_on_grid(ts, pts)
    margin = None
    if T is None:
        N = ts.dim
        E = np.eye(N)[:, :N - 2]
        F = np.eye(N)[:, N - 2:]
        omegas = [s * m for m in _assoc_on_grid(ddc, grams, jms, dens, pts)]
        primes = _assoc_on_grid(A, grams, jms, dens, pts)
        margin = find_T(omegas, primes, jms, E, F, [tuple(p) for p in pts])
        T = margin.T_used
    Tq = _as_exact(T)
    mu = A * Tq + ddc * s
    closed = not mu.d()
    mats = _assoc_on_grid(mu, grams, jms, dens, pts)
    report = _eigen_report(mats, jms, grams, pts, 1e-10, 1e-8)
    spots = _spot_checks(mu, ts, pts, spot_checks, seed)
    return BalancedCandidate(mu, A, ddc, float(T), s, closed, closed_parts, margin, report, spots, pts)


def _as_exact(T: float):
    from fractions import Fraction
    return Fraction(T).limit_denominator(10 ** 12)


def _spot_checks(mu: ExteriorForm, ts, pts: np.ndarray, count: int, seed: int) -> dict:
    """``mu ^ alpha ^ I alpha`` over the signed volume density for random ``alpha``."""
    rng = XorShift64Star(seed)
    N = ts.dim
    frame = numeric_frame(N)
    ev = FormEvaluator(mu)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    chosen = np.array([[rng.uniform(lo[j], hi[j]) if hi[j] > lo[j] else lo[j] for j in range(N)]
                       for _ in range(count)])
    grams, jms, dens = _geometry_on_grid(ts, chosen)
    vals = ev(chosen)
    top = (1 << N) - 1
    worst = math.inf
    for row, G, jm, d in zip(vals, grams, jms, dens):
        alpha = np.array(rng.normal_array(N))
        ialpha = -(alpha @ jm)
        a_form = ExteriorForm(frame, {1 << i: float(v) for i, v in enumerate(alpha)})
        ia_form = ExteriorForm(frame, {1 << i: float(v) for i, v in enumerate(ialpha)})
        m_form = ExteriorForm(frame, {mk: float(v.real) for mk, v in zip(ev.masks, row)})
        t = m_form.wedge(a_form).wedge(ia_form).coeffs.get(top, 0.0) / d
        worst = min(worst, t / float(alpha @ np.linalg.solve(G, alpha)))
    return {"count": count, "min": float(worst)}


@dataclass
class ExtractionReport:
    points: np.ndarray = field(repr=False)
    b_values: np.ndarray = field(repr=False)
    max_residual: float
    continuity: dict
    omegas: list = field(repr=False, default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_residual <= 1e-10 and self.continuity.get("ok", False)


def _extract_on(mu: ExteriorForm, ts, pts: np.ndarray):
    grams, jms, dens = _geometry_on_grid(ts, pts)
    ev = FormEvaluator(mu)
    vals = ev(pts)
    bs, res, omegas = [], [], []
    for row, G, J, d, p in zip(vals, grams, jms, dens, pts):
        eta = {m: v.real for m, v in zip(ev.masks, row)}
        try:
            r = root_extract(eta, G, J, d)
        except NotStrictlyPositiveError as exc:
            raise NotStrictlyPositiveError(tuple(float(v) for v in p), exc.min_eigen) from None
        bs.append(np.sort(r.b_coeffs))
        res.append(r.residual)
        omegas.append(r.output_omega)
    return np.array(bs), np.array(res), omegas


def extract_balanced_metric(mu: ExteriorForm, ts, per_axis: int = 10, coarse_axis: int | None = None,
                            fiber_box=(-1.5, 1.5)) -> ExtractionReport:
    """Root of ``mu`` at every grid point plus a two-resolution continuity study.

    Sorted ``b_i`` are compared between neighbouring grid points.  The coarse
    grid passes when its largest jump is below ``10 * h_coarse * L`` with
    ``L`` the largest difference quotient seen on the fine grid.
    """
    pts = twistor_grid(ts, per_axis, fiber_box)
    bs, res, omegas = _extract_on(mu, ts, pts)
    coarse_axis = coarse_axis or max(2, per_axis // 2)
    cpts = twistor_grid(ts, coarse_axis, fiber_box)
    cbs, cres, _ = _extract_on(mu, ts, cpts)
    span = np.array([ts.model.box[1] - ts.model.box[0], fiber_box[1] - fiber_box[0],
                     fiber_box[1] - fiber_box[0]])

    def jumps(b, m):
        cube = b.reshape(m, m, m, -1)
        h = span / max(m - 1, 1)
        worst_jump, worst_quot = 0.0, 0.0
        for ax in range(3):
            d = np.abs(np.diff(cube, axis=ax))
            if d.size:
                worst_jump = max(worst_jump, float(d.max()))
                worst_quot = max(worst_quot, float(d.max()) / h[ax])
        return worst_jump, worst_quot, float(h.max())

    fj, fq, fh = jumps(bs, per_axis)
    cj, cq, ch = jumps(cbs, coarse_axis)
    continuity = {
        "fine": {"per_axis": per_axis, "max_jump": fj, "max_quotient": fq},
        "coarse": {"per_axis": coarse_axis, "max_jump": cj, "max_quotient": cq},
        "bound": 10 * ch * fq,
        "ok": bool(cj <= 10 * ch * fq + 1e-12),
    }
    return ExtractionReport(pts, bs, float(max(res.max(), cres.max())), continuity, omegas)
