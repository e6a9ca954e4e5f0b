"""Acceptance criteria 1-10 at their stated tolerances and time budgets.

Each criterion writes one PASS/FAIL line to the terminal summary.  Two
literal constants cannot be reproduced by exact computation; those checks
are kept verbatim as strict xfails and the summary shows them as FAIL with
the measured value.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import TRIALS, Gen, record_criterion
from twistorcert.hermitian import balanced_report, codifferential_omega, torsion_trace_bismut
from twistorcert.positivity import (direction_grid, direction_sweep_min, extract_balanced_metric, find_T,
                                    power_of_matrix, root_extract, synthesize_balanced_candidate,
                                    synthetic_cross_instance)
from twistorcert.quaternionic import make_model
from twistorcert.ringforms import ExteriorForm, Frame, GaussianRational, PolyRing
from twistorcert.twistor import (TwistorSpace, chart_ring, ddc_power, ddc_twistor, derivative_table,
                                 nabla_vertical, proportionality, psi_identity, verify_theorem1)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.fixture(scope="module")
def twistors():
    return {(name, k): TwistorSpace(make_model(name, k)) for name in ("flat", "conformal") for k in (1, 2)}


def test_criterion_01_derivative_table():
    with Timer() as t:
        table = derivative_table(Frame(chart_ring()))
    ok = len(table) == 9 and all(not r for r in table.values()) and t.elapsed < 1.0
    record_criterion(1, ok, f"9 formulas exact in {t.elapsed:.3f}s")
    assert ok


def test_criterion_02_fs_identity():
    with Timer() as t:
        residuals = [nabla_vertical(TwistorSpace(make_model("flat", k)))["fs_identity_residual"] for k in (1, 2)]
    ok = all(not r for r in residuals) and t.elapsed < 10.0
    record_criterion(2, ok, f"k=1,2 exact in {t.elapsed:.2f}s")
    assert ok


def test_criterion_03_measured_constant(twistors):
    # what the exact expansion gives; the literal criterion is below
    ts = twistors[("flat", 2)]
    with Timer() as t:
        res = psi_identity(ts)
    assert res["measured_at_z1"] == Fraction(2, 3)
    assert res["measured"] == Fraction(2, 3)
    assert t.elapsed < 30.0


@pytest.mark.xfail(strict=True, reason="exact constant at n = 4 is 2/3, not 2")
def test_criterion_03_literal(twistors):
    ts = twistors[("flat", 2)]
    gen = Gen()
    pts = [gen.rational_point(ts.ring.nvars) for _ in range(20)]
    with Timer() as t:
        res = psi_identity(ts, pts, coefficient=2)
    ok = (not res["at_z1_residual"] and all(not r for _, r in res["point_residuals"])
          and not res["symbolic_residual"] and t.elapsed < 30.0)
    record_criterion(3, ok, f"required 2, measured {res['measured_at_z1']} at z=1 and at 20 chart points "
                            f"(unattainable, strict xfail)")
    assert ok


def test_criterion_04_n2(twistors):
    with Timer() as t:
        r = ddc_power(twistors[("flat", 1)], coefficient=-4)
    ok = not r["residual"] and t.elapsed < 60.0
    record_criterion(4, ok, "n=2: -4 exact")
    assert ok


@pytest.mark.xfail(strict=True, reason="exact coefficient at n = 4 is -4 (fiber) or +4 (twistor), not 12")
def test_criterion_04_n4_literal(twistors):
    ts = twistors[("flat", 2)]
    with Timer() as t:
        r = ddc_power(ts, coefficient=12)
        power = ts.omega_M.power(3)
        twistor_value = proportionality(ddc_twistor(ts, power), ts.omega_FS.wedge(power))
    ok = not r["residual"] and t.elapsed < 60.0
    record_criterion(4, ok, f"n=4: required 12, measured {r['measured']} (fiber) / {twistor_value} (twistor) "
                            f"(unattainable, strict xfail)")
    assert ok


def test_criterion_05_theorem1(twistors):
    with Timer() as t:
        flat = [verify_theorem1(twistors[("flat", k)]) for k in (1, 2)]
        conf = verify_theorem1(twistors[("conformal", 1)])
    ok = (all(r.holds and all(r.term_ok(name) for name in r.terms) and len(r.terms) == 4 for r in flat)
          and not conf.holds and t.elapsed < 60.0)
    record_criterion(5, ok, f"flat k=1,2 exact with 4 terms, conformal residual nonzero, {t.elapsed:.2f}s")
    assert ok


def test_criterion_06_root_roundtrip():
    rng = Gen().rng
    worst = {}
    with Timer() as t:
        for m in (2, 3, 4):
            J = np.zeros((2 * m, 2 * m))
            for i in range(m):
                J[2 * i + 1, 2 * i], J[2 * i, 2 * i + 1] = 1.0, -1.0
            worst[m] = 0.0
            for _ in range(100):
                x = rng.normal_array(2 * m, 2 * m)
                S = x @ x.T + 0.1 * np.eye(2 * m)
                S = 0.5 * (S + J.T @ S @ J)
                beta = -S @ J
                x = rng.normal_array(2 * m, 2 * m)
                G = x @ x.T + np.eye(2 * m)
                G = 0.5 * (G + J.T @ G @ J)
                r = root_extract(power_of_matrix(beta, m - 1), G, J)
                worst[m] = max(worst[m], float(np.max(np.abs(r.output_omega - beta)) / np.max(np.abs(beta))))
    ok = max(worst.values()) <= 1e-10 and t.elapsed < 30.0
    record_criterion(6, ok, f"max relative error {max(worst.values()):.1e} over 300 trials")
    assert ok


def test_criterion_07_margin():
    c, eps = 0.8, 0.02
    with Timer() as t:
        w, wp, J, E, F = synthetic_cross_instance(c)
        ms = find_T([w], [wp], [J], E, F)
        dirs = direction_grid(4, 10_000)
        above = direction_sweep_min(w + (ms.T_eig + eps) * wp, J, dirs)
        below = direction_sweep_min(w + (ms.T_eig - eps) * wp, J, dirs)
        cs = np.linspace(0.1, 1.5, 8)
        o3 = np.linspace(-0.5, 0.5, 8)
        inst = [synthetic_cross_instance(a, b) for a in cs for b in o3]
        fam = find_T([i[0] for i in inst], [i[1] for i in inst], [i[2] for i in inst], E, F)
    ok = (abs(ms.T_eig - c * c) < 1e-12 and above > 0 and below < 0 and fam.cs_dominates
          and len(dirs) >= 9_000 and t.elapsed < 60.0)
    record_criterion(7, ok, f"T_eig={ms.T_eig:.4f}, sweep min {below:+.4f} / {above:+.4f} at T_eig -/+ {eps} "
                            f"over {len(dirs)} directions, T_cs >= T_eig at 64 points")
    assert ok


def test_criterion_08_theorem2(twistors):
    details, ok = [], True
    with Timer() as t:
        for (name, k), ts in sorted(twistors.items()):
            cand = synthesize_balanced_candidate(ts, per_axis=10)
            ex = extract_balanced_metric(cand.mu, ts, per_axis=10)
            good = (cand.closed and cand.positivity.positive and cand.positivity.samples >= 1000
                    and ex.max_residual <= 1e-10)
            ok = ok and good
            details.append(f"{name} k={k} min eig {cand.positivity.min_eigen:.2e} root res {ex.max_residual:.1e}")
    ok = ok and t.elapsed < 300.0
    record_criterion(8, ok, ", ".join(details) + f", {t.elapsed:.1f}s")
    assert ok


def test_criterion_09_balanced_equivalence():
    gen = Gen(9)
    pts = [tuple(gen.rational_point(4, -1, 1)) for _ in range(50)]
    ok = True
    with Timer() as t:
        flat = make_model("flat", 1)
        conf = make_model("conformal", 1)
        rf = balanced_report(flat.metric, flat.triple.I, pts)
        rc = balanced_report(conf.metric, conf.triple.I, pts)
        ok = rf.balanced and rc.consistent and not rc.balanced
        worst = 0.0
        for m in (flat, conf):
            for p in pts:
                tb = np.asarray(torsion_trace_bismut(m.metric, m.triple.I, p), dtype=complex)
                fd = np.asarray(codifferential_omega(m.metric, m.triple.I, [float(v) for v in p],
                                                     method="finite-difference"), dtype=complex)
                worst = max(worst, float(np.max(np.abs(tb + fd))))
    ok = ok and worst <= 1e-8 and t.elapsed < 60.0
    record_criterion(9, ok, f"co-vanish (flat) / co-fail (conformal), |tau_B + d*omega| <= {worst:.1e} "
                            f"at 50 points against finite differences")
    assert ok


def test_criterion_10_structural_suite():
    gen = Gen()
    frame = Frame(PolyRing(["q", "x", "y"], chart=("x", "y")))
    flat = make_model("flat", 1)
    I = flat.triple.I
    i_unit = GaussianRational(0, 1)
    counts = dict.fromkeys(["d2", "leibniz", "graded", "projectors", "star"], 0)
    from twistorcert.hermitian import hodge_star_numeric, volume_density
    with Timer() as t:
        for _ in range(TRIALS):
            p = gen.rng.randint(0, 1)
            a, b = gen.form(frame, p), gen.form(frame, 1)
            counts["d2"] += not a.d().d()
            counts["leibniz"] += a.wedge(b).d() == a.d().wedge(b) + a.wedge(b.d()) * (-1) ** p
            counts["graded"] += a.wedge(b) == b.wedge(a) * (-1) ** p
            f = gen.form(I.frame, gen.rng.randint(1, 3), maxdeg=1)
            parts = I.bigrade(f)
            total = ExteriorForm(I.frame, {})
            good = True
            for (pp, qq), piece in parts.items():
                good = good and I.act(piece) == piece * i_unit ** ((qq - pp) % 4)
                total = total + piece
            counts["projectors"] += good and total == f
            n = 4
            B = [[Fraction(0)] * n for _ in range(n)]
            for r in range(n):
                B[r][r] = Fraction(gen.rng.randint(1, 4), gen.rng.randint(1, 3))
                for c in range(r + 1, n):
                    B[r][c] = gen.rng.rational(-1, 1, 3)
            gram = [[GaussianRational(sum(B[s][r] * B[s][c] for s in range(n))) for c in range(n)] for r in range(n)]
            dens = volume_density(gram, None, None)
            deg = gen.rng.randint(0, n)
            form = ExteriorForm(I.frame, {gen.mask(n, deg): gen.gauss()})
            counts["star"] += hodge_star_numeric(hodge_star_numeric(form, gram, dens), gram, dens) == \
                form * (-1) ** (deg * (n - deg))
        nij = all(TwistorSpace(make_model("flat", k)).structure.is_integrable() for k in (1, 2))
    ok = all(v == TRIALS for v in counts.values()) and nij and t.elapsed < 60.0
    record_criterion(10, ok, f"{TRIALS} trials x 5 laws exact, Nijenhuis zero for k=1,2, {t.elapsed:.1f}s")
    assert ok
