"""Acceptance criteria A1-A10, at the stated tolerances and runtime budgets.

Each test records a one-line verdict; the lines are printed in the pytest
terminal summary under "acceptance criteria".
"""

import math
import time

import numpy as np

from conftest import record
from curvfunc import cli
from curvfunc import geometry as geo
from curvfunc.euler_lagrange import constrained_residual_Ft, constrained_residual_Fts, cotton, identity_gaps
from curvfunc.functionals import gauss_bonnet_check
from curvfunc.rigidity import FHalfClass, classify_f_half, f_half_spectrum
from curvfunc.solver import SolveConfig, solve, sweep
from curvfunc.suites import (
    _random_su2_metric,
    suite_cubic,
    suite_gradient,
    suite_prop_est,
    suite_prop_est2,
    suite_rng,
    suite_scale,
)
from curvfunc.tensor_core import sq_norm


class Verdict:
    """Collects named checks for one criterion and records the outcome."""

    def __init__(self, key):
        self.key = key
        self.failures = []
        self.notes = []
        self.t0 = time.perf_counter()

    def check(self, ok, message):
        if not ok:
            self.failures.append(message)

    def note(self, message):
        self.notes.append(message)

    def finish(self, budget):
        elapsed = time.perf_counter() - self.t0
        if budget is not None:
            self.check(elapsed < budget, f"runtime {elapsed:.1f}s over {budget}s")
        detail = "; ".join(self.failures) if self.failures else "; ".join(self.notes)
        record(self.key, not self.failures, f"({elapsed:.1f}s) {detail}")
        assert not self.failures, "; ".join(self.failures)


def test_A1_einstein_criticality():
    v = Verdict("A1")
    worst = 0.0
    for n in (3, 4, 5, 6):
        hc = geo.curvature_of(geo.RoundSphere(n))
        for t in (-1.0, -0.5, -1.0 / 3.0, 0.0, 1.0):
            for s in (0.0, 1.0):
                r = constrained_residual_Fts(hc, t, s).tensor_norm
                worst = max(worst, r)
                v.check(r < 1e-10, f"S^{n} t={t} s={s} residual {r:.2e}")
    v.note(f"max residual {worst:.2e} < 1e-10 over 40 cases")
    v.finish(5)


def test_A2_gauss_bonnet():
    v = Verdict("A2")
    integral, chi = gauss_bonnet_check(geo.curvature_of(geo.RoundSphere(4)))
    rel = abs(integral - 64 * math.pi ** 2) / (64 * math.pi ** 2)
    v.check(rel < 1e-12, f"S^4 relative error {rel:.2e}")
    worst = 0.0
    for a, b in ((1.0, 1.0), (2.0, 1.0), (5.0, 0.3)):
        _, est = gauss_bonnet_check(geo.curvature_of(geo.ProductSphereSphere(a, b)))
        worst = max(worst, abs(est - 4))
        v.check(abs(est - 4) < 1e-10, f"S2({a})xS2({b}) estimate {est!r}")
    v.note(f"S^4 rel err {rel:.1e}, S2xS2 max |est-4| {worst:.1e}")
    v.finish(1)


def test_A3_minus_half_products():
    v = Verdict("A3")
    cases = [
        ("S2(1)xR", geo.SphereFlat(3, 1.0), FHalfClass.S2xFLAT, False),
        ("S2(1)xS2(1)", geo.ProductSphereSphere(1.0, 1.0), FHalfClass.EINSTEIN, False),
        ("S2(2)xS2(1)", geo.ProductSphereSphere(2.0, 1.0), FHalfClass.S2xS2, True),
        ("S2(5)xS2(0.3)", geo.ProductSphereSphere(5.0, 0.3), FHalfClass.S2xS2, True),
        ("S2(1)xT3", geo.SphereFlat(5, 1.0, (1.0, 1.0, 1.0)), FHalfClass.S2xFLAT, False),
    ]
    for label, spec, expected, unequal in cases:
        hc = geo.curvature_of(spec)
        r = constrained_residual_Ft(hc, -0.5).tensor_norm
        v.check(r < 1e-10, f"{label} residual at -1/2 {r:.2e}")
        if unequal:
            for t in (-0.6, -0.4):
                r = constrained_residual_Ft(hc, t).tensor_norm
                v.check(r > 1e-2, f"{label} residual at {t} only {r:.2e}")
        cp = hc.cp
        mu = np.sort(cp.ricci_spectrum)[::-1]
        matched = False
        for m in range(0, cp.n + 1):
            sp = f_half_spectrum(cp.R, cp.e_sq, cp.n, m)
            pred = np.array([sp.mu_plus] * m + [sp.mu_minus] * (cp.n - m))
            if np.max(np.abs(mu - pred)) < 1e-10 and abs(sp.multiplicity_residual) < 1e-10:
                matched = True
        v.check(matched, f"{label} Ricci spectrum {mu} not matched by the admissible roots")
        got = classify_f_half(hc)
        v.check(got == expected, f"{label} classified {got.value}, expected {expected.value}")
    v.note("5 instances critical, spectra and classes match")
    v.finish(5)


def test_A4_berger_landscape():
    v = Verdict("A4")
    res = sweep("berger", np.linspace(-0.45, 0.75, 25))
    failed = [r.status for r in res.rows if r.point is None]
    v.check(not failed, f"sweep failures: {failed}")
    branch = res.non_einstein()
    ts = sorted({p.t for p in branch})
    v.check(len(ts) == 25, f"non-Einstein branch found at {len(ts)}/25 grid points")
    worst_res = max((p.residual_tensor_norm for p in branch), default=math.inf)
    worst_sec = min((p.min_sectional for p in branch), default=-math.inf)
    v.check(worst_res < 1e-8, f"branch residual {worst_res:.2e}")
    v.check(worst_sec >= -1e-8, f"branch min_sectional {worst_sec:.2e}")
    v.check(all(p.sectional_flag == "exact" for p in branch), "sectional flag not exact")
    at_quarter = [p for p in branch if abs(p.t + 0.25) < 1e-12]
    v.check(len(at_quarter) == 1, "no non-Einstein point at t=-0.25")
    sweep_time = time.perf_counter() - v.t0
    v.check(sweep_time < 120, f"sweep took {sweep_time:.1f}s")
    # exploratory: beyond t = 3/4 the branch leaves non-negative curvature
    beyond = [p for p in solve("berger", 0.8).points if not p.is_einstein]
    v.check(len(beyond) == 1 and beyond[0].min_sectional < -1e-6,
            f"t=0.8 branch min_sectional {[p.min_sectional for p in beyond]}")
    v.note(f"branch at 25/25 t; max residual {worst_res:.1e}; min sectional {worst_sec:.1e}; "
           f"t=0.8 min sectional {beyond[0].min_sectional:.3f} (exploratory); sweep {sweep_time:.0f}s")
    v.finish(None)


def test_A5_diagonal_su2_consistency():
    v = Verdict("A5")
    count = 0
    for t in (-0.6, -0.75, -1.0):
        for p in solve("diagonal-su2", t, config=SolveConfig(starts=64)).points:
            count += 1
            e = math.sqrt(p.E_norm_sq)
            v.check(e < 1e-8 or p.min_sectional < -1e-8,
                    f"t={t} params={p.params}: |E|={e:.2e}, min_sectional={p.min_sectional:.2e}")
    v.note(f"{count} critical points, all Einstein or with a negative sectional curvature")
    v.finish(120)


def test_A6_inequality_suites():
    v = Verdict("A6")
    for suite in (suite_prop_est, suite_prop_est2, suite_cubic):
        out = suite(0)
        v.check(out.passed, f"{out.name}: {out.counterexample}")
        v.note(f"{out.name} worst {out.max_violation:.1e}")
    # witnesses, exact
    from curvfunc.rigidity import SpectralData, cubic_bound_gap, prop_est_gap
    g = cubic_bound_gap(np.diag([1.0, 1.0, -2.0]))
    v.check(abs(g) < 1e-12, f"cubic witness gap {g!r}")
    gap, _ = prop_est_gap(SpectralData(4, np.zeros(4), np.ones((4, 4)) - np.eye(4)))
    v.check(gap == 0.0, f"prop_est witness gap {gap!r}")
    v.finish(10)


def test_A7_identity_suites():
    v = Verdict("A7")
    rng = suite_rng(0, "A7")
    worst = 0.0
    for _ in range(200):
        hc = geo.curvature_of(geo.LeftInvariant(geo.su2_structure_constants(), _random_su2_metric(rng)))
        gap = identity_gaps(hc, 0.0).cotton_norm_gap
        scale = max(1.0, sq_norm(hc.nablaE) + 0.5 * sq_norm(cotton(hc)))
        worst = max(worst, abs(gap) / scale)
    v.check(worst < 1e-11, f"cotton norm gap {worst:.2e} (relative to term size)")
    critical = []
    for t in (-0.25, 0.0, 0.5):
        critical += [p for p in solve("berger", t, config=SolveConfig(starts=8)).points]
    w = max(abs(identity_gaps(geo.curvature_of(geo.Berger(p.params[0])), p.t).weitzenbock_gap)
            for p in critical)
    c = max(abs(identity_gaps(geo.curvature_of(geo.Berger(p.params[0])), p.t).cotton_integral_gap)
            for p in critical)
    control = identity_gaps(geo.curvature_of(geo.Berger(4.0)), 0.0).weitzenbock_gap
    v.check(w < 1e-8, f"Weitzenbock gap at critical points {w:.2e}")
    v.check(c < 1e-8, f"Cotton integral gap at critical points {c:.2e}")
    v.check(abs(control) > 1e-3, f"control gap {control:.2e}")
    v.note(f"cotton {worst:.1e}; Weitzenbock {w:.1e} on {len(critical)} points; "
           f"control {control:.0f}; Cotton integral {c:.1e}")
    v.finish(30)


def test_A8_gradient_check():
    v = Verdict("A8")
    out = suite_gradient(0)
    v.check(out.passed, f"{out.counterexample}")
    v.note(f"max rel err {out.max_violation:.1e} over {out.trials} samples")
    v.finish(30)


def test_A9_scale_invariance():
    v = Verdict("A9")
    out = suite_scale(0)
    v.check(out.passed and out.trials == 100, f"{out.counterexample}")
    v.note(f"max rel err {out.max_violation:.1e} over {out.trials} rescalings")
    v.finish(5)


def test_A10_determinism(tmp_path):
    v = Verdict("A10")
    paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
    codes = [cli.main(["verify", "--suite", "all", "--seed", "7", "--report", str(p)]) for p in paths]
    v.check(codes == [0, 0], f"exit codes {codes}")
    same = paths[0].read_bytes() == paths[1].read_bytes()
    v.check(same, "reports differ")
    v.note(f"byte-identical reports ({len(paths[0].read_bytes())} bytes), exit 0")
    v.finish(None)
