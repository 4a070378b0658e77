"""Seeded property suites behind ``curvfunc verify``.

Each suite collects named checks (observed value against a threshold) and
reports the worst one. Randomness comes from one seed split per suite by a
stable key, so suites can run in any order or in parallel without changing
their draws.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from . import tensor_core as tc
from .errors import ConventionError, InvalidInput, PreconditionError
from .euler_lagrange import constrained_residual_Ft, constrained_residual_Fts, cotton, identity_gaps
from .functionals import FunctionalParams, eval_functional, gauss_bonnet_check, unit_volume_density
from .report import SuiteOutcome
from .tensor_core import sq_norm
from .rigidity import (
    FHalfClass,
    SpectralData,
    classify_f_half,
    cubic_bound_gap,
    f_half_spectrum,
    prop_est2_gap,
    prop_est_gap,
)
from .solver import FAMILIES, SolveConfig, analytic_log_gradient, reduced_value, solve


def suite_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),)))


class _Checks:
    """Accumulates (value, threshold) pairs; keeps the first failure as counterexample."""

    def __init__(self, name: str):
        self.name = name
        self.trials = 0
        self.worst = 0.0
        self.worst_threshold = math.inf
        self.worst_ratio = -math.inf
        self.counterexample: Optional[dict] = None
        self.per_check: dict = {}

    def add(self, label: str, value: float, threshold: float, context: Optional[dict] = None):
        """Record ``value``, which passes when value <= threshold (NaN fails)."""
        self.trials += 1
        value = float(value)
        ok = value <= threshold
        if threshold > 0 and math.isfinite(value):
            ratio = value / threshold
        else:
            ratio = 0.0 if ok else math.inf
        prev = self.per_check.get(label)
        if prev is None or not value <= prev[0]:
            self.per_check[label] = [value, threshold]
        if not ratio <= self.worst_ratio:
            self.worst_ratio, self.worst, self.worst_threshold = ratio, value, threshold
        if not ok and self.counterexample is None:
            self.counterexample = {"check": label, "value": value, "threshold": threshold,
                                   **(context or {})}

    def error(self, label: str, exc: Exception, context: Optional[dict] = None):
        self.add(label, math.inf, 0.0, {"error": f"{type(exc).__name__}: {exc}", **(context or {})})

    def outcome(self) -> SuiteOutcome:
        return SuiteOutcome(
            name=self.name, passed=self.counterexample is None, max_violation=self.worst,
            threshold=self.worst_threshold, trials=self.trials,
            counterexample=self.counterexample, details={"checks": self.per_check},
        )


_GUARDED = (InvalidInput, ConventionError, PreconditionError, np.linalg.LinAlgError)


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))


def _random_su2_metric(rng) -> np.ndarray:
    """SPD Q with eigenvalues log-uniform in [0.3, 3] and a random orientation."""
    V, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    return V @ np.diag(np.exp(rng.uniform(math.log(0.3), math.log(3.0), 3))) @ V.T


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------

def suite_decomposition(seed: int) -> SuiteOutcome:
    """Rm -> (W, Ric, R) -> Rm roundtrip and the norm split, n = 3..8."""
    ch = _Checks("decomposition")
    rng = suite_rng(seed, ch.name)
    for n in range(3, 9):
        for trial in range(20):
            ctx = {"n": n, "trial": trial}
            try:
                Rm = tc.random_riem4(rng, n)
                cp = tc.curvature_point(Rm)
                back = tc.reconstruct_riemann(cp.W, cp.Ric, cp.R)
            except _GUARDED as exc:
                ch.error("roundtrip", exc, ctx)
                continue
            ch.add("roundtrip", _rel(back, Rm), TOL_DECOMP, ctx)
            ch.add("weyl trace", float(np.max(np.abs(tc.weyl_trace(cp.W)))) / max(1.0, np.max(np.abs(Rm))),
                   TOL_DECOMP, ctx)
            split = cp.w_sq + 4.0 / (n - 2) * cp.ric_sq - 2.0 / ((n - 1) * (n - 2)) * cp.R ** 2
            ch.add("norm split", abs(split - cp.rm_sq) / max(1.0, cp.rm_sq), TOL_DECOMP, ctx)
    return ch.outcome()


TOL_DECOMP = 1e-12
TOL_GEOM = 1e-10


def suite_geometry(seed: int) -> SuiteOutcome:
    """Closed forms against the Lie-algebra path, and value against literal rescaling."""
    ch = _Checks("geometry")
    rng = suite_rng(seed, ch.name)
    try:
        for n in range(3, 9):
            r = float(rng.uniform(0.5, 2.0))
            cp = geo.curvature_of(geo.RoundSphere(n, r)).cp
            ctx = {"spec": f"RoundSphere({n}, {r!r})"}
            ch.add("round scalar curvature", abs(cp.R * r * r - n * (n - 1)) / (n * (n - 1)), TOL_GEOM, ctx)
            off = ~np.eye(n, dtype=bool)
            ch.add("round sectionals", float(np.max(np.abs(cp.coord_sectionals[off] * r * r - 1.0))),
                   TOL_GEOM, ctx)
        s4 = geo.curvature_of(geo.RoundSphere(4))
        ch.add("S4 volume", abs(s4.volume / (8 * math.pi ** 2 / 3) - 1), TOL_GEOM)
        ch.add("S4 |Ric|^2", abs(s4.cp.ric_sq - 36.0) / 36.0, TOL_GEOM)
        for r in (0.5, 1.0, 2.0):
            closed = geo.curvature_of(geo.RoundSphere(3, r))
            lie = geo.curvature_of(geo.LeftInvariant(geo.su2_structure_constants(), r * r * np.eye(3)))
            ctx = {"radius": r}
            ch.add("S3 closed form vs Koszul", _rel(lie.cp.Rm, closed.cp.Rm), TOL_GEOM, ctx)
            ch.add("S3 volume two ways", abs(lie.volume / closed.volume - 1), TOL_GEOM, ctx)
        for _ in range(10):
            x = float(np.exp(rng.uniform(math.log(0.1), math.log(5.0))))
            cp = geo.curvature_of(geo.Berger(x)).cp
            ctx = {"x": x}
            ch.add("Berger Ricci", _rel(cp.Ric, np.diag([2 * x, 4 - 2 * x, 4 - 2 * x])), TOL_GEOM, ctx)
            ch.add("Berger sectionals", _rel(cp.coord_sectionals[[0, 0, 1], [1, 2, 2]], [x, x, 4 - 3 * x]),
                   TOL_GEOM, ctx)
            ch.add("Berger min sectional", abs(cp.min_sectional().value - min(x, 4 - 3 * x)) / max(1, x),
                   TOL_GEOM, ctx)
            t = float(rng.uniform(-1, 1))
            p = FunctionalParams(t)
            hc = geo.curvature_of(geo.Berger(x))
            ch.add("normalized value vs rescaling", _rel(eval_functional(hc, p).normalized,
                                                         unit_volume_density(geo.Berger(x), p)),
                   TOL_GEOM, {"x": x, "t": t})
    except _GUARDED as exc:
        ch.error("geometry", exc)
    return ch.outcome()


A1_DIMS = (3, 4, 5, 6)
A1_T = (-1.0, -0.5, -1.0 / 3.0, 0.0, 1.0)
A1_S = (0.0, 1.0)
TOL_EINSTEIN_RESIDUAL = 1e-10


def suite_einstein(seed: int) -> SuiteOutcome:
    """Unit round spheres are critical for every F_{t,s}."""
    ch = _Checks("einstein")
    for n in A1_DIMS:
        hc = geo.curvature_of(geo.RoundSphere(n))
        for t in A1_T:
            for s in A1_S:
                ctx = {"n": n, "t": t, "s": s}
                try:
                    res = constrained_residual_Fts(hc, t, s)
                except _GUARDED as exc:
                    ch.error("round sphere residual", exc, ctx)
                    continue
                ch.add("round sphere residual", res.tensor_norm, TOL_EINSTEIN_RESIDUAL, ctx)
                if res.scalar_residual is not None:
                    ch.add("round sphere scalar residual",
                           abs(res.scalar_residual) / max(1.0, abs(eval_functional(hc, FunctionalParams(t, s)).normalized)),
                           TOL_EINSTEIN_RESIDUAL, ctx)
    return ch.outcome()


GB_PAIRS = ((1.0, 1.0), (2.0, 1.0), (5.0, 0.3))


def suite_gauss_bonnet(seed: int) -> SuiteOutcome:
    ch = _Checks("gauss-bonnet")
    try:
        integral, chi = gauss_bonnet_check(geo.curvature_of(geo.RoundSphere(4)))
        ch.add("S4 integral", abs(integral / (64 * math.pi ** 2) - 1), 1e-12, {"integral": integral})
        ch.details_s4 = chi
        for a, b in GB_PAIRS:
            _, est = gauss_bonnet_check(geo.curvature_of(geo.ProductSphereSphere(a, b)))
            ch.add("S2xS2 estimate", abs(est - 4.0), 1e-10, {"a": a, "b": b, "estimate": est})
    except _GUARDED as exc:
        ch.error("gauss-bonnet", exc)
    out = ch.outcome()
    out.details["S4_estimate"] = getattr(ch, "details_s4", None)
    return out


T_HALF_CASES = (
    ("S2(1) x R", geo.SphereFlat(3, 1.0), FHalfClass.S2xFLAT),
    ("S2(1) x S2(1)", geo.ProductSphereSphere(1.0, 1.0), FHalfClass.EINSTEIN),
    ("S2(2) x S2(1)", geo.ProductSphereSphere(2.0, 1.0), FHalfClass.S2xS2),
    ("S2(5) x S2(0.3)", geo.ProductSphereSphere(5.0, 0.3), FHalfClass.S2xS2),
    ("S2(1) x T3", geo.SphereFlat(5, 1.0, (1.0, 1.0, 1.0)), FHalfClass.S2xFLAT),
)


def _spectrum_mismatch(hc) -> float:
    cp = hc.cp
    mu = np.sort(cp.ricci_spectrum)[::-1]
    best = math.inf
    for m in range(1, cp.n + 1):
        sp = f_half_spectrum(cp.R, cp.e_sq, cp.n, m)
        pred = np.array([sp.mu_plus] * m + [sp.mu_minus] * (cp.n - m))
        best = min(best, max(float(np.max(np.abs(mu - pred))), abs(sp.multiplicity_residual)))
    return best


def suite_classification(seed: int) -> SuiteOutcome:
    """t = -1/2 product instances: criticality, spectra and classification."""
    ch = _Checks("classification")
    for label, spec, expected in T_HALF_CASES:
        ctx = {"geometry": label}
        try:
            hc = geo.curvature_of(spec)
            ch.add("residual at t=-1/2", constrained_residual_Ft(hc, -0.5).tensor_norm, 1e-10, ctx)
            is_product_unequal = isinstance(spec, geo.ProductSphereSphere) and spec.a != spec.b
            if is_product_unequal:
                for t in (-0.6, -0.4):
                    res = constrained_residual_Ft(hc, t).tensor_norm
                    # passes when the residual is above 1e-2
                    ch.add("residual away from t=-1/2", 1e-2 / max(res, 1e-300), 1.0 - 1e-15,
                           {**ctx, "t": t, "residual": res})
            ch.add("Ricci spectrum vs roots", _spectrum_mismatch(hc), 1e-10, ctx)
            got = classify_f_half(hc)
            ch.add("classification", 0.0 if got == expected else math.inf, 0.0,
                   {**ctx, "expected": expected.value, "got": got.value})
        except _GUARDED as exc:
            ch.error("classification", exc, ctx)
    return ch.outcome()


INEQ_TRIALS = 1000
TOL_INEQ = 1e-12


def _random_lambdas(rng, n) -> np.ndarray:
    lam = rng.standard_normal(n)
    return lam - lam.mean()


def _random_sigmas(rng, n, sign: float) -> np.ndarray:
    sig = rng.uniform(0.0, 1.0, (n, n))
    sig[rng.uniform(size=(n, n)) < 0.2] = 0.0  # boundary cases with vanishing planes
    sig = np.triu(sig, 1)
    return sign * (sig + sig.T)


def suite_prop_est(seed: int) -> SuiteOutcome:
    """gap <= proof bound <= 0 under non-negative sectional curvature."""
    ch = _Checks("prop-est")
    rng = suite_rng(seed, ch.name)
    for n in range(3, 7):
        for trial in range(INEQ_TRIALS):
            sd = SpectralData(n, _random_lambdas(rng, n), _random_sigmas(rng, n, 1.0))
            gap, bound = prop_est_gap(sd)
            ctx = {"n": n, "trial": trial, "lambdas": sd.lambdas, "sigmas": sd.sigmas}
            ch.add("gap <= bound", gap - bound, TOL_INEQ, ctx)
            ch.add("bound <= 0", bound, TOL_INEQ, ctx)
        sd = SpectralData(n, np.zeros(n), _random_sigmas(rng, n, 1.0))
        gap, _ = prop_est_gap(sd)
        ch.add("Einstein witness gap == 0", abs(gap), 0.0, {"n": n})
    return ch.outcome()


def suite_prop_est2(seed: int) -> SuiteOutcome:
    """Sum of (lambda_i + lambda_j)^2 sigma_ij <= 0 under non-positive sectional curvature."""
    ch = _Checks("prop-est2")
    rng = suite_rng(seed, ch.name)
    for n in range(3, 7):
        for trial in range(INEQ_TRIALS):
            sd = SpectralData(n, _random_lambdas(rng, n), _random_sigmas(rng, n, -1.0))
            ch.add("gap <= 0", prop_est2_gap(sd), TOL_INEQ,
                   {"n": n, "trial": trial, "lambdas": sd.lambdas, "sigmas": sd.sigmas})
    return ch.outcome()


def suite_cubic(seed: int) -> SuiteOutcome:
    """|tr E^3| <= |E|^3 / sqrt(6) for traceless symmetric 3x3 E."""
    ch = _Checks("cubic")
    rng = suite_rng(seed, ch.name)
    for trial in range(INEQ_TRIALS):
        E = np.asarray(tc.traceless(tc.random_sym2(rng, 3)))
        ch.add("cubic bound", -cubic_bound_gap(E), TOL_INEQ, {"trial": trial, "E": E})
    ch.add("equality witness diag(1,1,-2)", abs(cubic_bound_gap(np.diag([1.0, 1.0, -2.0]))) / 6.0,
           TOL_INEQ)
    return ch.outcome()


IDENTITY_METRICS = 200
IDENTITY_T = (-0.25, 0.0, 0.5)
WEITZ_CONTROL = (4.0, 0.0)  # Berger x, t: not critical


def critical_points_for_identities(seed: int) -> list:
    """Solver-found Berger critical points used by the identity checks."""
    cfg = SolveConfig(starts=8, seed=seed)
    pts = []
    for t in IDENTITY_T:
        pts.extend(solve("berger", t, config=cfg).points)
    return pts


def suite_identities(seed: int) -> SuiteOutcome:
    """Cotton norm identity on random SU(2) metrics; Weitzenbock and Cotton
    integral identities at critical points, with a non-critical control."""
    ch = _Checks("identities")
    rng = suite_rng(seed, ch.name)
    for k in range(IDENTITY_METRICS):
        Q = _random_su2_metric(rng)
        try:
            hc = geo.curvature_of(geo.LeftInvariant(geo.su2_structure_constants(), Q))
            g = identity_gaps(hc, 0.0)
        except _GUARDED as exc:
            ch.error("cotton norm", exc, {"Q": Q})
            continue
        # both sides are O(|nabla E|^2), which reaches 1e5 on strongly squashed metrics
        scale = max(1.0, sq_norm(hc.nablaE) + 0.5 * sq_norm(cotton(hc)))
        ch.add("cotton norm", abs(g.cotton_norm_gap) / scale, 1e-11,
               {"metric": k, "Q": Q, "absolute_gap": g.cotton_norm_gap})
    try:
        points = critical_points_for_identities(seed)
    except _GUARDED as exc:
        ch.error("solver", exc)
        points = []
    for p in points:
        hc = geo.curvature_of(geo.Berger(p.params[0]))
        g = identity_gaps(hc, p.t, p.s)
        ctx = {"x": p.params[0], "t": p.t}
        ch.add("Weitzenbock at critical point", abs(g.weitzenbock_gap), 1e-8, ctx)
        ch.add("Cotton integral at critical point", abs(g.cotton_integral_gap), 1e-8, ctx)
    x, t = WEITZ_CONTROL
    control = identity_gaps(geo.curvature_of(geo.Berger(x)), t).weitzenbock_gap
    ch.add("Weitzenbock control is nonzero", 1e-3 / max(abs(control), 1e-300), 1.0 - 1e-15,
           {"x": x, "t": t, "gap": control})
    out = ch.outcome()
    out.details["critical_points"] = [[p.t, p.params[0]] for p in points]
    out.details["control_gap"] = control
    return out


GRADIENT_SAMPLES = 50
TOL_GRADIENT = 1e-5


def gradient_sample(rng, family_name: str) -> dict:
    fam = FAMILIES[family_name]
    u = rng.uniform(math.log(0.2), math.log(5.0), fam.dim_params)
    d = rng.standard_normal(fam.dim_params)
    d /= np.linalg.norm(d)
    t = float(rng.uniform(-1.0, 1.0))
    s = float(rng.choice([0.0, rng.uniform(-0.5, 0.5)]))
    return {"family": family_name, "u": u, "direction": d, "t": t, "s": s}


def gradient_error(sample: dict, h: float = 1e-3) -> tuple[float, float, float]:
    """(fd, analytic, relative error) for one directional derivative."""
    fam = FAMILIES[sample["family"]]
    u, d, t, s = sample["u"], sample["direction"], sample["t"], sample["s"]

    def f(a):
        return reduced_value(fam, np.exp(u + a * d), t, s)

    def D(hh):
        return (f(hh) - f(-hh)) / (2 * hh)

    fd = (4 * D(h / 2) - D(h)) / 3
    an = float(analytic_log_gradient(fam, np.exp(u), t, s) @ d)
    scale = max(abs(an), 1e-3 * abs(f(0.0)))
    return fd, an, abs(fd - an) / scale


def suite_gradient(seed: int) -> SuiteOutcome:
    ch = _Checks("gradient")
    rng = suite_rng(seed, ch.name)
    names = sorted(FAMILIES)
    for k in range(GRADIENT_SAMPLES):
        sample = gradient_sample(rng, names[k % len(names)])
        fd, an, err = gradient_error(sample)
        ch.add("directional derivative", err, TOL_GRADIENT, {**sample, "fd": fd, "analytic": an})
    return ch.outcome()


SCALE_TRIALS = 100


def random_spec(rng) -> geo.GeometrySpec:
    kind = int(rng.integers(5))
    if kind == 0:
        return geo.RoundSphere(int(rng.integers(3, 9)), float(rng.uniform(0.3, 3)))
    if kind == 1:
        return geo.ProductSphereSphere(float(rng.uniform(0.2, 5)), float(rng.uniform(0.2, 5)))
    if kind == 2:
        n = int(rng.integers(3, 9))
        return geo.SphereFlat(n, float(rng.uniform(0.2, 5)), tuple(rng.uniform(0.5, 3, n - 2).tolist()))
    if kind == 3:
        return geo.Berger(float(np.exp(rng.uniform(math.log(0.1), math.log(5)))))
    return geo.LeftInvariant(geo.su2_structure_constants(), _random_su2_metric(rng))


def suite_scale(seed: int) -> SuiteOutcome:
    ch = _Checks("scale")
    rng = suite_rng(seed, ch.name)
    for k in range(SCALE_TRIALS):
        spec = random_spec(rng)
        c = float(np.exp(rng.uniform(math.log(1e-2), math.log(1e2))))
        p = FunctionalParams(float(rng.uniform(-1, 1)), float(rng.choice([0.0, rng.uniform(-1, 1)])))
        try:
            a = eval_functional(geo.curvature_of(spec), p).normalized
            b = eval_functional(geo.curvature_of(geo.scale_spec(spec, c)), p).normalized
        except _GUARDED as exc:
            ch.error("scale invariance", exc, {"spec": repr(spec)})
            continue
        ch.add("scale invariance", abs(a - b) / max(abs(a), 1e-300), 1e-10,
               {"spec": repr(spec), "scale": c, "t": p.t, "s": p.s})
    return ch.outcome()


SUITES: dict[str, Callable[[int], SuiteOutcome]] = {
    "decomposition": suite_decomposition,
    "geometry": suite_geometry,
    "einstein": suite_einstein,
    "gauss-bonnet": suite_gauss_bonnet,
    "classification": suite_classification,
    "prop-est": suite_prop_est,
    "prop-est2": suite_prop_est2,
    "cubic": suite_cubic,
    "identities": suite_identities,
    "gradient": suite_gradient,
    "scale": suite_scale,
}


def run_suites(names, seed: int, threads: int = 1) -> list:
    names = list(SUITES) if names in ("all", ["all"]) else list(names)
    for name in names:
        if name not in SUITES:
            raise InvalidInput(f"unknown suite {name!r}; known: {', '.join(SUITES)} or all")

    def one(name):
        try:
            return SUITES[name](seed)
        except Exception as exc:  # a crashing suite is a failing suite
            ch = _Checks(name)
            ch.error("suite aborted", exc)
            return ch.outcome()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, names))
    return [one(nm) for nm in names]
