"""Hypothesis property tests for the algebraic layer."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from curvfunc import geometry as geo
from curvfunc import tensor_core as tc
from curvfunc.functionals import FunctionalParams, eval_functional
from curvfunc.rigidity import SpectralData, cubic_bound_gap, prop_est_gap

seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(3, 8))
def test_random_curvature_roundtrip(seed, n):
    Rm = tc.random_riem4(np.random.default_rng(seed), n)
    cp = tc.curvature_point(Rm)
    assert np.max(np.abs(np.asarray(tc.reconstruct_riemann(cp.W, cp.Ric, cp.R)) - Rm)) < 1e-12 * max(
        1.0, np.max(np.abs(Rm)))
    assert tc.riem4_violation(Rm) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(3, 6))
def test_prop_est_chain(seed, n):
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal(n)
    lam -= lam.mean()
    sig = np.triu(rng.exponential(1.0, (n, n)), 1)
    gap, bound = prop_est_gap(SpectralData(n, lam, sig + sig.T))
    assert gap <= bound + 1e-12
    assert bound <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2))
def test_cubic_bound_diagonal(vals):
    a, b = vals
    assert cubic_bound_gap(np.diag([a, b, -a - b])) >= -1e-12 * max(1.0, abs(a) + abs(b)) ** 3


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.01, 100.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_berger_scale_invariance(x, c, t, s):
    spec = geo.Berger(x)
    p = FunctionalParams(t, s)
    a = eval_functional(geo.curvature_of(spec), p).normalized
    b = eval_functional(geo.curvature_of(geo.scale_spec(spec, c)), p).normalized
    assert abs(a - b) <= 1e-10 * max(abs(a), 1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_left_invariant_symmetries(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3))
    Q = A @ A.T + 0.2 * np.eye(3)
    hc = geo.curvature_of(geo.LeftInvariant(geo.su2_structure_constants(), Q))
    assert tc.riem4_violation(np.asarray(hc.cp.Rm)) < 1e-10 * max(1.0, np.max(np.abs(hc.cp.Rm)))
    assert np.max(np.abs(np.einsum("iij->j", hc.nablaE))) < 1e-10 * max(1.0, np.max(np.abs(hc.nablaE)))
