import math

import numpy as np
import pytest

from curvfunc import geometry as geo
from curvfunc.errors import InvalidInput


def test_su2_gives_unit_round_s3():
    hc = geo.curvature_of(geo.LeftInvariant(geo.su2_structure_constants(), np.eye(3)))
    ref = geo.curvature_of(geo.RoundSphere(3))
    np.testing.assert_allclose(hc.cp.Rm, ref.cp.Rm, atol=1e-13)
    assert hc.volume == pytest.approx(2 * math.pi ** 2, rel=1e-14)
    assert np.max(np.abs(hc.nablaRic)) < 1e-13


def test_abelian_connection_vanishes():
    c = np.zeros((3, 3, 3))
    Gamma, c_on = geo.koszul_connection(c, np.diag([1.0, 2.0, 3.0]))
    assert np.all(Gamma == 0)
    assert np.all(geo.curvature_from_connection(Gamma, c_on) == 0)


def test_metric_compatibility(rng):
    for _ in range(200):
        A = rng.standard_normal((3, 3))
        Q = A @ A.T + 0.1 * np.eye(3)
        Gamma, _ = geo.koszul_connection(geo.su2_structure_constants(), Q)
        # Gamma[k, i, j] = Gamma^k_ij is antisymmetric in (k, j)
        assert np.max(np.abs(Gamma + Gamma.transpose(2, 1, 0))) < 1e-12


@pytest.mark.parametrize("x", [0.25, 0.5, 2.0, 4.0])
def test_berger_closed_forms(x):
    cp = geo.curvature_of(geo.Berger(x)).cp
    np.testing.assert_allclose(cp.Ric, np.diag([2 * x, 4 - 2 * x, 4 - 2 * x]), atol=1e-12)
    s = cp.coord_sectionals
    assert (s[0, 1], s[0, 2], s[1, 2]) == pytest.approx((x, x, 4 - 3 * x), abs=1e-12)
    assert geo.volume_of(geo.Berger(x)) == pytest.approx(2 * math.pi ** 2 * math.sqrt(x))


def test_berger_continuous_at_round():
    ref = np.asarray(geo.curvature_of(geo.Berger(1.0)).cp.Rm)
    for x in (1 - 1e-4, 1 + 1e-4):
        assert np.max(np.abs(np.asarray(geo.curvature_of(geo.Berger(x)).cp.Rm) - ref)) < 1e-3
    assert geo.curvature_of(geo.Berger(1.0)).cp.e_sq < 1e-28


def test_divergence_of_E_vanishes():
    for x in (0.3, 2.0, 4.0):
        nE = geo.curvature_of(geo.Berger(x)).nablaE
        assert np.max(np.abs(np.einsum("iij->j", nE))) < 1e-11


def test_berger_lap_E_nonzero():
    assert np.max(np.abs(geo.curvature_of(geo.Berger(4.0)).lapE)) > 1.0


def test_round_sphere_closed_forms():
    hc = geo.curvature_of(geo.RoundSphere(4))
    assert hc.cp.R == pytest.approx(12.0)
    assert hc.cp.ric_sq == pytest.approx(36.0)
    assert hc.volume == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-14)
    assert geo.volume_of(geo.RoundSphere(3)) == pytest.approx(2 * math.pi ** 2, rel=1e-14)


def test_sphere_flat():
    hc = geo.curvature_of(geo.SphereFlat(3, 1.0))
    assert np.sort(hc.cp.ricci_spectrum) == pytest.approx([0.0, 1.0, 1.0])
    assert hc.volume is geo.NONCOMPACT
    assert geo.volume_of(geo.SphereFlat(3, 1.0, (2.0,))) == pytest.approx(8 * math.pi)


def test_products_have_parallel_ricci():
    for a, b in ((1.0, 1.0), (2.0, 1.0)):
        assert np.all(geo.curvature_of(geo.ProductSphereSphere(a, b)).nablaRic == 0)


@pytest.mark.parametrize("spec", [
    lambda: geo.RoundSphere(3, -1.0),
    lambda: geo.RoundSphere(2),
    lambda: geo.Berger(0.0),
    lambda: geo.SphereFlat(4, 1.0, (1.0,)),
    lambda: geo.LeftInvariant(geo.su2_structure_constants(), np.diag([1.0, -1.0, 1.0])),
])
def test_invalid_specs_rejected(spec):
    with pytest.raises(InvalidInput):
        spec()


def test_jacobi_violation_rejected():
    c = np.zeros((3, 3, 3))
    c[0, 0, 1], c[0, 1, 0] = 1.0, -1.0
    c[1, 0, 2], c[1, 2, 0] = 1.0, -1.0
    c[2, 1, 2], c[2, 2, 1] = 1.0, -1.0
    if geo.jacobi_violation(c) > 1e-12:
        with pytest.raises(InvalidInput):
            geo.LeftInvariant(c, np.eye(3))


def test_noncompact_left_invariant_volume():
    # Heisenberg algebra: no compact quotient volume known to the catalog
    c = np.zeros((3, 3, 3))
    c[2, 0, 1], c[2, 1, 0] = 1.0, -1.0
    assert geo.volume_of(geo.LeftInvariant(c, np.eye(3))) is geo.NONCOMPACT


def test_scale_spec_scales_curvature(rng):
    Q = np.diag([1.0, 2.0, 0.5])
    spec = geo.LeftInvariant(geo.su2_structure_constants(), Q)
    a = geo.curvature_of(spec).cp
    b = geo.curvature_of(geo.scale_spec(spec, 3.0)).cp
    assert b.R == pytest.approx(a.R / 3.0, rel=1e-13)
