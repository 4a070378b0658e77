"""Quadratic curvature functionals on homogeneous models.

On a homogeneous model every integrand is constant, so integrals are
density times volume. ``normalized`` multiplies by V^((4-n)/n), which makes
the value scale invariant and equal to the value on the unit-volume
representative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import geometry as geo
from .errors import InvalidInput, NoncompactError
from .geometry import HomogeneousCurvature


@dataclass(frozen=True)
class FunctionalParams:
    t: float
    s: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.s)):
            raise InvalidInput("functional parameters must be finite")


RIEMANN_FUNCTIONAL = FunctionalParams(t=-0.25, s=0.0)  # reported as 4 * F_{-1/4}
RIEMANN_FUNCTIONAL_FACTOR = 4.0


@dataclass(frozen=True)
class FunctionalValue:
    density: float
    total: float
    normalized: float
    lam: float


def density(hc: HomogeneousCurvature, p: FunctionalParams) -> float:
    cp = hc.cp
    d = cp.ric_sq + p.t * cp.R ** 2
    if p.s != 0.0:
        d += p.s * cp.rm_sq
    return float(d)


def _require_volume(hc: HomogeneousCurvature, what: str) -> float:
    if not hc.compact:
        raise NoncompactError(
            f"{what} needs a finite volume; supply flat_lengths for the flat factor "
            f"of {type(hc.spec).__name__}"
        )
    return float(hc.volume)


def normalization_power(n: int) -> float:
    return (4.0 - n) / n


def eval_functional(hc: HomogeneousCurvature, p: FunctionalParams) -> FunctionalValue:
    dens = density(hc, p)
    vol = _require_volume(hc, "total functional value")
    total = dens * vol
    normalized = vol ** normalization_power(hc.n) * total
    return FunctionalValue(density=dens, total=total, normalized=normalized, lam=normalized)


def unit_volume_density(spec, p: FunctionalParams) -> float:
    """Density after literally rescaling the metric to unit volume."""
    vol = geo.volume_of(spec)
    if vol is geo.NONCOMPACT:
        raise NoncompactError("unit-volume rescaling needs flat_lengths")
    scaled = geo.scale_spec(spec, vol ** (-2.0 / spec.n))
    return density(geo.curvature_of(scaled), p)


def sigma2_functional(hc: HomogeneousCurvature) -> float:
    """-2 (n-2)^2 * integral of sigma_2(A)."""
    vol = _require_volume(hc, "sigma_2 functional")
    n = hc.n
    return -2.0 * (n - 2) ** 2 * hc.cp.sigma2A * vol


def schouten_t(n: int) -> float:
    return -n / (4.0 * (n - 1))


def gauss_bonnet_check(hc: HomogeneousCurvature) -> tuple[float, float]:
    """(integral of the four-dimensional Gauss-Bonnet integrand, Euler characteristic estimate)."""
    if hc.n != 4:
        raise InvalidInput(f"Gauss-Bonnet integrand is four-dimensional; got n = {hc.n}")
    vol = _require_volume(hc, "Gauss-Bonnet integral")
    cp = hc.cp
    integral = (cp.w_sq - 2.0 * cp.ric_sq + (2.0 / 3.0) * cp.R ** 2) * vol
    return integral, integral / (32.0 * math.pi ** 2)


def rm_sq_from_basis(hc: HomogeneousCurvature) -> float:
    """|Rm|^2 rebuilt from |W|^2, |Ric|^2 and R^2."""
    cp, n = hc.cp, hc.n
    return cp.w_sq + 4.0 / (n - 2) * cp.ric_sq - 2.0 / ((n - 1) * (n - 2)) * cp.R ** 2
