"""Inequalities, eigenvalue relations and pinching tests for rigidity arguments.

The curvature inequalities are stated on reduced data: eigenvalues of the
traceless Ricci tensor and sectional curvatures of the coordinate planes of
an E-eigenbasis (``SpectralData``). ``spectral_data`` extracts that from a
curvature point; ``spectral_from_sectionals`` builds consistent data from
plane curvatures alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import InvalidInput, PreconditionError
from .euler_lagrange import constrained_residual_Ft, trace_E3
from .geometry import HomogeneousCurvature
from .tensor_core import CurvaturePoint, sq_norm
from .tolerances import TOL


@dataclass(frozen=True)
class SpectralData:
    n: int
    lambdas: np.ndarray
    sigmas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        sig = np.asarray(self.sigmas, dtype=float)
        n = int(self.n)
        if lam.shape != (n,) or sig.shape != (n, n):
            raise InvalidInput("SpectralData shape mismatch")
        if abs(lam.sum()) > TOL.construction * max(1.0, np.max(np.abs(lam))) * n:
            raise InvalidInput("eigenvalues of E must sum to zero")
        if np.max(np.abs(sig - sig.T)) > TOL.construction or np.any(np.diag(sig) != 0):
            raise InvalidInput("sigmas must be symmetric with zero diagonal")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "sigmas", sig)

    @property
    def R(self) -> float:
        return float(self.sigmas.sum())


def spectral_data(cp: CurvaturePoint) -> SpectralData:
    """Eigenvalues of E and plane curvatures in its eigenbasis."""
    lam, V = np.linalg.eigh(cp.E)
    lam = lam - lam.mean()
    Rm = np.einsum("abcd,ai,bj,ck,dl->ijkl", cp.Rm, V, V, V, V)
    idx = np.arange(cp.n)
    sig = Rm[idx[:, None], idx[None, :], idx[:, None], idx[None, :]]
    sig = 0.5 * (sig + sig.T)
    np.fill_diagonal(sig, 0.0)
    return SpectralData(cp.n, lam, sig)


def spectral_from_sectionals(sigmas) -> SpectralData:
    """Data consistent with Ricci diagonal in the frame: mu_k = sum_i sigma_ik."""
    sig = np.asarray(sigmas, dtype=float)
    sig = 0.5 * (sig + sig.T)
    np.fill_diagonal(sig, 0.0)
    n = sig.shape[0]
    mu = sig.sum(axis=1)
    lam = mu - sig.sum() / n
    return SpectralData(n, lam - lam.mean(), sig)


def prop_est_gap(sd: SpectralData) -> tuple[float, float]:
    """(gap, proof_bound) for non-negative sectional curvature; gap <= bound <= 0."""
    if np.any(sd.sigmas < 0):
        raise PreconditionError("sectional curvatures must be non-negative")
    n, lam, sig = sd.n, sd.lambdas, sd.sigmas
    gap = float(lam @ sig @ lam) - (n - 2) / (2.0 * n) * sd.R * float(lam @ lam)
    iu = np.triu_indices(n, 1)
    bound = -(n - 1) / n * float(np.sum((lam[iu[0]] - lam[iu[1]]) ** 2 * sig[iu]))
    return gap, bound


def prop_est2_gap(sd: SpectralData) -> float:
    """Sum over i<j of (lambda_i + lambda_j)^2 sigma_ij; non-positive for sigma <= 0."""
    if np.any(sd.sigmas > 0):
        raise PreconditionError("sectional curvatures must be non-positive")
    iu = np.triu_indices(sd.n, 1)
    lam = sd.lambdas
    return float(np.sum((lam[iu[0]] + lam[iu[1]]) ** 2 * sd.sigmas[iu]))


def prop_est2_tensor_form(cp: CurvaturePoint) -> float:
    """R_ikjl E_ij E_kl + R|E|^2/n + tr E^3, evaluated on the tensors directly."""
    E = np.asarray(cp.E)
    return float(np.einsum("ikjl,ij,kl->", cp.Rm, E, E)) + cp.R * cp.e_sq / cp.n + trace_E3(E)


def prop_est_tensor_form(cp: CurvaturePoint) -> float:
    E = np.asarray(cp.E)
    return float(np.einsum("ikjl,ij,kl->", cp.Rm, E, E)) - (cp.n - 2) / (2.0 * cp.n) * cp.R * cp.e_sq


def cubic_bound_gap(E3) -> float:
    """|E|^3 / sqrt(6) - |tr E^3| for a traceless symmetric 3x3 matrix."""
    E3 = np.asarray(E3, dtype=float)
    if E3.shape != (3, 3):
        raise InvalidInput("cubic bound is stated for 3x3 matrices")
    if abs(np.trace(E3)) > TOL.construction * max(1.0, np.max(np.abs(E3))):
        raise InvalidInput("matrix must be trace-free")
    E3 = 0.5 * (E3 + E3.T)
    return sq_norm(E3) ** 1.5 / math.sqrt(6.0) - abs(trace_E3(E3))


def pinching_constant_ok(t: float) -> bool:
    """(1+6t)^2/24 <= 2(1+2t)(3+8t)/(5+16t)^2, the constant comparison closing the 3D argument."""
    lhs = (1 + 6 * t) ** 2 / 24.0
    den = (5 + 16 * t) ** 2
    if den == 0.0:
        return True
    return lhs <= 2 * (1 + 2 * t) * (3 + 8 * t) / den


@dataclass(frozen=True)
class PinchingReport:
    margin: float
    constant_ok: Optional[bool]  # None outside [-1/3, -1/6)


def pinching_margin(cp: CurvaturePoint, t: float) -> PinchingReport:
    if cp.n != 3:
        raise InvalidInput("the pinching condition is three-dimensional")
    margin = (1 + 6 * t) ** 2 / 24.0 * cp.R ** 2 - cp.e_sq
    ok = pinching_constant_ok(t) if -1.0 / 3.0 <= t < -1.0 / 6.0 else None
    return PinchingReport(float(margin), ok)


def pinching_sign_chain(cp: CurvaturePoint, t: float) -> tuple[float, float]:
    """(bracket, rhs) with bracket = (1+6t)R/3 + (4/sqrt 6)|E| and
    rhs = (1+6t)/3 R^2|E|^2 - 4R tr E^3.

    When the pinching margin is positive, R > 0 and t < -1/6, both are <= 0
    and rhs <= R|E|^2 * bracket.
    """
    E = np.asarray(cp.E)
    e = math.sqrt(cp.e_sq)
    bracket = (1 + 6 * t) * cp.R / 3.0 + 4.0 / math.sqrt(6.0) * e
    rhs = (1 + 6 * t) / 3.0 * cp.R ** 2 * cp.e_sq - 4.0 * cp.R * trace_E3(E)
    return float(bracket), float(rhs)


@dataclass(frozen=True)
class FHalfSpectrum:
    mu_plus: float
    mu_minus: float
    multiplicity_residual: float

    def quadratic(self, mu: float, R: float, Esq: float, n: int) -> float:
        return 2 * mu ** 2 - R * mu - 2.0 / n * (Esq - (n - 2) / (2.0 * n) * R ** 2)


def f_half_spectrum(R: float, Esq: float, n: int, m: int) -> FHalfSpectrum:
    """Admissible Ricci eigenvalues of parallel-Ricci F_{-1/2} critical metrics.

    ``m`` counts eigenvalues equal to mu_plus. m = 0 is allowed: an Einstein
    metric with n > 4 has every eigenvalue equal to mu_minus.
    """
    if n < 3 or not 0 <= m <= n:
        raise InvalidInput(f"need n >= 3 and 0 <= m <= n, got n={n}, m={m}")
    root = math.sqrt((n - 4) ** 2 * R ** 2 / (16.0 * n ** 2) + Esq / n)
    return FHalfSpectrum(R / 4 + root, R / 4 - root, (n - 4) * R / 4 - (n - 2 * m) * root)


class FHalfClass(str, Enum):
    EINSTEIN = "EINSTEIN"
    S2xFLAT = "S2xFLAT"
    S2xS2 = "S2xS2"
    OTHER = "OTHER"


def classify_f_half(hc: HomogeneousCurvature, tol=None) -> FHalfClass:
    tol = TOL if tol is None else tol
    cp = hc.cp
    res = constrained_residual_Ft(hc, -0.5).tensor_norm
    scale = max(1.0, cp.R ** 2)
    if res > tol.classify_residual * scale:
        raise PreconditionError(f"not critical for F_-1/2: residual norm {res:.3e}")
    if np.max(np.abs(hc.nablaRic)) > tol.classify_residual * max(1.0, abs(cp.R)):
        raise PreconditionError("Ricci tensor is not parallel")
    e = math.sqrt(cp.e_sq)
    if e < tol.einstein:
        return FHalfClass.EINSTEIN
    n, R = cp.n, cp.R
    mu = np.sort(cp.ricci_spectrum)[::-1]
    stol = tol.classify_spectrum * max(1.0, abs(R))
    s2flat = np.array([R / 2, R / 2] + [0.0] * (n - 2))
    if np.max(np.abs(mu - s2flat)) < stol:
        return FHalfClass.S2xFLAT
    if n == 4:
        paired = np.array([R / 4 + e / 2] * 2 + [R / 4 - e / 2] * 2)
        if np.max(np.abs(mu - paired)) < stol:
            return FHalfClass.S2xS2
    return FHalfClass.OTHER
