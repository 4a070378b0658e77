"""Gradients, constrained Euler-Lagrange residuals and related identities.

Everything is specialized to homogeneous models: the scalar curvature is
constant, so nabla R, nabla^2 R, Delta R and Delta|E|^2 vanish. Those terms
are still built (as zeros taken from the curvature package) so that each
formula keeps all of its terms. Laplacians are Delta = trace nabla^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConventionError
from .functionals import FunctionalParams, density, eval_functional
from .geometry import HomogeneousCurvature
from .tensor_core import sq_norm


@dataclass(frozen=True)
class ELResidual:
    tensor_residual: np.ndarray
    scalar_residual: Optional[float]  # None on noncompact models
    lagrange_c: float

    @property
    def tensor_norm(self) -> float:
        return math.sqrt(sq_norm(self.tensor_residual))


# --------------------------------------------------------------------------
# contractions
# --------------------------------------------------------------------------

def rm_dot_ric(Rm, T) -> np.ndarray:
    """R_ikjl T_kl."""
    return np.einsum("ikjl,kl->ij", Rm, T)


def rm_rm(Rm) -> np.ndarray:
    """R_ikpq R_jkpq."""
    return np.einsum("ikpq,jkpq->ij", Rm, Rm)


def _homogeneous_terms(hc: HomogeneousCurvature):
    n = hc.n
    hessR, lapR = hc.hess_R, hc.lap_R
    if np.any(hessR != 0.0) or lapR != 0.0:
        raise ConventionError("scalar curvature derivatives must vanish on homogeneous models")
    return n, np.eye(n), hessR, lapR


# --------------------------------------------------------------------------
# gradients
# --------------------------------------------------------------------------

def grad_rho(hc: HomogeneousCurvature) -> np.ndarray:
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    Ric, Rm = np.asarray(cp.Ric), np.asarray(cp.Rm)
    return (-hc.lapRic - 2.0 * rm_dot_ric(Rm, Ric) + hessR
            - 0.5 * lapR * g + 0.5 * cp.ric_sq * g)


def grad_S(hc: HomogeneousCurvature) -> np.ndarray:
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    return 2.0 * hessR - 2.0 * lapR * g - 2.0 * cp.R * np.asarray(cp.Ric) + 0.5 * cp.R ** 2 * g


def grad_Rm(hc: HomogeneousCurvature) -> np.ndarray:
    """Gradient of the integral of |Rm|^2."""
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    Ric, Rm = np.asarray(cp.Ric), np.asarray(cp.Rm)
    return (-4.0 * hc.lapRic + 2.0 * hessR - 2.0 * rm_rm(Rm) + 0.5 * cp.rm_sq * g
            - 4.0 * rm_dot_ric(Rm, Ric) + 4.0 * Ric @ Ric)


def grad_Ft(hc: HomogeneousCurvature, t: float) -> np.ndarray:
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    Ric, Rm = np.asarray(cp.Ric), np.asarray(cp.Rm)
    out = (-hc.lapRic + (1 + 2 * t) * hessR - 0.5 * (1 + 4 * t) * lapR * g
           + 0.5 * (cp.ric_sq + t * cp.R ** 2) * g
           - 2.0 * rm_dot_ric(Rm, Ric) - 2.0 * t * cp.R * Ric)
    return 0.5 * (out + out.T)


def grad_Fts(hc: HomogeneousCurvature, t: float, s: float) -> np.ndarray:
    if s == 0.0:
        return grad_Ft(hc, t)
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    Ric, Rm = np.asarray(cp.Ric), np.asarray(cp.Rm)
    out = (-(1 + 4 * s) * hc.lapRic + (1 + 2 * t + 2 * s) * hessR
           - 0.5 * (1 + 4 * t) * lapR * g
           - 2.0 * rm_dot_ric(Rm, Ric) - 2.0 * t * cp.R * Ric
           + 0.5 * (cp.ric_sq + t * cp.R ** 2 + s * cp.rm_sq) * g
           - 2.0 * s * rm_rm(Rm) - 4.0 * s * rm_dot_ric(Rm, Ric) + 4.0 * s * Ric @ Ric)
    return 0.5 * (out + out.T)


# --------------------------------------------------------------------------
# constrained residuals
# --------------------------------------------------------------------------

def _scalar_residual(hc, p: FunctionalParams, lam: Optional[float]) -> Optional[float]:
    if not hc.compact:
        return None
    n = hc.n
    fv = eval_functional(hc, p)
    lam = fv.lam if lam is None else lam
    # evaluated on the unit-volume representative, where lambda is the functional value
    unit_density = float(hc.volume) ** (4.0 / n) * fv.density
    unit_lapR = float(hc.volume) ** (4.0 / n) * hc.lap_R
    return (n + 4 * (n - 1) * p.t + 4 * p.s) * unit_lapR - (n - 4) * (unit_density - lam)


def constrained_residual_Ft(hc: HomogeneousCurvature, t: float,
                            lam: Optional[float] = None) -> ELResidual:
    """Trace-free critical equation for F_t and the volume-constraint equation."""
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    Ric, Rm = np.asarray(cp.Ric), np.asarray(cp.Rm)
    f = cp.ric_sq + t * cp.R ** 2
    tensor = (-hc.lapRic + (1 + 2 * t) * hessR - (2 * t / n) * lapR * g
              + (2.0 / n) * f * g - 2.0 * rm_dot_ric(Rm, Ric) - 2.0 * t * cp.R * Ric)
    c = ((n - 4) / 2.0 * f - (n + 4 * (n - 1) * t) / 2.0 * lapR) / n
    scalar = _scalar_residual(hc, FunctionalParams(t, 0.0), lam)
    return ELResidual(0.5 * (tensor + tensor.T), scalar, c)


def constrained_residual_Fts(hc: HomogeneousCurvature, t: float, s: float,
                             lam: Optional[float] = None) -> ELResidual:
    if s == 0.0:
        return constrained_residual_Ft(hc, t, lam)
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    Ric, Rm = np.asarray(cp.Ric), np.asarray(cp.Rm)
    f = cp.ric_sq + t * cp.R ** 2 + s * cp.rm_sq
    tensor = (-(1 + 4 * s) * hc.lapRic + (1 + 2 * t + 2 * s) * hessR
              - ((2 * t - 2 * s) / n) * lapR * g + (2.0 / n) * f * g
              - 2.0 * (1 + 2 * s) * rm_dot_ric(Rm, Ric) - 2.0 * t * cp.R * Ric
              - 2.0 * s * rm_rm(Rm) + 4.0 * s * Ric @ Ric)
    c = ((n - 4) / 2.0 * f - (n + 4 * (n - 1) * t + 4 * s) / 2.0 * lapR) / n
    scalar = _scalar_residual(hc, FunctionalParams(t, s), lam)
    return ELResidual(0.5 * (tensor + tensor.T), scalar, c)


def eq1_residual(hc: HomogeneousCurvature, t: float, s: float = 0.0) -> np.ndarray:
    """Delta E minus the right side of the traceless equation written in E."""
    n, g, hessR, lapR = _homogeneous_terms(hc)
    cp = hc.cp
    E, Rm = np.asarray(cp.E), np.asarray(cp.Rm)
    rhs = ((1 + 2 * t + 2 * s) * hessR - (1 + 2 * t + 2 * s) / n * lapR * g
           - 2.0 * (1 + 2 * s) * rm_dot_ric(Rm, E)
           - (2 + 2 * n * t - 4 * s) / n * cp.R * E
           + (2.0 / n) * (cp.e_sq + s * cp.rm_sq) * g)
    if s != 0.0:
        rhs = rhs - 2.0 * s * rm_rm(Rm) + 4.0 * s * E @ E
    return (1 + 4 * s) * hc.lapE - rhs


def einstein_isotropy_gap(hc: HomogeneousCurvature) -> float:
    """max |R_ikpq R_jkpq - |Rm|^2/n g_ij|; zero iff an Einstein metric is F_{t,s}-critical."""
    n = hc.n
    return float(np.max(np.abs(rm_rm(hc.cp.Rm) - hc.cp.rm_sq / n * np.eye(n))))


# --------------------------------------------------------------------------
# Cotton tensor and identity gaps
# --------------------------------------------------------------------------

def cotton(hc: HomogeneousCurvature) -> np.ndarray:
    """C_ijk = nabla_k R_ij - nabla_j R_ik - (nabla_k R g_ij - nabla_j R g_ik) / (2(n-1))."""
    n = hc.n
    g = np.eye(n)
    nR = hc.nabla_R
    nric = hc.nablaRic  # [k, i, j]
    dk_Rij = nric.transpose(1, 2, 0)  # [i, j, k] = nabla_k R_ij
    dj_Rik = nric.transpose(1, 0, 2)  # [i, j, k] = nabla_j R_ik
    corr = (np.einsum("k,ij->ijk", nR, g) - np.einsum("j,ik->ijk", nR, g)) / (2 * (n - 1))
    return dk_Rij - dj_Rik - corr


def trace_E3(E) -> float:
    E = np.asarray(E)
    return float(np.trace(E @ E @ E))


@dataclass(frozen=True)
class IdentityGaps:
    weitzenbock_gap: float
    cotton_norm_gap: float
    cotton_integral_gap: float
    laplacian_gap: float  # |nabla E|^2 + <Delta E, E>, i.e. (1/2) Delta|E|^2 = 0


def identity_gaps(hc: HomogeneousCurvature, t: float, s: float = 0.0) -> IdentityGaps:
    n = hc.n
    cp = hc.cp
    E, Rm = np.asarray(cp.E), np.asarray(cp.Rm)
    nE = hc.nablaE  # [k, i, j] = nabla_k E_ij
    grad_E_sq = sq_norm(nE)
    grad_R_sq = sq_norm(hc.nabla_R)
    half_lap_E_sq = 0.0  # |E|^2 is constant
    REE = float(np.einsum("ikjl,ij,kl->", Rm, E, E))
    E_hess_R = float(np.sum(E * hc.hess_R))
    if s == 0.0:
        rhs = grad_E_sq + (1 + 2 * t) * E_hess_R - 2.0 * REE - (2 + 2 * n * t) / n * cp.R * cp.e_sq
        weitz = half_lap_E_sq - rhs
    else:
        rhs = ((1 + 4 * s) * grad_E_sq + (1 + 2 * t + 2 * s) * E_hess_R
               - 2.0 * (1 + 2 * s) * REE - (2 + 2 * n * t - 4 * s) / n * cp.R * cp.e_sq
               - 2.0 * s * float(np.sum(E * rm_rm(Rm))) + 4.0 * s * trace_E3(E))
        weitz = (1 + 4 * s) * half_lap_E_sq - rhs

    C = cotton(hc)
    cross = float(np.einsum("kij,jik->", nE, nE))  # nabla_k E_ij nabla_j E_ik
    cnorm = 0.5 * sq_norm(C) - (grad_E_sq - (n - 2) ** 2 / (4.0 * n ** 2 * (n - 1)) * grad_R_sq - cross)
    cint = ((grad_E_sq - (n - 2) ** 2 / (4.0 * n * (n - 1)) * grad_R_sq - 0.5 * sq_norm(C))
            - (REE - trace_E3(E) - cp.R * cp.e_sq / n))
    lap_gap = grad_E_sq + float(np.sum(hc.lapE * E)) - half_lap_E_sq
    return IdentityGaps(float(weitz), float(cnorm), float(cint), float(lap_gap))


def lagrange_density_check(hc: HomogeneousCurvature, p: FunctionalParams, lam: float) -> float:
    """Density on the unit-volume representative minus lambda (zero on homogeneous critical points)."""
    return float(hc.volume) ** (4.0 / hc.n) * density(hc, p) - lam
