"""Model geometries and their homogeneous curvature packages.

Spheres and sphere products use closed forms. Left-invariant metrics on
three-dimensional Lie groups go through the Koszul formula: the frame is
orthonormalized with respect to ``Q``, structure constants are rewritten in
that frame, and curvature and covariant derivatives of left-invariant
tensors are then purely algebraic in the connection coefficients.

Index layout: ``c[k, i, j]`` is c^k_ij with [e_i, e_j] = c^k_ij e_k, and
``Gamma[k, i, j]`` is Gamma^k_ij with nabla_{e_i} e_j = Gamma^k_ij e_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import tensor_core as tc
from .errors import ConventionError, InvalidInput
from .tolerances import TOL


class _Noncompact:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "NONCOMPACT"

    def __reduce__(self):
        return (_Noncompact, ())


NONCOMPACT = _Noncompact()
Volume = Union[float, _Noncompact]


def levi_civita3() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                         (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[i, j, k] = s
    return eps


_SU2 = 2.0 * levi_civita3().transpose(2, 0, 1)
_SU2.setflags(write=False)


def su2_structure_constants() -> np.ndarray:
    """[e_i, e_j] = 2 eps_ijk e_k, normalized so Q = I is the unit round S^3."""
    return _SU2


# --------------------------------------------------------------------------
# geometry specs
# --------------------------------------------------------------------------

def _positive(name: str, v: float) -> float:
    v = float(v)
    if not (math.isfinite(v) and v > 0):
        raise InvalidInput(f"{name} must be a positive finite number, got {v}")
    return v


@dataclass(frozen=True)
class RoundSphere:
    n: int
    radius: float = 1.0

    def __post_init__(self):
        if not 3 <= int(self.n) <= 8:
            raise InvalidInput(f"RoundSphere dimension {self.n} outside [3, 8]")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "radius", _positive("radius", self.radius))


@dataclass(frozen=True)
class ProductSphereSphere:
    """S^2 x S^2 with metric a g_S2 + b g_S2 (factor curvatures 1/a, 1/b)."""
    a: float
    b: float
    n: int = field(default=4, init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))


@dataclass(frozen=True)
class SphereFlat:
    """S^2(a) x R^(n-2), or a flat-torus quotient when ``flat_lengths`` is given."""
    n: int
    a: float
    flat_lengths: Optional[tuple] = None

    def __post_init__(self):
        if not 3 <= int(self.n) <= 8:
            raise InvalidInput(f"SphereFlat dimension {self.n} outside [3, 8]")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", _positive("a", self.a))
        if self.flat_lengths is not None:
            lengths = tuple(_positive("flat length", v) for v in self.flat_lengths)
            if len(lengths) != self.n - 2:
                raise InvalidInput(f"SphereFlat needs {self.n - 2} flat lengths, got {len(lengths)}")
            object.__setattr__(self, "flat_lengths", lengths)


_VALID_C: set = set()


def _validate_structure_constants(c: np.ndarray) -> None:
    key = c.tobytes()
    if key in _VALID_C:
        return
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c + c.transpose(0, 2, 1))) > TOL.jacobi * scale:
        raise InvalidInput("structure constants are not antisymmetric in (i, j)")
    jac = jacobi_violation(c)
    if jac > TOL.jacobi * scale ** 2:
        raise InvalidInput(f"structure constants violate the Jacobi identity ({jac:.3e})")
    if len(_VALID_C) < 1024:
        _VALID_C.add(key)


@dataclass(frozen=True, eq=False)
class LeftInvariant:
    """Left-invariant metric Q on a 3-dimensional Lie group with constants c."""
    c: np.ndarray
    Q: np.ndarray
    n: int = field(default=3, init=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        Q = np.array(self.Q, dtype=float)
        if c.shape != (3, 3, 3) or Q.shape != (3, 3):
            raise InvalidInput("LeftInvariant needs c of shape (3, 3, 3) and Q of shape (3, 3)")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(Q))):
            raise InvalidInput("LeftInvariant data must be finite")
        _validate_structure_constants(c)
        if np.max(np.abs(Q - Q.T)) > TOL.construction * max(1.0, np.max(np.abs(Q))):
            raise InvalidInput("Q is not symmetric")
        Q = 0.5 * (Q + Q.T)
        if np.linalg.eigvalsh(Q)[0] <= TOL.spd_min_eig:
            raise InvalidInput("Q is not positive definite")
        c.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "Q", Q)

    def __eq__(self, other):
        return (isinstance(other, LeftInvariant)
                and np.array_equal(self.c, other.c) and np.array_equal(self.Q, other.Q))

    def __hash__(self):
        return hash((self.c.tobytes(), self.Q.tobytes()))


@dataclass(frozen=True)
class Berger:
    """Left-invariant metric diag(x, 1, 1) on SU(2); x = 1 is the unit round S^3."""
    x: float
    n: int = field(default=3, init=False)

    def __post_init__(self):
        object.__setattr__(self, "x", _positive("x", self.x))

    def as_left_invariant(self) -> LeftInvariant:
        return LeftInvariant(su2_structure_constants(), np.diag([self.x, 1.0, 1.0]))


GeometrySpec = Union[RoundSphere, ProductSphereSphere, SphereFlat, LeftInvariant, Berger]


def diagonal_su2(x1: float, x2: float, x3: float) -> LeftInvariant:
    return LeftInvariant(su2_structure_constants(), np.diag([x1, x2, x3]))


def scale_spec(spec: GeometrySpec, c: float) -> GeometrySpec:
    """The same geometry with metric multiplied by ``c`` (lengths by sqrt(c))."""
    c = _positive("scale", c)
    r = math.sqrt(c)
    if isinstance(spec, RoundSphere):
        return RoundSphere(spec.n, spec.radius * r)
    if isinstance(spec, ProductSphereSphere):
        return ProductSphereSphere(spec.a * c, spec.b * c)
    if isinstance(spec, SphereFlat):
        lengths = None if spec.flat_lengths is None else tuple(v * r for v in spec.flat_lengths)
        return SphereFlat(spec.n, spec.a * c, lengths)
    if isinstance(spec, Berger):
        spec = spec.as_left_invariant()
    if isinstance(spec, LeftInvariant):
        return LeftInvariant(spec.c, spec.Q * c)
    raise InvalidInput(f"unknown geometry spec {spec!r}")


# --------------------------------------------------------------------------
# Lie-algebra machinery
# --------------------------------------------------------------------------

def jacobi_violation(c: np.ndarray) -> float:
    # [[e_i, e_j], e_l] + cyclic, component p
    t = np.einsum("mij,pml->ijlp", c, c)
    cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(cyc)))


def orthonormal_frame(c: np.ndarray, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (P, c_on) with e = b P orthonormal and c_on the constants in that frame.

    P = Q^(-1/2) from a symmetric eigendecomposition.
    """
    w, V = np.linalg.eigh(Q)
    P = (V / np.sqrt(w)) @ V.T
    Pinv = (V * np.sqrt(w)) @ V.T
    c_on = np.einsum("kd,dab,ai,bj->kij", Pinv, c, P, P)
    c_on = 0.5 * (c_on - c_on.transpose(0, 2, 1))
    return P, c_on


def koszul_gamma(c_on: np.ndarray) -> np.ndarray:
    """Connection coefficients from orthonormal-frame structure constants.

    2<nabla_i e_j, e_k> = <[e_i,e_j],e_k> - <[e_j,e_k],e_i> + <[e_k,e_i],e_j>.
    """
    return 0.5 * (c_on - c_on.transpose(2, 0, 1) + c_on.transpose(1, 2, 0))


def koszul_connection(c, Q) -> tuple[np.ndarray, np.ndarray]:
    """Validate (c, Q), orthonormalize, and return (Gamma, c_on)."""
    spec = LeftInvariant(c, Q)
    _, c_on = orthonormal_frame(spec.c, spec.Q)
    return koszul_gamma(c_on), c_on


def curvature_from_connection(Gamma: np.ndarray, c_on: np.ndarray) -> np.ndarray:
    """Rm_ijkl = <R(e_i, e_j) e_l, e_k> with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    # nabla_i nabla_j e_k = Gamma^m_jk Gamma^p_im e_p
    T = (np.einsum("mjk,pim->ijkp", Gamma, Gamma)
         - np.einsum("mik,pjm->ijkp", Gamma, Gamma)
         - np.einsum("mij,pmk->ijkp", c_on, Gamma))
    Rm = T.transpose(0, 1, 3, 2)
    viol = tc.riem4_violation(Rm)
    if viol > 1e-10 * max(1.0, float(np.max(np.abs(Rm)))):
        raise ConventionError(f"Koszul curvature fails Riem4 symmetries ({viol:.3e})")
    return Rm


def covariant_derivative2(Gamma: np.ndarray, T: np.ndarray) -> np.ndarray:
    """nabla_k T_ij for a left-invariant symmetric 2-tensor; result[k, i, j]."""
    return -np.einsum("lki,lj->kij", Gamma, T) - np.einsum("lkj,il->kij", Gamma, T)


def covariant_derivative3(Gamma: np.ndarray, N: np.ndarray) -> np.ndarray:
    """nabla_m N_kij for left-invariant N; result[m, k, i, j]."""
    return (-np.einsum("lmk,lij->mkij", Gamma, N)
            - np.einsum("lmi,klj->mkij", Gamma, N)
            - np.einsum("lmj,kil->mkij", Gamma, N))


def covariant_derivatives(Gamma: np.ndarray, Ric: np.ndarray, E: np.ndarray):
    """(nablaRic, lapRic, nablaE, hessRic) for constant frame components."""
    nric = covariant_derivative2(Gamma, Ric)
    hess = covariant_derivative3(Gamma, nric)
    lap = np.einsum("kkij->ij", hess)
    nE = covariant_derivative2(Gamma, E)
    return nric, 0.5 * (lap + lap.T), nE, hess


# --------------------------------------------------------------------------
# homogeneous curvature package
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HomogeneousCurvature:
    spec: object
    cp: tc.CurvaturePoint
    Gamma: Optional[np.ndarray]  # None for closed-form models
    c_on: Optional[np.ndarray]
    nablaRic: np.ndarray  # [k, i, j] = nabla_k R_ij
    lapRic: np.ndarray
    nablaE: np.ndarray
    hessRic: np.ndarray  # [m, k, i, j] = nabla_m nabla_k R_ij
    volume: Volume

    @property
    def n(self) -> int:
        return self.cp.n

    # R is constant on homogeneous models: its derivatives are exact zeros
    @property
    def nabla_R(self) -> np.ndarray:
        return np.zeros(self.n)

    @property
    def hess_R(self) -> np.ndarray:
        return np.zeros((self.n, self.n))

    @property
    def lap_R(self) -> float:
        return 0.0

    @property
    def lapE(self) -> np.ndarray:
        return self.lapRic

    @property
    def compact(self) -> bool:
        return self.volume is not NONCOMPACT


def _block_curvature(n: int, blocks: list[tuple[tuple[int, int], float]]) -> np.ndarray:
    Rm = np.zeros((n,) * 4)
    for idx, k in blocks:
        P = np.zeros((n, n))
        P[list(idx), list(idx)] = 1.0
        Rm = Rm + 0.5 * k * np.asarray(tc.kulkarni_nomizu(P, P))
    return Rm


def sphere_volume(n: int, r: float = 1.0) -> float:
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2) * r ** n


def _su2_scale(c: np.ndarray) -> Optional[float]:
    """kappa > 0 if c = kappa * eps (a rescaled su(2) basis), else None."""
    eps = levi_civita3().transpose(2, 0, 1)
    kappa = float(np.sum(c * eps) / np.sum(eps * eps))
    if kappa > 0 and np.max(np.abs(c - kappa * eps)) <= 1e-12 * kappa:
        return kappa
    return None


def volume_of(spec: GeometrySpec) -> Volume:
    if isinstance(spec, RoundSphere):
        return sphere_volume(spec.n, spec.radius)
    if isinstance(spec, ProductSphereSphere):
        return 16.0 * math.pi ** 2 * spec.a * spec.b
    if isinstance(spec, SphereFlat):
        if spec.flat_lengths is None:
            return NONCOMPACT
        return 4.0 * math.pi * spec.a * math.prod(spec.flat_lengths)
    if isinstance(spec, Berger):
        return 2.0 * math.pi ** 2 * math.sqrt(spec.x)
    if isinstance(spec, LeftInvariant):
        kappa = _su2_scale(spec.c)
        if kappa is None:
            return NONCOMPACT
        # basis b = (kappa/2) e_std, so Q_std = (2/kappa)^2 Q
        return 2.0 * math.pi ** 2 * (2.0 / kappa) ** 3 * math.sqrt(np.linalg.det(spec.Q))
    raise InvalidInput(f"unknown geometry spec {spec!r}")


def _closed_form_package(spec, Rm: np.ndarray) -> HomogeneousCurvature:
    cp = tc.curvature_point(Rm)
    n = cp.n
    zero3 = np.zeros((n, n, n))
    return HomogeneousCurvature(
        spec=spec, cp=cp, Gamma=None, c_on=None,
        nablaRic=zero3, lapRic=np.zeros((n, n)), nablaE=zero3,
        hessRic=np.zeros((n,) * 4), volume=volume_of(spec),
    )


def curvature_of(spec: GeometrySpec) -> HomogeneousCurvature:
    """Complete homogeneous curvature package for a model geometry."""
    if isinstance(spec, RoundSphere):
        n = spec.n
        Rm = 0.5 / spec.radius ** 2 * np.asarray(tc.kulkarni_nomizu(np.eye(n), np.eye(n)))
        return _closed_form_package(spec, Rm)
    if isinstance(spec, ProductSphereSphere):
        Rm = _block_curvature(4, [((0, 1), 1.0 / spec.a), ((2, 3), 1.0 / spec.b)])
        return _closed_form_package(spec, Rm)
    if isinstance(spec, SphereFlat):
        Rm = _block_curvature(spec.n, [((0, 1), 1.0 / spec.a)])
        return _closed_form_package(spec, Rm)
    li = spec.as_left_invariant() if isinstance(spec, Berger) else spec
    if not isinstance(li, LeftInvariant):
        raise InvalidInput(f"unknown geometry spec {spec!r}")
    _, c_on = orthonormal_frame(li.c, li.Q)
    Gamma = koszul_gamma(c_on)
    Rm = curvature_from_connection(Gamma, c_on)
    cp = tc.curvature_point(Rm, tol=1e-10)
    nric, lap, nE, hess = covariant_derivatives(Gamma, np.asarray(cp.Ric), np.asarray(cp.E))
    return HomogeneousCurvature(
        spec=spec, cp=cp, Gamma=Gamma, c_on=c_on,
        nablaRic=nric, lapRic=lap, nablaE=nE, hessRic=hess, volume=volume_of(spec),
    )
