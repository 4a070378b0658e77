"""Pointwise curvature algebra in an orthonormal frame.

All tensors are plain ``numpy`` arrays with the metric equal to the identity,
so no index is ever raised or lowered. Symmetric 2-tensors (``Sym2``) are
``(n, n)`` arrays; curvature-type 4-tensors (``Riem4``) are dense
``(n, n, n, n)`` arrays. Constructors return read-only arrays.

Sign convention: ``Rm[i, j, i, j]`` is the sectional curvature of the plane
``e_i ^ e_j`` and ``Ric[j, l] = sum_i Rm[i, j, i, l]``, so the unit round
sphere has ``Rm = 1/2 (delta o delta)`` and positive curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInput
from .tolerances import TOL

N_MIN, N_MAX = 3, 8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0


def _check_dim(n: int) -> None:
    if not N_MIN <= n <= N_MAX:
        raise InvalidInput(f"dimension {n} outside supported range [{N_MIN}, {N_MAX}]")


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------

def sym2(a, tol: Optional[float] = None) -> np.ndarray:
    """Validate a symmetric 2-tensor and return a read-only, exactly symmetric copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"Sym2 needs a square matrix, got shape {a.shape}")
    _check_dim(a.shape[0])
    tol = TOL.construction if tol is None else tol
    if np.max(np.abs(a - a.T)) > tol * _scale(a):
        raise InvalidInput("Sym2 input is not symmetric")
    return _frozen(0.5 * (a + a.T))


def canonical_riem4(a) -> np.ndarray:
    """Project an arbitrary rank-4 array onto algebraic curvature tensors.

    Antisymmetrizes both index pairs, symmetrizes under pair exchange and
    removes the totally antisymmetric (first-Bianchi-violating) part.
    """
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a - a.transpose(1, 0, 2, 3))
    a = 0.5 * (a - a.transpose(0, 1, 3, 2))
    a = 0.5 * (a + a.transpose(2, 3, 0, 1))
    bianchi = (a + a.transpose(0, 2, 3, 1) + a.transpose(0, 3, 1, 2)) / 3.0
    return a - bianchi


def riem4_violation(a: np.ndarray) -> float:
    """Largest violation of the curvature symmetries (absolute)."""
    checks = (
        a + a.transpose(1, 0, 2, 3),
        a + a.transpose(0, 1, 3, 2),
        a - a.transpose(2, 3, 0, 1),
        a + a.transpose(0, 2, 3, 1) + a.transpose(0, 3, 1, 2),
    )
    return max(float(np.max(np.abs(c))) for c in checks)


def riem4(a, tol: Optional[float] = None) -> np.ndarray:
    """Validate curvature symmetries and return the canonical read-only tensor."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n, n, n):
        raise InvalidInput(f"Riem4 needs shape (n, n, n, n), got {a.shape}")
    _check_dim(n)
    tol = TOL.construction if tol is None else tol
    viol = riem4_violation(a)
    if viol > tol * _scale(a):
        raise InvalidInput(f"Riem4 symmetry violation {viol:.3e}")
    return _frozen(canonical_riem4(a))


# --------------------------------------------------------------------------
# algebra
# --------------------------------------------------------------------------

def kulkarni_nomizu(S, T) -> np.ndarray:
    """(S o T)_ijkl = S_ik T_jl + S_jl T_ik - S_il T_jk - S_jk T_il."""
    S = np.asarray(S, dtype=float)
    T = np.asarray(T, dtype=float)
    if S.shape != T.shape or S.ndim != 2:
        raise InvalidInput(f"Kulkarni-Nomizu operands differ: {S.shape} vs {T.shape}")
    out = (
        np.einsum("ik,jl->ijkl", S, T)
        + np.einsum("jl,ik->ijkl", S, T)
        - np.einsum("il,jk->ijkl", S, T)
        - np.einsum("jk,il->ijkl", S, T)
    )
    return _frozen(out)


def ricci_contract(Rm) -> tuple[np.ndarray, float]:
    Rm = np.asarray(Rm, dtype=float)
    Ric = np.einsum("ijil->jl", Rm)
    return sym2(Ric, tol=1e-9), float(np.trace(Ric))


def weyl_trace(W) -> np.ndarray:
    """The Ricci-type contraction sum_i W_ijil; zero for a Weyl tensor."""
    return np.einsum("ijil->jl", np.asarray(W, dtype=float))


def reconstruct_riemann(W, Ric, R: float) -> np.ndarray:
    """Assemble Rm from its Weyl, Ricci and scalar parts."""
    W = np.asarray(W, dtype=float)
    Ric = np.asarray(Ric, dtype=float)
    n = Ric.shape[0]
    if W.shape != (n, n, n, n):
        raise InvalidInput("Weyl and Ricci dimensions differ")
    tr = np.max(np.abs(weyl_trace(W)))
    if tr > TOL.trace_reject * _scale(W):
        raise InvalidInput(f"Weyl input is not trace-free (max trace {tr:.3e})")
    g = np.eye(n)
    Rm = (
        W
        + kulkarni_nomizu(Ric, g) / (n - 2)
        - R / ((n - 1) * (n - 2)) * 0.5 * kulkarni_nomizu(g, g)
    )
    return _frozen(Rm)


def weyl_part(Rm, Ric, R: float) -> np.ndarray:
    Rm = np.asarray(Rm, dtype=float)
    Ric = np.asarray(Ric, dtype=float)
    n = Ric.shape[0]
    Ric_c = np.einsum("ijil->jl", Rm)
    scale = _scale(Rm)
    if np.max(np.abs(Ric_c - Ric)) > TOL.trace_reject * scale or abs(np.trace(Ric) - R) > TOL.trace_reject * scale * n:
        raise InvalidInput("(Rm, Ric, R) triple is inconsistent")
    g = np.eye(n)
    E = Ric - R / n * g
    W = Rm - kulkarni_nomizu(E, g) / (n - 2) - R / (2 * n * (n - 1)) * kulkarni_nomizu(g, g)
    return _frozen(W)


def traceless(T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    n = T.shape[0]
    return _frozen(T - np.trace(T) / n * np.eye(n))


def schouten_sigma2(Ric, R: float) -> tuple[np.ndarray, float]:
    """Schouten tensor A and its second elementary symmetric function."""
    Ric = np.asarray(Ric, dtype=float)
    n = Ric.shape[0]
    A = (Ric - R / (2 * (n - 1)) * np.eye(n)) / (n - 2)
    s2 = 0.5 * (np.trace(A) ** 2 - float(np.sum(A * A)))
    return sym2(A), float(s2)


def sq_norm(T) -> float:
    T = np.asarray(T, dtype=float)
    return float(np.sum(T * T))


def coord_sectionals(Rm) -> np.ndarray:
    Rm = np.asarray(Rm, dtype=float)
    n = Rm.shape[0]
    idx = np.arange(n)
    sig = Rm[idx[:, None], idx[None, :], idx[:, None], idx[None, :]].copy()
    np.fill_diagonal(sig, 0.0)
    return _frozen(sig)


# --------------------------------------------------------------------------
# sectional curvature bounds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionalBound:
    value: float
    flag: str  # "exact" or "sampled"


def _sectional_exact_3d(Rm: np.ndarray) -> float:
    # plane orthogonal to unit v has curvature R/2 - Ric(v, v)
    Ric = np.einsum("ijil->jl", Rm)
    R = np.trace(Ric)
    M = 0.5 * R * np.eye(3) - Ric
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def _stiefel_descent(Rm: np.ndarray, frames: np.ndarray, iters: int = 300) -> np.ndarray:
    """Batched projected-gradient descent of K(X, Y) over orthonormal pairs.

    ``frames`` has shape (batch, n, 2). Returns the final curvature values.
    """
    scale = max(float(np.max(np.abs(Rm))), 1e-300)
    step = np.full(frames.shape[0], 0.25 / scale)

    def K(F):
        X, Y = F[:, :, 0], F[:, :, 1]
        return np.einsum("ijkl,bi,bj,bk,bl->b", Rm, X, Y, X, Y)

    def retract(F):
        q, r = np.linalg.qr(F)
        signs = np.sign(np.einsum("bii->bi", r))
        signs[signs == 0] = 1.0
        return q * signs[:, None, :]

    F = retract(frames)
    k = K(F)
    for _ in range(iters):
        X, Y = F[:, :, 0], F[:, :, 1]
        gX = 2.0 * np.einsum("ajkl,bj,bk,bl->ba", Rm, Y, X, Y)
        gY = 2.0 * np.einsum("ijal,bi,bj,bl->ba", Rm, X, Y, Y)
        G = np.stack([gX, gY], axis=2)
        FtG = np.einsum("bia,bic->bac", F, G)
        rg = G - np.einsum("bia,bac->bic", F, 0.5 * (FtG + FtG.transpose(0, 2, 1)))
        trial = retract(F - step[:, None, None] * rg)
        kt = K(trial)
        better = kt <= k
        F = np.where(better[:, None, None], trial, F)
        k = np.where(better, kt, k)
        step = np.where(better, step * 1.2, step * 0.5)
        if np.all(step < 1e-14 / scale):
            break
    return _alternate(Rm, F, k)


def _alternate(Rm: np.ndarray, F: np.ndarray, k: np.ndarray, iters: int = 200) -> np.ndarray:
    """Exact block minimization: for fixed X the best Y is the lowest
    eigenvector of M(X)_jl = R_ijkl X_i X_k restricted to X-perp, and vice versa."""
    n = Rm.shape[0]
    X, Y = F[:, :, 0], F[:, :, 1]
    for _ in range(iters):
        X, Y = Y, X  # K(X, Y) = K(Y, X); always re-optimize the second slot
        M = np.einsum("ijkl,bi,bk->bjl", Rm, X, X)
        P = np.eye(n) - np.einsum("bi,bj->bij", X, X)
        M = P @ (0.5 * (M + M.transpose(0, 2, 1))) @ P
        # the X direction is an eigenvector with eigenvalue 0; push it to the top
        w, V = np.linalg.eigh(M + (abs(M).max() + 1.0) * np.einsum("bi,bj->bij", X, X))
        kn = w[:, 0]
        improved = kn < k
        Y = np.where(improved[:, None], V[:, :, 0], Y)
        prev = k
        k = np.minimum(k, kn)
        if np.max(prev - k) <= 1e-15 * max(1.0, float(np.max(np.abs(k)))):
            break
    return k


def min_sectional(Rm, strategy: str = "auto", starts: int = 64, seed: int = 0) -> SectionalBound:
    """Smallest sectional curvature.

    Exact for n = 3. For n >= 4 the minimum over all coordinate planes and
    over ``starts`` seeded projected-gradient runs is returned, flagged
    ``"sampled"``: it is an upper bound on the true minimum.
    """
    Rm = np.asarray(Rm, dtype=float)
    n = Rm.shape[0]
    if strategy not in ("auto", "exact", "sampled"):
        raise InvalidInput(f"unknown strategy {strategy!r}")
    if n == 3 and strategy != "sampled":
        return SectionalBound(_sectional_exact_3d(Rm), "exact")
    if strategy == "exact":
        raise InvalidInput("exact sectional minimum only available for n = 3")
    sig = coord_sectionals(Rm)
    iu = np.triu_indices(n, 1)
    best = float(np.min(sig[iu]))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, starts)))
    frames = rng.standard_normal((starts, n, 2))
    coord = np.zeros((len(iu[0]), n, 2))
    coord[np.arange(len(iu[0])), iu[0], 0] = 1.0
    coord[np.arange(len(iu[0])), iu[1], 1] = 1.0
    # perturbed coordinate planes also seed the descent
    frames = np.concatenate([frames, coord + 1e-3 * rng.standard_normal(coord.shape)])
    k = _stiefel_descent(Rm, frames)
    return SectionalBound(min(best, float(np.min(k))), "sampled")


# --------------------------------------------------------------------------
# curvature package
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvaturePoint:
    n: int
    Rm: np.ndarray
    Ric: np.ndarray
    R: float
    E: np.ndarray
    W: np.ndarray
    A: np.ndarray
    sigma2A: float
    coord_sectionals: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def rm_sq(self) -> float:
        return sq_norm(self.Rm)

    @property
    def ric_sq(self) -> float:
        return sq_norm(self.Ric)

    @property
    def e_sq(self) -> float:
        return sq_norm(self.E)

    @property
    def w_sq(self) -> float:
        return sq_norm(self.W)

    @property
    def ricci_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.Ric)

    def min_sectional(self, starts: int = 64, seed: int = 0) -> SectionalBound:
        key = ("minsec", starts, seed)
        if key not in self._cache:
            self._cache[key] = min_sectional(self.Rm, starts=starts, seed=seed)
        return self._cache[key]


def curvature_point(Rm, tol: Optional[float] = None) -> CurvaturePoint:
    """Build the full pointwise package from a curvature tensor."""
    Rm = riem4(Rm, tol=tol)
    n = Rm.shape[0]
    Ric, R = ricci_contract(Rm)
    E = traceless(Ric)
    W = weyl_part(Rm, Ric, R)
    A, s2 = schouten_sigma2(Ric, R)
    return CurvaturePoint(
        n=n, Rm=Rm, Ric=Ric, R=R, E=E, W=W, A=A, sigma2A=s2,
        coord_sectionals=coord_sectionals(Rm),
    )


# --------------------------------------------------------------------------
# random generators (test and suite support)
# --------------------------------------------------------------------------

def random_sym2(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) * scale
    return 0.5 * (a + a.T)


def random_weyl(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random totally trace-free algebraic curvature tensor (zero for n = 3)."""
    Rm = canonical_riem4(rng.standard_normal((n, n, n, n)))
    Ric = np.einsum("ijil->jl", Rm)
    return np.asarray(weyl_part(Rm, Ric, float(np.trace(Ric))))


def random_riem4(rng: np.random.Generator, n: int) -> np.ndarray:
    Ric = random_sym2(rng, n)
    return np.asarray(reconstruct_riemann(random_weyl(rng, n), Ric, float(np.trace(Ric))))
