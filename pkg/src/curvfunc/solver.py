"""Critical points of the normalized functional inside finite-dimensional
left-invariant metric families.

Newton's method runs in log-coordinates of the free family parameters, with
gradient and Hessian of the reduced value taken by central differences.
Every converged point is then checked against the full Euler-Lagrange
tensor, which is computed independently of the reduction.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry as geo
from .errors import InvalidInput, PreconditionError, ReductionMismatchError
from .euler_lagrange import constrained_residual_Fts
from .functionals import FunctionalParams, eval_functional
from .rigidity import classify_f_half
from .tolerances import TOL, Tolerances

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AnsatzFamily:
    """Metric family Q(params) on SU(2), scale fixed by pinning one entry to 1."""
    name: str
    param_names: tuple
    q_of: Callable[[np.ndarray], np.ndarray]
    dq_dlog: Callable[[np.ndarray], list]  # d Q / d log(param_a)
    canonical: Callable[[np.ndarray], np.ndarray]  # dedup key modulo discrete symmetries

    @property
    def dim_params(self) -> int:
        return len(self.param_names)

    def embed(self, params) -> geo.GeometrySpec:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.dim_params,) or not np.all(np.isfinite(params)) or np.any(params <= 0):
            raise InvalidInput(f"{self.name} parameters must be {self.dim_params} positive numbers")
        if self.name == "berger":
            return geo.Berger(float(params[0]))
        return geo.LeftInvariant(geo.su2_structure_constants(), self.q_of(params))


def _berger_family() -> AnsatzFamily:
    def q_of(p):
        return np.diag([p[0], 1.0, 1.0])

    def dq(p):
        return [np.diag([p[0], 0.0, 0.0])]

    return AnsatzFamily("berger", ("x",), q_of, dq, lambda p: np.log(np.asarray(p, float)))


def _diagonal_family() -> AnsatzFamily:
    def q_of(p):
        return np.diag([1.0, p[0], p[1]])

    def dq(p):
        return [np.diag([0.0, p[0], 0.0]), np.diag([0.0, 0.0, p[1]])]

    def canonical(p):
        # permutations of (x1, x2, x3) and overall scale
        u = np.sort(np.log([1.0, p[0], p[1]]))
        return u - u.mean()

    return AnsatzFamily("diagonal-su2", ("x2", "x3"), q_of, dq, canonical)


FAMILIES = {"berger": _berger_family(), "diagonal-su2": _diagonal_family()}


def get_family(name: str) -> AnsatzFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise InvalidInput(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None


# --------------------------------------------------------------------------
# configuration and results
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SolveConfig:
    starts: int = 32
    tol: float = 1e-10  # on |grad_u N| / max(1, |N|)
    max_iter: int = 200
    fd_step: float = 1e-3  # in log-parameters; Richardson-refined
    hess_step: float = 1e-3
    start_range: tuple = (0.05, 20.0)
    seed: int = 0
    threads: Optional[int] = None
    sectional_starts: int = 64

    def as_dict(self) -> dict:
        return asdict(self)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CURVFUNC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CriticalPoint:
    family: str
    params: tuple
    t: float
    s: float
    residual_tensor_norm: float
    residual_grad_norm: float
    is_einstein: bool
    min_sectional: float
    sectional_flag: str
    E_norm_sq: float
    R: float
    normalized_value: float
    classification: str
    start_index: int
    iterations: int
    tolerances: dict = field(default_factory=dict, repr=False)


@dataclass
class SolveResult:
    points: list
    diagnostics: list
    config: SolveConfig

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


# --------------------------------------------------------------------------
# reduced functional and derivatives
# --------------------------------------------------------------------------

def reduced_value(family: AnsatzFamily, params, t: float, s: float = 0.0) -> float:
    hc = geo.curvature_of(family.embed(params))
    return eval_functional(hc, FunctionalParams(t, s)).normalized


def _fd_gradient(f: Callable, u: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(u)
    for a in range(u.size):
        e = np.zeros_like(u)
        e[a] = 1.0

        def D(hh):
            return (f(u + hh * e) - f(u - hh * e)) / (2 * hh)

        g[a] = (4.0 * D(h / 2) - D(h)) / 3.0
    return g


def _fd_hessian(f: Callable, u: np.ndarray, h: float, f0: float) -> np.ndarray:
    d = u.size
    H = np.empty((d, d))
    I = np.eye(d)
    for a in range(d):
        H[a, a] = (f(u + h * I[a]) - 2 * f0 + f(u - h * I[a])) / h ** 2
        for b in range(a):
            H[a, b] = H[b, a] = (f(u + h * (I[a] + I[b])) - f(u + h * (I[a] - I[b]))
                                 - f(u - h * (I[a] - I[b])) + f(u - h * (I[a] + I[b]))) / (4 * h ** 2)
    return H


def analytic_log_gradient(family: AnsatzFamily, params, t: float, s: float = 0.0) -> np.ndarray:
    """d N / d log(params) from the Euler-Lagrange tensor: V^(4/n) <residual, h>."""
    params = np.asarray(params, dtype=float)
    spec = family.embed(params)
    li = spec.as_left_invariant() if isinstance(spec, geo.Berger) else spec
    hc = geo.curvature_of(spec)
    P, _ = geo.orthonormal_frame(li.c, li.Q)
    res = constrained_residual_Fts(hc, t, s).tensor_residual
    scale = float(hc.volume) ** (4.0 / hc.n)
    return np.array([scale * float(np.sum(res * (P.T @ dQ @ P))) for dQ in family.dq_dlog(params)])


@dataclass
class _Run:
    u: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float
    message: str


def _newton(f: Callable, u0: np.ndarray, cfg: SolveConfig) -> _Run:
    u = np.array(u0, dtype=float)
    umax = 12.0

    def scaled(g, val):
        return float(np.linalg.norm(g)) / max(1.0, abs(val))

    val = f(u)
    g = _fd_gradient(f, u, cfg.fd_step)
    gn = scaled(g, val)
    mu = 0.0
    history = []
    for it in range(cfg.max_iter):
        if gn < cfg.tol:
            return _Run(u, True, it, gn, "gradient below tolerance")
        history.append(gn)
        # quadratic convergence never takes this long; the run is creeping along an asymptote
        if len(history) > 25 and gn > 0.5 * history[-25]:
            return _Run(u, False, it, gn, "stagnated")
        H = _fd_hessian(f, u, cfg.hess_step, val)
        # Levenberg shift on the Gauss-Newton system for g = 0; plain Newton at mu = 0.
        # The merit is |g| itself, for which the Newton direction is always descent.
        A = H.T @ H
        gabs = float(np.linalg.norm(g))
        accepted = False
        for _ in range(3):
            try:
                step = -np.linalg.solve(A + mu * np.eye(u.size), H.T @ g)
            except np.linalg.LinAlgError:
                mu = max(mu * 100, 1e-10 * max(1.0, np.trace(A)))
                continue
            norm = float(np.linalg.norm(step))
            if norm > 1.0:
                step = step / norm
            alpha = 1.0
            for _ in range(12):
                trial = u + alpha * step
                if np.max(np.abs(trial)) <= umax:
                    tg = _fd_gradient(f, trial, cfg.fd_step)
                    if float(np.linalg.norm(tg)) < (1 - 1e-4 * alpha) * gabs:
                        u, g = trial, tg
                        val = f(u)
                        gn = scaled(g, val)
                        accepted = True
                        break
                alpha *= 0.5
            if accepted:
                mu = mu * 0.01 if mu > 1e-14 else 0.0
                break
            mu = max(mu * 100, 1e-6 * max(1.0, np.trace(A)))
        if not accepted:
            return _Run(u, gn < cfg.tol, it + 1, gn, "line search stalled")
    return _Run(u, gn < cfg.tol, cfg.max_iter, gn, "iteration limit")


def start_points(family: AnsatzFamily, cfg: SolveConfig) -> np.ndarray:
    lo, hi = np.log(cfg.start_range[0]), np.log(cfg.start_range[1])
    d = family.dim_params
    if d == 1:
        return np.linspace(lo, hi, cfg.starts)[:, None]
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(d, cfg.starts)))
    return rng.uniform(lo, hi, size=(cfg.starts, d))


def _classify(hc, is_einstein: bool, t: float, s: float) -> str:
    if is_einstein:
        return "EINSTEIN"
    if t == -0.5 and s == 0.0:
        try:
            return classify_f_half(hc).value
        except PreconditionError:
            return "OTHER"
    return "NON_EINSTEIN"


def _polish(family, u, t, s, cfg, steps: int = 4) -> np.ndarray:
    """A few Newton steps on the exact gradient; removes finite-difference noise."""
    def g(v):
        return analytic_log_gradient(family, np.exp(v), t, s)

    h = cfg.hess_step * 1e-2
    g0 = g(u)
    for _ in range(steps):
        J = np.column_stack([(g(u + h * e) - g(u - h * e)) / (2 * h) for e in np.eye(u.size)])
        try:
            trial = u - np.linalg.solve(J, g0)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(trial)):
            break
        g1 = g(trial)
        if np.linalg.norm(g1) >= np.linalg.norm(g0):
            break
        u, g0 = trial, g1
    return u


def _finish(family, u, run: _Run, start_index, t, s, cfg, tol: Tolerances) -> CriticalPoint:
    if run.converged:
        u = _polish(family, u, t, s, cfg)
    params = np.exp(u)
    spec = family.embed(params)
    vol = float(geo.volume_of(spec))
    unit = geo.scale_spec(spec, vol ** (-2.0 / spec.n))
    hcu = geo.curvature_of(unit)
    res = constrained_residual_Fts(hcu, t, s).tensor_norm
    N = reduced_value(family, params, t, s)
    an = analytic_log_gradient(family, params, t, s)
    fd = _fd_gradient(lambda v: reduced_value(family, np.exp(v), t, s), u, cfg.fd_step)
    mismatch = float(np.linalg.norm(an - fd)) / max(1.0, abs(N))
    if mismatch > tol.reduction_mismatch or (run.converged and res > tol.reduction_mismatch):
        raise ReductionMismatchError(
            f"{family.name} t={t} s={s} params={params.tolist()}: reduced gradient and "
            f"full Euler-Lagrange tensor disagree (gradient gap {mismatch:.3e}, residual {res:.3e})"
        )
    cp = hcu.cp
    is_e = math.sqrt(cp.e_sq) < tol.solver_einstein
    ms = cp.min_sectional(starts=cfg.sectional_starts, seed=cfg.seed)
    return CriticalPoint(
        family=family.name, params=tuple(float(p) for p in params), t=float(t), s=float(s),
        residual_tensor_norm=res, residual_grad_norm=run.grad_norm, is_einstein=bool(is_e),
        min_sectional=ms.value, sectional_flag=ms.flag, E_norm_sq=cp.e_sq, R=cp.R,
        normalized_value=N, classification=_classify(hcu, is_e, t, s),
        start_index=start_index, iterations=run.iterations,
        tolerances={"grad": cfg.tol, "full_residual": tol.solve_full_residual,
                    "einstein": tol.solver_einstein, "dedup": tol.dedup},
    )


def solve(family, t: float, s: float = 0.0, config: Optional[SolveConfig] = None,
          extra_starts: Sequence = (), tol: Optional[Tolerances] = None) -> SolveResult:
    """All critical points reached from the start set, deduplicated.

    ``extra_starts`` (parameter vectors) are tried first; the sweep uses them
    for continuation.
    """
    if isinstance(family, str):
        family = get_family(family)
    cfg = config or SolveConfig()
    tol = tol or TOL
    f = lambda v: reduced_value(family, np.exp(v), t, s)  # noqa: E731
    starts = [np.log(np.asarray(p, dtype=float)) for p in extra_starts]
    starts += list(start_points(family, cfg))

    def run_one(item):
        idx, u0 = item
        try:
            return idx, u0, _newton(f, u0, cfg)
        except InvalidInput as exc:
            return idx, u0, _Run(np.asarray(u0), False, 0, math.inf, f"domain error: {exc}")

    threads = cfg.threads or default_threads()
    items = list(enumerate(starts))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(run_one, items))
    else:
        runs = [run_one(it) for it in items]
    runs.sort(key=lambda r: r[0])

    points: list[CriticalPoint] = []
    keys: list[np.ndarray] = []
    diagnostics: list[str] = []
    for idx, u0, run in runs:
        if not run.converged:
            diagnostics.append(f"start {idx} ({np.exp(u0).round(6).tolist()}): {run.message}, "
                               f"scaled gradient {run.grad_norm:.3e}")
            continue
        key = family.canonical(np.exp(run.u))
        if any(np.linalg.norm(key - k) < tol.dedup for k in keys):
            continue
        cp = _finish(family, run.u, run, idx, t, s, cfg, tol)
        if cp.residual_tensor_norm >= tol.solve_full_residual:
            diagnostics.append(f"start {idx}: full residual {cp.residual_tensor_norm:.3e} "
                               f"above {tol.solve_full_residual:g}; point rejected")
            continue
        keys.append(key)
        points.append(cp)
    points.sort(key=lambda p: (not p.is_einstein, p.params))
    return SolveResult(points, diagnostics, cfg)


# --------------------------------------------------------------------------
# parameter sweep with continuation
# --------------------------------------------------------------------------

@dataclass
class SweepRow:
    t: float
    s: float
    point: Optional[CriticalPoint]
    status: str  # "ok" or a failure description


@dataclass
class SweepResult:
    family: str
    rows: list
    branch_reports: list
    config: SolveConfig

    def non_einstein(self) -> list:
        return [r.point for r in self.rows if r.point is not None and not r.point.is_einstein]


def sweep(family, t_grid: Sequence[float], s: float = 0.0,
          config: Optional[SolveConfig] = None, tol: Optional[Tolerances] = None) -> SweepResult:
    if isinstance(family, str):
        family = get_family(family)
    t_grid = [float(t) for t in t_grid]
    diffs = np.diff(t_grid)
    if len(t_grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise InvalidInput("t grid must be strictly monotone")
    cfg = config or SolveConfig()
    rows: list[SweepRow] = []
    reports: list[str] = []
    prev: list[CriticalPoint] = []
    prev_t: Optional[float] = None
    for t in t_grid:
        try:
            result = solve(family, t, s, cfg, extra_starts=[p.params for p in prev], tol=tol)
        except (ReductionMismatchError, InvalidInput) as exc:
            rows.append(SweepRow(t, s, None, f"FAILED: {exc}"))
            prev, prev_t = [], t
            continue
        if not result.points:
            rows.append(SweepRow(t, s, None, "FAILED: no convergence from any start"))
        for p in result.points:
            rows.append(SweepRow(t, s, p, "ok"))
        if prev_t is not None:
            spacing = abs(t - prev_t)
            for p in result.points:
                if p.is_einstein:
                    continue
                olds = [q for q in prev if not q.is_einstein]
                if not olds:
                    reports.append(f"t={t:g}: non-Einstein branch appears at params {p.params}")
                    continue
                jump = min(float(np.linalg.norm(np.subtract(p.params, q.params))) for q in olds)
                if jump >= 10 * spacing:
                    reports.append(f"t={t:g}: branch split, parameter jump {jump:.3g} "
                                   f">= 10 x grid spacing {spacing:.3g}")
        prev, prev_t = result.points, t
    return SweepResult(family.name, rows, reports, cfg)
