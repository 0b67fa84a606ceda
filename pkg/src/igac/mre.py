"""Maximum relative entropy updating under expectation constraints.

Given a prior density, constraints <f_j(X)> = F_j and normalization, the
maximizer of the relative entropy S[P, P_old] = -int P ln(P/P_old) is the
exponential tilt P_new = P_old exp(beta . f) / Z(beta), with the multipliers
fixed by grad ln Z = F.  ln Z is convex in beta, so the one-constraint solve
is a safeguarded Newton iteration inside a sign-change bracket and the
multi-constraint solve is a damped Newton iteration on the moment residual
with the tilted covariance as Jacobian.

Integrals use composite Gauss-Legendre grids (2048 points, endpoint
clustered); infinite prior supports are truncated at the prior's effective
range and checked for genuine divergence of the tilted integrand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (
    BracketingError,
    DomainError,
    InfeasibleConstraintError,
)
from .models import StatModel, log_density, _factor_box
from .quadrature import gauss_legendre

__all__ = [
    "TabulatedDensity",
    "MrEProblem",
    "MrEResult",
    "uniform_prior",
    "solve_multiplier",
    "update",
    "relative_entropy",
    "constraint_function",
]

_GRID_POINTS = 2048
_PANEL_NODES = 64


def _composite_grid(lo: float, hi: float, total: int = _GRID_POINTS):
    """Uniform composite Gauss-Legendre rule; nodes cluster at panel edges."""
    n_panels = max(total // _PANEL_NODES, 1)
    t, w = gauss_legendre(_PANEL_NODES)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    x = (mids[:, None] + half[:, None] * t).ravel()
    ww = (half[:, None] * w).ravel()
    return x, ww


@dataclass(frozen=True, eq=False)
class TabulatedDensity:
    """A density sampled on a quadrature grid over its (finite) domain.

    ``bounds`` records the true interval edges; the Gauss nodes themselves
    sit strictly inside it.
    """

    x: np.ndarray
    w: np.ndarray
    p: np.ndarray
    bounds: tuple = None

    def __post_init__(self):
        for name in ("x", "w", "p"):
            arr = np.asarray(getattr(self, name), float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.bounds is None:
            object.__setattr__(self, "bounds",
                               (float(self.x[0]), float(self.x[-1])))

    @property
    def domain(self):
        return self.bounds

    def mass(self) -> float:
        return float(self.w @ self.p)

    def moment(self, fn: Callable) -> float:
        return float(self.w @ (self.p * fn(self.x)))

    def density(self, xq):
        return np.interp(xq, self.x, self.p, left=0.0, right=0.0)


def uniform_prior(lo: float, hi: float) -> TabulatedDensity:
    x, w = _composite_grid(lo, hi)
    return TabulatedDensity(x, w, np.full_like(x, 1.0 / (hi - lo)),
                            bounds=(float(lo), float(hi)))


def _prior_interval(prior, domain):
    """Finite working interval plus flags marking truncated infinite ends.

    A hard support boundary (the origin of a half-line density) is not a
    truncation; only genuinely infinite ends get the tail-divergence guard.
    """
    if domain is not None:
        lo, hi = float(domain[0]), float(domain[1])
    elif isinstance(prior, TabulatedDensity):
        lo, hi = prior.domain
    elif isinstance(prior, StatModel):
        if prior.micro_dim != 1:
            raise ValueError("only one-dimensional priors are supported")
        lo, hi = prior.micro_bounds()[0]
    else:
        raise ValueError("a domain is required for callable priors")
    open_lo = not np.isfinite(lo)
    open_hi = not np.isfinite(hi)
    if (open_lo or open_hi) and isinstance(prior, StatModel):
        if prior.micro_dim != 1:
            raise ValueError("only one-dimensional priors are supported")
        box = _factor_box(prior.factors[0], prior.theta)[0]
        lo = box[0] if open_lo else lo
        hi = box[1] if open_hi else hi
    elif open_lo or open_hi:
        raise ValueError("infinite domain requires a StatModel prior")
    return lo, hi, open_lo, open_hi


def _log_prior_values(prior, x):
    if isinstance(prior, StatModel):
        return log_density(prior, x[:, None])
    if isinstance(prior, TabulatedDensity):
        vals = prior.density(x)
    else:
        vals = np.asarray(prior(x), float)
    if np.any(vals < 0):
        raise ValueError("prior density must be nonnegative")
    return np.log(np.maximum(vals, 1e-300))


@dataclass(frozen=True, eq=False)
class MrEProblem:
    """Prior, expectation constraints and the integration domain."""

    prior: object                       # StatModel | TabulatedDensity | callable
    constraints: tuple                  # ((fn, target), ...)
    domain: tuple = None                # (lo, hi); None = prior's own support

    def __post_init__(self):
        cons = tuple((fn, float(F)) for fn, F in self.constraints)
        for _, F in cons:
            if not np.isfinite(F):
                raise ValueError("constraint targets must be finite")
        object.__setattr__(self, "constraints", cons)


@dataclass(frozen=True, eq=False)
class MrEResult:
    beta: np.ndarray
    log_z: float
    posterior: TabulatedDensity
    achieved: np.ndarray
    objective: float                    # S[P_new, P_old] = log Z - beta . F


class _Workspace:
    def __init__(self, problem: MrEProblem):
        lo, hi, self.open_lo, self.open_hi = _prior_interval(
            problem.prior, problem.domain)
        self.bounds = (lo, hi)
        self.x, self.w = _composite_grid(lo, hi)
        self.lnp_old = _log_prior_values(problem.prior, self.x)
        mass = float(np.exp(logsumexp(self.lnp_old + np.log(self.w))))
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"prior is not normalized on the domain "
                             f"(mass {mass})")
        self.lnp_old -= np.log(mass)
        self.f = np.column_stack([np.asarray(fn(self.x), float)
                                  for fn, _ in problem.constraints])
        self.targets = np.array([F for _, F in problem.constraints])

    def log_z(self, beta):
        return float(logsumexp(self.lnp_old + np.log(self.w)
                               + self.f @ beta))

    def tilted_stats(self, beta):
        lw = self.lnp_old + np.log(self.w) + self.f @ beta
        lw -= logsumexp(lw)
        prob = np.exp(lw)
        mean = prob @ self.f
        centered = self.f - mean
        cov = centered.T @ (centered * prob[:, None])
        return mean, cov

    def check_divergence(self, beta):
        """The true (untruncated) tilted integrand must decay at every
        artificially truncated end; otherwise Z diverges."""
        g = self.lnp_old + self.f @ beta
        k = 8    # compare the outermost nodes with their inner neighbors
        if self.open_hi and g[-1] > g[-k]:
            raise InfeasibleConstraintError(
                "tilted integrand grows toward +inf; Z diverges")
        if self.open_lo and g[0] > g[k - 1]:
            raise InfeasibleConstraintError(
                "tilted integrand grows toward -inf; Z diverges")


def _solve_scalar(ws: _Workspace, tol: float):
    # no tilt can push the moment outside the range of f on the domain
    f_lo, f_hi = float(np.min(ws.f[:, 0])), float(np.max(ws.f[:, 0]))
    if not f_lo < ws.targets[0] < f_hi:
        raise BracketingError(
            f"target {ws.targets[0]} outside the reachable moment range "
            f"[{f_lo}, {f_hi}]; no sign change exists")

    def residual(b):
        mean, _ = ws.tilted_stats(np.array([b]))
        return mean[0] - ws.targets[0]

    lo, hi = -1.0, 1.0
    rlo, rhi = residual(lo), residual(hi)
    for _ in range(60):
        if rlo <= 0.0 <= rhi:
            break
        # residual is increasing in beta (dln Z/dbeta has positive slope)
        if rlo > 0:
            lo *= 2.0
            ws.check_divergence(np.array([lo]))
            rlo = residual(lo)
        else:
            hi *= 2.0
            ws.check_divergence(np.array([hi]))
            rhi = residual(hi)
    else:
        raise BracketingError("no sign change of the moment residual on the "
                              f"expanded bracket [{lo}, {hi}]")

    b = 0.5 * (lo + hi)
    for _ in range(200):
        mean, cov = ws.tilted_stats(np.array([b]))
        res = mean[0] - ws.targets[0]
        if res > 0:
            hi = b
        else:
            lo = b
        if abs(res) < tol:
            break
        var = cov[0, 0]
        step = res / var if var > 0 else 0.0
        cand = b - step
        if not lo < cand < hi:    # Newton left the bracket; bisect instead
            cand = 0.5 * (lo + hi)
        b = cand
    ws.check_divergence(np.array([b]))
    return np.array([b])


def _solve_newton(ws: _Workspace, tol: float):
    beta = np.zeros(ws.targets.size)
    mean, cov = ws.tilted_stats(beta)
    res = mean - ws.targets
    best = float(np.max(np.abs(res)))
    for _ in range(200):
        if best < tol:
            break
        try:
            step = np.linalg.solve(cov, -res)
        except np.linalg.LinAlgError as exc:
            raise InfeasibleConstraintError(
                "degenerate tilted covariance") from exc
        lam = 1.0
        while lam > 1e-10:
            cand = beta + lam * step
            ws.check_divergence(cand)
            mean_c, cov_c = ws.tilted_stats(cand)
            res_c = mean_c - ws.targets
            if np.max(np.abs(res_c)) < best:
                beta, res, cov = cand, res_c, cov_c
                best = float(np.max(np.abs(res_c)))
                break
            lam *= 0.5
        else:
            raise InfeasibleConstraintError(
                f"moment residual stalled at {best}")
    else:
        raise InfeasibleConstraintError(
            f"no convergence; residual {best} above {tol}")
    return beta


def solve_multiplier(problem: MrEProblem, tol: float = 1e-12) -> MrEResult:
    """Solve grad ln Z(beta) = F and build the canonical posterior.

    Raises InfeasibleConstraintError when the tilt makes Z diverge on an
    infinite prior support and BracketingError when no sign change of the
    residual can be bracketed.
    """
    ws = _Workspace(problem)
    beta = _solve_scalar(ws, tol) if ws.targets.size == 1 \
        else _solve_newton(ws, tol)
    log_z = ws.log_z(beta)
    lnp_new = ws.lnp_old + ws.f @ beta - log_z
    posterior = TabulatedDensity(ws.x, ws.w, np.exp(lnp_new),
                                 bounds=ws.bounds)
    achieved, _ = ws.tilted_stats(beta)
    objective = log_z - float(beta @ achieved)
    return MrEResult(beta, log_z, posterior, achieved, objective)


def update(prior, mean: float, second_moment: float, domain=None,
           tol: float = 1e-12) -> MrEResult:
    """First- plus second-moment update; produces a (truncated) normal."""
    if second_moment - mean ** 2 <= 0:
        raise InfeasibleConstraintError(
            "second moment must exceed the squared mean")
    problem = MrEProblem(prior, ((lambda x: x, mean),
                                 (lambda x: x ** 2, second_moment)),
                         domain=domain)
    return solve_multiplier(problem, tol)


def relative_entropy(p, q, domain=None) -> float:
    """S[p, q] = -int p ln(p/q); nonpositive, zero iff p = q."""
    interval = None
    for cand in (p, q):
        if isinstance(cand, TabulatedDensity):
            interval = cand.domain
            break
    if domain is not None:
        interval = (float(domain[0]), float(domain[1]))
    ref = p if isinstance(p, (StatModel, TabulatedDensity)) else q
    lo, hi, _, _ = _prior_interval(
        ref if isinstance(ref, (StatModel, TabulatedDensity)) else None,
        interval)
    x, w = _composite_grid(lo, hi)
    lp = _log_prior_values(p, x)
    lq = _log_prior_values(q, x)
    pv = np.exp(lp)
    support = pv > 1e-15 * np.max(pv)
    if np.any(support & (lq < np.log(1e-280))):
        raise DomainError("p is not absolutely continuous w.r.t. q")
    integrand = np.where(support, pv * (lp - lq), 0.0)
    return -float(w @ integrand)


def constraint_function(name: str, coefficients: Sequence[float] = None):
    """Named moment functions for configuration files."""
    if name == "identity":
        return lambda x: x
    if name == "square":
        return lambda x: x ** 2
    if name == "abs":
        return np.abs
    if name == "poly":
        if not coefficients:
            raise ValueError("poly constraint needs coefficients")
        coeffs = list(map(float, coefficients))
        return lambda x: sum(c * x ** k for k, c in enumerate(coeffs))
    raise ValueError(f"unknown constraint function {name!r}")
