"""Geodesic flows and Jacobi fields on metric fields.

Geodesics solve theta-ddot^a + Gamma^a_bc theta-dot^b theta-dot^c = 0 with an
embedded adaptive 5(4) pair; two-point problems are solved by damped-Newton
shooting on the initial velocity.  Jacobi fields solve the geodesic deviation
equation in its fully expanded coordinate form (connection, connection
derivative and curvature terms), interpolating the carrier geodesic.

The tanh/cosh closed-form geodesics of the colliding wave-packet manifolds
are provided for oracle checks, together with the finite-time growth-rate
estimator built from the Jacobi intensity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from .errors import (
    BvpFailureError,
    ChartBoundaryError,
    StiffnessError,
    UndefinedRateError,
)
from .geometry import _christoffel_core, _gamma_derivative
from .models import MetricField

__all__ = [
    "GeodesicPath",
    "JacobiTrace",
    "WavePacketParams",
    "LyapunovEstimate",
    "integrate_geodesic",
    "solve_geodesic_bvp",
    "wavepacket_geodesics",
    "path_from_functions",
    "integrate_jacobi",
    "lyapunov_estimate",
    "jacobi_q_coefficient",
]

_CHART_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Discretized geodesic with dense state access.

    ``label`` carries the opaque family parameter distinguishing members of
    a geodesic congruence; it does not enter any computation.
    """

    tau_grid: np.ndarray
    theta: np.ndarray        # (n, dim)
    theta_dot: np.ndarray    # (n, dim)
    speed: np.ndarray        # g(theta_dot, theta_dot) per grid point
    label: Optional[str] = None
    _interp: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("tau_grid", "theta", "theta_dot", "speed"):
            arr = np.asarray(getattr(self, name), float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    def state(self, tau):
        """(theta, theta_dot) at arbitrary tau inside the grid range."""
        if self._interp is not None:
            return self._interp(tau)
        return self._hermite()(tau)

    def _hermite(self):
        interp = _hermite_interpolant(self.tau_grid, self.theta,
                                      self.theta_dot)
        object.__setattr__(self, "_interp", interp)
        return interp


def _hermite_interpolant(taus, theta, theta_dot):
    order = np.argsort(taus)
    t = taus[order]
    pos = BPoly.from_derivatives(
        t, np.stack([theta[order], theta_dot[order]], axis=1))
    vel = pos.derivative()

    def interp(tau):
        return pos(tau), vel(tau)

    return interp


def _geodesic_rhs(metric):
    dim = metric.dim

    def rhs(_tau, y):
        th, v = y[:dim], y[dim:]
        gam = _christoffel_core(metric, th)
        acc = -np.einsum("abc,b,c->a", gam, v, v)
        return np.concatenate([v, acc])

    return rhs


def _boundary_events(metric):
    events = []
    for i in metric.scale_coords:
        def ev(_tau, y, i=i):
            return y[i] - _CHART_FLOOR
        ev.terminal = True
        events.append(ev)
    return events


def integrate_geodesic(metric: MetricField, theta0, v0, tau_end: float,
                       tol: float = 1e-10, n_out: int = 513,
                       label: str = None) -> GeodesicPath:
    """Geodesic initial value problem with adaptive error control.

    Affine parametrization keeps the speed g(v, v) constant; the relative
    drift stays within an order of magnitude of ``tol``.  Leaving the open
    chart (a spread coordinate reaching the floor) raises ChartBoundaryError
    carrying the last valid state; step underflow raises StiffnessError.
    """
    theta0 = np.asarray(theta0, float)
    v0 = np.asarray(v0, float)
    if not metric.in_chart(theta0):
        raise ChartBoundaryError(f"initial point {theta0} outside chart")
    y0 = np.concatenate([theta0, v0])
    sol = solve_ivp(_geodesic_rhs(metric), (0.0, tau_end), y0, method="RK45",
                    rtol=tol, atol=tol * 1e-2, dense_output=True,
                    events=_boundary_events(metric))
    if sol.status == 1:    # terminated by a chart-boundary event
        t_ev = max((t[-1] for t in sol.t_events if t.size), key=abs)
        y_ev = sol.sol(t_ev)
        raise ChartBoundaryError(
            f"geodesic reached the chart boundary at tau = {t_ev}",
            last_state=(t_ev, y_ev[:metric.dim], y_ev[metric.dim:]))
    if not sol.success:
        raise StiffnessError(f"integrator failed: {sol.message}")

    taus = np.linspace(0.0, tau_end, n_out)
    states = sol.sol(taus)
    dim = metric.dim
    theta = states[:dim].T
    theta_dot = states[dim:].T
    g = metric.eval(theta)
    speed = np.einsum("nab,na,nb->n", g, theta_dot, theta_dot)
    dense = sol.sol

    def interp(tau):
        y = dense(tau)
        return y[:dim], y[dim:]

    return GeodesicPath(taus, theta, theta_dot, speed, label=label,
                        _interp=interp)


def solve_geodesic_bvp(metric: MetricField, theta_init, theta_final,
                       tau_span: float, tol: float = 1e-8,
                       max_iter: int = 50, n_out: int = 513) -> GeodesicPath:
    """Two-point geodesic by damped-Newton shooting on the initial velocity.

    The Jacobian of the endpoint map is built from forward differences; the
    Newton step is halved whenever the endpoint mismatch grows.  Failure
    raises BvpFailureError with the best residual reached.
    """
    theta_init = np.asarray(theta_init, float)
    theta_final = np.asarray(theta_final, float)
    if not metric.in_chart(theta_final):
        raise ChartBoundaryError(
            f"final point {theta_final} outside the open chart")
    ode_tol = max(min(tol * 1e-3, 1e-10), 1e-13)

    def endpoint(v):
        path = integrate_geodesic(metric, theta_init, v, tau_span,
                                  tol=ode_tol, n_out=2)
        return path.theta[-1]

    v = (theta_final - theta_init) / tau_span
    for _ in range(60):    # damp an initial shot that exits the chart
        try:
            res = endpoint(v) - theta_final
            break
        except ChartBoundaryError:
            v = 0.5 * v
    else:
        raise BvpFailureError("no in-chart initial shot found",
                              best_residual=np.inf)
    best = float(np.linalg.norm(res))
    for _ in range(max_iter):
        if best < tol:
            return integrate_geodesic(metric, theta_init, v, tau_span,
                                      tol=ode_tol, n_out=n_out)
        jac = np.empty((metric.dim, metric.dim))
        for i in range(metric.dim):
            h = 1e-7 * max(1.0, abs(v[i]))
            vp = np.array(v)
            vp[i] += h
            jac[:, i] = (endpoint(vp) - theta_final - res) / h
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise BvpFailureError("singular shooting Jacobian",
                                  best_residual=best) from exc
        lam = 1.0
        while lam > 1e-8:
            cand = v + lam * step
            try:
                cres = endpoint(cand) - theta_final
            except ChartBoundaryError:
                lam *= 0.5
                continue
            if np.linalg.norm(cres) < best:
                v, res = cand, cres
                best = float(np.linalg.norm(cres))
                break
            lam *= 0.5
        else:
            break
    if best < tol:
        return integrate_geodesic(metric, theta_init, v, tau_span,
                                  tol=ode_tol, n_out=n_out)
    raise BvpFailureError(
        f"shooting did not reach tolerance {tol} in {max_iter} iterations",
        best_residual=best)


# ---------------------------------------------------------------------------
# wave-packet closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WavePacketParams:
    """Initial data of the colliding Gaussian wave-packet pair.

    ``a0`` is the derived rate (1/tau0) asinh(p0 / (sqrt(2) sigma0)); the
    momentum-difference geodesics share the functional argument a0 * tau on
    both sides of the collision.
    """

    p0: float
    sigma0: float
    tau0: float
    r: float = 0.0

    def __post_init__(self):
        for name in ("p0", "sigma0", "tau0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.r < 1.0:
            raise ValueError(f"correlation r must lie in [0, 1), got {self.r}")

    @property
    def a0(self) -> float:
        return np.arcsinh(self.p0 / (np.sqrt(2.0) * self.sigma0)) / self.tau0

    @property
    def mean_amplitude(self) -> float:
        """Asymptotic |mean| on the uncorrelated side."""
        return np.sqrt(self.p0 ** 2 + 2.0 * self.sigma0 ** 2)

    @property
    def sigma_peak(self) -> float:
        """Common spread at the collision instant tau = 0."""
        return np.sqrt(0.5 * self.p0 ** 2 + self.sigma0 ** 2)


def wavepacket_geodesics(params: WavePacketParams, tau, branch: str):
    """Closed-form geodesics (mu_1, mu_2, sigma) of the wave-packet manifolds.

    branch "before" is the uncorrelated pre-collision family (natural domain
    tau <= 0); branch "after" carries the sqrt(1 - r) mean compression of the
    correlated post-collision family (natural domain tau >= 0).  The two
    branches join continuously at tau = 0.
    """
    if branch not in ("before", "after"):
        raise ValueError("branch must be 'before' or 'after'")
    tau = np.asarray(tau, float)
    amp = params.mean_amplitude
    if branch == "after":
        amp = amp * np.sqrt(1.0 - params.r)
    u = params.a0 * tau
    mu1 = -amp * np.tanh(u)
    return mu1, -mu1, params.sigma_peak / np.cosh(u)


def path_from_functions(tau_grid, theta_fn: Callable, theta_dot_fn: Callable,
                        metric: MetricField = None,
                        label: str = None) -> GeodesicPath:
    """Wrap closed-form trajectory functions as a GeodesicPath."""
    taus = np.asarray(tau_grid, float)
    theta = np.stack([np.asarray(theta_fn(t), float) for t in taus])
    theta_dot = np.stack([np.asarray(theta_dot_fn(t), float) for t in taus])
    if metric is not None:
        g = metric.eval(theta)
        speed = np.einsum("nab,na,nb->n", g, theta_dot, theta_dot)
    else:
        speed = np.einsum("na,na->n", theta_dot, theta_dot)

    def interp(tau):
        return (np.asarray(theta_fn(tau), float),
                np.asarray(theta_dot_fn(tau), float))

    return GeodesicPath(taus, theta, theta_dot, speed, label=label,
                        _interp=interp)


# ---------------------------------------------------------------------------
# Jacobi fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JacobiTrace:
    """Geodesic deviation field along a carrier path.

    ``dj_dtau`` holds the covariant derivative DJ/Dtau; ``intensity`` is the
    metric norm of J and ``intensity_rate`` its tau-derivative.
    """

    tau_grid: np.ndarray
    j: np.ndarray
    dj_dtau: np.ndarray
    intensity: np.ndarray
    intensity_rate: np.ndarray

    def __post_init__(self):
        for name in ("tau_grid", "j", "dj_dtau", "intensity",
                     "intensity_rate"):
            arr = np.asarray(getattr(self, name), float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def integrate_jacobi(metric: MetricField, path: GeodesicPath, J0, DJ0,
                     rtol: float = 1e-9) -> JacobiTrace:
    """Solve the geodesic deviation equation along ``path``.

    Uses the expanded coordinate form: the second coordinate derivative of J
    balances connection terms (with the connection derivative along the
    path) plus the curvature coupling R^a_bcd thdot^b J^c thdot^d.  ``DJ0``
    is the covariant derivative of J at tau = 0; the equation is linear in
    (J0, DJ0).
    """
    dim = metric.dim
    J0 = np.asarray(J0, float)
    DJ0 = np.asarray(DJ0, float)
    th0, v0 = path.state(path.tau_grid[0])
    gam0 = _christoffel_core(metric, th0)
    jdot0 = DJ0 - np.einsum("abc,b,c->a", gam0, J0, v0)

    def rhs(tau, y):
        th, v = path.state(tau)
        j, jdot = y[:dim], y[dim:]
        gam = _christoffel_core(metric, th)
        dgam = _gamma_derivative(metric, th)
        acc = -np.einsum("abc,b,c->a", gam, v, v)
        riem = (np.einsum("cabd->abcd", dgam) - np.einsum("dabc->abcd", dgam)
                + np.einsum("afc,fbd->abcd", gam, gam)
                - np.einsum("afd,fbc->abcd", gam, gam))
        jdd = -(2.0 * np.einsum("abc,b,c->a", gam, jdot, v)
                + np.einsum("abc,b,c->a", gam, j, acc)
                + np.einsum("dabc,d,c,b->a", dgam, v, v, j)
                + np.einsum("abc,bdf,f,c,d->a", gam, gam, v, v, j)
                + np.einsum("abcd,b,c,d->a", riem, v, j, v))
        return np.concatenate([jdot, jdd])

    t0, t1 = float(path.tau_grid[0]), float(path.tau_grid[-1])
    sol = solve_ivp(rhs, (t0, t1), np.concatenate([J0, jdot0]), method="RK45",
                    rtol=rtol, atol=rtol * 1e-3, t_eval=path.tau_grid,
                    dense_output=False)
    if not sol.success:
        raise StiffnessError(f"deviation integrator failed: {sol.message}")
    j = sol.y[:dim].T
    jdot = sol.y[dim:].T

    g = metric.eval(path.theta)
    gam_grid = np.stack([_christoffel_core(metric, th) for th in path.theta])
    dj_cov = jdot + np.einsum("nabc,nb,nc->na", gam_grid, j, path.theta_dot)
    inten2 = np.einsum("nab,na,nb->n", g, j, j)
    inten = np.sqrt(np.maximum(inten2, 0.0))
    cov_norm = np.sqrt(np.maximum(
        np.einsum("nab,na,nb->n", g, dj_cov, dj_cov), 0.0))
    rate = np.where(inten > 1e-300,
                    np.einsum("nab,na,nb->n", g, dj_cov, j)
                    / np.where(inten > 1e-300, inten, 1.0),
                    cov_norm)
    return JacobiTrace(path.tau_grid, j, dj_cov, inten, rate)


@dataclass(frozen=True)
class LyapunovEstimate:
    """Finite-time growth-rate diagnostic of a deviation trace."""

    value: float
    taus: np.ndarray
    sequence: np.ndarray


def lyapunov_estimate(trace: JacobiTrace) -> LyapunovEstimate:
    """Finite-time evaluation of the intensity growth-rate functional.

    lambda(tau) = ln[(|J|^2 + |dJ/dtau|^2) / (value at tau = 0)] / tau, which
    doubles the exponential rate of |J| itself; the full sequence over the
    grid is returned for convergence inspection.
    """
    if trace.tau_grid.size < 16:
        raise UndefinedRateError("trace too short for a rate estimate")
    base = trace.intensity[0] ** 2 + trace.intensity_rate[0] ** 2
    if base <= 0 or not np.any(trace.intensity > 0):
        raise UndefinedRateError("identically degenerate deviation trace")
    # elapsed affine parameter; backward traces are rated symmetrically
    elapsed = np.abs(trace.tau_grid - trace.tau_grid[0])
    mask = elapsed > 0
    taus = elapsed[mask]
    num = trace.intensity[mask] ** 2 + trace.intensity_rate[mask] ** 2
    seq = np.log(num / base) / taus
    return LyapunovEstimate(float(seq[-1]), taus, seq)


def jacobi_q_coefficient(metric: MetricField, theta, v) -> float:
    """Scalar coefficient R |v|^2 / (N(N-1)) of the reduced deviation
    equation on an isotropic manifold; negative values signal instability."""
    from .geometry import ricci_scalar

    theta = np.asarray(theta, float)
    v = np.asarray(v, float)
    g = metric.eval(theta)
    n = metric.dim
    return ricci_scalar(metric, theta) * float(v @ g @ v) / (n * (n - 1))
