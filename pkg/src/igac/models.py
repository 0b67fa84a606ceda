"""Parametric probability families and their information metrics.

A ``StatModel`` is a point in a parametric family P(X|theta): Gaussian pairs
parametrized by (mean, spread), exponential and Wigner-Dyson level-spacing
densities parametrized by their mean spacing, a correlated bivariate Gaussian
with a constant micro-correlation r, and products of these.  Every model
decomposes internally into primitive factors, so log-densities, scores and
Fisher metrics compose block-diagonally.

Chart conventions
-----------------
gaussian_diag uses the interleaved chart (mu_1, sigma_1, ..., mu_l, sigma_l);
gaussian_bivariate_corr uses (mu_x, mu_y, sigma) with r a model constant, not
a coordinate; exponential and wigner_dyson are one-dimensional in their mean.
All spread coordinates live on the open half line (0, inf).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateMetricError,
    DomainError,
    QuadratureAccuracyError,
    UnsupportedFamilyError,
)
from .quadrature import gauss_hermite_prob, gauss_laguerre, legendre_panels

__all__ = [
    "StatModel",
    "MetricField",
    "gaussian_diag",
    "exponential",
    "wigner_dyson",
    "gaussian_bivariate_corr",
    "product",
    "with_theta",
    "log_density",
    "score",
    "analytic_fisher",
    "fisher_quadrature",
    "macro_correlated_metric",
    "flat_metric",
    "metric_from_function",
    "normalization_residual",
    "score_expectation_residual",
]

_FAMILIES = ("gaussian_diag", "gaussian_bivariate_corr", "exponential",
             "wigner_dyson", "product")


@dataclass(frozen=True, eq=False)
class _Factor:
    """A primitive independent factor of a model."""

    kind: str              # gauss_pair | exponential | wigner_dyson | gauss_biv
    theta_at: tuple        # parameter indices in the flat chart
    micro_at: tuple        # micro-variable indices
    r: float = 0.0         # micro-correlation (gauss_biv only)


@dataclass(frozen=True, eq=False)
class StatModel:
    """Immutable parametric model; safe to share across threads."""

    family: str
    theta: np.ndarray
    micro_dim: int
    param_dim: int
    r: float = 0.0
    factors: tuple = ()    # primitive _Factor decomposition

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen(self.theta))

    def micro_bounds(self):
        """Support of each micro coordinate as (lo, hi) pairs."""
        bounds = [None] * self.micro_dim
        for f in self.factors:
            lohi = (0.0, np.inf) if f.kind in ("exponential", "wigner_dyson") \
                else (-np.inf, np.inf)
            for i in f.micro_at:
                bounds[i] = lohi
        return bounds


def _frozen(arr):
    a = np.array(arr, dtype=float)
    a.flags.writeable = False
    return a


def _check_positive(name, value):
    if not np.all(np.asarray(value) > 0):
        raise ValueError(f"{name} must be positive, got {value}")


def gaussian_diag(means: Sequence[float], sigmas: Sequence[float]) -> StatModel:
    """l independent Gaussian micro-variables, chart (mu_k, sigma_k) per pair."""
    means = np.atleast_1d(np.asarray(means, float))
    sigmas = np.atleast_1d(np.asarray(sigmas, float))
    if means.shape != sigmas.shape:
        raise ValueError("means and sigmas must have equal length")
    _check_positive("sigma", sigmas)
    l = means.size
    theta = np.empty(2 * l)
    theta[0::2], theta[1::2] = means, sigmas
    factors = tuple(
        _Factor("gauss_pair", (2 * k, 2 * k + 1), (k,)) for k in range(l))
    return StatModel("gaussian_diag", theta, l, 2 * l, factors=factors)


def exponential(mu: float) -> StatModel:
    _check_positive("mu", mu)
    return StatModel("exponential", [mu], 1, 1,
                     factors=(_Factor("exponential", (0,), (0,)),))


def wigner_dyson(mu: float) -> StatModel:
    _check_positive("mu", mu)
    return StatModel("wigner_dyson", [mu], 1, 1,
                     factors=(_Factor("wigner_dyson", (0,), (0,)),))


def gaussian_bivariate_corr(mu_x: float, mu_y: float, sigma: float,
                            r: float = 0.0) -> StatModel:
    """Bivariate Gaussian with common spread and constant micro-correlation."""
    _check_positive("sigma", sigma)
    if not -1.0 < r < 1.0:
        raise ValueError(f"correlation r must lie in (-1, 1), got {r}")
    return StatModel("gaussian_bivariate_corr", [mu_x, mu_y, sigma], 2, 3, r=r,
                     factors=(_Factor("gauss_biv", (0, 1, 2), (0, 1), r=r),))


def product(*models: StatModel) -> StatModel:
    """Independent product; parameters and micro-variables concatenate."""
    theta, factors = [], []
    p_off = m_off = 0
    for m in models:
        theta.extend(np.asarray(m.theta))
        for f in m.factors:
            factors.append(_Factor(f.kind,
                                   tuple(i + p_off for i in f.theta_at),
                                   tuple(i + m_off for i in f.micro_at), f.r))
        p_off += m.param_dim
        m_off += m.micro_dim
    return StatModel("product", theta, m_off, p_off, factors=tuple(factors))


def with_theta(model: StatModel, theta) -> StatModel:
    """Same family at a different chart point."""
    theta = np.asarray(theta, float)
    if theta.shape != (model.param_dim,):
        raise ValueError(f"theta must have shape ({model.param_dim},)")
    for f in model.factors:
        scale = theta[f.theta_at[-1]]   # last parameter of every factor scales
        if scale <= 0:
            raise ValueError(f"scale parameter at index {f.theta_at[-1]} "
                             f"must stay positive, got {scale}")
    return StatModel(model.family, theta, model.micro_dim, model.param_dim,
                     r=model.r, factors=model.factors)


# ---------------------------------------------------------------------------
# log-density and score, vectorized over micro points of shape (..., micro_dim)
# ---------------------------------------------------------------------------

_LOG_2PI = np.log(2.0 * np.pi)


def _factor_logp(f: _Factor, th, x):
    if f.kind == "gauss_pair":
        mu, s = th[f.theta_at[0]], th[f.theta_at[1]]
        z = (x[..., f.micro_at[0]] - mu) / s
        return -0.5 * _LOG_2PI - np.log(s) - 0.5 * z * z
    if f.kind == "exponential":
        mu = th[f.theta_at[0]]
        xv = x[..., f.micro_at[0]]
        if np.any(xv < 0):
            raise DomainError("exponential spacing must be nonnegative")
        return -np.log(mu) - xv / mu
    if f.kind == "wigner_dyson":
        mu = th[f.theta_at[0]]
        xv = x[..., f.micro_at[0]]
        if np.any(xv <= 0):
            raise DomainError("level spacing must be positive")
        return np.log(np.pi / 2) + np.log(xv) - 2 * np.log(mu) \
            - np.pi * xv ** 2 / (4 * mu ** 2)
    if f.kind == "gauss_biv":
        mux, muy, s = (th[i] for i in f.theta_at)
        r = f.r
        xt = (x[..., f.micro_at[0]] - mux) / s
        yt = (x[..., f.micro_at[1]] - muy) / s
        q = xt * xt - 2 * r * xt * yt + yt * yt
        return -_LOG_2PI - 2 * np.log(s) - 0.5 * np.log(1 - r * r) \
            - q / (2 * (1 - r * r))
    raise UnsupportedFamilyError(f.kind)


def _factor_score(f: _Factor, th, x, out):
    if f.kind == "gauss_pair":
        mu, s = th[f.theta_at[0]], th[f.theta_at[1]]
        d = x[..., f.micro_at[0]] - mu
        out[..., f.theta_at[0]] = d / s ** 2
        out[..., f.theta_at[1]] = d * d / s ** 3 - 1.0 / s
    elif f.kind == "exponential":
        mu = th[f.theta_at[0]]
        out[..., f.theta_at[0]] = (x[..., f.micro_at[0]] - mu) / mu ** 2
    elif f.kind == "wigner_dyson":
        mu = th[f.theta_at[0]]
        xv = x[..., f.micro_at[0]]
        out[..., f.theta_at[0]] = np.pi * xv ** 2 / (2 * mu ** 3) - 2.0 / mu
    elif f.kind == "gauss_biv":
        mux, muy, s = (th[i] for i in f.theta_at)
        r = f.r
        xt = (x[..., f.micro_at[0]] - mux) / s
        yt = (x[..., f.micro_at[1]] - muy) / s
        c = 1.0 / ((1 - r * r) * s)
        out[..., f.theta_at[0]] = (xt - r * yt) * c
        out[..., f.theta_at[1]] = (yt - r * xt) * c
        q = xt * xt - 2 * r * xt * yt + yt * yt
        out[..., f.theta_at[2]] = (q / (1 - r * r) - 2.0) / s
    else:
        raise UnsupportedFamilyError(f.kind)


def log_density(model: StatModel, x) -> float | np.ndarray:
    """ln P(X|theta); exponentiates to a normalized density on the support."""
    x = np.asarray(x, float)
    if x.shape[-1] != model.micro_dim:
        raise ValueError(f"micro point must have {model.micro_dim} components")
    th = model.theta
    total = sum(_factor_logp(f, th, x) for f in model.factors)
    return float(total) if x.ndim == 1 else total


def score(model: StatModel, x) -> np.ndarray:
    """Gradient of log_density with respect to the chart coordinates."""
    x = np.asarray(x, float)
    if x.shape[-1] != model.micro_dim:
        raise ValueError(f"micro point must have {model.micro_dim} components")
    log_density(model, x)    # domain validation
    out = np.zeros(x.shape[:-1] + (model.param_dim,))
    for f in model.factors:
        _factor_score(f, model.theta, x, out)
    return out


# ---------------------------------------------------------------------------
# metric fields
# ---------------------------------------------------------------------------

class MetricField:
    """A Riemannian metric g_ab(theta) with first-derivative jets.

    ``matrix_fn`` maps (..., dim) chart points to (..., dim, dim) matrices.
    ``blocks`` lists coordinate groups on which the metric factorizes (the
    block submatrix depends only on the block's own coordinates), enabling
    separable volume integrals.  ``scale_coords`` are indices restricted to
    the open half line.
    """

    def __init__(self, dim: int, matrix_fn: Callable, jet_fn: Callable = None,
                 source: str = "analytic", blocks=None, scale_coords=(),
                 fd_step: float = 1e-5):
        self.dim = dim
        self._matrix_fn = matrix_fn
        self._jet_fn = jet_fn
        self.source = source
        self.blocks = tuple(tuple(b) for b in blocks) if blocks \
            else (tuple(range(dim)),)
        self.scale_coords = tuple(scale_coords)
        self._fd_step = fd_step

    @property
    def has_analytic_jet(self) -> bool:
        return self._jet_fn is not None

    def in_chart(self, theta) -> bool:
        theta = np.asarray(theta, float)
        return bool(np.all(theta[..., list(self.scale_coords)] > 0)) \
            if self.scale_coords else True

    def eval(self, theta) -> np.ndarray:
        """Metric matrix at theta; accepts batched points (..., dim)."""
        theta = np.asarray(theta, float)
        return self._matrix_fn(theta)

    def jet(self, theta):
        """(g, dg) with dg[c, a, b] = d g_ab / d theta_c."""
        theta = np.asarray(theta, float)
        if self._jet_fn is not None:
            return self._jet_fn(theta)
        return self.eval(theta), self._fd_jet(theta)

    def _fd_jet(self, theta):
        # central differences with one Richardson level; steps on half-line
        # coordinates are proportional to the coordinate itself
        n = self.dim
        dg = np.empty((n, n, n))
        for c in range(n):
            if c in self.scale_coords:
                h = self._fd_step * abs(theta[c])
            else:
                h = self._fd_step * max(1.0, abs(theta[c]))
            dg[c] = _richardson_diff(lambda t, c=c: self._shifted(theta, c, t),
                                     h)
        return dg

    def _shifted(self, theta, c, t):
        th = np.array(theta)
        th[c] += t
        return self.eval(th)

    def inverse(self, theta) -> np.ndarray:
        g = self.eval(theta)
        try:
            return np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise DegenerateMetricError(f"singular metric at {theta}") from exc

    def sqrt_det(self, theta) -> float | np.ndarray:
        g = self.eval(theta)
        det = np.linalg.det(g)
        if np.any(det <= 0):
            raise DegenerateMetricError("nonpositive metric determinant")
        return np.sqrt(det)

    def block_metric(self, block):
        """Restriction of the metric to one coordinate block."""
        idx = np.asarray(block)

        def sub(th):
            # out-of-block coordinates are irrelevant by the block contract;
            # ones keep scale coordinates inside the chart
            th = np.asarray(th, float)
            full = np.ones(th.shape[:-1] + (self.dim,))
            full[..., idx] = th
            g = self._matrix_fn(full)
            return g[..., idx[:, None], idx[None, :]]

        return MetricField(len(block), sub, source=self.source,
                           scale_coords=tuple(
                               i for i, c in enumerate(block)
                               if c in self.scale_coords))


def _richardson_diff(fn, h):
    d1 = (fn(h) - fn(-h)) / (2 * h)
    d2 = (fn(h / 2) - fn(-h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def flat_metric(dim: int) -> MetricField:
    eye = np.eye(dim)

    def mat(th):
        th = np.asarray(th, float)
        return np.broadcast_to(eye, th.shape[:-1] + (dim, dim)).copy()

    return MetricField(dim, mat, jet_fn=lambda th: (eye.copy(),
                                                    np.zeros((dim,) * 3)),
                       blocks=[(i,) for i in range(dim)])


def metric_from_function(dim: int, fn: Callable, jet_fn=None,
                         source: str = "finite_difference", blocks=None,
                         scale_coords=(), batched: bool = False) -> MetricField:
    """Wrap a user metric function; non-batched functions get a loop adapter."""
    if batched:
        matrix_fn = fn
    else:
        def matrix_fn(th):
            th = np.asarray(th, float)
            if th.ndim == 1:
                return np.asarray(fn(th), float)
            flat = th.reshape(-1, dim)
            out = np.stack([np.asarray(fn(p), float) for p in flat])
            return out.reshape(th.shape[:-1] + (dim, dim))

    return MetricField(dim, matrix_fn, jet_fn=jet_fn, source=source,
                       blocks=blocks, scale_coords=scale_coords)


# ---------------------------------------------------------------------------
# closed-form Fisher metrics
# ---------------------------------------------------------------------------

def _assemble_block_metric(dim, blocks, fill, dfill, scale_coords, source):
    """Build a MetricField from per-block fill(theta batch, view) callables."""

    def mat(th):
        th = np.asarray(th, float)
        g = np.zeros(th.shape[:-1] + (dim, dim))
        fill(th, g)
        return g

    def jet(th):
        th = np.asarray(th, float)
        g = np.zeros((dim, dim))
        fill(th, g)
        dg = np.zeros((dim, dim, dim))
        dfill(th, dg)
        return g, dg

    return MetricField(dim, mat, jet_fn=jet, source=source, blocks=blocks,
                       scale_coords=scale_coords)


def analytic_fisher(model: StatModel) -> MetricField:
    """Closed-form Fisher-Rao metric for the supported families.

    gauss pair -> diag(1/s^2, 2/s^2); exponential -> 1/mu^2; Wigner-Dyson
    level spacing -> 4/mu^2; correlated bivariate Gaussian -> the (mu_x,
    mu_y, sigma) block with 1/(1-r^2) mean entries and 4/s^2 spread entry.
    """
    dim = model.param_dim
    blocks, scale = [], []
    for f in model.factors:
        blocks.append(f.theta_at)
        scale.append(f.theta_at[-1])
        if f.kind not in ("gauss_pair", "exponential", "wigner_dyson",
                          "gauss_biv"):
            raise UnsupportedFamilyError(f.kind)
    factors = model.factors

    def fill(th, g):
        for f in factors:
            if f.kind == "gauss_pair":
                i, j = f.theta_at
                s2 = th[..., j] ** 2
                g[..., i, i] = 1.0 / s2
                g[..., j, j] = 2.0 / s2
            elif f.kind == "exponential":
                i = f.theta_at[0]
                g[..., i, i] = 1.0 / th[..., i] ** 2
            elif f.kind == "wigner_dyson":
                i = f.theta_at[0]
                g[..., i, i] = 4.0 / th[..., i] ** 2
            else:
                i, j, k = f.theta_at
                s2 = th[..., k] ** 2
                a = 1.0 / ((1 - f.r ** 2) * s2)
                g[..., i, i] = a
                g[..., j, j] = a
                g[..., i, j] = -f.r * a
                g[..., j, i] = -f.r * a
                g[..., k, k] = 4.0 / s2

    def dfill(th, dg):
        # every block entry scales as 1/s^2: d_s g = -2 g / s
        for f in factors:
            s_idx = f.theta_at[-1]
            s = th[s_idx]
            gblk = np.zeros((len(th), len(th)))
            fill(th, gblk)
            for a in f.theta_at:
                for b in f.theta_at:
                    dg[s_idx, a, b] = -2.0 * gblk[a, b] / s

    return _assemble_block_metric(dim, blocks, fill, dfill, tuple(scale),
                                  "analytic")


def macro_correlated_metric(r_values: Sequence[float]) -> MetricField:
    """Pairwise (mu_j, sigma_j) metric with constant macro-correlations r_j.

    Per-pair line element (d mu^2 + 2 r d mu d sigma + 2 d sigma^2) / sigma^2;
    the r_j are model constants, not coordinates.
    """
    r_values = [float(r) for r in np.atleast_1d(r_values)]
    for r in r_values:
        if not 0.0 <= r < 1.0:
            raise ValueError(f"macro-correlation must lie in [0, 1), got {r}")
    l = len(r_values)
    dim = 2 * l
    blocks = [(2 * k, 2 * k + 1) for k in range(l)]

    def mat(th):
        th = np.asarray(th, float)
        g = np.zeros(th.shape[:-1] + (dim, dim))
        for k, r in enumerate(r_values):
            i, j = 2 * k, 2 * k + 1
            s2 = th[..., j] ** 2
            g[..., i, i] = 1.0 / s2
            g[..., i, j] = r / s2
            g[..., j, i] = r / s2
            g[..., j, j] = 2.0 / s2
        return g

    def jet(th):
        g = mat(th)
        dg = np.zeros((dim, dim, dim))
        for k in range(l):
            i, j = 2 * k, 2 * k + 1
            s = th[j]
            dg[j, i:j + 1, i:j + 1] = -2.0 * g[i:j + 1, i:j + 1] / s
        return g, dg

    return MetricField(dim, mat, jet_fn=jet, source="analytic", blocks=blocks,
                       scale_coords=tuple(2 * k + 1 for k in range(l)))


# ---------------------------------------------------------------------------
# Fisher metric by quadrature
# ---------------------------------------------------------------------------

def _factor_rule(f: _Factor, th, n):
    """Nodes (m, micro) and probability weights for one factor's density."""
    if f.kind == "gauss_pair":
        mu, s = th[f.theta_at[0]], th[f.theta_at[1]]
        t, w = gauss_hermite_prob(n)
        return (mu + s * t)[:, None], w
    if f.kind == "exponential":
        mu = th[f.theta_at[0]]
        t, w = gauss_laguerre(n)
        return (mu * t)[:, None], w
    if f.kind == "wigner_dyson":
        # substitute t = pi x^2 / (4 mu^2): the density becomes e^-t dt
        mu = th[f.theta_at[0]]
        t, w = gauss_laguerre(n)
        return (mu * np.sqrt(4.0 * t / np.pi))[:, None], w
    if f.kind == "gauss_biv":
        mux, muy, s = (th[i] for i in f.theta_at)
        r = f.r
        t, w = gauss_hermite_prob(n)
        z1, z2 = np.meshgrid(t, t, indexing="ij")
        x = mux + s * z1
        y = muy + s * (r * z1 + np.sqrt(1 - r * r) * z2)
        return np.stack([x.ravel(), y.ravel()], axis=-1), \
            np.outer(w, w).ravel()
    raise UnsupportedFamilyError(f.kind)


def _factor_fisher_block(model, f, th, n):
    nodes, w = _factor_rule(f, th, n)
    x = np.zeros((nodes.shape[0], model.micro_dim))
    x[:, list(f.micro_at)] = nodes
    s = np.zeros((nodes.shape[0], model.param_dim))
    _factor_score(f, th, x, s)
    sblk = s[:, list(f.theta_at)]
    return np.einsum("m,ma,mb->ab", w, sblk, sblk)


def fisher_quadrature(model: StatModel, nodes: int = 64,
                      rel_tol: float = 1e-9,
                      max_nodes: int = 4096) -> MetricField:
    """Fisher-Rao metric integrated numerically against the model density.

    Uses Hermite rules for full-line factors and Laguerre rules for half-line
    factors, doubling the node count until the entrywise relative change falls
    below ``rel_tol``.  Raises QuadratureAccuracyError (with the last estimate
    attached) when the node cap is reached first.
    """
    dim = model.param_dim
    blocks = [f.theta_at for f in model.factors]
    scale = tuple(f.theta_at[-1] for f in model.factors)
    base = model

    def mat_single(th):
        m = with_theta(base, th)
        g = np.zeros((dim, dim))
        for f in m.factors:
            idx = np.asarray(f.theta_at)
            n = nodes
            cur = _factor_fisher_block(m, f, m.theta, n)
            while True:
                if 2 * n > max_nodes:
                    raise QuadratureAccuracyError(
                        f"fisher quadrature did not converge below {rel_tol} "
                        f"within {max_nodes} nodes", estimate=cur)
                nxt = _factor_fisher_block(m, f, m.theta, 2 * n)
                scale_ = max(np.max(np.abs(nxt)), 1e-300)
                if np.max(np.abs(nxt - cur)) <= rel_tol * scale_:
                    cur = nxt
                    break
                cur, n = nxt, 2 * n
            g[idx[:, None], idx[None, :]] = cur
        return g

    def mat(th):
        th = np.asarray(th, float)
        if th.ndim == 1:
            return mat_single(th)
        flat = th.reshape(-1, dim)
        return np.stack([mat_single(p) for p in flat]).reshape(
            th.shape[:-1] + (dim, dim))

    return MetricField(dim, mat, jet_fn=None, source="quadrature",
                       blocks=blocks, scale_coords=scale)


# ---------------------------------------------------------------------------
# independent normalization / score-identity checks
# ---------------------------------------------------------------------------

def _factor_box(f: _Factor, th):
    if f.kind == "gauss_pair":
        mu, s = th[f.theta_at[0]], th[f.theta_at[1]]
        return [(mu - 13 * s, mu + 13 * s)]
    if f.kind == "exponential":
        return [(0.0, 90.0 * th[f.theta_at[0]])]
    if f.kind == "wigner_dyson":
        return [(1e-12, 13.0 * th[f.theta_at[0]])]
    mux, muy, s = (th[i] for i in f.theta_at)
    w = 13 * s   # marginals have spread exactly s for every r
    return [(mux - w, mux + w), (muy - w, muy + w)]


def _factor_grid(f, th, n_axis=256):
    axes = [legendre_panels(lo, hi, n_axis, max_panel_ratio=1e18)
            for lo, hi in _factor_box(f, th)]
    if len(axes) == 1:
        return axes[0][0][:, None], axes[0][1]
    (x1, w1), (x2, w2) = axes
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    return np.stack([g1.ravel(), g2.ravel()], axis=-1), np.outer(w1, w2).ravel()


def normalization_residual(model: StatModel) -> float:
    """max over factors of |integral of the density - 1|, by an independent
    truncated Gauss-Legendre rule (not the natural-weight rules)."""
    worst = 0.0
    for f in model.factors:
        nodes, w = _factor_grid(f, model.theta)
        x = np.zeros((nodes.shape[0], model.micro_dim))
        x[:, list(f.micro_at)] = nodes
        p = np.exp(_factor_logp(f, model.theta, x))
        worst = max(worst, abs(float(w @ p) - 1.0))
    return worst


def score_expectation_residual(model: StatModel) -> float:
    """max-abs of E[score] over the chart directions (vanishes exactly)."""
    worst = 0.0
    for f in model.factors:
        nodes, w = _factor_grid(f, model.theta)
        x = np.zeros((nodes.shape[0], model.micro_dim))
        x[:, list(f.micro_at)] = nodes
        p = np.exp(_factor_logp(f, model.theta, x))
        s = np.zeros((nodes.shape[0], model.param_dim))
        _factor_score(f, model.theta, x, s)
        worst = max(worst, float(np.max(np.abs((w * p) @ s))))
    return worst
