"""Connection and curvature machinery for metric fields.

Everything is computed pointwise from a MetricField jet: Christoffel symbols,
the Riemann tensor (mixed and fully lowered), Ricci tensor and scalar,
sectional curvatures, the projective anisotropy tensor and Killing residuals.

Sign conventions: Gamma^a_bc = (1/2) g^ad (d_b g_dc + d_c g_db - d_d g_bc),
R^a_bcd = d_c Gamma^a_bd - d_d Gamma^a_bc + Gamma^a_fc Gamma^f_bd
- Gamma^a_fd Gamma^f_bc, R_ab = R^c_acb.  With these choices the hyperbolic
(mean, spread) Gaussian manifold has scalar curvature -1.  The sectional
curvature is normalized so that the scalar equals the sum of K(e_i, e_j)
over ordered orthonormal pairs i != j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateMetricError, DegeneratePlaneError
from .models import MetricField

__all__ = [
    "CurvatureReport",
    "christoffel",
    "riemann",
    "riemann_lowered",
    "ricci_tensor",
    "ricci_scalar",
    "sectional",
    "sectional_sum",
    "orthonormal_frame",
    "weyl_projective",
    "metric_compatibility_residual",
    "killing_residual",
    "curvature_report",
    "rescaled_chart",
]

_CHART_FLOOR = 1e-8   # open half-line guard for spread coordinates


def _check_chart(metric: MetricField, theta):
    theta = np.asarray(theta, float)
    for i in metric.scale_coords:
        if theta[i] < _CHART_FLOOR:
            raise DegenerateMetricError(
                f"scale coordinate {i} = {theta[i]} below chart floor "
                f"{_CHART_FLOOR}")
    return theta


def _christoffel_core(metric: MetricField, theta) -> np.ndarray:
    """Connection coefficients without the chart-floor rejection (used by
    integrators whose trial steps may probe just past the boundary)."""
    g, dg = metric.jet(theta)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"singular metric at {theta}") from exc
    # dg[c, a, b] = d_c g_ab
    term = dg + np.transpose(dg, (2, 1, 0)) - np.transpose(dg, (1, 0, 2))
    # term[b, d, c] = d_b g_dc + d_c g_db - d_d g_bc
    return 0.5 * np.einsum("ad,bdc->abc", ginv, term)


def christoffel(metric: MetricField, theta) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma^a_bc, symmetric in (b, c)."""
    theta = _check_chart(metric, theta)
    return _christoffel_core(metric, theta)


def fd_step(metric: MetricField, theta, c: int, base: float) -> float:
    """FD step in direction c: base * max(1, |theta_c|), except on half-line
    coordinates where it is proportional to theta_c so perturbed points stay
    inside the chart."""
    if c in metric.scale_coords:
        return base * abs(theta[c])
    return base * max(1.0, abs(theta[c]))


def _gamma_derivative(metric: MetricField, theta) -> np.ndarray:
    """dG[c, a, b, d] = d_c Gamma^a_bd by central differences.

    Step 1e-4 * max(1, |theta_c|) with one Richardson level when the metric
    jet is analytic, 1e-3 plain central otherwise (noise control for jets
    that are themselves finite differences).
    """
    n = metric.dim
    out = np.empty((n, n, n, n))
    base_step = 1e-4 if metric.has_analytic_jet else 1e-3
    for c in range(n):
        h = fd_step(metric, theta, c, base_step)

        def shifted(t, c=c):
            th = np.array(theta, float)
            th[c] += t
            return _christoffel_core(metric, th)

        d1 = (shifted(h) - shifted(-h)) / (2 * h)
        if metric.has_analytic_jet:
            d2 = (shifted(h / 2) - shifted(-h / 2)) / h
            out[c] = (4.0 * d2 - d1) / 3.0
        else:
            out[c] = d1
    return out


def riemann(metric: MetricField, theta) -> np.ndarray:
    """Mixed curvature tensor R^a_bcd."""
    theta = _check_chart(metric, theta)
    gam = christoffel(metric, theta)
    dgam = _gamma_derivative(metric, theta)
    return (np.einsum("cabd->abcd", dgam) - np.einsum("dabc->abcd", dgam)
            + np.einsum("afc,fbd->abcd", gam, gam)
            - np.einsum("afd,fbc->abcd", gam, gam))


def riemann_lowered(metric: MetricField, theta) -> np.ndarray:
    """R_abcd = g_ae R^e_bcd."""
    g = metric.eval(np.asarray(theta, float))
    return np.einsum("ae,ebcd->abcd", g, riemann(metric, theta))


def ricci_tensor(metric: MetricField, theta) -> np.ndarray:
    """R_ab = R^c_acb."""
    return np.einsum("cacb->ab", riemann(metric, theta))


def ricci_scalar(metric: MetricField, theta) -> float:
    """R = g^ab R_ab."""
    ginv = metric.inverse(np.asarray(theta, float))
    return float(np.einsum("ab,ab->", ginv, ricci_tensor(metric, theta)))


def sectional(metric: MetricField, theta, u, v,
              riemann_low: np.ndarray = None) -> float:
    """Sectional curvature of the plane spanned by u and v.

    K = R_abcd u^a v^b u^c v^d / (<u,u><v,v> - <u,v>^2); invariant under any
    basis change of the plane.  A precomputed lowered Riemann tensor may be
    passed to amortize repeated evaluations at one point.
    """
    theta = np.asarray(theta, float)
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    g = metric.eval(theta)
    uu, vv, uv = u @ g @ u, v @ g @ v, u @ g @ v
    den = uu * vv - uv * uv
    if abs(den) < 1e-14:
        raise DegeneratePlaneError("u, v span a degenerate plane")
    if riemann_low is None:
        riemann_low = riemann_lowered(metric, theta)
    num = np.einsum("abcd,a,b,c,d->", riemann_low, u, v, u, v)
    return float(num / den)


def orthonormal_frame(g: np.ndarray) -> list:
    """Gram-Schmidt orthonormalization of the coordinate basis, in
    coordinate order."""
    n = g.shape[0]
    frame = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        for b in frame:
            e = e - (b @ g @ e) * b
        norm2 = e @ g @ e
        if norm2 <= 0:
            raise DegenerateMetricError("metric not positive definite")
        frame.append(e / np.sqrt(norm2))
    return frame


def sectional_sum(metric: MetricField, theta) -> float:
    """Sum of sectional curvatures over ordered orthonormal pairs i != j.

    Equals the Ricci scalar; kept as an independent route for validation.
    """
    theta = np.asarray(theta, float)
    g = metric.eval(theta)
    frame = orthonormal_frame(g)
    rl = riemann_lowered(metric, theta)
    total = 0.0
    for i in range(metric.dim):
        for j in range(metric.dim):
            if i != j:
                total += sectional(metric, theta, frame[i], frame[j],
                                   riemann_low=rl)
    return total


def weyl_projective(metric: MetricField, theta):
    """Projective anisotropy tensor and its max-abs entry.

    W_abcd = R_abcd - R / (N(N-1)) (g_bd g_ac - g_bc g_ad); vanishes exactly
    on constant-curvature (isotropic) manifolds.
    """
    theta = np.asarray(theta, float)
    n = metric.dim
    if n < 2:
        raise DegenerateMetricError("anisotropy needs dimension >= 2")
    g = metric.eval(theta)
    rl = riemann_lowered(metric, theta)
    scal = float(np.einsum("ab,ab->", np.linalg.inv(g),
                           np.einsum("cacb->ab", riemann(metric, theta))))
    w = rl - scal / (n * (n - 1)) * (
        np.einsum("bd,ac->abcd", g, g) - np.einsum("bc,ad->abcd", g, g))
    return w, float(np.max(np.abs(w)))


def metric_compatibility_residual(metric: MetricField, theta) -> float:
    """max-abs of the covariant derivative of g (zero for Levi-Civita)."""
    theta = np.asarray(theta, float)
    g, dg = metric.jet(theta)
    gam = christoffel(metric, theta)
    nabla = dg - np.einsum("dca,db->cab", gam, g) \
        - np.einsum("dcb,ad->cab", gam, g)
    return float(np.max(np.abs(nabla)))


def killing_residual(metric: MetricField, k_field: Callable,
                     grid: Sequence) -> float:
    """sup over the grid of max-abs of D_a K_b + D_b K_a.

    ``k_field`` maps theta to the contravariant components K^a; the index is
    lowered with g before differentiating.  Zero iff K generates an isometry
    on the grid.
    """
    def lowered(th):
        th = np.asarray(th, float)
        return metric.eval(th) @ np.asarray(k_field(th), float)

    worst = 0.0
    for theta in grid:
        theta = _check_chart(metric, theta)
        n = metric.dim
        dk = np.empty((n, n))    # dk[a, b] = d_a K_b
        for a in range(n):
            h = fd_step(metric, theta, a, 1e-6)

            def shifted(t, a=a):
                th = np.array(theta)
                th[a] += t
                return lowered(th)

            d1 = (shifted(h) - shifted(-h)) / (2 * h)
            d2 = (shifted(h / 2) - shifted(-h / 2)) / h
            dk[a] = (4.0 * d2 - d1) / 3.0
        gam = christoffel(metric, theta)
        kb = lowered(theta)
        cov = dk - np.einsum("cba,c->ab", gam, kb)
        worst = max(worst, float(np.max(np.abs(cov + cov.T))))
    return worst


@dataclass(frozen=True)
class CurvatureReport:
    """All curvature objects evaluated at one chart point."""

    theta: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray            # mixed R^a_bcd
    ricci: np.ndarray
    scalar: float
    sectional: list                # ((i, j) plane, K) over coordinate pairs
    weyl_max_abs: float
    metric_compat_residual: float


def curvature_report(metric: MetricField, theta) -> CurvatureReport:
    theta = np.asarray(theta, float)
    gam = christoffel(metric, theta)
    rm = riemann(metric, theta)
    g = metric.eval(theta)
    rl = np.einsum("ae,ebcd->abcd", g, rm)
    ric = np.einsum("cacb->ab", rm)
    scal = float(np.einsum("ab,ab->", np.linalg.inv(g), ric))
    sec = []
    for i in range(metric.dim):
        for j in range(i + 1, metric.dim):
            u = np.zeros(metric.dim)
            v = np.zeros(metric.dim)
            u[i], v[j] = 1.0, 1.0
            sec.append(((i, j), sectional(metric, theta, u, v,
                                          riemann_low=rl)))
    _, wmax = weyl_projective(metric, theta)
    return CurvatureReport(
        theta=theta, christoffel=gam, riemann=rm, ricci=ric, scalar=scal,
        sectional=sec, weyl_max_abs=wmax,
        metric_compat_residual=metric_compatibility_residual(metric, theta))


def rescaled_chart(metric: MetricField, scale) -> MetricField:
    """Pullback of the metric under theta' = diag(scale) theta.

    Used to verify that statistical volumes are chart-invariant.
    """
    scale = np.asarray(scale, float)
    inv = 1.0 / scale

    def mat(thp):
        thp = np.asarray(thp, float)
        g = metric.eval(thp * inv)
        return g * inv[:, None] * inv[None, :]

    return MetricField(metric.dim, mat, jet_fn=None, source=metric.source,
                       blocks=metric.blocks,
                       scale_coords=metric.scale_coords)
