"""Statistical volumes, complexity and entropy of geodesic exploration.

The volume of the region explored by a geodesic up to time tau is the
iterated integral of sqrt(det g) over the coordinate box spanned by the
trajectory (per-coordinate min/max over [0, tau]).  Its running time average
is the complexity C(tau); S(tau) = ln C(tau) is the entropy trace.  Late-time
behavior is summarized by least-squares fits to linear, logarithmic, power,
exponential and saturating forms.

The box reading of the region integral is a convention choice (the endpoint
notation leaves the region open for more than one coordinate); it is recorded
in every report so alternates can be compared later.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitFailureError, UndefinedEntropyError
from .models import MetricField
from .dynamics import GeodesicPath
from .quadrature import integrate_box

__all__ = [
    "ComplexityTrace",
    "AsymptoticFit",
    "volume_element",
    "path_box",
    "volume_between",
    "igc",
    "ige",
    "complexity_trace",
    "fit_asymptotics",
    "select_growth_form",
]

REGION_CONVENTION = "coordinate-box"


def volume_element(metric: MetricField, theta):
    """sqrt(det g); the invariant volume density in the chart."""
    return metric.sqrt_det(np.asarray(theta, float))


def path_box(path: GeodesicPath, tau: float):
    """Per-coordinate [min, max] swept by the path over [tau_start, tau]."""
    t0 = path.tau_grid[0]
    lo, hi = (t0, tau) if tau >= t0 else (tau, t0)
    mask = (path.tau_grid >= lo) & (path.tau_grid <= hi)
    pts = path.theta[mask]
    end, _ = path.state(tau)
    pts = np.vstack([pts, end]) if pts.size else np.atleast_2d(end)
    return list(zip(pts.min(axis=0), pts.max(axis=0)))


def volume_between(metric: MetricField, path: GeodesicPath, tau: float,
                   rel_tol: float = 1e-6) -> float:
    """Volume of the coordinate box traced by the geodesic up to tau.

    Separates into per-block iterated integrals when the metric factorizes;
    a box with zero extent in any coordinate has zero volume.
    """
    bounds = path_box(path, tau)
    if any(hi <= lo for lo, hi in bounds):
        return 0.0
    total = 1.0
    for block in metric.blocks:
        sub = metric.block_metric(block)
        sub_bounds = [bounds[i] for i in block]
        total *= integrate_box(lambda pts: sub.sqrt_det(pts), sub_bounds,
                               rel_tol=rel_tol)
    return total


def igc(metric: MetricField, path: GeodesicPath, tau: float,
        rel_tol: float = 1e-6) -> float:
    """Time-averaged explored volume C(tau) by composite quadrature over the
    path grid."""
    if tau <= path.tau_grid[0]:
        raise ValueError("tau must exceed the start of the path")
    taus = path.tau_grid[(path.tau_grid > path.tau_grid[0])
                         & (path.tau_grid < tau)]
    taus = np.concatenate([[path.tau_grid[0]], taus, [tau]])
    vals = np.array([0.0] + [volume_between(metric, path, t, rel_tol)
                             for t in taus[1:]])
    return float(np.trapezoid(vals, taus) / (tau - path.tau_grid[0]))


def ige(metric: MetricField, path: GeodesicPath, tau: float,
        rel_tol: float = 1e-6) -> float:
    """Entropy trace S(tau) = ln C(tau)."""
    c = igc(metric, path, tau, rel_tol)
    if c <= 0:
        raise UndefinedEntropyError(f"complexity {c} has no logarithm")
    return float(np.log(c))


@dataclass(frozen=True, eq=False)
class ComplexityTrace:
    """Explored volume, its running average and the entropy, on a tau grid."""

    tau_grid: np.ndarray
    delta_v: np.ndarray
    igc: np.ndarray
    ige: np.ndarray
    region: str = REGION_CONVENTION
    fit: Optional["AsymptoticFit"] = None

    def with_fit(self, fit):
        return ComplexityTrace(self.tau_grid, self.delta_v, self.igc,
                               self.ige, self.region, fit)


def complexity_trace(metric: MetricField, path: GeodesicPath,
                     rel_tol: float = 1e-6) -> ComplexityTrace:
    """Evaluate delta-V, C and S on the path's own tau grid."""
    taus = path.tau_grid
    dv = np.zeros_like(taus)
    for k in range(1, taus.size):
        dv[k] = volume_between(metric, path, taus[k], rel_tol)
    # running trapezoid average of delta-V
    seg = 0.5 * (dv[1:] + dv[:-1]) * np.diff(taus)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    spans = taus - taus[0]
    cvals = np.divide(cum, spans, out=np.zeros_like(cum), where=spans > 0)
    with np.errstate(divide="ignore"):
        svals = np.where(cvals > 0, np.log(np.maximum(cvals, 1e-300)),
                         -np.inf)
    return ComplexityTrace(taus, dv, cvals, svals)


# ---------------------------------------------------------------------------
# asymptotic fits
# ---------------------------------------------------------------------------

_FORMS = ("linear", "logarithmic", "power", "exponential", "ige_saturating")


@dataclass(frozen=True)
class AsymptoticFit:
    """Late-time fit of a complexity/entropy trace.

    params by form: linear S = a tau + b -> (a, b); logarithmic
    S = a ln tau + b -> (a, b); power C = a tau^b -> (a, b); exponential
    C = a e^(b tau) -> (a, b); ige_saturating S = m ln(L1 + L2 / tau)
    -> (L1, L2) with the multiplicity m fixed by the caller.
    """

    form: str
    params: tuple
    r2: float
    window: tuple


def _window_mask(taus, window, fit_window_fraction):
    if window is None:
        lo = taus[0] + fit_window_fraction * (taus[-1] - taus[0])
        hi = taus[-1]
    else:
        lo, hi = window
    return (taus >= lo) & (taus <= hi), (float(lo), float(hi))


def _lstsq_line(x, y):
    design = np.column_stack([x, np.ones_like(x)])
    if np.linalg.matrix_rank(design) < 2:
        raise FitFailureError("rank-deficient design matrix")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef, design @ coef


def _r2(y, yhat):
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res < 1e-24 else 0.0
    return min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)


def fit_asymptotics(trace: ComplexityTrace, form: str, multiplicity: int = 1,
                    window: tuple = None, fit_window_fraction: float = 0.25,
                    min_points: int = 32) -> AsymptoticFit:
    """Least-squares fit of the trace to one asymptotic form.

    The window defaults to the trace range with the first quarter (the
    transient) dropped; at least ``min_points`` finite samples are required.
    """
    if form not in _FORMS:
        raise ValueError(f"unknown form {form!r}; choose from {_FORMS}")
    mask, win = _window_mask(trace.tau_grid, window, fit_window_fraction)
    taus = trace.tau_grid[mask]
    entropy_form = form in ("linear", "logarithmic", "ige_saturating")
    y = trace.ige[mask] if entropy_form else trace.igc[mask]
    good = np.isfinite(y) & (taus > 0)
    taus, y = taus[good], y[good]
    if taus.size < min_points:
        raise FitFailureError(
            f"only {taus.size} usable points in window {win}; "
            f"need {min_points}")

    if form == "linear":
        coef, yhat = _lstsq_line(taus, y)
    elif form == "logarithmic":
        coef, yhat = _lstsq_line(np.log(taus), y)
    elif form == "power":
        if np.any(y <= 0):
            raise FitFailureError("power fit needs positive complexity")
        coef, lhat = _lstsq_line(np.log(taus), np.log(y))
        coef = np.array([np.exp(coef[1]), coef[0]])
        yhat, y = lhat, np.log(y)
    elif form == "exponential":
        if np.any(y <= 0):
            raise FitFailureError("exponential fit needs positive complexity")
        coef, lhat = _lstsq_line(taus, np.log(y))
        coef = np.array([np.exp(coef[1]), coef[0]])
        yhat, y = lhat, np.log(y)
    else:   # ige_saturating: y = m ln(L1 + L2 / tau)
        m = float(multiplicity)
        tail = np.exp(y[-1] / m)
        head = np.exp(y[0] / m)
        guess = (tail, max(taus[0] * (head - tail), 1e-6))

        def model(t, l1, l2):
            return m * np.log(np.maximum(l1 + l2 / t, 1e-300))

        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                coef, _ = curve_fit(model, taus, y, p0=guess, maxfev=20000)
        except RuntimeError as exc:
            raise FitFailureError(f"saturating fit diverged: {exc}") from exc
        yhat = model(taus, *coef)

    return AsymptoticFit(form, tuple(float(c) for c in coef),
                         _r2(y, yhat), win)


def select_growth_form(trace: ComplexityTrace, forms=("logarithmic", "linear"),
                       **kwargs):
    """Model selection among entropy growth forms by r2.

    Returns (winning fit, r2 margin over the runner-up, all fits).
    """
    fits = [fit_asymptotics(trace, f, **kwargs) for f in forms]
    ranked = sorted(fits, key=lambda f: f.r2, reverse=True)
    margin = ranked[0].r2 - ranked[1].r2 if len(ranked) > 1 else ranked[0].r2
    return ranked[0], margin, fits
