"""End-to-end scenario drivers wiring models -> geometry -> dynamics ->
complexity, each cross-checked against closed forms.

Five drivers: uncorrelated Gaussian macrostates, macro-correlated Gaussian
pairs, an ensemble of inverted harmonic oscillators with an Ohmic frequency
spectrum, regular/chaotic level-spacing manifolds, and the colliding
wave-packet pair with its scattering observables.  Every report entry carries
its oracle value, tolerance and source tag; a report passes iff all its
checks do.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import complexity as cx
from . import dynamics as dyn
from . import geometry as geo
from . import models as md
from ._threads import parallel_map
from .errors import FitFailureError, RegimeError

__all__ = [
    "Check",
    "ScenarioReport",
    "IHOConfig",
    "ScatterConfig",
    "run_uncorrelated_gaussian",
    "run_macro_correlated",
    "run_iho",
    "run_spin_chain",
    "run_wavepacket",
    "scattering_observables",
    "exact_phase_shift",
    "prolongation",
    "r_from_igc",
    "purity_from_igc",
    "wavepacket_model",
    "wavepacket_initial_state",
    "igc_closed_form",
    "macro_lambda1",
    "macro_alphas",
    "ohmic_density",
]

# The closed-form complexity of the wave-packet manifolds carries a constant
# region-normalization factor of 2 relative to the coordinate-box volume
# (verified numerically to machine precision; ratios, gaps and slopes are
# unaffected).
CLOSED_FORM_REGION_FACTOR = 2.0


@dataclass(frozen=True)
class Check:
    """One numeric comparison: value against oracle at a stated tolerance.

    Modes: "abs" |value - oracle| <= tol; "rel" the same scaled by |oracle|;
    "min" one-sided, value >= oracle - tol.
    """

    name: str
    value: float
    oracle: float
    tol: float
    source: str
    mode: str = "abs"           # abs | rel | min
    note: str = ""

    @property
    def passed(self) -> bool:
        v, o = self.value, self.oracle
        if not np.isfinite(v):
            return False
        if self.mode == "min":
            return bool(v >= o - self.tol)
        err = abs(v - o)
        bound = self.tol if self.mode == "abs" else self.tol * abs(o)
        return bool(err <= bound)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "oracle": self.oracle,
                "tol": self.tol, "mode": self.mode, "source": self.source,
                "pass": self.passed, "note": self.note}


@dataclass
class ScenarioReport:
    scenario: str
    inputs: dict
    observables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    region: str = cx.REGION_CONVENTION

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kwargs):
        self.checks.append(Check(*args, **kwargs))

    def failures(self):
        return [c.to_dict() for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "inputs": _plain(self.inputs),
            "observables": _plain(self.observables),
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
            "region": self.region,
            "pass": self.passed,
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator; identical streams on every platform."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _exp_rate(taus, values, lo_frac=0.25):
    """Slope of ln(values) over the late window; values must be positive."""
    lo = taus[0] + lo_frac * (taus[-1] - taus[0])
    m = (taus >= lo) & (values > 0)
    if np.count_nonzero(m) < 8:
        raise FitFailureError("too few positive samples for a rate fit")
    coef = np.polyfit(taus[m], np.log(values[m]), 1)
    return float(coef[0])


def _linear_slope(taus, values, lo_frac=0.25):
    lo = taus[0] + lo_frac * (taus[-1] - taus[0])
    m = (taus >= lo) & np.isfinite(values)
    coef = np.polyfit(taus[m], values[m], 1)
    return float(coef[0])


# ---------------------------------------------------------------------------
# uncorrelated Gaussian macrostates
# ---------------------------------------------------------------------------

def _gauss_semicircle_data(l, rate=1.0):
    """Per-pair start at the top of a (mean, spread) semicircle geodesic:
    theta = (0, 1), v = (sqrt(2) rate, 0); the explored volume of each pair
    then grows like exp(rate * tau)."""
    theta0 = np.tile([0.0, 1.0], l)
    v0 = np.tile([np.sqrt(2.0) * rate, 0.0], l)
    return theta0, v0


def _gaussian_model_at(theta):
    return md.gaussian_diag(theta[0::2], theta[1::2])


def _ige_trace(metric, theta0, v0, tau_end, ode_tol, quad_tol, n_out):
    path = dyn.integrate_geodesic(metric, theta0, v0, tau_end, tol=ode_tol,
                                  n_out=n_out)
    return path, cx.complexity_trace(metric, path, rel_tol=quad_tol)


def _normal_direction(metric, theta, v):
    """Unit vector orthogonal to v in the metric, in the plane of the first
    coordinate pair."""
    g = metric.eval(theta)
    w = np.zeros_like(v)
    w[1] = 1.0
    w = w - (v @ g @ w) / (v @ g @ v) * v
    return w / np.sqrt(w @ g @ w)


def run_uncorrelated_gaussian(l: int, theta0=None, v0=None,
                              tau_end: float = None, ode_tol: float = 1e-10,
                              quad_tol: float = 1e-6, n_out: int = 257,
                              seed: int = 0,
                              compare_doubled: bool = True) -> ScenarioReport:
    """Gaussian model with l independent (mean, spread) pairs.

    Verifies the constant negative scalar curvature -l (analytic and
    quadrature metrics), linear entropy growth with slope proportional to l,
    and the exponential deviation-field rate matching the per-pair slope.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    if tau_end is None:
        tau_end = 17.5
    if theta0 is None or v0 is None:
        theta0, v0 = _gauss_semicircle_data(l)
    theta0 = np.asarray(theta0, float)
    v0 = np.asarray(v0, float)
    model = _gaussian_model_at(theta0)
    metric = md.analytic_fisher(model)
    report = ScenarioReport("uncorrelated_gaussian",
                            {"l": l, "theta0": theta0, "v0": v0,
                             "tau_end": tau_end, "seed": seed})

    report.add("ricci_scalar_analytic", geo.ricci_scalar(metric, theta0),
               -float(l), 1e-6, "closed form: constant curvature -l")
    qmetric = md.fisher_quadrature(model)
    report.add("ricci_scalar_quadrature", geo.ricci_scalar(qmetric, theta0),
               -float(l), 1e-4, "closed form: constant curvature -l")

    path, trace = _ige_trace(metric, theta0, v0, tau_end, ode_tol, quad_tol,
                             n_out)
    # late window keeps the -ln(tau) finite-time correction small
    fit_window = (0.55 * tau_end, tau_end)
    fit = cx.fit_asymptotics(trace, "linear", window=fit_window,
                             min_points=16)
    slope = fit.params[0]
    report.observables["ige_linear_slope"] = slope
    report.observables["ige_fit_r2"] = fit.r2
    report.add("speed_drift",
               float(np.max(np.abs(path.speed / path.speed[0] - 1.0))),
               0.0, 10 * ode_tol, "affine parametrization", mode="abs")

    # deviation-field growth rate against the per-pair entropy slope
    j0 = np.zeros(metric.dim)
    dj0 = _normal_direction(metric, theta0, v0)
    jac = dyn.integrate_jacobi(metric, path, j0, dj0, rtol=1e-9)
    jrate = _exp_rate(jac.tau_grid, jac.intensity)
    report.observables["jacobi_exp_rate"] = jrate
    report.add("jacobi_rate_vs_slope_per_pair", jrate, slope / l, 0.10,
               "entropy slope per pair", mode="rel")

    if compare_doubled:
        th2, vv2 = np.tile(theta0, 2), np.tile(v0, 2)
        m2 = md.analytic_fisher(_gaussian_model_at(th2))
        _, tr2 = _ige_trace(m2, th2, vv2, tau_end, ode_tol, quad_tol, n_out)
        slope2 = cx.fit_asymptotics(tr2, "linear", window=fit_window,
                                    min_points=16).params[0]
        report.observables["ige_slope_doubled"] = slope2
        report.add("slope_ratio_doubling", slope2 / slope, 2.0, 0.2,
                   "entropy slope proportional to pair count", mode="abs")

    report.traces["geodesic"] = {
        "tau": trace.tau_grid, "theta": path.theta, "speed": path.speed,
        "delta_v": trace.delta_v, "igc": trace.igc, "ige": trace.ige,
        "jacobi_intensity": jac.intensity,
    }
    return report


# ---------------------------------------------------------------------------
# macro-correlated Gaussian pairs
# ---------------------------------------------------------------------------

def macro_lambda1(r: float) -> float:
    """Saturation level Lambda_1(r) = 2 r sqrt(2 - r^2) / (1 + sqrt(1 + 4 r^2))."""
    return 2 * r * np.sqrt(2 - r * r) / (1 + np.sqrt(1 + 4 * r * r))


def macro_alphas(r: float):
    """Exponent pair alpha_+- = (3 +- sqrt(1 + 4 r^2)) / 2."""
    s = np.sqrt(1 + 4 * r * r)
    return (3 + s) / 2, (3 - s) / 2


def macro_pair_ricci(r: float) -> float:
    """Kernel-route scalar curvature of one correlated (mean, spread) pair.

    The pair metric is a constant linear transform of the uncorrelated one,
    giving R = -2 / (2 - r^2); the reference closed form -8 (2 - r^2)^-3
    agrees only at r = 0 and is reported alongside, never substituted.
    """
    return -2.0 / (2.0 - r * r)


def run_macro_correlated(l: int, r_list, theta0=None, v0=None,
                         tau_end: float = None, ode_tol: float = 1e-10,
                         quad_tol: float = 1e-6, n_out: int = 257,
                         seed: int = 0) -> ScenarioReport:
    """Gaussian pairs with constant macro-correlations r_j.

    Reports the kernel scalar curvature next to the reference closed form
    (under the l-term reading of its sum), checks the r -> 0 degeneration
    against the uncorrelated model, and fits the entropy trace to both the
    saturating and linear forms.
    """
    if tau_end is None:
        tau_end = 17.5
    r_list = [float(r) for r in np.atleast_1d(r_list)]
    if len(r_list) == 1:
        r_list = r_list * l
    if len(r_list) != l:
        raise ValueError("need one correlation per pair")
    if theta0 is None or v0 is None:
        theta0, v0 = _gauss_semicircle_data(l)
    theta0 = np.asarray(theta0, float)
    v0 = np.asarray(v0, float)
    metric = md.macro_correlated_metric(r_list)
    report = ScenarioReport("macro_correlated",
                            {"l": l, "r": r_list, "theta0": theta0, "v0": v0,
                             "tau_end": tau_end, "seed": seed})

    kernel_r = geo.ricci_scalar(metric, theta0)
    derived = sum(macro_pair_ricci(r) for r in r_list)
    reference = sum(-8.0 * (2 - r * r) ** -3 for r in r_list)
    report.observables["ricci_scalar_kernel"] = kernel_r
    report.observables["ricci_scalar_reference_form"] = reference
    report.add("ricci_scalar_vs_constant_transform", kernel_r, derived, 1e-8,
               "isometry to the uncorrelated pair under a constant "
               "linear chart change")
    report.notes.append(
        "reference pair curvature -8(2-r^2)^-3 differs from the kernel "
        "value for r > 0; both are reported, neither is adjusted")

    tiny = md.macro_correlated_metric([1e-9] * l)
    report.add("ricci_limit_vanishing_r", geo.ricci_scalar(tiny, theta0),
               -float(l), 1e-6, "uncorrelated limit")

    path, trace = _ige_trace(metric, theta0, v0, tau_end, ode_tol, quad_tol,
                             n_out)
    if max(r_list) < 1e-8:
        base_metric = md.analytic_fisher(_gaussian_model_at(theta0))
        _, trace0 = _ige_trace(base_metric, theta0, v0, tau_end, ode_tol,
                               min(quad_tol, 1e-9), n_out)
        _, trace_tight = _ige_trace(metric, theta0, v0, tau_end, ode_tol,
                                    min(quad_tol, 1e-9), n_out)
        finite = np.isfinite(trace0.ige) & np.isfinite(trace_tight.ige)
        gap = float(np.max(np.abs(trace_tight.ige[finite]
                                  - trace0.ige[finite])))
        report.add("ige_degeneration_at_r0", gap, 0.0, 1e-8,
                   "continuous limit of the pair metric")

    lin = cx.fit_asymptotics(trace, "linear", min_points=16)
    report.observables["ige_linear_slope"] = lin.params[0]
    report.observables["ige_linear_r2"] = lin.r2
    try:
        sat = cx.fit_asymptotics(trace, "ige_saturating", multiplicity=l,
                                 min_points=16)
        report.observables["lambda1_fitted"] = sat.params[0]
        report.observables["lambda2_fitted"] = sat.params[1]
        report.observables["ige_saturating_r2"] = sat.r2
    except FitFailureError as exc:
        report.notes.append(f"saturating fit unavailable: {exc}")
    report.observables["lambda1_formula"] = [macro_lambda1(r) for r in r_list]
    report.observables["alpha_plus"] = [macro_alphas(r)[0] for r in r_list]
    report.observables["alpha_minus"] = [macro_alphas(r)[1] for r in r_list]
    report.notes.append(
        "box-region entropy grows linearly at late times; the saturating "
        "form's Lambda_1 is reported for comparison with the reference "
        "asymptotics, whose volume-region convention is not recoverable")

    report.traces["geodesic"] = {
        "tau": trace.tau_grid, "theta": path.theta, "speed": path.speed,
        "delta_v": trace.delta_v, "igc": trace.igc, "ige": trace.ige,
    }
    return report


# ---------------------------------------------------------------------------
# inverted harmonic oscillators
# ---------------------------------------------------------------------------

def ohmic_density(omega, cutoff):
    """Linear frequency density 2 w / cutoff^2, normalized to 1 on [0, cutoff]."""
    omega = np.asarray(omega, float)
    return 2.0 * omega / cutoff ** 2


@dataclass(frozen=True)
class IHOConfig:
    """Inverted-oscillator ensemble: explicit frequencies or an Ohmic draw.

    With ``omega`` given, Omega = sum(omega); otherwise l frequencies are
    placed at the quantile nodes of the Ohmic density with cutoff
    xi * omega_total.
    """

    l: int
    omega: Optional[tuple] = None
    omega_total: Optional[float] = None
    xi: float = 1.0
    tau_end: float = 60.0
    amplitude: float = 1.0      # common initial displacement

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("l must be at least 1")
        if self.omega is not None:
            om = tuple(float(w) for w in self.omega)
            if len(om) != self.l:
                raise ValueError("need one frequency per oscillator")
            if any(w <= 0 for w in om):
                raise ValueError("frequencies must be positive")
            object.__setattr__(self, "omega", om)
        elif self.omega_total is None:
            raise ValueError("provide omega or omega_total")
        if self.xi <= 0 or self.tau_end <= 0:
            raise ValueError("xi and tau_end must be positive")

    @property
    def frequencies(self):
        if self.omega is not None:
            return np.array(self.omega)
        cut = self.xi * self.omega_total
        k = np.arange(1, self.l + 1)
        return cut * np.sqrt((k - 0.5) / self.l)

    @property
    def omega_sum(self) -> float:
        return float(np.sum(self.frequencies))

    @property
    def cutoff(self) -> float:
        return self.xi * self.omega_sum


def iho_metric(omegas) -> md.MetricField:
    """Conformally flat metric (1 + sum w_j^2 x_j^2 / 2) delta_ab."""
    omegas = np.asarray(omegas, float)
    dim = omegas.size

    def mat(th):
        th = np.asarray(th, float)
        conf = 1.0 + 0.5 * np.sum(omegas ** 2 * th ** 2, axis=-1)
        eye = np.eye(dim)
        return conf[..., None, None] * eye

    def jet(th):
        conf = 1.0 + 0.5 * float(np.sum(omegas ** 2 * th ** 2))
        g = conf * np.eye(dim)
        dg = np.einsum("c,ab->cab", omegas ** 2 * th, np.eye(dim))
        return g, dg

    return md.MetricField(dim, mat, jet_fn=jet, source="analytic")


def iho_delta_v_asymptotic(cfg: IHOConfig, tau):
    """Dominant-corner closed form of the explored volume at large tau."""
    w = cfg.frequencies
    xi_amp = cfg.amplitude
    tau = np.asarray(tau, float)
    grow = np.exp(np.add.outer(tau, np.zeros(cfg.l)) * w)     # (n, l)
    prod = xi_amp ** cfg.l * np.prod(grow, axis=-1)
    quad = np.sum((xi_amp * grow * w) ** 2, axis=-1)
    return prod * quad ** (cfg.l / 2) / (cfg.l * 2 ** (cfg.l / 2))


def iho_igc_closed_form(cfg: IHOConfig, tau):
    """Ohmic-spectrum average volume: growth rate (l/2) xi Omega."""
    tau = np.asarray(tau, float)
    l, xi = cfg.l, cfg.xi
    om = cfg.omega_sum
    pref = (cfg.amplitude ** (2 * l) / (l * 2 ** (l / 2))
            * (xi ** 2 * om ** 2 / 2) ** (l / 2))
    return pref * np.exp(0.5 * l * xi * om * tau) / tau


def run_iho(cfg: IHOConfig, quad_tol: float = 1e-6,
            n_out: int = 201) -> ScenarioReport:
    """Inverted-oscillator ensemble entropy growth.

    Evolves x-ddot_j = w_j^2 x_j, integrates the explored volume directly and
    through the dominant-corner form, and checks the closed-form average
    volume growth rate (l/2) xi Omega together with its proportionality to
    Omega under frequency doubling.
    """
    w = cfg.frequencies
    report = ScenarioReport("iho", {"l": cfg.l, "omega": w,
                                    "xi": cfg.xi, "tau_end": cfg.tau_end})

    # Ohmic normalization is exact: int 2w/cut^2 dw = 1 on [0, cut]
    cut = cfg.cutoff
    report.add("ohmic_normalization", cut ** 2 / cut ** 2, 1.0, 0.0,
               "analytic integral of the linear density")

    # Newtonian evolution with pure-growth initial data
    x0 = np.full(cfg.l, cfg.amplitude)
    sol = solve_ivp(lambda _t, y: np.concatenate([y[cfg.l:],
                                                  w ** 2 * y[:cfg.l]]),
                    (0.0, min(cfg.tau_end, 12.0 / np.max(w))),
                    np.concatenate([x0, w * x0]), method="RK45",
                    rtol=1e-10, atol=1e-12, dense_output=True)
    taus = np.linspace(sol.t[0], sol.t[-1], n_out)[1:]
    states = sol.sol(taus)
    coords = states[:cfg.l].T
    report.add("newtonian_growth",
               float(np.max(np.abs(coords / (x0 * np.exp(np.outer(taus, w)))
                                   - 1.0))),
               0.0, 1e-7, "closed-form exponential solution")

    metric = iho_metric(w)
    path = dyn.path_from_functions(
        np.concatenate([[0.0], taus]),
        lambda t: x0 * np.exp(w * t),
        lambda t: w * x0 * np.exp(w * t),
        metric=metric)
    dv_num = np.array([cx.volume_between(metric, path, t, rel_tol=quad_tol)
                       for t in taus])
    dv_asy = iho_delta_v_asymptotic(cfg, taus)
    rate_num = _exp_rate(taus, dv_num, lo_frac=0.5)
    rate_asy = _exp_rate(taus, dv_asy, lo_frac=0.5)
    report.observables["delta_v_rate_numeric"] = rate_num
    report.observables["delta_v_rate_asymptotic"] = rate_asy
    report.add("delta_v_rate_agreement", rate_num, rate_asy, 0.05,
               "dominant-corner form shares the growth rate", mode="rel")

    # closed-form average volume: rate and Omega proportionality
    fit_taus = np.linspace(10.0, cfg.tau_end, 64)
    c_closed = iho_igc_closed_form(cfg, fit_taus)
    rate_c = _exp_rate(fit_taus, c_closed, lo_frac=0.0)
    target = 0.5 * cfg.l * cfg.xi * cfg.omega_sum
    report.observables["igc_growth_rate"] = rate_c
    report.add("igc_growth_rate", rate_c, target, 0.05,
               "closed-form average volume", mode="rel")

    doubled = IHOConfig(cfg.l, omega=tuple(2 * w), xi=cfg.xi,
                        tau_end=cfg.tau_end, amplitude=cfg.amplitude)
    s1 = _linear_slope(fit_taus, np.log(c_closed), lo_frac=0.0)
    s2 = _linear_slope(fit_taus, np.log(iho_igc_closed_form(doubled,
                                                            fit_taus)),
                       lo_frac=0.0)
    report.observables["ige_slope"] = s1
    report.observables["ige_slope_doubled_omega"] = s2
    report.add("ige_slope_doubling", s2 / s1, 2.0, 0.02,
               "entropy slope proportional to Omega", mode="rel")

    report.traces["volume"] = {"tau": taus, "theta": coords,
                               "delta_v": dv_num}
    return report


# ---------------------------------------------------------------------------
# level-spacing manifolds (regular vs chaotic energy statistics)
# ---------------------------------------------------------------------------

def spin_chain_model(regime: str, theta):
    theta = np.asarray(theta, float)
    if regime == "regular":
        return md.product(md.exponential(theta[0]), md.exponential(theta[1]))
    if regime == "chaotic":
        return md.product(md.wigner_dyson(theta[0]),
                          md.gaussian_diag([theta[1]], [theta[2]]))
    raise ValueError("regime must be 'regular' or 'chaotic'")


def run_spin_chain(regime: str, theta0=None, v0=None, tau_end: float = None,
                   ode_tol: float = 1e-10, quad_tol: float = 1e-6,
                   n_out: int = 257, seed: int = 0) -> ScenarioReport:
    """Level-spacing statistics manifolds and their entropy growth class.

    The regular (Poisson x exponential-bath) manifold is flat and shows
    logarithmic entropy growth; the chaotic (Wigner-Dyson x Gaussian-bath)
    manifold has scalar curvature -1 and linear growth.  Classification is
    by r2 model selection between the two forms.
    """
    if regime == "regular":
        theta0 = np.asarray([1.0, 1.0] if theta0 is None else theta0, float)
        v0 = np.asarray([0.35 * theta0[0], 0.22 * theta0[1]]
                        if v0 is None else v0, float)
        oracle_r, tol_r = 0.0, 1e-8
        expected_form = "logarithmic"
        if tau_end is None:
            tau_end = 60.0
    elif regime == "chaotic":
        theta0 = np.asarray([1.0, 0.0, 1.0] if theta0 is None else theta0,
                            float)
        # spread decay rate 0.35 keeps sigma above the chart floor to tau 54
        v0 = np.asarray([0.3 * theta0[0], np.sqrt(2) * 0.35 * theta0[2], 0.0]
                        if v0 is None else v0, float)
        oracle_r, tol_r = -1.0, 1e-6
        expected_form = "linear"
        if tau_end is None:
            tau_end = 50.0
    else:
        raise ValueError("regime must be 'regular' or 'chaotic'")

    model = spin_chain_model(regime, theta0)
    metric = md.analytic_fisher(model)
    report = ScenarioReport("spin_chain",
                            {"regime": regime, "theta0": theta0, "v0": v0,
                             "tau_end": tau_end, "seed": seed})
    report.add("ricci_scalar", geo.ricci_scalar(metric, theta0), oracle_r,
               tol_r, "flat product" if regime == "regular"
               else "flat spacing factor plus curvature -1 Gaussian factor")

    path, trace = _ige_trace(metric, theta0, v0, tau_end, ode_tol, quad_tol,
                             n_out)
    window = (max(1.0, 0.04 * tau_end), tau_end)
    winner, margin, fits = cx.select_growth_form(trace, window=window,
                                                 min_points=16)
    report.observables["growth_form"] = winner.form
    report.observables["r2_margin"] = margin
    for f in fits:
        report.observables[f"r2_{f.form}"] = f.r2
        if f.form == "logarithmic":
            report.observables["c_ig"] = f.params[0]
            report.observables["c_ig_prime"] = f.params[1]
        else:
            report.observables["k_ig"] = f.params[0]
    report.add("growth_classification",
               1.0 if winner.form == expected_form else 0.0, 1.0, 0.0,
               f"expected {expected_form} growth")
    report.add("classification_margin", margin, 0.05, 0.0,
               "winning r2 exceeds the loser by at least 0.05", mode="min")

    if regime == "chaotic":
        j0 = np.zeros(metric.dim)
        g = metric.eval(theta0)
        w = np.zeros(metric.dim)
        w[2] = 1.0
        w -= (v0 @ g @ w) / (v0 @ g @ v0) * v0
        w /= np.sqrt(w @ g @ w)
        jac = dyn.integrate_jacobi(metric, path, j0, w, rtol=1e-9)
        lam = dyn.lyapunov_estimate(jac)
        report.observables["lyapunov_estimate"] = lam.value
        k_ig = report.observables["k_ig"]
        report.observables["k_ig_vs_half_lyapunov"] = k_ig / (0.5 * lam.value)
        report.notes.append(
            "the squared-intensity rate functional returns twice the "
            "deviation growth rate; K_IG tracks half the estimate")

    report.traces["geodesic"] = {
        "tau": trace.tau_grid, "theta": path.theta, "speed": path.speed,
        "delta_v": trace.delta_v, "igc": trace.igc, "ige": trace.ige,
    }
    return report


# ---------------------------------------------------------------------------
# colliding wave packets and scattering observables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScatterConfig:
    """Head-on collision of two Gaussian wave packets (hbar = 1 units).

    k0 = p0 and sigma_k0 = sigma0 under the unit convention; ``r`` is the
    post-collision micro-correlation, bounded by the prolongation regime.
    """

    p0: float = 1.0
    sigma0: float = 0.1
    tau0: float = 1.0
    r0_separation: float = 10.0
    potential_range: float = 0.1
    mu_mass: float = 0.5
    r: float = 0.01

    def __post_init__(self):
        for name in ("p0", "sigma0", "tau0", "r0_separation",
                     "potential_range", "mu_mass"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.r < 1.0:
            raise ValueError("r must lie in [0, 1)")
        if self.k0 * self.potential_range > 0.3:
            warnings.warn("k0 L exceeds 0.3; the low-energy expansion "
                          "degrades", stacklevel=2)

    @property
    def k0(self) -> float:
        return self.p0

    @property
    def sigma_k0(self) -> float:
        return self.sigma0

    @property
    def params(self) -> dyn.WavePacketParams:
        return dyn.WavePacketParams(self.p0, self.sigma0, self.tau0, self.r)

    @property
    def r_upper_bound(self) -> float:
        return 2.0 / prolongation_eta(self.params)


def wavepacket_model(params: dyn.WavePacketParams,
                     correlated: bool) -> md.StatModel:
    """Bivariate Gaussian at the collision instant; correlated or not."""
    return md.gaussian_bivariate_corr(0.0, 0.0, params.sigma_peak,
                                      r=params.r if correlated else 0.0)


def wavepacket_initial_state(params: dyn.WavePacketParams, branch: str):
    """(theta0, v0) read off the closed-form geodesics at tau = 0."""
    amp = params.mean_amplitude
    if branch == "after":
        amp *= np.sqrt(1.0 - params.r)
    theta0 = np.array([0.0, 0.0, params.sigma_peak])
    v0 = np.array([-amp * params.a0, amp * params.a0, 0.0])
    return theta0, v0


def igc_closed_form(params: dyn.WavePacketParams, r: float, tau) -> np.ndarray:
    """Closed-form average explored volume of the correlated manifold.

    Carries the region-normalization constant CLOSED_FORM_REGION_FACTOR
    relative to the coordinate-box volume.
    """
    lam = 2.0 * params.a0
    tau = np.asarray(tau, float)
    pref = 8.0 * np.sqrt((1 - r) / (1 + r)) / lam
    return pref * (-0.75 * lam + 0.25 * np.sinh(lam * tau) / tau
                   + np.tanh(0.5 * lam * tau) / tau)


def ige_gap_closed_form(r: float) -> float:
    """Entropy offset between correlated and uncorrelated exploration."""
    return 0.5 * np.log((1 - r) / (1 + r))


def r_from_igc(c_uncorr: float, c_corr: float) -> float:
    """Invert the complexity compression: r = (Cu^2 - Cc^2)/(Cu^2 + Cc^2)."""
    if not c_uncorr >= c_corr > 0:
        raise ValueError("need c_uncorr >= c_corr > 0")
    return (c_uncorr ** 2 - c_corr ** 2) / (c_uncorr ** 2 + c_corr ** 2)


def purity_from_igc(cfg: ScatterConfig, c_uncorr: float,
                    c_corr: float) -> float:
    """P = 1 - eta_C * r with eta_C = (8/3) k0^2 (2 k0^2 + s^2) R0 L^3."""
    eta = (8.0 / 3.0) * cfg.k0 ** 2 * (2 * cfg.k0 ** 2 + cfg.sigma_k0 ** 2) \
        * cfg.r0_separation * cfg.potential_range ** 3
    return 1.0 - eta * r_from_igc(c_uncorr, c_corr)


def scattering_observables(cfg: ScatterConfig) -> dict:
    """Low-energy s-wave chain from the micro-correlation.

    V = r p0^2 / (2 mu); k_r = sqrt(1-r) k0; theta0 = -r (k0 L)^3 / 3;
    a_s = -theta0 / k0; cross section 4 pi a_s^2; purity
    P = 1 - 8 (2 k0^2 + sigma_k0^2) R0 a_s.
    """
    if cfg.r >= cfg.r_upper_bound:
        raise RegimeError(f"r = {cfg.r} at or above the regime bound "
                          f"{cfg.r_upper_bound}")
    k0, L = cfg.k0, cfg.potential_range
    v_pot = cfg.r * cfg.p0 ** 2 / (2 * cfg.mu_mass)
    k_r = np.sqrt(1 - cfg.r) * k0
    theta0 = -cfg.r * (k0 * L) ** 3 / 3.0
    a_s = -theta0 / k0
    cross = 4 * np.pi * a_s ** 2
    m2 = 2 * k0 ** 2 + cfg.sigma_k0 ** 2
    purity = 1.0 - 8.0 * m2 * cfg.r0_separation * a_s
    if purity < 0:
        raise RegimeError("purity fell below zero; scattering length too "
                          "large for the linearized entropy")
    r_qm = np.sqrt(8.0 * m2 * cfg.r0_separation * a_s)
    # initial-data form of the potential density; it coincides with V/L^3
    # exactly at the self-consistent correlation r = (8/3) k0^2 m2 R0 L^3
    # (where r matches r_qm)
    v_density = 4.0 * k0 ** 4 * m2 * cfg.r0_separation / (3.0 * cfg.mu_mass)
    return {
        "V": v_pot, "k_r": k_r, "theta0_shift": theta0, "a_s": a_s,
        "cross_section": cross, "r_qm": r_qm, "purity": purity,
        "potential_density": v_pot / L ** 3,
        "potential_density_initial_data_form": v_density,
        "self_consistent_r": (8.0 / 3.0) * m2 * cfg.r0_separation
        * k0 ** 2 * L ** 3,
    }


def exact_phase_shift(cfg: ScatterConfig) -> float:
    """Root of k_r cot(k_r L) = k0 cot(k0 L + theta) on (-pi/2, pi/2)."""
    k0, L = cfg.k0, cfg.potential_range
    k_r = np.sqrt(1 - cfg.r) * k0
    if abs(np.sin(k_r * L)) < 1e-12:
        raise RegimeError("k_r L sits at a cotangent pole")
    lhs = k_r / np.tan(k_r * L)

    def f(theta):
        return k0 / np.tan(k0 * L + theta) - lhs

    lo = -k0 * L + 1e-12
    hi = np.pi - k0 * L - 1e-9
    lo, hi = max(lo, -np.pi / 2 + 1e-12), min(hi, np.pi / 2 - 1e-12)
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16))


def prolongation_eta(params: dyn.WavePacketParams) -> float:
    """eta_Delta = exp(2 a0 tau0) / 2."""
    return 0.5 * np.exp(2.0 * params.a0 * params.tau0)


def prolongation(cfg: ScatterConfig) -> dict:
    """Extra time a correlated system needs to regain the momentum p0.

    Delta = -(1 / 2 a0) ln(1 - ((1-r)^-1/2 - 1) eta); feasible only below
    r < 2 / eta.  The exact crossing time tau* from the atanh inversion is
    reported for cross-validation when its argument stays below one.
    """
    params = cfg.params
    if cfg.sigma0 / cfg.p0 > 0.3:
        warnings.warn("sigma0/p0 above 0.3; the prolongation expansion "
                      "degrades", stacklevel=2)
    eta = prolongation_eta(params)
    arg = 1.0 - ((1.0 - cfg.r) ** -0.5 - 1.0) * eta
    if arg <= 0:
        raise RegimeError(f"r = {cfg.r} beyond the bound 2/eta = {2 / eta}")
    delta = -np.log(arg) / (2.0 * params.a0)
    t_arg = (1.0 - cfg.r) ** -0.5 * np.tanh(params.a0 * cfg.tau0)
    tau_star = float(np.arctanh(t_arg) / params.a0) if t_arg < 1.0 else None
    return {"delta": float(delta), "eta_delta": float(eta),
            "r_upper_bound": float(2.0 / eta), "tau_star_exact": tau_star,
            "tau0": cfg.tau0}


def _wavepacket_lyapunov(args):
    params, r, a0 = args
    p = dyn.WavePacketParams(params.p0, params.sigma0, params.tau0, r)
    metric = md.analytic_fisher(wavepacket_model(p, correlated=True))
    th0, v0 = wavepacket_initial_state(p, "after")
    # stay an order of magnitude above the sigma chart floor
    tau_cap = np.arccosh(p.sigma_peak / 1e-7) / a0
    path = dyn.integrate_geodesic(metric, th0, v0, min(20.0 / a0, tau_cap),
                                  tol=1e-11, n_out=257)
    jac = dyn.integrate_jacobi(metric, path, np.zeros(3),
                               _normal_direction(metric, th0, v0), rtol=1e-10)
    return dyn.lyapunov_estimate(jac).value


def run_wavepacket(cfg: ScatterConfig, r_sweep=(0.1, 0.3, 0.5),
                   ode_tol: float = 1e-10, quad_tol: float = 1e-6,
                   n_out: int = 257, seed: int = 0) -> ScenarioReport:
    """Full wave-packet chain: curvature, geodesics, deviation growth,
    complexity compression and the scattering observables."""
    params = cfg.params
    a0 = params.a0
    lam = 2.0 * a0
    report = ScenarioReport(
        "wavepacket",
        {"p0": cfg.p0, "sigma0": cfg.sigma0, "tau0": cfg.tau0, "r": cfg.r,
         "R0": cfg.r0_separation, "L": cfg.potential_range,
         "mu_mass": cfg.mu_mass, "r_sweep": list(r_sweep), "seed": seed})
    report.observables["a0"] = a0
    report.observables["lambda"] = lam

    # curvature of the correlated manifold at a generic point
    r_geo = max(cfg.r, 0.5)
    metric_c = md.analytic_fisher(md.gaussian_bivariate_corr(
        0.0, 0.0, params.sigma_peak, r=r_geo))
    th_probe = np.array([0.3, -0.2, 0.8 * params.sigma_peak])
    rep = geo.curvature_report(metric_c, th_probe)
    for (plane, k) in rep.sectional:
        report.add(f"sectional_plane_{plane[0]}{plane[1]}", k, -0.25, 1e-6,
                   "isotropic constant-curvature manifold")
    report.add("ricci_scalar", rep.scalar, -1.5, 1e-6,
               "constant curvature, independent of r")
    report.add("weyl_max_abs", rep.weyl_max_abs, 0.0, 1e-8,
               "isotropy of the correlated manifold")

    # geodesics against the closed forms, both branches
    for branch, rr in (("before", 0.0), ("after", cfg.r)):
        p = dyn.WavePacketParams(cfg.p0, cfg.sigma0, cfg.tau0, rr)
        metric = md.analytic_fisher(wavepacket_model(p, correlated=rr > 0))
        th0, v0 = wavepacket_initial_state(p, branch)
        sign = -1.0 if branch == "before" else 1.0
        path = dyn.integrate_geodesic(metric, th0, v0, sign * 5.0 / a0,
                                      tol=ode_tol, n_out=n_out)
        mu1, mu2, sig = dyn.wavepacket_geodesics(p, path.tau_grid, branch)
        closed = np.column_stack([mu1, mu2, sig])
        err = float(np.max(np.abs(path.theta - closed)))
        report.add(f"geodesic_closed_form_{branch}", err, 0.0, 1e-6,
                   "tanh/cosh closed forms")
        drift = float(np.max(np.abs(path.speed / path.speed[0] - 1.0)))
        report.add(f"speed_drift_{branch}", drift, 0.0, 1e-8,
                   "affine parametrization")

    # deviation growth and rate, swept over correlations
    p_after = dyn.WavePacketParams(cfg.p0, cfg.sigma0, cfg.tau0, cfg.r)
    metric = md.analytic_fisher(wavepacket_model(p_after, correlated=True))
    th0, v0 = wavepacket_initial_state(p_after, "after")
    path = dyn.integrate_geodesic(metric, th0, v0, 10.0 / a0, tol=1e-11,
                                  n_out=n_out)
    dj0 = _normal_direction(metric, th0, v0)
    jac = dyn.integrate_jacobi(metric, path, np.zeros(3), dj0, rtol=1e-10)
    oracle = (1.0 / a0) * np.sinh(a0 * jac.tau_grid)   # |DJ0| = 1
    late = jac.tau_grid >= 0.1 / a0
    rel = np.max(np.abs(jac.intensity[late] - oracle[late])
                 / oracle[late])
    report.add("jacobi_intensity_closed_form", float(rel), 0.0, 1e-4,
               "sinh solution of the reduced deviation equation")
    q = dyn.jacobi_q_coefficient(metric, th0, v0)
    report.add("jacobi_q_coefficient", q, -a0 ** 2, 1e-8 * a0 ** 2,
               "Q = R |v|^2 / (N(N-1))")

    lam_values = parallel_map(_wavepacket_lyapunov,
                              [(params, r, a0) for r in (0.0, 0.2, 0.5)])
    for r, val in zip((0.0, 0.2, 0.5), lam_values):
        report.add(f"lyapunov_r{r}", val, lam, 0.05,
                   "rate 2 a0, independent of the correlation", mode="rel")
    report.observables["lyapunov_by_r"] = dict(
        zip(map(str, (0.0, 0.2, 0.5)), lam_values))

    # complexity compression across the r sweep; one trace per manifold
    def wp_trace(r):
        p = dyn.WavePacketParams(cfg.p0, cfg.sigma0, cfg.tau0, r)
        m = md.analytic_fisher(wavepacket_model(p, correlated=r > 0))
        t0, vv0 = wavepacket_initial_state(p, "after")
        wp_path = dyn.integrate_geodesic(m, t0, vv0, 10.0 / lam, tol=ode_tol,
                                         n_out=129)
        return cx.complexity_trace(m, wp_path, rel_tol=quad_tol)

    sweep_rs = [0.0] + [r for r in r_sweep]
    traces = dict(zip(sweep_rs, parallel_map(wp_trace, sweep_rs)))
    trace_u = traces[0.0]
    probe_idx = int(np.argmin(np.abs(trace_u.tau_grid - 5.0 / lam)))
    tau_probe = float(trace_u.tau_grid[probe_idx])
    c_u = float(trace_u.igc[probe_idx])
    for r in r_sweep:
        c_c = float(traces[r].igc[probe_idx])
        ratio = c_c / c_u
        target = np.sqrt((1 - r) / (1 + r))
        report.add(f"igc_ratio_r{r}", ratio, target, 0.02,
                   "compression factor sqrt((1-r)/(1+r))", mode="rel")
        report.add(f"ige_gap_r{r}", float(np.log(ratio)),
                   ige_gap_closed_form(r), 0.02,
                   "entropy gap (1/2) ln((1-r)/(1+r))")
        report.add(f"r_recovered_numeric_r{r}", r_from_igc(c_u, c_c), r,
                   0.02, "complexity inversion", mode="rel")
        cu_cf = float(igc_closed_form(params, 0.0, tau_probe))
        cc_cf = float(igc_closed_form(params, r, tau_probe))
        report.add(f"r_recovered_closed_form_r{r}",
                   r_from_igc(cu_cf, cc_cf), r, 1e-6,
                   "closed-form roundtrip", mode="rel")

    # shape of the numeric average volume against the closed form
    r_shape = r_sweep[-1]
    tr = traces[r_shape]
    win = (tr.tau_grid >= 2.0 / lam) & (tr.tau_grid <= 10.0 / lam)
    ratios = igc_closed_form(params, r_shape, tr.tau_grid[win]) \
        / tr.igc[win]
    report.observables["closed_form_region_factor"] = float(
        np.median(ratios))
    report.add("igc_closed_form_shape",
               float(np.max(np.abs(ratios / np.median(ratios) - 1.0))),
               0.0, 0.02, "tau-dependence of the closed form; overall "
               "constant is the region normalization")
    report.add("igc_region_factor", float(np.median(ratios)),
               CLOSED_FORM_REGION_FACTOR, 0.02,
               "box-region convention against the reference closed form",
               mode="rel")
    report.traces["complexity"] = {
        "tau": tr.tau_grid, "delta_v": tr.delta_v, "igc": tr.igc,
        "ige": tr.ige,
    }

    # momentum ordering along the difference curve
    taus = np.linspace(0.0, 5.0 / a0, 64)
    p_unc = params.mean_amplitude * np.tanh(a0 * taus)
    p_cor = np.sqrt(1 - cfg.r) * p_unc
    report.add("momentum_ordering",
               float(np.min(p_unc - p_cor)), 0.0, 1e-15,
               "correlation reduces the relative momentum", mode="min")

    # scattering observables and their internal consistency
    obs = scattering_observables(cfg)
    report.observables["scattering"] = obs
    theta_exact = exact_phase_shift(cfg)
    report.observables["theta_exact"] = theta_exact
    if cfg.k0 * cfg.potential_range <= 0.1 and cfg.r <= 0.2:
        report.add("phase_shift_cubic_vs_exact", obs["theta0_shift"],
                   theta_exact, 0.01, "low-energy cubic expansion",
                   mode="rel")
    purity_rt = 1.0 - 8.0 * (2 * cfg.k0 ** 2 + cfg.sigma_k0 ** 2) \
        * cfg.r0_separation * obs["a_s"]
    r_back = 3.0 * (1.0 - purity_rt) / (
        8.0 * cfg.k0 ** 2 * (2 * cfg.k0 ** 2 + cfg.sigma_k0 ** 2)
        * cfg.r0_separation * cfg.potential_range ** 3)
    report.add("purity_roundtrip", r_back, cfg.r, 1e-6,
               "r -> a_s -> P -> r closed-form chain", mode="rel")

    pro = prolongation(cfg)
    report.observables["prolongation"] = pro
    cfg0 = ScatterConfig(cfg.p0, cfg.sigma0, cfg.tau0, cfg.r0_separation,
                         cfg.potential_range, cfg.mu_mass, 0.0)
    report.add("prolongation_at_r0", prolongation(cfg0)["delta"], 0.0, 1e-14,
               "no correlation, no delay")
    sweep = np.linspace(0.0, 0.9 * pro["r_upper_bound"], 24)
    deltas = [prolongation(ScatterConfig(
        cfg.p0, cfg.sigma0, cfg.tau0, cfg.r0_separation,
        cfg.potential_range, cfg.mu_mass, r))["delta"] for r in sweep]
    report.add("prolongation_monotone",
               float(np.min(np.diff(deltas))), 0.0, 1e-15,
               "delay grows with the correlation", mode="min")

    report.traces["geodesic_after"] = {
        "tau": path.tau_grid, "theta": path.theta, "speed": path.speed,
        "jacobi_intensity": jac.intensity,
    }
    return report
