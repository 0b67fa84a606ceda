"""Command-line front end: config parsing, dispatch, deterministic emission.

Subcommands: curvature, geodesic, jacobi, ige, mre, scenario.  Configs are
YAML documents; all validation failures are reported together with the path
of the offending field.  Outputs are a JSON report plus CSV traces with the
fixed header ``tau,theta_1..theta_N,speed,delta_v,igc,ige,jacobi_intensity``
(columns absent when not computed), floats printed with 17 significant
digits, LF line endings.  Exit status: 0 all oracle checks pass, 1 usage or
config error, 2 numeric check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import complexity as cx
from . import dynamics as dyn
from . import geometry as geo
from . import models as md
from . import mre
from . import scenarios as sc
from .errors import ConfigError, IgacError

_SCENARIOS = ("uncorrelated_gaussian", "macro_correlated", "iho",
              "spin_chain", "wavepacket", "custom_manifold", "mre_update")
_FORMATS = ("csv", "json")

_NUMERIC_DEFAULTS = {"ode_tol": 1e-10, "quad_tol": 1e-9,
                     "fit_window_fraction": 0.25, "seed": 0}


def parse_config(text: str, command: str = "scenario") -> dict:
    """Validated config with defaults filled, or ConfigError listing every
    failure with its field path."""
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError([("<document>", f"not valid YAML: {exc}")])
    if not isinstance(raw, dict):
        raise ConfigError([("<document>", "top level must be a mapping")])
    failures = []
    cfg = dict(raw)

    numerics = dict(_NUMERIC_DEFAULTS)
    numerics.update(cfg.get("numerics") or {})
    for key in ("ode_tol", "quad_tol", "fit_window_fraction"):
        val = numerics.get(key)
        if not isinstance(val, (int, float)) or val <= 0:
            failures.append((f"numerics.{key}", f"must be positive, got "
                             f"{val!r}"))
    seed = numerics.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        failures.append(("numerics.seed", "must be a 64-bit unsigned "
                         f"integer, got {seed!r}"))
    cfg["numerics"] = numerics

    output = {"directory": ".", "formats": ["json", "csv"]}
    output.update(cfg.get("output") or {})
    fmts = output.get("formats")
    if not isinstance(fmts, (list, tuple)) or \
            not set(fmts) <= set(_FORMATS) or not fmts:
        failures.append(("output.formats",
                         f"must be a nonempty subset of {_FORMATS}"))
    cfg["output"] = output

    if command == "scenario":
        _validate_scenario(cfg, failures)
    elif command in ("curvature", "geodesic", "jacobi", "ige"):
        _validate_manifold_command(cfg, command, failures)
    elif command == "mre":
        _validate_mre(cfg.get("mre"), "mre", failures)

    if failures:
        raise ConfigError(failures)
    return cfg


def _req(mapping, key, path, failures, types=None):
    if not isinstance(mapping, dict) or key not in mapping:
        failures.append((f"{path}.{key}", "missing required key"))
        return None
    val = mapping[key]
    if types and not isinstance(val, types):
        failures.append((f"{path}.{key}", f"unexpected type {type(val).__name__}"))
        return None
    return val


def _validate_scenario(cfg, failures):
    name = cfg.get("scenario")
    if name not in _SCENARIOS:
        failures.append(("scenario",
                         f"unknown scenario {name!r}; choose from "
                         f"{_SCENARIOS}"))
        return
    params = cfg.get("parameters")
    if params is None:
        params = {}
        cfg["parameters"] = params
    if not isinstance(params, dict):
        failures.append(("parameters", "must be a mapping"))
        return
    if name in ("uncorrelated_gaussian", "macro_correlated", "iho"):
        l = _req(params, "l", "parameters", failures, int)
        if isinstance(l, int) and l < 1:
            failures.append(("parameters.l", "must be at least 1"))
    if name == "macro_correlated":
        r = _req(params, "r", "parameters", failures)
        for i, ri in enumerate(np.atleast_1d(r if r is not None else [])):
            if not 0.0 <= float(ri) < 1.0:
                failures.append((f"parameters.r[{i}]",
                                 f"must lie in [0, 1), got {ri}"))
    if name == "iho" and isinstance(params, dict):
        if "omega" not in params and "omega_total" not in params:
            failures.append(("parameters.omega",
                             "provide omega or omega_total"))
    if name == "spin_chain":
        regime = _req(params, "regime", "parameters", failures, str)
        if regime is not None and regime not in ("regular", "chaotic"):
            failures.append(("parameters.regime",
                             f"must be regular or chaotic, got {regime!r}"))
    if name == "wavepacket":
        r = params.get("r", 0.01)
        if not isinstance(r, (int, float)) or not 0.0 <= r < 1.0:
            failures.append(("parameters.r", f"must lie in [0, 1), got {r}"))
    if name == "custom_manifold":
        _validate_manifold(params.get("manifold"), "parameters.manifold",
                           failures)
        if "theta" not in params:
            failures.append(("parameters.theta", "missing required key"))
    if name == "mre_update":
        _validate_mre(params, "parameters", failures)


def _validate_manifold(spec, path, failures):
    kinds = ("gaussian_diag", "exponential", "wigner_dyson",
             "gaussian_bivariate_corr", "macro_correlated", "product")
    if not isinstance(spec, dict):
        failures.append((path, "missing manifold mapping"))
        return
    kind = spec.get("kind")
    if kind not in kinds:
        failures.append((f"{path}.kind",
                         f"unknown manifold kind {kind!r}; choose from "
                         f"{kinds}"))
        return
    if kind == "gaussian_diag":
        means = _req(spec, "means", path, failures, (list, tuple))
        sigmas = _req(spec, "sigmas", path, failures, (list, tuple))
        if sigmas and any(s <= 0 for s in sigmas):
            failures.append((f"{path}.sigmas", "must be positive"))
        if means is not None and sigmas is not None and \
                len(means) != len(sigmas):
            failures.append((f"{path}.sigmas", "length mismatch with means"))
    elif kind in ("exponential", "wigner_dyson"):
        mu = _req(spec, "mu", path, failures, (int, float))
        if mu is not None and mu <= 0:
            failures.append((f"{path}.mu", "must be positive"))
    elif kind == "gaussian_bivariate_corr":
        for key in ("mu_x", "mu_y", "sigma"):
            _req(spec, key, path, failures, (int, float))
        sig = spec.get("sigma")
        if isinstance(sig, (int, float)) and sig <= 0:
            failures.append((f"{path}.sigma", "must be positive"))
        r = spec.get("r", 0.0)
        if not -1.0 < float(r) < 1.0:
            failures.append((f"{path}.r", f"must lie in (-1, 1), got {r}"))
    elif kind == "macro_correlated":
        r = _req(spec, "r", path, failures, (list, tuple, int, float))
        for i, ri in enumerate(np.atleast_1d(r if r is not None else [])):
            if not 0.0 <= float(ri) < 1.0:
                failures.append((f"{path}.r[{i}]",
                                 f"must lie in [0, 1), got {ri}"))
    elif kind == "product":
        factors = _req(spec, "factors", path, failures, list)
        for i, sub in enumerate(factors or []):
            _validate_manifold(sub, f"{path}.factors[{i}]", failures)


def _validate_manifold_command(cfg, command, failures):
    _validate_manifold(cfg.get("manifold"), "manifold", failures)
    if command == "curvature":
        if "theta" not in cfg:
            failures.append(("theta", "missing required key"))
    else:
        for key in ("theta0", "v0", "tau_end"):
            if key not in cfg:
                failures.append((key, "missing required key"))


def _validate_mre(spec, path, failures):
    if not isinstance(spec, dict):
        failures.append((path, "missing mre problem mapping"))
        return
    prior = spec.get("prior")
    if not isinstance(prior, dict) or "family" not in prior:
        failures.append((f"{path}.prior.family", "missing required key"))
    elif prior["family"] not in ("exponential", "gaussian", "uniform"):
        failures.append((f"{path}.prior.family",
                         f"unknown prior family {prior['family']!r}"))
    cons = spec.get("constraints")
    if not isinstance(cons, list) or not cons:
        failures.append((f"{path}.constraints",
                         "need a nonempty list of constraints"))
        return
    for i, c in enumerate(cons):
        if not isinstance(c, dict):
            failures.append((f"{path}.constraints[{i}]", "must be a mapping"))
            continue
        fname = c.get("f")
        if fname not in ("identity", "square", "abs", "poly"):
            failures.append((f"{path}.constraints[{i}].f",
                             f"unknown constraint function {fname!r}"))
        if "target" not in c:
            failures.append((f"{path}.constraints[{i}].target",
                             "missing required key"))
        if fname == "poly" and not c.get("coefficients"):
            failures.append((f"{path}.constraints[{i}].coefficients",
                             "poly constraint needs coefficients"))


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_metric(spec: dict, source: str = "analytic") -> md.MetricField:
    kind = spec["kind"]
    if kind == "macro_correlated":
        return md.macro_correlated_metric(np.atleast_1d(spec["r"]))
    model = build_model(spec)
    if source == "quadrature":
        return md.fisher_quadrature(model)
    return md.analytic_fisher(model)


def build_model(spec: dict) -> md.StatModel:
    kind = spec["kind"]
    if kind == "gaussian_diag":
        return md.gaussian_diag(spec["means"], spec["sigmas"])
    if kind == "exponential":
        return md.exponential(spec["mu"])
    if kind == "wigner_dyson":
        return md.wigner_dyson(spec["mu"])
    if kind == "gaussian_bivariate_corr":
        return md.gaussian_bivariate_corr(spec["mu_x"], spec["mu_y"],
                                          spec["sigma"], spec.get("r", 0.0))
    if kind == "product":
        return md.product(*[build_model(s) for s in spec["factors"]])
    raise ConfigError([("manifold.kind", f"unknown kind {kind!r}")])


def _build_prior(spec):
    fam = spec["family"]
    if fam == "exponential":
        return md.exponential(spec.get("mu", 1.0)), None
    if fam == "gaussian":
        return md.gaussian_diag([spec.get("mu", 0.0)],
                                [spec.get("sigma", 1.0)]), None
    lo, hi = spec.get("lo", -1.0), spec.get("hi", 1.0)
    return mre.uniform_prior(lo, hi), (lo, hi)


def _build_mre_problem(spec):
    prior, domain = _build_prior(spec["prior"])
    if spec.get("domain") is not None:
        domain = tuple(spec["domain"])
    constraints = [
        (mre.constraint_function(c["f"], c.get("coefficients")),
         float(c["target"]))
        for c in spec["constraints"]]
    return mre.MrEProblem(prior, tuple(constraints), domain=domain)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def emit_csv(path: Path, trace: dict) -> None:
    """One trace file; fixed column order, 17 significant digits, LF."""
    taus = np.asarray(trace["tau"], float)
    columns = [("tau", taus)]
    theta = trace.get("theta")
    if theta is not None:
        theta = np.asarray(theta, float)
        for i in range(theta.shape[1]):
            columns.append((f"theta_{i + 1}", theta[:, i]))
    for key in ("speed", "delta_v", "igc", "ige", "jacobi_intensity"):
        if key in trace and trace[key] is not None:
            columns.append((key, np.asarray(trace[key], float)))
    lines = [",".join(name for name, _ in columns)]
    for k in range(taus.size):
        lines.append(",".join(_fmt(col[k]) for _, col in columns))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def emit(report: dict, traces: dict, outdir: Path, formats) -> list:
    """Write report.json and per-trace CSVs; returns the paths written."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        p = outdir / "report.json"
        p.write_text(json.dumps(report, indent=2, allow_nan=True) + "\n",
                     newline="\n")
        written.append(p)
    if "csv" in formats:
        for name, trace in traces.items():
            p = outdir / f"{name}.csv"
            emit_csv(p, trace)
            written.append(p)
    return written


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _cmd_curvature(cfg):
    metric = build_metric(cfg["manifold"], cfg.get("metric_source",
                                                   "analytic"))
    theta = np.asarray(cfg["theta"], float)
    rep = geo.curvature_report(metric, theta)
    report = sc.ScenarioReport("curvature", {"manifold": cfg["manifold"],
                                             "theta": theta})
    report.observables["ricci_scalar"] = rep.scalar
    report.observables["sectional"] = [
        {"plane": list(pl), "k": k} for pl, k in rep.sectional]
    report.observables["weyl_max_abs"] = rep.weyl_max_abs
    report.observables["ricci_tensor"] = rep.ricci
    report.add("metric_compatibility", rep.metric_compat_residual, 0.0, 1e-8,
               "Levi-Civita connection")
    report.add("scalar_vs_sectional_sum", geo.sectional_sum(metric, theta),
               rep.scalar, 1e-8, "scalar equals the sectional sum")
    return report, {}


def _cmd_geodesic(cfg):
    metric = build_metric(cfg["manifold"], cfg.get("metric_source",
                                                   "analytic"))
    tol = cfg["numerics"]["ode_tol"]
    path = dyn.integrate_geodesic(metric, cfg["theta0"], cfg["v0"],
                                  float(cfg["tau_end"]), tol=tol)
    report = sc.ScenarioReport("geodesic", {k: cfg[k] for k in
                                            ("manifold", "theta0", "v0",
                                             "tau_end")})
    drift = float(np.max(np.abs(path.speed / path.speed[0] - 1.0)))
    report.add("speed_drift", drift, 0.0, 10 * tol, "affine parametrization")
    report.observables["endpoint"] = path.theta[-1]
    trace = {"tau": path.tau_grid, "theta": path.theta, "speed": path.speed}
    return report, {"geodesic": trace}


def _cmd_jacobi(cfg):
    metric = build_metric(cfg["manifold"], cfg.get("metric_source",
                                                   "analytic"))
    tol = cfg["numerics"]["ode_tol"]
    path = dyn.integrate_geodesic(metric, cfg["theta0"], cfg["v0"],
                                  float(cfg["tau_end"]), tol=tol)
    dim = metric.dim
    j0 = np.asarray(cfg.get("j0", np.zeros(dim)), float)
    if "dj0" in cfg:
        dj0 = np.asarray(cfg["dj0"], float)
    else:
        g = metric.eval(np.asarray(cfg["theta0"], float))
        e = np.zeros(dim)
        e[min(1, dim - 1)] = 1.0
        v = np.asarray(cfg["v0"], float)
        e -= (v @ g @ e) / (v @ g @ v) * v
        dj0 = e / np.sqrt(e @ g @ e)
    jac = dyn.integrate_jacobi(metric, path, j0, dj0)
    report = sc.ScenarioReport("jacobi", {k: cfg[k] for k in
                                          ("manifold", "theta0", "v0",
                                           "tau_end")})
    report.inputs["j0"] = j0
    report.inputs["dj0"] = dj0
    est = dyn.lyapunov_estimate(jac)
    report.observables["lyapunov_estimate"] = est.value
    report.observables["final_intensity"] = jac.intensity[-1]
    trace = {"tau": path.tau_grid, "theta": path.theta, "speed": path.speed,
             "jacobi_intensity": jac.intensity}
    return report, {"jacobi": trace}


def _cmd_ige(cfg):
    metric = build_metric(cfg["manifold"], cfg.get("metric_source",
                                                   "analytic"))
    num = cfg["numerics"]
    path = dyn.integrate_geodesic(metric, cfg["theta0"], cfg["v0"],
                                  float(cfg["tau_end"]), tol=num["ode_tol"],
                                  n_out=int(cfg.get("n_out", 257)))
    trace = cx.complexity_trace(metric, path,
                                rel_tol=max(num["quad_tol"], 1e-10))
    report = sc.ScenarioReport("ige", {k: cfg[k] for k in
                                       ("manifold", "theta0", "v0",
                                        "tau_end")})
    form = cfg.get("fit_form", "linear")
    fit = cx.fit_asymptotics(trace, form, min_points=16,
                             fit_window_fraction=num["fit_window_fraction"])
    report.observables["fit"] = {"form": fit.form, "params": list(fit.params),
                                 "r2": fit.r2, "window": list(fit.window)}
    report.add("fit_r2", fit.r2, 1.0, 0.5, "goodness of the requested form",
               note="informational quality gate")
    out = {"tau": trace.tau_grid, "theta": path.theta, "speed": path.speed,
           "delta_v": trace.delta_v, "igc": trace.igc, "ige": trace.ige}
    return report, {"ige": out}


def _cmd_mre(cfg):
    problem = _build_mre_problem(cfg["mre"])
    tol = float(cfg.get("tol", 1e-12))
    result = mre.solve_multiplier(problem, tol=tol)
    report = sc.ScenarioReport("mre", {"mre": cfg["mre"]})
    report.observables["beta"] = result.beta
    report.observables["log_z"] = result.log_z
    report.observables["achieved"] = result.achieved
    report.observables["objective"] = result.objective
    targets = np.array([F for _, F in problem.constraints])
    report.add("achieved_moments", float(np.max(np.abs(result.achieved
                                                       - targets))),
               0.0, max(tol * 10, 1e-10), "constraint satisfaction")
    report.add("posterior_mass", result.posterior.mass(), 1.0, 1e-8,
               "normalization")
    report.observables["posterior_grid"] = {
        "x": result.posterior.x[::16], "p": result.posterior.p[::16]}
    return report, {}


def _run_named_scenario(cfg):
    name = cfg["scenario"]
    params = cfg["parameters"]
    num = cfg["numerics"]
    seed = num["seed"]
    quad_tol = max(num["quad_tol"], 1e-10)
    common = dict(ode_tol=num["ode_tol"], quad_tol=quad_tol, seed=seed)
    if name == "uncorrelated_gaussian":
        return sc.run_uncorrelated_gaussian(
            params["l"], theta0=params.get("theta0"), v0=params.get("v0"),
            tau_end=params.get("tau_end"), **common)
    if name == "macro_correlated":
        return sc.run_macro_correlated(
            params["l"], params["r"], theta0=params.get("theta0"),
            v0=params.get("v0"), tau_end=params.get("tau_end"), **common)
    if name == "iho":
        kw = {"tau_end": params["tau_end"]} if "tau_end" in params else {}
        iho = sc.IHOConfig(params["l"],
                           omega=tuple(params["omega"])
                           if "omega" in params else None,
                           omega_total=params.get("omega_total"),
                           xi=params.get("xi", 1.0), **kw)
        return sc.run_iho(iho, quad_tol=quad_tol)
    if name == "spin_chain":
        return sc.run_spin_chain(
            params["regime"], theta0=params.get("theta0"),
            v0=params.get("v0"), tau_end=params.get("tau_end"),
            **common)
    if name == "wavepacket":
        scfg = sc.ScatterConfig(
            p0=params.get("p0", 1.0), sigma0=params.get("sigma0", 0.1),
            tau0=params.get("tau0", 1.0),
            r0_separation=params.get("R0", 10.0),
            potential_range=params.get("L", 0.1),
            mu_mass=params.get("mu_mass", 0.5), r=params.get("r", 0.01))
        return sc.run_wavepacket(scfg,
                                 r_sweep=tuple(params.get("r_sweep",
                                                          (0.1, 0.3, 0.5))),
                                 **common)
    if name == "custom_manifold":
        sub = {"manifold": params["manifold"], "theta": params["theta"],
               "numerics": num}
        report, _ = _cmd_curvature(sub)
        return report
    if name == "mre_update":
        report, _ = _cmd_mre({"mre": params, "numerics": num})
        return report
    raise ConfigError([("scenario", f"unknown scenario {name!r}")])


def _cmd_scenario(cfg):
    report = _run_named_scenario(cfg)
    traces = getattr(report, "traces", {})
    return report, traces


_COMMANDS = {
    "curvature": _cmd_curvature,
    "geodesic": _cmd_geodesic,
    "jacobi": _cmd_jacobi,
    "ige": _cmd_ige,
    "mre": _cmd_mre,
    "scenario": _cmd_scenario,
}


def run(cfg: dict, command: str) -> int:
    """Execute a validated config; returns the process exit status."""
    report, traces = _COMMANDS[command](cfg)
    outdir = Path(cfg["output"]["directory"])
    payload = report.to_dict()
    payload["command"] = command
    payload["seed"] = cfg["numerics"]["seed"]
    emit(payload, traces, outdir, cfg["output"]["formats"])
    if not report.passed:
        sys.stderr.write(json.dumps({"failures": report.failures()},
                                    indent=2) + "\n")
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="igac",
        description="Fisher-Rao geometry, geodesic complexity and maximum "
                    "relative entropy updates")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="YAML config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--format", default=None, choices=_FORMATS,
                        help="restrict output to one format")
    parser.add_argument("--seed", type=int, default=None,
                        help="override numerics.seed")
    parser.add_argument("--tol", type=float, default=None,
                        help="override numerics.ode_tol")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        sys.stderr.write(f"cannot read config: {exc}\n")
        return 1
    try:
        cfg = parse_config(text, args.command)
        if args.out is not None:
            cfg["output"]["directory"] = args.out
        if args.format is not None:
            cfg["output"]["formats"] = [args.format]
        if args.seed is not None:
            cfg["numerics"]["seed"] = args.seed
        if args.tol is not None:
            cfg["numerics"]["ode_tol"] = args.tol
        return run(cfg, args.command)
    except ConfigError as exc:
        for path, msg in exc.failures:
            sys.stderr.write(f"config error at {path}: {msg}\n")
        return 1
    except IgacError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
