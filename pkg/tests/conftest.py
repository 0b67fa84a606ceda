"""Shared fixtures: counter-based RNG streams and finite-difference oracles."""

import numpy as np
import pytest

from igac import models as md


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def fd_score(model, x, step=1e-5):
    """Independent oracle for the score: central differences of log_density
    over theta with one Richardson level."""
    x = np.asarray(x, float)
    theta = np.asarray(model.theta, float)
    out = np.empty(model.param_dim)
    for a in range(model.param_dim):
        h = step * max(1.0, abs(theta[a]))

        def val(t, a=a):
            th = np.array(theta)
            th[a] += t
            return md.log_density(md.with_theta(model, th), x)

        d1 = (val(h) - val(-h)) / (2 * h)
        d2 = (val(h / 2) - val(-h / 2)) / h
        out[a] = (4 * d2 - d1) / 3
    return out


def random_model(rng, family: str):
    """A random in-chart model of the requested family."""
    if family == "gaussian_diag":
        l = int(rng.integers(1, 4))
        return md.gaussian_diag(rng.normal(size=l),
                                rng.uniform(0.4, 2.5, size=l))
    if family == "exponential":
        return md.exponential(rng.uniform(0.3, 3.0))
    if family == "wigner_dyson":
        return md.wigner_dyson(rng.uniform(0.3, 3.0))
    if family == "gaussian_bivariate_corr":
        return md.gaussian_bivariate_corr(rng.normal(), rng.normal(),
                                          rng.uniform(0.4, 2.0),
                                          r=rng.uniform(-0.8, 0.8))
    if family == "product":
        return md.product(md.exponential(rng.uniform(0.5, 2.0)),
                          md.gaussian_diag([rng.normal()],
                                           [rng.uniform(0.5, 1.5)]))
    raise ValueError(family)


def random_micro_point(rng, model):
    x = np.empty(model.micro_dim)
    for i, (lo, _hi) in enumerate(model.micro_bounds()):
        x[i] = rng.uniform(0.05, 3.0) if lo == 0.0 else rng.normal()
    return x


FAMILIES = ("gaussian_diag", "exponential", "wigner_dyson",
            "gaussian_bivariate_corr", "product")


@pytest.fixture
def rng():
    return philox(20240817)
