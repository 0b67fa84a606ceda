"""Families, scores and Fisher metrics against hand-derived oracles."""

import numpy as np
import pytest

from igac import models as md
from igac.errors import DomainError

from conftest import FAMILIES, fd_score, philox, random_micro_point, \
    random_model


def test_log_density_standard_normal_at_mean():
    m = md.gaussian_diag([0.0], [1.0])
    assert md.log_density(m, [0.0]) == pytest.approx(-0.5 * np.log(2 * np.pi),
                                                     abs=1e-12)


def test_log_density_exponential_unit_mean_at_origin():
    assert md.log_density(md.exponential(1.0), [0.0]) == 0.0


def test_log_density_bivariate_uncorrelated_at_means():
    # means (k0, -k0) = (1, -1), sigma 1, r = 0
    m = md.gaussian_bivariate_corr(1.0, -1.0, 1.0, r=0.0)
    assert md.log_density(m, [1.0, -1.0]) == pytest.approx(-np.log(2 * np.pi),
                                                           abs=1e-12)


def test_score_gaussian_hand_values():
    m = md.gaussian_diag([0.0], [1.0])
    # d/dmu ln p = (x - mu)/s^2, d/ds ln p = (x - mu)^2/s^3 - 1/s
    assert md.score(m, [0.0]) == pytest.approx([0.0, -1.0], abs=1e-14)
    assert md.score(m, [1.0]) == pytest.approx([1.0, 0.0], abs=1e-14)


@pytest.mark.parametrize("family", FAMILIES)
def test_score_matches_finite_differences(family):
    rng = philox(11)
    for _ in range(6):
        m = random_model(rng, family)
        x = random_micro_point(rng, m)
        assert md.score(m, x) == pytest.approx(fd_score(m, x), abs=1e-6)


def test_exponential_domain_rejection():
    with pytest.raises(DomainError):
        md.log_density(md.exponential(1.0), [-0.5])
    with pytest.raises(DomainError):
        md.score(md.wigner_dyson(1.0), [0.0])


def test_constructor_invariants():
    with pytest.raises(ValueError):
        md.gaussian_diag([0.0], [0.0])
    with pytest.raises(ValueError):
        md.gaussian_bivariate_corr(0.0, 0.0, 1.0, r=1.0)
    with pytest.raises(ValueError):
        md.exponential(-1.0)
    with pytest.raises(ValueError):
        md.macro_correlated_metric([0.5, 1.0])


def test_analytic_fisher_gaussian_pair():
    g = md.analytic_fisher(md.gaussian_diag([0.0], [2.0]))
    assert g.eval([0.0, 2.0]) == pytest.approx(np.diag([0.25, 0.5]))


def test_analytic_fisher_wigner_dyson():
    g = md.analytic_fisher(md.wigner_dyson(1.0))
    assert g.eval([1.0]) == pytest.approx(np.array([[4.0]]))


def test_analytic_fisher_bivariate_block():
    g = md.analytic_fisher(md.gaussian_bivariate_corr(0.0, 0.0, 1.0, r=0.5))
    expect = np.array([[4 / 3, -2 / 3, 0.0],
                       [-2 / 3, 4 / 3, 0.0],
                       [0.0, 0.0, 4.0]])
    assert g.eval([0.0, 0.0, 1.0]) == pytest.approx(expect, abs=1e-12)


def test_macro_correlated_pair_metric():
    g = md.macro_correlated_metric([0.3])
    s = 1.7
    assert g.eval([0.2, s]) == pytest.approx(
        np.array([[1.0, 0.3], [0.3, 2.0]]) / s ** 2)


@pytest.mark.parametrize("family", FAMILIES)
def test_quadrature_matches_analytic(family):
    rng = philox(7)
    for _ in range(3):
        m = random_model(rng, family)
        ga = md.analytic_fisher(m).eval(m.theta)
        gq = md.fisher_quadrature(m).eval(m.theta)
        assert np.max(np.abs(ga - gq)) < 1e-6


def test_quadrature_examples():
    m = md.gaussian_diag([0.0], [1.0])
    assert md.fisher_quadrature(m).eval([0.0, 1.0]) == pytest.approx(
        np.diag([1.0, 2.0]), abs=1e-6)
    m = md.exponential(3.0)
    assert md.fisher_quadrature(m).eval([3.0]) == pytest.approx(
        np.array([[1.0 / 9.0]]), abs=1e-6)
    m = md.gaussian_bivariate_corr(0.0, 0.0, 1.0, r=0.3)
    assert md.fisher_quadrature(m).eval(m.theta) == pytest.approx(
        md.analytic_fisher(m).eval(m.theta), abs=1e-6)


@pytest.mark.parametrize("family", FAMILIES)
def test_normalization_and_score_identity(family):
    rng = philox(23)
    for _ in range(5):
        m = random_model(rng, family)
        assert md.normalization_residual(m) < 1e-8
        assert md.score_expectation_residual(m) < 1e-8


@pytest.mark.parametrize("family", FAMILIES)
def test_metric_symmetric_positive_definite(family):
    rng = philox(31)
    for _ in range(5):
        m = random_model(rng, family)
        g = md.analytic_fisher(m).eval(m.theta)
        assert np.max(np.abs(g - g.T)) < 1e-12
        assert np.min(np.linalg.eigvalsh(g)) > 0
        assert md.analytic_fisher(m).sqrt_det(m.theta) > 0


def test_product_metric_block_diagonal():
    m = md.product(md.exponential(1.3),
                   md.gaussian_diag([0.2, -0.1], [1.0, 0.7]))
    g = md.analytic_fisher(m)
    mat = g.eval(m.theta)
    assert g.blocks == ((0,), (1, 2), (3, 4))
    for i, j in [(0, 1), (0, 3), (1, 3), (2, 4)]:
        assert mat[i, j] == 0.0


def test_fd_jet_matches_analytic_jet():
    m = md.gaussian_bivariate_corr(0.1, -0.2, 1.4, r=0.4)
    analytic = md.analytic_fisher(m)
    fd = md.MetricField(3, analytic.eval, jet_fn=None,
                        source="finite_difference",
                        scale_coords=analytic.scale_coords)
    ga, dga = analytic.jet(m.theta)
    gf, dgf = fd.jet(m.theta)
    assert np.max(np.abs(ga - gf)) < 1e-12
    assert np.max(np.abs(dga - dgf)) < 1e-8


def test_with_theta_rebinds_and_validates():
    m = md.gaussian_diag([0.0], [1.0])
    m2 = md.with_theta(m, [0.5, 2.0])
    assert md.log_density(m2, [0.5]) == pytest.approx(
        -0.5 * np.log(2 * np.pi) - np.log(2.0))
    with pytest.raises(ValueError):
        md.with_theta(m, [0.0, -1.0])


def test_batched_metric_eval():
    g = md.analytic_fisher(md.gaussian_diag([0.0], [1.0]))
    pts = np.array([[0.0, 1.0], [1.0, 2.0]])
    out = g.eval(pts)
    assert out.shape == (2, 2, 2)
    assert out[1] == pytest.approx(np.diag([0.25, 0.5]))


def test_quadrature_cap_reports_estimate():
    from igac.errors import QuadratureAccuracyError

    m = md.gaussian_diag([0.0], [1.0])
    metric = md.fisher_quadrature(m, nodes=4, max_nodes=4)
    with pytest.raises(QuadratureAccuracyError) as err:
        metric.eval(m.theta)
    assert err.value.estimate is not None
    assert err.value.estimate.shape == (2, 2)
