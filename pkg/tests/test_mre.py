"""Multiplier solves against closed-form tilts, posterior optimality by a
perturbation oracle, and the error taxonomy."""

import numpy as np
import pytest

from igac import models as md
from igac import mre
from igac.errors import BracketingError, DomainError, \
    InfeasibleConstraintError

from conftest import philox


def test_tilted_exponential_beta():
    # e^-x tilted by e^(beta x) has mean 1/(1-beta); mean 2 -> beta = 1/2
    res = mre.solve_multiplier(
        mre.MrEProblem(md.exponential(1.0), ((lambda x: x, 2.0),)),
        tol=1e-13)
    assert res.beta[0] == pytest.approx(0.5, abs=1e-10)
    assert res.achieved[0] == pytest.approx(2.0, abs=1e-12)
    assert res.posterior.mass() == pytest.approx(1.0, abs=1e-8)
    # objective S = ln Z - beta F = ln 2 - 1
    assert res.objective == pytest.approx(np.log(2.0) - 1.0, abs=1e-10)


def test_tilted_gaussian_beta():
    # complete the square: N(0,1) e^(beta x) is N(beta, 1); mean 1 -> beta = 1
    res = mre.solve_multiplier(
        mre.MrEProblem(md.gaussian_diag([0.0], [1.0]), ((lambda x: x, 1.0),)),
        tol=1e-13)
    assert res.beta[0] == pytest.approx(1.0, abs=1e-10)
    post = res.posterior
    oracle = np.exp(-(post.x - 1.0) ** 2 / 2) / np.sqrt(2 * np.pi)
    assert np.max(np.abs(post.p - oracle)) < 1e-10


def test_zero_update_fixed_point():
    res = mre.solve_multiplier(
        mre.MrEProblem(md.exponential(1.3), ((lambda x: x, 1.3),)),
        tol=1e-13)
    assert abs(res.beta[0]) < 1e-12
    assert res.objective == pytest.approx(0.0, abs=1e-12)


def test_two_moment_update_standard_normal():
    res = mre.update(mre.uniform_prior(-20.0, 20.0), 0.0, 1.0)
    x = res.posterior.x
    oracle = np.exp(-x ** 2 / 2) / np.sqrt(2 * np.pi)
    assert np.max(np.abs(res.posterior.p - oracle)) < 1e-6
    assert res.beta[1] == pytest.approx(-0.5, abs=1e-10)


def test_two_moment_update_shifted():
    mu0, s0 = 1.5, 0.7
    res = mre.update(mre.uniform_prior(-20.0, 20.0), mu0, mu0 ** 2 + s0 ** 2)
    m1 = res.posterior.moment(lambda t: t)
    m2 = res.posterior.moment(lambda t: t * t)
    assert m1 == pytest.approx(mu0, abs=1e-6)
    assert np.sqrt(m2 - m1 ** 2) == pytest.approx(s0, abs=1e-6)


def test_degenerate_variance_rejected():
    with pytest.raises(InfeasibleConstraintError):
        mre.update(mre.uniform_prior(-20.0, 20.0), 1.0, 1.0)


def test_divergent_tilt_rejected():
    # a linear tilt of the exponential tail diverges once beta reaches 1
    with pytest.raises(InfeasibleConstraintError):
        mre.solve_multiplier(
            mre.MrEProblem(md.exponential(1.0), ((lambda x: x, 60.0),)))


def test_bracketing_error_for_unreachable_target():
    # E[tanh] is confined to (-1, 1); the residual never changes sign
    with pytest.raises(BracketingError):
        mre.solve_multiplier(
            mre.MrEProblem(md.gaussian_diag([0.0], [1.0]),
                           ((np.tanh, 2.0),)))


def test_relative_entropy_values():
    p = md.gaussian_diag([1.0], [1.0])
    q = md.gaussian_diag([0.0], [1.0])
    assert mre.relative_entropy(p, p) == pytest.approx(0.0, abs=1e-12)
    assert mre.relative_entropy(p, q) == pytest.approx(-0.5, abs=1e-10)
    assert mre.relative_entropy(q, p) == pytest.approx(-0.5, abs=1e-10)


def test_relative_entropy_support_violation():
    wide = mre.uniform_prior(-2.0, 2.0)
    narrow = mre.uniform_prior(-1.0, 1.0)
    with pytest.raises(DomainError):
        mre.relative_entropy(wide, narrow, domain=(-2.0, 2.0))


def _constrained_perturbation(post, fvals, rng, eps=0.05):
    """A density satisfying the same constraints exactly, built by a random
    bounded perturbation of the posterior projected back onto the constraint
    manifold (constraints are linear in the density)."""
    x, w, p = post.x, post.w, post.p
    h = np.sin(rng.uniform(0.5, 3.0) * x + rng.uniform(0, 2 * np.pi))
    basis = np.column_stack([np.ones_like(x)] + [f for f in fvals.T])
    # solve for coefficients that cancel the normalization/moment shifts
    shift = basis.T @ (w * p * h)
    gram = basis.T @ ((w * p)[:, None] * basis)
    coef = np.linalg.solve(gram, shift)
    h_proj = h - basis @ coef
    q = p * (1.0 + eps * h_proj / max(1.0, np.max(np.abs(h_proj))))
    assert np.all(q >= 0)
    return q


def test_posterior_optimality_under_perturbations():
    problem = mre.MrEProblem(md.exponential(1.0), ((lambda x: x, 2.0),))
    res = mre.solve_multiplier(problem, tol=1e-13)
    post = res.posterior
    x, w = post.x, post.w
    lnp_old = np.log(np.maximum(np.exp(-x), 1e-300))
    fvals = x[:, None]
    rng = philox(99)
    wins = 0
    for _ in range(20):
        q = _constrained_perturbation(post, fvals, rng)
        # constraints hold for the perturbed density
        assert w @ q == pytest.approx(1.0, abs=1e-10)
        assert w @ (q * x) == pytest.approx(2.0, abs=1e-9)
        support = q > 0
        s_q = -float(w[support] @ (q[support]
                                   * (np.log(q[support])
                                      - lnp_old[support])))
        if s_q <= res.objective + 1e-9:
            wins += 1
    assert wins == 20


def test_idempotent_update():
    res = mre.solve_multiplier(
        mre.MrEProblem(md.exponential(1.0), ((lambda x: x, 2.0),)),
        tol=1e-13)
    again = mre.solve_multiplier(
        mre.MrEProblem(res.posterior, ((lambda x: x, 2.0),)), tol=1e-13)
    assert abs(again.beta[0]) < 1e-10


def test_multi_constraint_newton_matches_scalar_chain():
    # mean and second moment of a Gaussian prior: posterior N(1, 1/3)
    prior = md.gaussian_diag([0.0], [1.0])
    res = mre.update(prior, 1.0, 1.0 + 1.0 / 3.0)
    m1 = res.posterior.moment(lambda t: t)
    m2 = res.posterior.moment(lambda t: t * t)
    assert m1 == pytest.approx(1.0, abs=1e-10)
    assert m2 == pytest.approx(4.0 / 3.0, abs=1e-10)
    # N(0,1) e^{b1 x + b2 x^2} = N(b1/(1-2 b2), 1/(1-2 b2))
    b1, b2 = res.beta
    assert 1.0 / (1.0 - 2.0 * b2) == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert b1 / (1.0 - 2.0 * b2) == pytest.approx(1.0, abs=1e-9)


def test_constraint_function_names():
    x = np.array([1.0, -2.0])
    assert mre.constraint_function("identity")(x) == pytest.approx(x)
    assert mre.constraint_function("square")(x) == pytest.approx(x ** 2)
    assert mre.constraint_function("abs")(x) == pytest.approx(np.abs(x))
    poly = mre.constraint_function("poly", [1.0, 0.0, 2.0])
    assert poly(x) == pytest.approx(1.0 + 2.0 * x ** 2)
    with pytest.raises(ValueError):
        mre.constraint_function("cube")
    with pytest.raises(ValueError):
        mre.constraint_function("poly")


def test_problem_validation():
    with pytest.raises(ValueError):
        mre.MrEProblem(md.exponential(1.0), ((lambda x: x, np.inf),))
    # un-normalized prior on the working domain
    bad = mre.TabulatedDensity(np.linspace(0, 1, 128),
                               np.full(128, 1.0 / 128), np.full(128, 2.0))
    with pytest.raises(ValueError):
        mre.solve_multiplier(mre.MrEProblem(bad, ((lambda x: x, 0.5),)))
