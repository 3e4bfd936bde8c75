import math

import numpy as np
import pytest

from devbound.errors import InvalidArgumentError
from devbound.gmm import (GmmParams, em_fit, em_restarts, is_feasible_mog,
                          log_density, mean_loglik, mixture_cost,
                          mixture_cost_many, restrict, spectrum_project)
from devbound.distributions import draw, gmm_ground_truth
from devbound.linalg import jacobi_eigh


def _rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_log_density_examples():
    assert log_density((np.zeros(1), np.eye(1)), [0.0]) == pytest.approx(
        -math.log(math.sqrt(2.0 * math.pi)))
    s = 1.0 / (2.0 * math.pi)
    assert log_density((np.zeros(2), s * np.eye(2)), [0.0, 0.0]) == pytest.approx(0.0)
    cov = np.array([[2.0, 0.3], [0.3, 1.0]])
    want = -0.5 * math.log((2.0 * math.pi) ** 2 * np.linalg.det(cov))
    assert log_density((np.ones(2), cov), [1.0, 1.0]) == pytest.approx(want)
    with pytest.raises(InvalidArgumentError):
        log_density((np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]])), [0.0, 0.0])


def test_mixture_cost_examples():
    g1 = GmmParams(weights=[1.0], means=[[0.0]], covariances=[np.eye(1)],
                   sigma1=0.5, sigma2=2.0)
    assert mixture_cost(g1, [0.3]) == pytest.approx(
        log_density((np.zeros(1), np.eye(1)), [0.3]))
    twin = GmmParams(weights=[0.5, 0.5], means=[[0.0], [0.0]],
                     covariances=[np.eye(1), np.eye(1)], sigma1=0.5, sigma2=2.0)
    assert mixture_cost(twin, [0.7]) == pytest.approx(mixture_cost(g1, [0.7]))
    far = GmmParams(weights=[0.5, 0.5], means=[[0.0], [10.0]],
                    covariances=[np.eye(1), np.eye(1)], sigma1=0.5, sigma2=2.0)
    assert mixture_cost(far, [0.0]) == pytest.approx(-1.612, abs=5e-4)


def test_mean_loglik_examples():
    g1 = GmmParams(weights=[1.0], means=[[0.0]], covariances=[np.eye(1)],
                   sigma1=0.5, sigma2=2.0)
    assert mean_loglik(g1, [[0.0]]) == pytest.approx(-math.log(math.sqrt(2 * math.pi)))
    assert mean_loglik(g1, [[-1.0], [1.0]]) == pytest.approx(
        -math.log(math.sqrt(2 * math.pi)) - 0.5)
    # duplicated sample leaves the mean unchanged
    assert mean_loglik(g1, [[0.4], [0.4]]) == pytest.approx(mean_loglik(g1, [[0.4]]))


def test_feasibility_boundary_and_spectrum():
    sample = [[-1.0], [1.0]]
    g1 = GmmParams(weights=[1.0], means=[[0.0]], covariances=[np.eye(1)],
                   sigma1=0.5, sigma2=2.0)
    c = mean_loglik(g1, sample)
    assert is_feasible_mog(g1, sample, c)          # boundary inclusive
    assert not is_feasible_mog(g1, sample, c - 1e-9)
    assert is_feasible_mog(g1, sample, math.inf)
    # covariance spectrum outside the class bounds => infeasible
    wide = GmmParams(weights=[1.0], means=[[0.0]],
                     covariances=[0.25 * np.eye(1)], sigma1=0.2, sigma2=2.0)
    assert is_feasible_mog(wide, sample, math.inf)
    assert not is_feasible_mog(wide, sample, math.inf, sigma1=0.5)
    assert not is_feasible_mog(g1, sample, math.inf, sigma2=0.9)
    assert not is_feasible_mog(g1, sample, math.inf, k=0)


def test_restrict_examples():
    params = GmmParams(weights=[0.6, 0.4], means=[[0.0], [10.0]],
                       covariances=[np.eye(1), np.eye(1)], sigma1=0.5, sigma2=2.0)
    same = restrict(params, (np.zeros(1), 100.0))
    assert same.n_components == 2 and same.mass == pytest.approx(1.0)
    part = restrict(params, (np.zeros(1), 5.0))
    assert part.n_components == 1
    assert part.mass == pytest.approx(0.6)   # not renormalized
    empty = restrict(params, (np.array([3.0]), 0.0))
    assert empty.n_components == 0 and empty.partial


def test_restrict_monotone_in_components():
    params = GmmParams(weights=[0.6, 0.4], means=[[0.0], [4.0]],
                       covariances=[np.eye(1), np.eye(1)], sigma1=0.5, sigma2=2.0)
    part = restrict(params, (np.zeros(1), 1.0))
    xs = np.linspace(-3, 8, 40)[:, None]
    full_vals = mixture_cost_many(params, xs)
    part_vals = mixture_cost_many(part, xs)
    assert np.all(part_vals <= full_vals + 1e-12)


def test_spectrum_project_examples():
    out = spectrum_project(np.diag([0.5, 3.0]), 1.0, 2.0)
    assert np.allclose(out, np.diag([1.0, 2.0]))
    stay = np.array([[1.5, 0.1], [0.1, 1.2]])
    assert np.allclose(spectrum_project(stay, 1.0, 2.0), stay)
    rot = _rot(math.pi / 4.0)
    spun = rot @ np.diag([0.5, 3.0]) @ rot.T
    want = rot @ np.diag([1.0, 2.0]) @ rot.T
    assert np.allclose(spectrum_project(spun, 1.0, 2.0), want, atol=1e-10)
    with pytest.raises(InvalidArgumentError):
        spectrum_project(np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0, 2.0)


def test_em_closed_forms():
    fitted = em_fit(np.array([[-1.0], [1.0]]), 1, 1e-3, 10.0, restarts=2, seed=0)
    assert fitted.means[0, 0] == pytest.approx(0.0)
    assert fitted.covariances[0, 0, 0] == pytest.approx(1.0)

    rng = np.random.default_rng(11)
    sample = rng.standard_normal((300, 2)) * 0.7
    one = em_fit(sample, 1, 0.25, 4.0, restarts=2, seed=1)
    assert np.allclose(one.means[0], sample.mean(axis=0), atol=1e-9)
    proj = spectrum_project(np.cov(sample.T, ddof=0), 0.25, 4.0)
    assert np.allclose(one.covariances[0], proj, atol=1e-9)


def test_em_recovers_separated_means():
    truth = GmmParams(weights=[0.5, 0.5], means=[[-4.0, 0.0], [4.0, 0.0]],
                      covariances=[np.eye(2), np.eye(2)], sigma1=0.25, sigma2=4.0)
    xs = draw(gmm_ground_truth(truth), 600, 21)
    fitted = em_fit(xs, 2, 0.25, 4.0, restarts=4, seed=2)
    got = sorted(fitted.means[:, 0].tolist())
    assert abs(got[0] + 4.0) < 0.5 and abs(got[1] - 4.0) < 0.5


def test_em_spectrum_invariant_and_monotonicity_caveat():
    rng = np.random.default_rng(13)
    sample = np.vstack([rng.standard_normal((100, 1)) * 3.0,
                        rng.standard_normal((100, 1)) * 0.05 + 6.0])
    runs = em_restarts(sample, 2, 0.5, 1.5, restarts=3, seed=3)
    for params, _, history, flags in runs:
        for cov in params.covariances:
            w, _ = jacobi_eigh(cov)
            assert w[0] >= 0.5 - 1e-9 and w[-1] <= 1.5 + 1e-9
        # log-likelihood non-decreasing whenever no projection/reseed fired
        for i in range(1, len(flags)):
            if flags[i] == "plain" and flags[i - 1] == "plain":
                assert history[i + 1] >= history[i] - 1e-9


def test_em_discard_rule():
    rng = np.random.default_rng(16)
    # variance well above sigma2 forces the covariance update out of range
    sample = rng.standard_normal((150, 1)) * 4.0
    fitted = em_fit(sample, 1, 0.5, 1.5, restarts=2, seed=4,
                    update_rule="discard")
    w, _ = jacobi_eigh(fitted.covariances[0])
    assert 0.5 - 1e-9 <= w[0] <= 1.5 + 1e-9
    with pytest.raises(InvalidArgumentError):
        em_fit(sample, 1, 0.5, 1.5, update_rule="clip")


def test_em_deterministic():
    rng = np.random.default_rng(14)
    sample = rng.standard_normal((120, 2))
    a = em_fit(sample, 2, 0.25, 4.0, restarts=3, seed=5)
    b = em_fit(sample, 2, 0.25, 4.0, restarts=3, seed=5)
    assert np.array_equal(a.means, b.means)
    assert np.array_equal(a.covariances, b.covariances)
    assert np.array_equal(a.weights, b.weights)


def test_upper_density_bound():
    sigma1 = 0.3
    cap = math.log((2.0 * math.pi * sigma1) ** (-1.0))
    params = GmmParams(weights=[0.5, 0.5], means=[[0.0, 0.0], [2.0, 1.0]],
                       covariances=[np.eye(2) * 0.5, np.eye(2) * 0.9],
                       sigma1=sigma1, sigma2=1.0)
    rng = np.random.default_rng(15)
    xs = rng.normal(size=(500, 2)) * 3.0
    assert np.all(mixture_cost_many(params, xs) <= cap + 1e-12)


def test_gmm_params_validation():
    with pytest.raises(InvalidArgumentError):
        GmmParams(weights=[0.5, 0.4], means=[[0.0], [1.0]],
                  covariances=[np.eye(1), np.eye(1)], sigma1=0.5, sigma2=2.0)
    with pytest.raises(InvalidArgumentError):
        GmmParams(weights=[1.0], means=[[0.0]], covariances=[3.0 * np.eye(1)],
                  sigma1=0.5, sigma2=2.0)
    part = GmmParams(weights=[0.4], means=[[0.0]], covariances=[np.eye(1)],
                     sigma1=0.5, sigma2=2.0, partial=True)
    assert part.mass == pytest.approx(0.4)
    with pytest.raises(InvalidArgumentError):
        mixture_cost(GmmParams(weights=np.zeros(0), means=np.zeros((0, 1)),
                               covariances=np.zeros((0, 1, 1)), sigma1=0.5,
                               sigma2=2.0, partial=True), [0.0])
