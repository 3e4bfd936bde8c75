import numpy as np
import pytest

from devbound.bregman import (CenterSet, divergence, hard_cost, is_feasible,
                              lloyd_fit, lloyd_restarts, mean_cost,
                              quadratic_form, squared_euclidean)
from devbound.errors import InvalidArgumentError
from devbound.moments import reference_cost


def test_divergence_examples():
    spec = squared_euclidean()
    assert divergence(spec, [1.0, 2.0], [1.0, 2.0]) == 0.0
    assert divergence(spec, [1.0, 0.0], [0.0, 1.0]) == 2.0
    qf = quadratic_form(np.diag([1.0, 2.0]))
    assert divergence(qf, [1.0, 1.0], [0.0, 0.0]) == pytest.approx(3.0)


def test_quadratic_form_constants():
    qf = quadratic_form(np.diag([1.0, 2.0]))
    assert qf.r1 == pytest.approx(2.0)
    assert qf.r2 == pytest.approx(4.0)
    with pytest.raises(InvalidArgumentError):
        quadratic_form(np.diag([1.0, -1.0]))


def test_hard_cost_examples():
    spec = squared_euclidean()
    cs = CenterSet(centers=[[0.0, 0.0], [3.0, 0.0]], k=2)
    assert hard_cost(spec, cs, [1.0, 0.0]) == 1.0
    assert hard_cost(spec, cs, [3.0, 0.0]) == 0.0
    assert hard_cost(spec, CenterSet(centers=[[0.0]], k=1), [2.0]) == 4.0


def test_mean_cost_examples():
    spec = squared_euclidean()
    sample = [[0.0], [2.0]]
    assert mean_cost(spec, CenterSet(centers=[[1.0]], k=1), sample) == 1.0
    assert mean_cost(spec, CenterSet(centers=[[0.0], [2.0]], k=2), sample) == 0.0
    with pytest.raises(InvalidArgumentError):
        mean_cost(spec, CenterSet(centers=[[0.0]], k=1), [])


def test_feasibility_matches_reference_cost_exactly():
    rng = np.random.default_rng(5)
    sample = rng.standard_normal((257, 2))
    spec = squared_euclidean()
    c = reference_cost(sample)
    mean_set = CenterSet(centers=sample.mean(axis=0)[None, :], k=1)
    assert mean_cost(spec, mean_set, sample) == c
    assert is_feasible(spec, mean_set, sample, c)
    assert not is_feasible(spec, mean_set, sample, -1.0)
    assert is_feasible(spec, CenterSet(centers=sample[:4], k=4), sample[:4], 0.0)


def test_lloyd_examples():
    spec = squared_euclidean()
    rng = np.random.default_rng(6)
    sample = rng.standard_normal((40, 2))
    single = lloyd_fit(spec, sample, 1, restarts=2, seed=0)
    assert np.allclose(single.centers[0], sample.mean(axis=0))

    cs = lloyd_fit(spec, [[0.0], [0.0], [10.0], [10.0]], 2, restarts=4, seed=1)
    assert sorted(cs.centers.ravel().tolist()) == [0.0, 10.0]

    exact = lloyd_fit(spec, sample[:5], 5, restarts=2, seed=2)
    assert mean_cost(spec, exact, sample[:5]) == pytest.approx(0.0, abs=1e-12)

    with pytest.raises(InvalidArgumentError):
        lloyd_fit(spec, sample[:3], 4)


def test_lloyd_monotone_and_deterministic():
    spec = squared_euclidean()
    rng = np.random.default_rng(7)
    sample = rng.standard_normal((200, 2)) + rng.integers(0, 2, (200, 1)) * 4.0
    runs = lloyd_restarts(spec, sample, 3, restarts=4, seed=9)
    for _, _, history in runs:
        diffs = np.diff(history)
        assert np.all(diffs <= 1e-12)
    again = lloyd_restarts(spec, sample, 3, restarts=4, seed=9)
    for (a, _, _), (b, _, _) in zip(runs, again):
        assert np.array_equal(a.centers, b.centers)


def _random_pairs(rng, n, d):
    return rng.normal(size=(n, d)), rng.normal(size=(n, d))


@pytest.mark.parametrize("spec_fn", [
    squared_euclidean,
    lambda: quadratic_form(np.array([[2.0, 0.5], [0.5, 1.0]])),
])
def test_sandwich_and_near_triangle(spec_fn):
    spec = spec_fn()
    rng = np.random.default_rng(8)
    xs, ys = _random_pairs(rng, 1000, 2)
    zs = rng.normal(size=(1000, 2))
    for x, y, z in zip(xs, ys, zs):
        b_xy = divergence(spec, x, y)
        sq = float(np.dot(x - y, x - y))
        assert spec.r1 / 2.0 * sq <= b_xy + 1e-9
        assert b_xy <= spec.r2 * sq + 1e-9
        b_yz = divergence(spec, y, z)
        b_xz = divergence(spec, x, z)
        slack = spec.r2 * np.linalg.norm(x - y) * np.linalg.norm(y - z)
        assert b_xz <= b_xy + b_yz + slack + 1e-9


@pytest.mark.parametrize("spec_fn", [
    squared_euclidean,
    lambda: quadratic_form(np.array([[2.0, 0.5], [0.5, 1.0]])),
])
def test_gradient_consistency(spec_fn):
    # central finite differences at step 1e-5, relative tolerance 1e-6
    spec = spec_fn()
    rng = np.random.default_rng(9)
    step = 1e-5
    for _ in range(25):
        x = rng.normal(size=2)
        grad = np.asarray(spec.grad(x), dtype=float)
        for i in range(2):
            e = np.zeros(2)
            e[i] = step
            fd = (spec.f(x + e) - spec.f(x - e)) / (2.0 * step)
            scale = max(1.0, abs(grad[i]))
            assert abs(fd - grad[i]) <= 1e-6 * scale


def test_center_set_validation():
    with pytest.raises(InvalidArgumentError):
        CenterSet(centers=[[0.0], [1.0]], k=1)
    with pytest.raises(InvalidArgumentError):
        CenterSet(centers=[[np.nan]], k=1)
