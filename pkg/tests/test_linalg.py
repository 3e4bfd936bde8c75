import numpy as np
import pytest

from devbound.errors import InvalidArgumentError
from devbound.linalg import jacobi_eigh, polar_orthogonal, spectral_norm_2x2


def test_jacobi_matches_numpy_on_random_symmetric():
    rng = np.random.default_rng(1)
    for d in (1, 2, 3, 5, 8):
        for _ in range(20):
            a = rng.normal(size=(d, d))
            a = 0.5 * (a + a.T)
            w, v = jacobi_eigh(a)
            w_np = np.linalg.eigvalsh(a)
            assert np.allclose(w, w_np, atol=1e-10)
            assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-10)
            assert np.allclose(v.T @ v, np.eye(d), atol=1e-10)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(InvalidArgumentError):
        jacobi_eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_polar_orthogonal_is_nearest():
    rng = np.random.default_rng(2)
    for _ in range(50):
        g = np.eye(2) + 0.2 * rng.normal(size=(2, 2))
        u = polar_orthogonal(g)
        assert np.allclose(u.T @ u, np.eye(2), atol=1e-10)
        # polar factor minimizes Frobenius distance among orthogonal matrices
        for theta in np.linspace(0, 2 * np.pi, 36, endpoint=False):
            c, s = np.cos(theta), np.sin(theta)
            for q in (np.array([[c, -s], [s, c]]), np.array([[c, s], [s, -c]])):
                assert (np.linalg.norm(g - u, "fro")
                        <= np.linalg.norm(g - q, "fro") + 1e-9)


def test_polar_orthogonal_scalar_and_singular():
    assert polar_orthogonal(np.array([[-0.7]]))[0, 0] == -1.0
    assert polar_orthogonal(np.array([[0.0]])) is None


def test_spectral_norm_2x2_matches_numpy():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = rng.normal(size=(2, 2))
        assert np.isclose(spectral_norm_2x2(m), np.linalg.norm(m, 2), atol=1e-10)
