import numpy as np
import pytest

from cdspeed import kernels


def _random_hermitian_stack(rng, b, n):
    x = rng.normal(size=(b, n, n)) + 1j * rng.normal(size=(b, n, n))
    return x + np.conj(np.swapaxes(x, 1, 2))


def test_flag_selects_path(monkeypatch):
    monkeypatch.setenv(kernels.ENV_FLAG, "1")
    assert not kernels.numba_enabled()
    monkeypatch.setenv(kernels.ENV_FLAG, "0")
    assert kernels.numba_enabled() == kernels.HAVE_NUMBA
    monkeypatch.delenv(kernels.ENV_FLAG)
    assert kernels.numba_enabled() == kernels.HAVE_NUMBA


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16])
def test_jacobi_matches_lapack(backend, rng, n):
    a = _random_hermitian_stack(rng, 40, n)
    w, v, sweeps, off = kernels.jacobi_eigh(a)
    assert np.all(off <= kernels.JACOBI_TOL)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-12 * np.abs(a).max())
    eye = np.eye(n)
    np.testing.assert_allclose(np.conj(np.swapaxes(v, 1, 2)) @ v, np.broadcast_to(eye, v.shape), atol=1e-12)


def test_jacobi_paths_agree(rng, monkeypatch):
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    a = _random_hermitian_stack(rng, 100, 4)
    monkeypatch.setenv(kernels.ENV_FLAG, "")
    w1, v1, _, _ = kernels.jacobi_eigh(a)
    monkeypatch.setenv(kernels.ENV_FLAG, "1")
    w2, v2, _, _ = kernels.jacobi_eigh(a)
    np.testing.assert_allclose(w1, w2, atol=1e-12)
    np.testing.assert_allclose(v1, v2, atol=1e-10)


def test_jacobi_reports_nonconvergence(backend, rng):
    a = _random_hermitian_stack(rng, 3, 4)
    _, _, sweeps, off = kernels.jacobi_eigh(a, max_sweeps=1)
    assert np.all(sweeps == 1)
    assert np.any(off > kernels.JACOBI_TOL)


def test_rk4_constant_hamiltonian_matches_exponential(backend, rng):
    a = _random_hermitian_stack(rng, 1, 3)[0]
    n, tau = 400, 1.0
    hs = np.broadcast_to(a, (2 * n + 1, 3, 3))
    psi0 = np.eye(3, dtype=complex)
    out, norms = kernels.rk4_evolve(hs, psi0, tau / n)
    w, v = np.linalg.eigh(a)
    exact = (v * np.exp(-1j * w * tau)) @ v.conj().T
    np.testing.assert_allclose(out[-1], exact, atol=1e-8)
    np.testing.assert_allclose(norms, 1.0, atol=1e-8)


def test_rk4_paths_agree(rng, monkeypatch):
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    hs = _random_hermitian_stack(rng, 201, 3)
    psi0 = np.linalg.qr(rng.normal(size=(3, 2)) + 0j)[0]
    monkeypatch.setenv(kernels.ENV_FLAG, "")
    a, na = kernels.rk4_evolve(hs, psi0, 0.01)
    monkeypatch.setenv(kernels.ENV_FLAG, "1")
    b, nb = kernels.rk4_evolve(hs, psi0, 0.01)
    np.testing.assert_allclose(a, b, atol=1e-13)
    np.testing.assert_allclose(na, nb, atol=1e-13)


def test_rk4_rejects_even_sample_count():
    with pytest.raises(ValueError):
        kernels.rk4_evolve(np.zeros((4, 2, 2)), np.eye(2), 0.1)


def test_jacobi_batch_independent(backend, rng):
    a = _random_hermitian_stack(rng, 7, 4)
    w, v, _, _ = kernels.jacobi_eigh(a)
    for i in range(7):
        wi, vi, _, _ = kernels.jacobi_eigh(a[i : i + 1])
        assert w[i].tobytes() == wi[0].tobytes()
        assert v[i].tobytes() == vi[0].tobytes()
