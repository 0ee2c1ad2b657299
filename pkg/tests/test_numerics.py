import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pjdetect.errors import NotPositiveDefiniteError, ShapeError
from pjdetect.numerics import (
    SeededRng,
    adjoint_matvec,
    draw_complex_gaussian,
    gram,
    matvec,
    residual_norm_sq,
    solve_hermitian,
)
from conftest import random_channel


def test_gram_identity_cases():
    assert np.allclose(gram(np.eye(2), 0.0), np.eye(2))
    assert np.allclose(gram(np.eye(2), 0.5), 1.5 * np.eye(2))


def test_gram_matches_double_loop():
    H = random_channel(np.random.default_rng(0), 8, 4)
    rho = 0.3
    ref = np.zeros((4, 4), complex)
    for i in range(4):
        for j in range(4):
            ref[i, j] = sum(np.conj(H[m, i]) * H[m, j] for m in range(8)) + (rho if i == j else 0)
    A = gram(H, rho)
    assert np.max(np.abs(A - ref)) <= 1e-12 * np.max(np.abs(ref))
    assert np.allclose(A, A.conj().T, atol=0)


def test_gram_rejects_wide_and_negative_rho():
    with pytest.raises(ShapeError):
        gram(np.ones((2, 3)), 0.0)
    with pytest.raises(ValueError):
        gram(np.eye(2), -1.0)


def _gauss_elim(A, b):
    A = A.astype(complex).copy()
    b = b.astype(complex).copy()
    n = len(b)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        A[[k, p]], b[[k, p]] = A[[p, k]], b[[p, k]]
        for i in range(k + 1, n):
            f = A[i, k] / A[k, k]
            A[i, k:] -= f * A[k, k:]
            b[i] -= f * b[k]
    x = np.zeros(n, complex)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - A[i, i + 1:] @ x[i + 1:]) / A[i, i]
    return x


def test_solve_hermitian_against_elimination():
    gen = np.random.default_rng(1)
    H = random_channel(gen, 12, 6)
    A = gram(H, 0.1)
    b = gen.standard_normal(6) + 1j * gen.standard_normal(6)
    x = solve_hermitian(A, b)
    assert np.allclose(x, _gauss_elim(A, b), rtol=1e-10, atol=1e-12)
    assert np.allclose(solve_hermitian(np.eye(3), np.arange(3.0)), np.arange(3.0))


def test_solve_hermitian_singular():
    with pytest.raises(NotPositiveDefiniteError):
        solve_hermitian(np.zeros((3, 3)), np.ones(3))


def test_matvec_and_adjoint():
    gen = np.random.default_rng(2)
    H = random_channel(gen, 5, 3)
    x = gen.standard_normal(3) + 0j
    y = gen.standard_normal(5) + 0j
    assert np.allclose(matvec(H, x), H @ x)
    # <Hx, y> = <x, H^H y>
    assert np.isclose(np.vdot(matvec(H, x), y), np.vdot(x, adjoint_matvec(H, y)))
    with pytest.raises(ShapeError):
        matvec(H, np.ones(4))


def test_residual_norm_parseval():
    v = np.random.default_rng(3).standard_normal(64) + 1j
    assert np.isclose(residual_norm_sq(v), np.sum(np.abs(np.fft.fft(v)) ** 2) / 64)


def test_rng_determinism_and_independence():
    a = SeededRng(5, (1, 2)).generator.standard_normal(10)
    b = SeededRng(5, (1, 2)).generator.standard_normal(10)
    c = SeededRng(5, (1, 3)).generator.standard_normal(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(SeededRng(5, 1).child(4).generator.random(3),
                          SeededRng(5, 1).child(4).generator.random(3))


def test_complex_gaussian_moments():
    v = draw_complex_gaussian(SeededRng(9, 0), 200_000, 2.0)
    # standard error of the variance estimate is about 2 * 2 / sqrt(2e5)
    assert abs(np.mean(np.abs(v) ** 2) - 2.0) < 0.02
    assert abs(np.mean(v)) < 0.02
    assert abs(np.mean(v**2)) < 0.02  # circular symmetry
    assert abs(np.var(v.real) - 1.0) < 0.02


@settings(max_examples=30, deadline=None)
@given(M=st.integers(1, 10), extra=st.integers(0, 5), rho=st.floats(0, 5), seed=st.integers(0, 2**16))
def test_gram_is_hermitian_psd(M, extra, rho, seed):
    N = M
    H = random_channel(np.random.default_rng(seed), M + extra, N)
    A = gram(H, rho)
    assert np.allclose(A, A.conj().T)
    assert np.min(np.linalg.eigvalsh(A)) >= rho - 1e-9 * (1 + np.max(np.abs(A)))
