import numpy as np
import pytest

from sfmkl.kernels import SubKernelParam, build_gram_set, kappa_directional, mix_gram
from sfmkl.ridge import (
    EstimatorState,
    KernelMatrixError,
    estimate_field,
    fit_ridge,
    objective_J,
    ridge_objective,
    relative_residual,
    solve_alpha,
)
from sfmkl.scene import MicArray
from conftest import K900, random_bank, small_problem


def random_hpd(rng, M):
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return A @ A.conj().T / M


def random_vec(rng, M):
    return rng.standard_normal(M) + 1j * rng.standard_normal(M)


def gauss_jordan_inverse(A):
    """Plain-Python Gauss-Jordan elimination with partial pivoting."""
    n = len(A)
    aug = [[complex(A[i][j]) for j in range(n)] + [1.0 + 0j if i == j else 0j for j in range(n)]
           for i in range(n)]
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(aug[r][c]))
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return np.array([row[n:] for row in aug])


def test_identity_kernel(rng):
    s = random_vec(rng, 5)
    np.testing.assert_allclose(solve_alpha(np.eye(5), s, 1.0), s / 2, rtol=1e-15)


def test_zero_kernel(rng):
    s = random_vec(rng, 4)
    np.testing.assert_allclose(solve_alpha(np.zeros((4, 4)), s, 0.3), s / 0.3, rtol=1e-14)


def test_matches_gauss_jordan(rng):
    K = random_hpd(rng, 6)
    s = random_vec(rng, 6)
    lam = 1e-2
    expected = gauss_jordan_inverse(K + lam * np.eye(6)) @ s
    np.testing.assert_allclose(solve_alpha(K, s, lam), expected, atol=1e-9, rtol=1e-9)


def test_residual_bound(rng):
    for M in (1, 5, 30):
        K = random_hpd(rng, M)
        s = random_vec(rng, M)
        alpha = solve_alpha(K, s, 1e-3)
        assert relative_residual(K, alpha, s, 1e-3) < 1e-10


def test_non_hermitian_rejected(rng):
    K = random_hpd(rng, 4)
    K[0, 1] += 0.1
    with pytest.raises(KernelMatrixError):
        solve_alpha(K, random_vec(rng, 4), 1e-3)


def test_indefinite_rejected():
    with pytest.raises(KernelMatrixError):
        solve_alpha(-np.eye(3), np.ones(3), 1e-3)


@pytest.mark.parametrize("lam", [0.0, -1.0, np.inf])
def test_bad_lambda(lam):
    with pytest.raises(ValueError):
        solve_alpha(np.eye(2), np.ones(2), lam)


def test_zero_data_objective(rng):
    gs, _ = small_problem(rng, 5, 3)
    J, alpha = objective_J(gs, np.full(3, 1 / 3), np.zeros(5), 1e-3, return_alpha=True)
    assert J == 0.0
    np.testing.assert_array_equal(alpha, 0)


def test_objective_normal_equation_oracle(rng):
    gs, s = small_problem(rng, 3, 2, noise=0.3)
    gamma = np.array([0.3, 0.7])
    lam = 5e-2
    K = mix_gram(gs, gamma)
    # Stationarity of ||K a - s||^2 + lam a^H K a: (K^2 + lam K) a = K s.
    a = np.linalg.solve(K @ K + lam * K, K @ s)
    direct = np.linalg.norm(K @ a - s) ** 2 + lam * np.vdot(a, K @ a).real
    assert objective_J(gs, gamma, s, lam) == pytest.approx(direct, abs=1e-9)


def test_objective_is_the_minimum(rng):
    gs, s = small_problem(rng, 4, 2, noise=0.2)
    gamma = np.array([0.5, 0.5])
    J, alpha = objective_J(gs, gamma, s, 1e-2, return_alpha=True)
    K = mix_gram(gs, gamma)
    for _ in range(20):
        pert = alpha + 1e-3 * random_vec(rng, 4)
        assert ridge_objective(K, pert, s, 1e-2) >= J - 1e-12


def test_objective_monotone_in_lambda(rng):
    gs, s = small_problem(rng, 8, 3, noise=0.1)
    gamma = np.full(3, 1 / 3)
    lams = np.logspace(-6, 1, 30)
    Js = [objective_J(gs, gamma, s, lam) for lam in lams]
    assert np.all(np.diff(Js) >= -1e-12)
    assert all(J >= 0 for J in Js)


def test_quadratic_form_real(rng):
    K = random_hpd(rng, 7)
    a = random_vec(rng, 7)
    q = np.vdot(a, K @ a)
    assert abs(q.imag) < 1e-10 * abs(q)


def test_representer_consistency(rng):
    gs, s = small_problem(rng, 10, 4, noise=0.1)
    gamma = rng.dirichlet(np.ones(4))
    state = fit_ridge(gs, gamma, s, 1e-3)
    np.testing.assert_allclose(estimate_field(state, gs.mic_array.positions),
                               mix_gram(gs, gamma) @ state.alpha, atol=1e-10)


def test_near_interpolation(rng):
    gs, s = small_problem(rng, 6, 2)
    state = fit_ridge(gs, np.array([0.5, 0.5]), s, 1e-10)
    est = estimate_field(state, gs.mic_array.positions)
    np.testing.assert_allclose(est, s, rtol=1e-3)


def test_zero_alpha_gives_zero_field(rng):
    gs, _ = small_problem(rng, 4, 2)
    state = EstimatorState(np.zeros(4), gs.mic_array, gs.bank, np.array([0.5, 0.5]))
    np.testing.assert_array_equal(state(rng.uniform(-0.3, 0.3, (5, 3))), 0)


def test_single_mic_single_term(rng):
    r1 = np.array([0.1, -0.2, 0.05])
    mics = MicArray(r1[None])
    bank = random_bank(rng, 3, K900)
    state = EstimatorState(np.ones(1), mics, bank, np.array([0.0, 1.0, 0.0]))
    r = np.array([0.0, 0.1, 0.2])
    assert state(r) == pytest.approx(kappa_directional(r, r1, bank.params[1], K900), abs=1e-14)


def test_state_validation(rng):
    gs, _ = small_problem(rng, 4, 2)
    with pytest.raises(ValueError):
        EstimatorState(np.zeros(3), gs.mic_array, gs.bank, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        EstimatorState(np.zeros(4), gs.mic_array, gs.bank, np.array([1.5, -0.5]))
