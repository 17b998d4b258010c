"""Complex kernel ridge regression for a fixed kernel mixture."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from sfmkl.kernels import mix_gram

DEFAULT_LAMBDA = 1e-3


class KernelMatrixError(np.linalg.LinAlgError):
    """Gram matrix is not Hermitian positive semidefinite within tolerance."""


def solve_alpha(K, s, lam, herm_tol=1e-10):
    """Solve ``(K + lam I) alpha = s`` with a Cholesky factorisation.

    Parameters
    ----------
    K : ndarray of shape (M, M)
        Hermitian positive semidefinite Gram matrix.
    s : ndarray of shape (M,)
        Observed pressures.
    lam : float
        Regularisation, must be positive.

    Returns
    -------
    alpha : ndarray of shape (M,)

    Raises
    ------
    KernelMatrixError
        If ``K`` is not Hermitian or ``K + lam I`` is not positive definite.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError("regularisation lambda must be positive and finite")
    K = np.asarray(K, dtype=complex)
    s = np.asarray(s, dtype=complex)
    scale = max(1.0, np.max(np.abs(K), initial=0.0))
    if np.max(np.abs(K - K.conj().T), initial=0.0) > herm_tol * scale:
        raise KernelMatrixError("Gram matrix is not Hermitian")
    A = K + lam * np.eye(K.shape[0])
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise KernelMatrixError(f"K + lambda I is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve(factor, s)


def relative_residual(K, alpha, s, lam):
    r = K @ alpha + lam * alpha - s
    return np.linalg.norm(r) / max(np.linalg.norm(s), np.finfo(float).tiny)


def ridge_objective(K, alpha, s, lam):
    """``||K alpha - s||^2 + lam Re(alpha^H K alpha)``."""
    fit = np.linalg.norm(K @ alpha - s) ** 2
    quad = np.vdot(alpha, K @ alpha).real
    return float(fit + lam * quad)


def objective_J(gram_set, gamma, s, lam, return_alpha=False):
    """Optimal ridge objective for the mixed kernel ``sum_d gamma_d K^(d)``."""
    K = mix_gram(gram_set, gamma)
    alpha = solve_alpha(K, s, lam)
    J = ridge_objective(K, alpha, s, lam)
    if not np.isfinite(J):
        raise FloatingPointError("ridge objective is not finite")
    if return_alpha:
        return J, alpha
    return J


@dataclass(frozen=True)
class EstimatorState:
    """Everything needed to evaluate the reconstructed field inside the region."""

    alpha: np.ndarray
    mic_array: object
    bank: object
    gamma: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=complex).reshape(-1)
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        if alpha.shape[0] != len(self.mic_array):
            raise ValueError("alpha needs one coefficient per microphone")
        if gamma.shape[0] != len(self.bank) or np.any(gamma < 0) or not np.all(np.isfinite(gamma)):
            raise ValueError("gamma must be finite, non-negative and match the bank size")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    def __call__(self, r):
        return estimate_field(self, r)


def estimate_field(state, r):
    """Reconstructed pressure ``sum_m alpha_m kappa(r, r_m)`` at ``r``.

    ``r`` may be a single position ``(3,)`` or a batch ``(N, 3)``. The
    expansion is only physically meaningful inside the source-free region.
    """
    pts = np.asarray(r, dtype=float)
    single = pts.ndim == 1
    kmat = state.bank.mixed(np.atleast_2d(pts), state.mic_array.positions, state.gamma)
    u = kmat @ state.alpha
    return complex(u[0]) if single else u


def fit_ridge(gram_set, gamma, s, lam=DEFAULT_LAMBDA):
    """Solve the ridge problem for fixed weights and wrap it as an estimator."""
    alpha = solve_alpha(mix_gram(gram_set, gamma), s, lam)
    return EstimatorState(alpha, gram_set.mic_array, gram_set.bank, gamma)
