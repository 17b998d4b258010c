"""Learning the sub-kernel weights from the observations.

Two constraint sets on the weights ``gamma`` are supported:

* ``solve_l1``: the probability simplex, optimised with the SimpleMKL reduced
  gradient scheme (boundary-hopping steps followed by a line search).
* ``solve_l2``: the non-negative part of the unit L2 sphere, optimised by the
  alternating fixed-point update ``gamma = v / ||v||`` with a damped
  coefficient update.

Both minimise ``J(gamma) = min_alpha ||K alpha - s||^2 + lam alpha^H K alpha``
with ``K = sum_d gamma_d K^(d)``.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from sfmkl.kernels import mix_gram
from sfmkl.ridge import objective_J, solve_alpha

logger = logging.getLogger(__name__)

ZERO_WEIGHT = 1e-8
_SNAP = 1e-14
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class L1Options:
    max_outer_iters: int = 200
    j_rel_tol: float = 1e-6
    gamma_tol: float = 1e-10
    line_search_iters: int = 20

    def __post_init__(self):
        if min(self.max_outer_iters, self.j_rel_tol, self.gamma_tol, self.line_search_iters) <= 0:
            raise ValueError("L1 options must all be positive")


@dataclass(frozen=True)
class L2Options:
    max_iters: int = 500
    sigma: float = 0.5
    gamma_rel_tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.max_iters <= 0 or self.gamma_rel_tol <= 0:
            raise ValueError("L2 options must be positive")


@dataclass
class MklResult:
    gamma: np.ndarray
    alpha: np.ndarray
    J_history: list
    iterations: int
    converged: bool
    degenerate: bool = False
    gamma_history: list = field(default_factory=list, repr=False)

    @property
    def J(self):
        return self.J_history[-1]


def quadratic_forms(gram_set, alpha):
    """``Re(alpha^H K^(d) alpha)`` for every sub-kernel, shape ``(D,)``."""
    return np.einsum("i,dij,j->d", alpha.conj(), gram_set.grams, alpha).real


def grad_J(gram_set, alpha, lam):
    """Gradient ``dJ/dgamma_d = -lam alpha^H K^(d) alpha`` at the ridge solution ``alpha``."""
    return -lam * quadratic_forms(gram_set, alpha)


def descent_direction(gamma, grad, d_max):
    """Reduced-gradient descent direction on the simplex.

    Coordinates with ``gamma_d = 0`` whose reduced gradient
    ``grad_d - grad[d_max]`` is positive stay at zero; every other coordinate
    except ``d_max`` moves along the negative reduced gradient, and ``d_max``
    absorbs the balance so that the direction sums to zero.
    """
    gamma = np.asarray(gamma, dtype=float)
    reduced = np.asarray(grad, dtype=float) - grad[d_max]
    delta = np.where((gamma > 0) | (reduced < 0), -reduced, 0.0)
    delta[d_max] = 0.0
    delta[d_max] = -np.sum(delta)
    return delta


def _argmax_first(x):
    return int(np.flatnonzero(x == np.max(x))[0])


def _project_simplex_rounding(gamma):
    # Only absorbs round-off: snap residues of cancelled coordinates to zero and
    # rescale to unit sum. A leftover 1e-20 would otherwise cap the next step.
    gamma = np.where(gamma < _SNAP, 0.0, gamma)
    return gamma / np.sum(gamma)


def golden_section(f, a, b, iters, fa=None, fb=None):
    """Minimise a unimodal ``f`` on ``[a, b]`` with a fixed number of golden-section steps.

    Returns the best point seen (endpoints included) and its value.
    """
    best = []
    if fa is not None:
        best.append((fa, a))
    if fb is not None:
        best.append((fb, b))
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    best += [(f1, x1), (f2, x2)]
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
            best.append((f1, x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
            best.append((f2, x2))
    fbest, xbest = min(best, key=lambda t: (t[0], t[1]))
    return xbest, fbest


def _transfer_exhausted(gamma, delta, d_max):
    """Move the share of every coordinate that reached zero onto ``d_max``.

    Identical sub-kernels hit the boundary together, so all of them are
    cleared at once. ``delta[d_max]`` is recomputed as the exact negative
    sum of the others, which keeps the direction tangent to the simplex.
    """
    delta = delta.copy()
    delta[(gamma == 0) & (delta < 0)] = 0.0
    delta[d_max] = 0.0
    delta[d_max] = -np.sum(delta)
    return delta


def _max_step(gamma, delta):
    neg = np.flatnonzero(delta < 0)
    if neg.size == 0:
        return None, 0.0
    ratios = -gamma[neg] / delta[neg]
    j = int(np.argmin(ratios))
    return int(neg[j]), float(ratios[j])


def solve_l1(gram_set, s, lam, opts=None):
    """Learn simplex-constrained weights with the reduced gradient method.

    Each outer iteration computes the descent direction, hops to the simplex
    boundary (zeroing one coordinate per hop) while that keeps lowering ``J``,
    and finishes with a golden-section line search on the last segment.
    """
    opts = opts or L1Options()
    s = np.asarray(s, dtype=complex)
    D = len(gram_set)
    gamma = np.full(D, 1.0 / D)
    J, alpha = objective_J(gram_set, gamma, s, lam, return_alpha=True)
    history = [J]
    gammas = [gamma.copy()]
    converged = False
    it = 0

    def J_at(g):
        return objective_J(gram_set, g, s, lam, return_alpha=True)

    while it < opts.max_outer_iters:
        it += 1
        grad = grad_J(gram_set, alpha, lam)
        d_max = _argmax_first(gamma)
        delta = descent_direction(gamma, grad, d_max)
        if np.max(np.abs(delta)) <= 1e-15 * max(1.0, np.max(np.abs(grad))):
            converged = True
            break

        cur_gamma, cur_J, cur_alpha, cur_delta = gamma, J, alpha, delta
        while True:
            nu, rho_max = _max_step(cur_gamma, cur_delta)
            if nu is None:
                bar_gamma, bar_J, bar_alpha, rho_max = cur_gamma, cur_J, cur_alpha, 0.0
                break
            bar_gamma = cur_gamma + rho_max * cur_delta
            bar_gamma[nu] = 0.0
            bar_gamma = _project_simplex_rounding(bar_gamma)
            bar_J, bar_alpha = J_at(bar_gamma)
            if not np.isfinite(bar_J):
                raise FloatingPointError("non-finite objective during the L1 update")
            if bar_J > cur_J:
                break
            # Accept the boundary point and keep going with the redistributed direction.
            bar_delta = _transfer_exhausted(bar_gamma, cur_delta, _argmax_first(bar_gamma))
            cur_gamma, cur_J, cur_alpha, cur_delta = bar_gamma, bar_J, bar_alpha, bar_delta

        if rho_max > 0:
            cache = {}

            def f(rho):
                g = _project_simplex_rounding(cur_gamma + rho * cur_delta)
                val, a = J_at(g)
                cache[rho] = (g, a)
                return val

            rho, new_J = golden_section(f, 0.0, rho_max, opts.line_search_iters, fa=cur_J, fb=bar_J)
            if rho == 0.0:
                new_gamma, new_alpha = cur_gamma, cur_alpha
            elif rho == rho_max:
                new_gamma, new_alpha = bar_gamma, bar_alpha
            else:
                new_gamma, new_alpha = cache[rho]
        else:
            new_gamma, new_J, new_alpha = cur_gamma, cur_J, cur_alpha

        step = np.sum(np.abs(new_gamma - gamma))
        rel = abs(J - new_J) / max(abs(J), np.finfo(float).tiny)
        gamma, J, alpha = new_gamma, new_J, new_alpha
        history.append(J)
        gammas.append(gamma.copy())
        if rel < opts.j_rel_tol or step < opts.gamma_tol:
            converged = True
            break

    if not converged:
        logger.info("L1 kernel learning stopped after %d iterations without converging", it)
    return MklResult(gamma, alpha, history, it, converged, gamma_history=gammas)


def solve_l2(gram_set, s, lam, opts=None):
    """Learn weights on the unit L2 sphere by alternating updates.

    The returned ``alpha`` is the exact ridge solution for the final weights.
    """
    opts = opts or L2Options()
    s = np.asarray(s, dtype=complex)
    D = len(gram_set)
    gamma = np.full(D, 1.0 / D)
    K = mix_gram(gram_set, gamma)
    alpha = solve_alpha(K, s, lam)
    history = []
    gammas = []
    converged = False
    it = 0
    while it < opts.max_iters:
        it += 1
        v = quadratic_forms(gram_set, alpha)
        v = np.where(v < 0, 0.0, v)
        norm_v = np.linalg.norm(v)
        if not norm_v > 0:
            gamma = np.full(D, 1.0 / np.sqrt(D))
            return MklResult(gamma, np.zeros_like(s), [0.0], it, False, degenerate=True,
                             gamma_history=[gamma.copy()])
        new_gamma = v / norm_v
        change = np.linalg.norm(new_gamma - gamma) / np.linalg.norm(gamma)
        gamma = new_gamma
        K = mix_gram(gram_set, gamma)
        alpha = opts.sigma * alpha + (1 - opts.sigma) * solve_alpha(K, s, lam)
        history.append(objective_J(gram_set, gamma, s, lam))
        gammas.append(gamma.copy())
        if change < opts.gamma_rel_tol:
            converged = True
            break
    if not converged:
        logger.info("L2 kernel learning stopped after %d iterations without converging", it)
    J, alpha_opt = objective_J(gram_set, gamma, s, lam, return_alpha=True)
    return MklResult(gamma, alpha_opt, history, it, converged, gamma_history=gammas)


def sparsity_fraction(gamma, threshold=ZERO_WEIGHT):
    """Fraction of weights below ``threshold``."""
    gamma = np.asarray(gamma, dtype=float)
    return float(np.mean(gamma < threshold))
