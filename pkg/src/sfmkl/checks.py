"""Self-checks of the closed-form kernel, used by ``sfmkl kernel-check``."""
from dataclasses import dataclass

import numpy as np

from sfmkl.kernels import SubKernelParam, kappa_directional, kappa_quadrature_oracle


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: worst={self.worst:.3e} tol={self.tol:.0e}"


def random_unit_vectors(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_param(rng, beta_max=9.0):
    eta = random_unit_vectors(rng, 1)[0]
    return SubKernelParam(eta, rng.uniform(0.0, beta_max))


def random_pair(rng, k, max_kd=20.0):
    """Two positions with ``k |r1 - r2| <= max_kd``."""
    r1 = rng.uniform(-0.5, 0.5, 3)
    d = rng.uniform(0.0, max_kd / k)
    r2 = r1 + d * random_unit_vectors(rng, 1)[0]
    return r1, r2


def check_unit_diagonal(rng, n_points=100, tol=1e-10, k=2 * np.pi * 900 / 340):
    pts = rng.uniform(-1, 1, (n_points, 3))
    worst = 0.0
    for beta in range(10):
        for eta in random_unit_vectors(rng, 3):
            vals = kappa_directional(pts, pts, SubKernelParam(eta, float(beta)), k)
            worst = max(worst, float(np.max(np.abs(vals - 1.0))))
    return CheckResult("unit diagonal kappa(r, r) = 1", worst < tol, worst, tol)


def check_hermitian(rng, n_pairs=1000, tol=1e-12):
    worst = 0.0
    for _ in range(n_pairs):
        k = rng.uniform(1.0, 40.0)
        r1, r2 = random_pair(rng, k)
        p = random_param(rng)
        a = kappa_directional(r1, r2, p, k)
        b = kappa_directional(r2, r1, p, k)
        worst = max(worst, abs(a - np.conj(b)))
    return CheckResult("Hermitian symmetry", worst < tol, worst, tol)


def check_isotropic_limit(rng, n_pairs=1000, tol=1e-12):
    worst = 0.0
    for _ in range(n_pairs):
        k = rng.uniform(1.0, 40.0)
        r1, r2 = random_pair(rng, k)
        eta = random_unit_vectors(rng, 1)[0]
        got = kappa_directional(r1, r2, SubKernelParam(eta, 0.0), k)
        x = k * np.linalg.norm(r1 - r2)
        ref = np.sinc(x / np.pi)
        worst = max(worst, abs(got - ref))
    return CheckResult("beta = 0 reduces to j0(k|r1 - r2|)", worst < tol, worst, tol)


def check_quadrature(rng, n_cases=200, tol=1e-6):
    worst = 0.0
    for _ in range(n_cases):
        k = rng.uniform(1.0, 40.0)
        r1, r2 = random_pair(rng, k)
        p = random_param(rng)
        got = kappa_directional(r1, r2, p, k)
        ref = kappa_quadrature_oracle(r1, r2, p, k)
        worst = max(worst, abs(got - ref))
    return CheckResult("closed form matches spherical quadrature", worst < tol, worst, tol)


def run_kernel_checks(seed=0, quadrature_cases=200):
    rng = np.random.default_rng(seed)
    return [
        check_unit_diagonal(rng),
        check_hermitian(rng),
        check_isotropic_limit(rng),
        check_quadrature(rng, quadrature_cases),
    ]
