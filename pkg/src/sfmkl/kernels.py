"""Directionally weighted Helmholtz kernels and sub-kernel banks.

The sub-kernel for arrival direction ``eta`` and concentration ``beta`` is the
von Mises-Fisher weighted average of plane waves,

    kappa(r1, r2) = E_x[ exp(j k x^T (r1 - r2)) ],   x ~ vMF(eta, beta),

which has the closed form ``j0(sqrt(Z)) / C(beta)`` with
``Z = sum_i (j beta eta_i - k r12_i)^2`` and ``C(beta) = sinh(beta) / beta``.
For ``beta = 0`` it reduces to ``j0(k |r1 - r2|)``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

_J0_SERIES_RADIUS = 1e-4
# Above this concentration j0 and C(beta) are evaluated with exp(-beta) factored out.
_BETA_SCALED = 30.0


def vmf_normalizer(beta):
    """``C(beta) = (e^beta - e^-beta) / (2 beta)``, with ``C(0) = 1``."""
    beta = np.asarray(beta, dtype=float)
    out = np.ones_like(beta)
    small = beta < 1e-4
    b = beta[~small]
    out[~small] = np.exp(b) * (-np.expm1(-2 * b)) / (2 * b)
    bs = beta[small]
    out[small] = 1 + bs**2 / 6 + bs**4 / 120
    return out if out.ndim else float(out)


def spherical_j0(z):
    """``sin(z) / z`` for complex ``z`` with a Taylor branch near the origin."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _J0_SERIES_RADIUS
    zs = z[~small]
    out[~small] = np.sin(zs) / zs
    z2 = z[small] ** 2
    out[small] = 1 - z2 / 6 + z2**2 / 120
    return out


def _sqrt_upper(Z):
    # j0 is even, so either root works; fix Im >= 0 for reproducibility.
    w = np.sqrt(Z)
    return np.where(w.imag < 0, -w, w)


def _kernel_from_z(Z, beta):
    beta = np.broadcast_to(np.asarray(beta, dtype=float), np.shape(Z))
    w = _sqrt_upper(Z)
    out = np.empty(np.shape(Z), dtype=complex)
    big = beta > _BETA_SCALED
    if np.any(~big):
        out[~big] = spherical_j0(w[~big]) / vmf_normalizer(beta[~big])
    if np.any(big):
        # sin(w) e^-beta / (w (1 - e^-2beta) / (2 beta)), with Im(w) <= beta.
        wb, bb = w[big], beta[big]
        sin_scaled = (np.exp(1j * wb - bb) - np.exp(-1j * wb - bb)) / 2j
        out[big] = sin_scaled / wb * (2 * bb) / (-np.expm1(-2 * bb))
    return out


@dataclass(frozen=True)
class SubKernelParam:
    """Prior arrival direction ``eta`` (unit vector) and vMF concentration ``beta``."""

    eta: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float).reshape(3)
        if not np.all(np.isfinite(eta)) or abs(np.linalg.norm(eta) - 1.0) > 1e-12:
            raise ValueError("eta must be a finite unit vector")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be finite and non-negative")
        eta = eta.copy()
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def from_angles(cls, azimuth, zenith=np.pi / 2, beta=0.0):
        eta = np.array([
            np.sin(zenith) * np.cos(azimuth),
            np.sin(zenith) * np.sin(azimuth),
            np.cos(zenith),
        ])
        return cls(eta / np.linalg.norm(eta), beta)

    @property
    def azimuth(self):
        return float(np.arctan2(self.eta[1], self.eta[0]))

    @property
    def zenith(self):
        return float(np.arccos(np.clip(self.eta[2], -1.0, 1.0)))

    def __eq__(self, other):
        if not isinstance(other, SubKernelParam):
            return NotImplemented
        return self.beta == other.beta and np.array_equal(self.eta, other.eta)

    def __hash__(self):
        return hash((self.beta, self.eta.tobytes()))


def kappa_directional(r1, r2, param, k):
    """Closed-form directional kernel between positions ``r1`` and ``r2``.

    ``r1`` and ``r2`` broadcast against each other along leading axes; the
    trailing axis holds the coordinates.
    """
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    r12 = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
    Z = np.sum((1j * param.beta * param.eta - k * r12) ** 2, axis=-1)
    out = _kernel_from_z(Z, param.beta)
    return complex(out) if out.ndim == 0 else out


class QuadratureNotConverged(RuntimeError):
    pass


def sphere_product_rule(order):
    """Gauss-Legendre in ``cos(zenith)`` times a uniform azimuth grid.

    Exact for spherical polynomials of degree ``< 2 * order``. Returns unit
    vectors ``(order * 2 * order, 3)`` and weights summing to one.
    """
    t, wt = np.polynomial.legendre.leggauss(order)
    n_az = 2 * order
    az = 2 * np.pi * np.arange(n_az) / n_az
    st = np.sqrt(1 - t**2)
    x = np.stack([
        np.outer(st, np.cos(az)),
        np.outer(st, np.sin(az)),
        np.outer(t, np.ones(n_az)),
    ], axis=-1).reshape(-1, 3)
    w = np.outer(wt / 2, np.full(n_az, 1.0 / n_az)).reshape(-1)
    return x, w


def quadrature_order(r1, r2, param, k):
    """Starting rule order, growing with ``k |r1 - r2| + beta``."""
    bandwidth = k * np.linalg.norm(np.asarray(r1, float) - np.asarray(r2, float)) + param.beta
    return int(np.ceil(bandwidth)) + 12


def kappa_quadrature_oracle(r1, r2, param, k, order=None, tol=1e-12, max_order=512):
    """Integrate the vMF-weighted plane-wave average numerically.

    The vMF weight is the normalised density ``exp(beta eta^T x) / (4 pi C)``
    so that the kernel is one at ``r1 = r2``. The order is doubled until two
    successive estimates agree within ``tol``.
    """
    r12 = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
    n = order if order is not None else quadrature_order(r1, r2, param, k)

    def integrate(n):
        x, w = sphere_product_rule(n)
        # exp(beta (eta^T x - 1)) keeps the weight bounded; the e^beta goes into C.
        log_w = param.beta * (x @ param.eta - 1.0)
        phase = np.exp(1j * k * (x @ r12))
        if param.beta > 0:
            scaled_c = -np.expm1(-2 * param.beta) / (2 * param.beta)
        else:
            scaled_c = 1.0
        return np.sum(w * np.exp(log_w) * phase) / scaled_c

    prev = integrate(n)
    while n < max_order:
        n *= 2
        cur = integrate(n)
        if abs(cur - prev) <= tol:
            return complex(cur)
        prev = cur
    raise QuadratureNotConverged(f"quadrature did not converge below order {max_order}")


@dataclass(frozen=True)
class KernelBank:
    """Ordered sub-kernel parameters sharing one wavenumber."""

    params: tuple
    wavenumber: float

    def __post_init__(self):
        params = tuple(self.params)
        if len(params) < 1:
            raise ValueError("a kernel bank needs at least one sub-kernel")
        if not self.wavenumber > 0:
            raise ValueError("wavenumber must be positive")
        if len(set(params)) != len(params):
            raise ValueError("sub-kernel parameters must be pairwise distinct")
        object.__setattr__(self, "params", params)

    def __len__(self):
        return len(self.params)

    @cached_property
    def etas(self):
        return np.array([p.eta for p in self.params])

    @cached_property
    def betas(self):
        return np.array([p.beta for p in self.params])

    def subset(self, indices):
        return KernelBank(tuple(self.params[i] for i in indices), self.wavenumber)

    def evaluate(self, r1, r2):
        """All sub-kernels between point sets, shape ``(D, N1, N2)``."""
        r1 = np.atleast_2d(np.asarray(r1, dtype=float))
        r2 = np.atleast_2d(np.asarray(r2, dtype=float))
        r12 = r1[:, None, :] - r2[None, :, :]
        k = self.wavenumber
        b = self.betas
        # sum_i (j b eta_i - k r_i)^2 = -b^2 |eta|^2 - 2 j b k eta.r + k^2 |r|^2
        eta_sq = np.sum(self.etas**2, axis=-1)
        proj = np.einsum("dc,nmc->dnm", self.etas, r12)
        dist_sq = np.sum(r12**2, axis=-1)
        Z = (-(b**2) * eta_sq)[:, None, None] - 2j * k * b[:, None, None] * proj + k**2 * dist_sq[None]
        return _kernel_from_z(Z, b[:, None, None])

    def mixed(self, r1, r2, gamma):
        """``sum_d gamma_d kappa_d(r1, r2)`` over active sub-kernels only."""
        gamma = np.asarray(gamma, dtype=float)
        active = np.flatnonzero(gamma)
        r1 = np.atleast_2d(np.asarray(r1, dtype=float))
        r2 = np.atleast_2d(np.asarray(r2, dtype=float))
        if active.size == 0:
            return np.zeros((r1.shape[0], r2.shape[0]), dtype=complex)
        sub = self.subset(active).evaluate(r1, r2)
        return np.tensordot(gamma[active], sub, axes=1)


def default_bank(d_eta, d_beta, k, beta_start=0.0, beta_step=1.0, zeniths=(np.pi / 2,)):
    """Cartesian grid of azimuths on ``[-pi, pi)``, zenith angles and concentrations.

    The ordering is azimuth-major, then zenith, then beta.
    """
    if d_eta < 1 or d_beta < 1:
        raise ValueError("d_eta and d_beta must be at least 1")
    azimuths = -np.pi + 2 * np.pi * np.arange(d_eta) / d_eta
    betas = beta_start + beta_step * np.arange(d_beta)
    params = []
    for az in azimuths:
        for zen in zeniths:
            for beta in betas:
                params.append(SubKernelParam.from_angles(az, zen, beta))
    return KernelBank(tuple(params), k)


def uniform_bank(k):
    """Single isotropic sub-kernel, ``kappa = j0(k |r1 - r2|)``."""
    return KernelBank((SubKernelParam(np.array([1.0, 0.0, 0.0]), 0.0),), k)


@dataclass(frozen=True)
class GramSet:
    """Per-sub-kernel Gram matrices, shape ``(D, M, M)``."""

    grams: np.ndarray
    mic_array: object
    bank: KernelBank

    def __len__(self):
        return self.grams.shape[0]

    @property
    def num_mics(self):
        return self.grams.shape[1]


def build_gram_set(mic_array, bank):
    """Evaluate every sub-kernel between all microphone pairs.

    Only the upper triangle is computed; the lower one is its conjugate mirror.
    """
    pos = mic_array.positions
    m = pos.shape[0]
    iu, ju = np.triu_indices(m, k=1)
    grams = np.empty((len(bank), m, m), dtype=complex)
    k = bank.wavenumber
    r12 = pos[iu] - pos[ju]
    b = bank.betas[:, None]
    Z = np.sum((1j * b[..., None] * bank.etas[:, None, :] - k * r12[None]) ** 2, axis=-1)
    upper = _kernel_from_z(Z, b)
    grams[:, iu, ju] = upper
    grams[:, ju, iu] = upper.conj()
    diag = _kernel_from_z(-(bank.betas**2) * np.sum(bank.etas**2, axis=-1) + 0j, bank.betas)
    grams[:, np.arange(m), np.arange(m)] = diag[:, None]
    grams.setflags(write=False)
    return GramSet(grams, mic_array, bank)


def mix_gram(gram_set, gamma):
    """Weighted sum ``sum_d gamma_d K^(d)`` of the bank's Gram matrices."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (len(gram_set),):
        raise ValueError(f"gamma has shape {gamma.shape}, expected ({len(gram_set)},)")
    if np.any(gamma < 0):
        raise ValueError("kernel weights must be non-negative")
    return np.tensordot(gamma, gram_set.grams, axes=1)
