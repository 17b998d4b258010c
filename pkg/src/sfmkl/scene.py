"""Free-field scenes: microphone layouts, monopole sources and noisy observations.

Positions are plain float arrays of shape ``(3,)`` or ``(N, 3)`` in meters.
The time convention is ``exp(-j omega t)`` so that a monopole radiates
``exp(+j k r) / (4 pi r)`` and a distant source appears as a plane wave
``exp(-j k x^T r)`` arriving from the source direction ``x``.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from sfmkl._tdesign import TABLES

logger = logging.getLogger(__name__)

POINT_SETS = ("t-design", "fibonacci")


class SceneError(ValueError):
    """Invalid scene geometry or layout request."""


def _as_points(r):
    pts = np.asarray(r, dtype=float)
    if pts.shape[-1] != 3:
        raise SceneError(f"positions must have a trailing dimension of 3, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise SceneError("positions must be finite")
    return pts


@dataclass(frozen=True)
class MicArray:
    """Ordered set of omnidirectional microphone positions, shape ``(M, 3)``."""

    positions: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.positions)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise SceneError("a microphone array needs at least one position of shape (M, 3)")
        if pts.shape[0] > 1:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.linalg.norm(diff, axis=-1)
            np.fill_diagonal(dist, np.inf)
            if dist.min() <= 0.0:
                raise SceneError("microphone positions must be pairwise distinct")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "positions", pts)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def num_mics(self):
        return self.positions.shape[0]


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = _as_points(self.center).reshape(3).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise SceneError("region radius must be positive and finite")

    def contains(self, r, tol=0.0):
        d = np.linalg.norm(np.asarray(r, dtype=float) - self.center, axis=-1)
        return d <= self.radius + tol


@dataclass(frozen=True)
class PointSource:
    position: np.ndarray
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        p = _as_points(self.position).reshape(3).copy()
        p.setflags(write=False)
        object.__setattr__(self, "position", p)
        amp = complex(self.amplitude)
        if not np.isfinite(amp):
            raise SceneError("source amplitude must be finite")
        object.__setattr__(self, "amplitude", amp)


@dataclass(frozen=True)
class Scene:
    """Monopole sources in a free field around a spherical target region."""

    sources: tuple
    speed_of_sound: float = 340.0
    target_region: Sphere = field(default_factory=lambda: Sphere(np.zeros(3), 0.4))

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not (np.isfinite(self.speed_of_sound) and self.speed_of_sound > 0):
            raise SceneError("speed of sound must be positive")
        for src in self.sources:
            if self.target_region.contains(src.position):
                raise SceneError(f"source at {src.position.tolist()} lies inside the target region")

    def wavenumber(self, frequency):
        if not frequency > 0:
            raise SceneError("frequency must be positive")
        return 2 * np.pi * frequency / self.speed_of_sound


@dataclass(frozen=True)
class Observation:
    mic_array: MicArray
    values: np.ndarray
    frequency: float
    snr_db: Optional[float] = None
    noise_seed: Optional[int] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1).copy()
        if vals.shape[0] != len(self.mic_array):
            raise SceneError("one observed value per microphone is required")
        if not self.frequency > 0:
            raise SceneError("frequency must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def fibonacci_sphere(n_points):
    """Golden-angle spiral of ``n_points`` unit vectors, shape ``(n_points, 3)``."""
    idx = np.arange(n_points) + 0.5
    z = 1.0 - 2.0 * idx / n_points
    rho = np.sqrt(1.0 - z**2)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * idx
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def unit_sphere_points(n_points, point_set="t-design"):
    if point_set not in POINT_SETS:
        raise SceneError(f"unknown point set {point_set!r}; expected one of {POINT_SETS}")
    if n_points < 1:
        raise SceneError("n_points must be at least 1")
    if point_set == "t-design":
        if n_points not in TABLES:
            raise SceneError(
                f"no embedded spherical design with {n_points} points "
                f"(available: {sorted(TABLES)}); use point_set='fibonacci'"
            )
        return TABLES[n_points][1].copy()
    return fibonacci_sphere(n_points)


def spherical_layer_layout(n_points, radius, point_set="t-design"):
    """Place ``n_points`` microphones on a sphere of ``radius`` centred at the origin.

    Parameters
    ----------
    n_points : int
    radius : float
        Layer radius in meters.
    point_set : {'t-design', 'fibonacci'}
        ``'t-design'`` uses an embedded spherical design table and raises if the
        requested size is not tabulated.

    Returns
    -------
    MicArray
    """
    if not radius > 0:
        raise SceneError("layer radius must be positive")
    dirs = unit_sphere_points(n_points, point_set)
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    return MicArray(radius * dirs)


def layered_layout(layers):
    """Stack several spherical layers given as ``(n_points, radius, point_set)`` tuples.

    A t-design request whose size is not tabulated falls back to a Fibonacci
    sphere with a warning.
    """
    blocks = []
    for n_points, radius, point_set in layers:
        if point_set == "t-design" and n_points not in TABLES:
            logger.warning("no %d-point spherical design embedded, using a Fibonacci sphere", n_points)
            point_set = "fibonacci"
        blocks.append(spherical_layer_layout(n_points, radius, point_set).positions)
    return MicArray(np.concatenate(blocks, axis=0))


def greens_field(scene, r, frequency):
    """Pressure of the scene's monopoles at ``r`` (shape ``(3,)`` or ``(N, 3)``)."""
    pts = _as_points(r)
    k = scene.wavenumber(frequency)
    total = np.zeros(pts.shape[:-1], dtype=complex)
    for src in scene.sources:
        dist = np.linalg.norm(pts - src.position, axis=-1)
        if np.any(dist == 0.0):
            raise SceneError(f"field requested at the source position {src.position.tolist()}")
        total = total + src.amplitude * np.exp(1j * k * dist) / (4 * np.pi * dist)
    if total.ndim == 0:
        return complex(total)
    return total


def complex_noise(rng, size, power):
    """Circularly symmetric complex Gaussian samples with ``E|n|^2 = power``."""
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def observe(scene, mic_array, frequency, snr_db=None, seed=None):
    """Simulate microphone signals, optionally with white Gaussian noise.

    The noise variance is set from the mean signal power over all microphones,
    ``power_noise = mean|p|^2 / 10**(snr_db / 10)``. Noise comes from
    ``numpy.random.default_rng(seed)`` (PCG64).
    """
    clean = greens_field(scene, mic_array.positions, frequency)
    if snr_db is None:
        return Observation(mic_array, clean, frequency)
    rng = np.random.default_rng(seed)
    noise_power = np.mean(np.abs(clean) ** 2) / 10 ** (snr_db / 10)
    noisy = clean + complex_noise(rng, clean.shape, noise_power)
    return Observation(mic_array, noisy, frequency, snr_db=snr_db, noise_seed=seed)


def two_monopole_scene(amplitude=20.0, speed_of_sound=340.0):
    """Two monopoles at (2.5, 0, 0) m and (0, 2.5, 1) m around a 0.40 m sphere."""
    return Scene(
        sources=(
            PointSource(np.array([2.5, 0.0, 0.0]), amplitude),
            PointSource(np.array([0.0, 2.5, 1.0]), amplitude),
        ),
        speed_of_sound=speed_of_sound,
        target_region=Sphere(np.zeros(3), 0.40),
    )


def two_layer_array(point_set="t-design"):
    """Two 25-microphone layers at radii 0.40 m and 0.45 m (M = 50)."""
    return layered_layout([(25, 0.40, point_set), (25, 0.45, point_set)])
