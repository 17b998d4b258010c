import numpy as np
import pytest

from sfmkl.scene import (
    MicArray,
    PointSource,
    Scene,
    SceneError,
    Sphere,
    greens_field,
    layered_layout,
    observe,
    spherical_layer_layout,
)
from sfmkl._tdesign import TABLES


def test_tdesign_layout_radius():
    arr = spherical_layer_layout(25, 0.40, "t-design")
    assert len(arr) == 25
    np.testing.assert_allclose(np.linalg.norm(arr.positions, axis=1), 0.40, rtol=1e-12)


def test_single_point_fibonacci():
    arr = spherical_layer_layout(1, 1.0, "fibonacci")
    assert arr.positions.shape == (1, 3)
    assert np.linalg.norm(arr.positions[0]) == pytest.approx(1.0, rel=1e-12)


def test_fibonacci_points_distinct():
    pos = spherical_layer_layout(25, 0.45, "fibonacci").positions
    for i in range(25):
        for j in range(i + 1, 25):
            assert np.linalg.norm(pos[i] - pos[j]) > 0


@pytest.mark.parametrize("n", [1, 7, 25, 64])
def test_layout_radial_invariant(n):
    pos = spherical_layer_layout(n, 0.37, "fibonacci").positions
    np.testing.assert_allclose(np.linalg.norm(pos, axis=1), 0.37, rtol=1e-12)


def _sphere_moment(a, b, c):
    if a % 2 or b % 2 or c % 2:
        return 0.0
    dfact = lambda n: float(np.prod(np.arange(n, 0, -2))) if n > 0 else 1.0
    return dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1)


def test_embedded_table_is_a_design():
    t, pts = TABLES[25]
    for a in range(t + 1):
        for b in range(t + 1 - a):
            for c in range(t + 1 - a - b):
                got = np.mean(pts[:, 0] ** a * pts[:, 1] ** b * pts[:, 2] ** c)
                assert got == pytest.approx(_sphere_moment(a, b, c), abs=1e-14)


def test_unknown_point_set():
    with pytest.raises(SceneError):
        spherical_layer_layout(25, 0.4, "lebedev")


def test_missing_design_size():
    with pytest.raises(SceneError):
        spherical_layer_layout(24, 0.4, "t-design")


def test_layered_layout_falls_back(caplog):
    arr = layered_layout([(24, 0.4, "t-design"), (25, 0.45, "t-design")])
    assert len(arr) == 49
    assert "Fibonacci" in caplog.text


def test_duplicate_positions_rejected():
    with pytest.raises(SceneError):
        MicArray(np.array([[0.1, 0, 0], [0.1, 0, 0]]))


def test_source_inside_region_rejected():
    with pytest.raises(SceneError):
        Scene((PointSource(np.array([0.1, 0, 0]), 1.0),), 340.0, Sphere(np.zeros(3), 0.4))


def test_green_normalisation():
    d = 1 / (4 * np.pi)
    sc = Scene((PointSource(np.array([d, 0, 0]), 1.0),), 340.0, Sphere(np.array([5.0, 0, 0]), 0.1))
    val = greens_field(sc, np.zeros(3), 1e-6)
    assert abs(val) == pytest.approx(1.0, rel=1e-9)


def test_green_two_monopole_scene_at_origin(scene):
    # Independent one-line evaluation: sum 20 exp(jkd) / (4 pi d) for d = 2.5, sqrt(7.25).
    expected = complex(-0.05892032215105042, -0.004609571682210767)
    got = greens_field(scene, np.zeros(3), 900.0)
    assert got == pytest.approx(expected, abs=1e-15)


def test_green_superposition(scene, mics):
    one = Scene(scene.sources[:1], 340.0, scene.target_region)
    two = Scene(scene.sources[1:], 340.0, scene.target_region)
    both = observe(scene, mics, 700.0).values
    np.testing.assert_allclose(both, observe(one, mics, 700.0).values + observe(two, mics, 700.0).values,
                               rtol=1e-13, atol=1e-16)


def test_green_depends_on_distance_only(rng):
    src = np.array([2.0, 0.5, -0.3])
    sc = Scene((PointSource(src, 3.0 - 1.0j),), 340.0, Sphere(np.zeros(3), 0.4))
    r = rng.uniform(-0.3, 0.3, 3)
    d = np.linalg.norm(r - src)
    # Rotate r about the source: same distance, same value.
    R = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    r2 = src + R @ (r - src)
    assert greens_field(sc, r, 500.0) == pytest.approx(greens_field(sc, r2, 500.0), abs=1e-14)
    assert abs(greens_field(sc, r, 500.0)) == pytest.approx(abs(3.0 - 1.0j) / (4 * np.pi * d), rel=1e-12)


def test_green_singular_at_source(scene):
    with pytest.raises(SceneError):
        greens_field(scene, scene.sources[0].position, 900.0)


def test_observe_noiseless_is_clean(scene, mics):
    obs = observe(scene, mics, 900.0)
    np.testing.assert_array_equal(obs.values, greens_field(scene, mics.positions, 900.0))
    assert obs.snr_db is None


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_observe_empirical_snr(scene, mics, seed):
    clean = observe(scene, mics, 900.0).values
    noisy = observe(scene, mics, 900.0, snr_db=20.0, seed=seed).values
    noise = noisy - clean
    snr = 10 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noise) ** 2))
    assert abs(snr - 20.0) <= 1.5


def test_observe_seeded_determinism(scene, mics):
    a = observe(scene, mics, 900.0, snr_db=20.0, seed=7)
    b = observe(scene, mics, 900.0, snr_db=20.0, seed=7)
    assert a.values.tobytes() == b.values.tobytes()
    c = observe(scene, mics, 900.0, snr_db=20.0, seed=8)
    assert not np.array_equal(a.values, c.values)
