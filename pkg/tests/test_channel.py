import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcmimo.channel import (
    SPEED_OF_LIGHT,
    Aperture,
    Path,
    Scene,
    SceneSamplingParams,
    greens_dyadic_exact,
    greens_dyadic_far_field,
    normalize_delay_doppler,
    path_gain,
    polarization_operator,
    sample_scene,
    scene_from_text,
    scene_to_text,
    spacetime_kernel,
    spatial_kernel,
    transverse_projector,
)
from ddcmimo.exceptions import InvalidArgumentError, SingularityError

from conftest import desk_scene, hand_path, unit

unit_vectors = st.tuples(*(st.floats(-1, 1) for _ in range(3))).filter(lambda v: np.linalg.norm(v) > 0.1).map(unit)


def test_projector_examples():
    np.testing.assert_allclose(transverse_projector([0, 0, 1]), np.diag([1, 1, 0]))
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(transverse_projector([s, s, 0]), [[0.5, -0.5, 0], [-0.5, 0.5, 0], [0, 0, 1]], atol=1e-15)
    with pytest.raises(InvalidArgumentError):
        transverse_projector([1, 1, 0])


@settings(max_examples=50, deadline=None)
@given(k=unit_vectors)
def test_projector_properties(k):
    p = transverse_projector(k)
    assert np.linalg.norm(p @ k) < 1e-14
    np.testing.assert_allclose(p, p.T, atol=1e-15)
    np.testing.assert_allclose(p @ p, p, atol=1e-14)
    assert np.linalg.matrix_rank(p, tol=1e-10) == 2


def test_polarization_operator_oracle(rng):
    gamma = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    kt, kr = unit(rng.standard_normal(3)), unit(rng.standard_normal(3))
    pr = [[(i == j) - kr[i] * kr[j] for j in range(3)] for i in range(3)]
    pt = [[(i == j) - kt[i] * kt[j] for j in range(3)] for i in range(3)]
    brute = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            brute[i, j] = sum(pr[i][a] * gamma[a, b] * pt[b][j] for a in range(3) for b in range(3))
    xi = polarization_operator(gamma, kt, kr)
    np.testing.assert_allclose(xi, brute, atol=1e-14)
    assert np.linalg.norm(kr @ xi) < 1e-12 and np.linalg.norm(xi @ kt) < 1e-12
    np.testing.assert_allclose(polarization_operator(np.eye(3), [0, 0, 1], [0, 0, 1]), np.diag([1, 1, 0]))
    with pytest.raises(InvalidArgumentError):
        polarization_operator(gamma, [1, 1, 1], kr)


def test_path_gain_examples():
    assert abs(path_gain(1, 1, 1) - 6.332574e-3) < 1e-9
    assert abs(path_gain(10, 10, 1) - 6.332574e-5) < 1e-11
    assert abs(path_gain(3, 7, 4) - path_gain(3, 7, 1) / 2) < 1e-18
    with pytest.raises(InvalidArgumentError):
        path_gain(0, 1, 1)


def test_path_validation():
    gamma = np.eye(3)
    with pytest.raises(InvalidArgumentError):
        hand_path([1, 0, 0], [0, 1, 0], gamma, gain=-1.0)
    with pytest.raises(InvalidArgumentError):
        hand_path([1, 0, 0], [0, 1, 0], gamma, delay_s=-1e-6)
    with pytest.raises(InvalidArgumentError):
        Path(0.0, 0.0, 1.0, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), gamma, gamma, 1.0, 1.0)


def test_scene_wavelength():
    s = desk_scene(0)
    assert abs(s.wavelength_m - 2.99792458e8 / 2.4e9) <= 1e-9 * s.wavelength_m
    assert SPEED_OF_LIGHT == 2.99792458e8


def test_sample_scene_determinism_and_bounds():
    p = SceneSamplingParams(n_paths=50, seed=11)
    s1, s2 = sample_scene(p), sample_scene(p)
    assert scene_to_text(s1) == scene_to_text(s2)
    bound = 2 * (p.r_max_m + s1.separation_m) / SPEED_OF_LIGHT
    assert max(pth.delay_s for pth in s1.paths) <= bound
    max_dopp = 2 * p.v_max_mps / s1.wavelength_m
    for pth in s1.paths:
        assert abs(pth.doppler_hz) <= max_dopp
        assert abs(pth.delay_s - (pth.d_tx_m + pth.d_rx_m) / SPEED_OF_LIGHT) < 1e-18
        assert abs(pth.gain - path_gain(pth.d_tx_m, pth.d_rx_m, 50)) < 1e-20
        assert np.linalg.norm(pth.k_rx @ pth.xi) < 1e-12 and np.linalg.norm(pth.xi @ pth.k_tx) < 1e-12
    static = sample_scene(SceneSamplingParams(n_paths=5, v_max_mps=0.0, seed=3))
    assert all(pth.doppler_hz == 0.0 for pth in static.paths)


def test_spatial_kernel_examples(rng):
    pth = hand_path([0.3, 0.9, 0.1], [0.2, -0.95, 0.3], rng.standard_normal((3, 3)))
    scene = Scene((pth,))
    np.testing.assert_allclose(spatial_kernel(scene, np.zeros(3), np.zeros(3)), pth.gain * pth.xi, atol=1e-18)
    k0 = np.abs(spatial_kernel(scene, [0.1, 0, -0.2], [0.05, 0, 0.2]))
    k1 = np.abs(spatial_kernel(scene, [-0.2, 0, 0.1], [0.1, 0, -0.1]))
    np.testing.assert_allclose(k0, k1, rtol=1e-12)


def test_spatial_kernel_term_by_term(rng):
    paths = [
        hand_path([0.1, 1, 0.2], [0.3, -1, 0.1], rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)), 2e-3),
        hand_path([-0.4, 1, 0.0], [0.0, -1, -0.5], rng.standard_normal((3, 3)), 5e-4),
    ]
    scene = Scene(tuple(paths))
    r, s = np.array([0.1, 0, 0.2]), np.array([-0.2, 0, 0.05])
    kappa = 2 * math.pi * scene.carrier_hz / 2.99792458e8
    brute = np.zeros((3, 3), dtype=complex)
    for p in paths:
        ph_r = sum(p.k_rx[i] * r[i] for i in range(3))
        ph_t = sum(p.k_tx[i] * s[i] for i in range(3))
        brute += p.gain * p.xi * complex(math.cos(kappa * ph_r), math.sin(kappa * ph_r)) * complex(
            math.cos(kappa * ph_t), math.sin(kappa * ph_t))
    np.testing.assert_allclose(spatial_kernel(scene, r, s), brute, rtol=1e-12, atol=1e-18)
    # additivity over single-path sub-scenes
    parts = sum(spatial_kernel(Scene((p,)), r, s) for p in paths)
    np.testing.assert_allclose(spatial_kernel(scene, r, s), parts, rtol=1e-12, atol=1e-18)


def test_translation_invariance_only_single_path():
    s1 = desk_scene(5, n_paths=1)
    r, s, off = np.array([0.1, 0, 0.05]), np.array([-0.1, 0, 0.2]), np.array([0.07, 0, -0.03])
    n0 = np.linalg.norm(spatial_kernel(s1, r, s))
    n1 = np.linalg.norm(spatial_kernel(s1, r + off, s + off))
    assert abs(n0 - n1) <= 1e-12 * n0
    s2 = desk_scene(5, n_paths=2)
    n0 = np.linalg.norm(spatial_kernel(s2, r, s))
    n1 = np.linalg.norm(spatial_kernel(s2, r + off, s + off))
    assert abs(n0 - n1) > 1e-6 * n0


def test_spacetime_kernel():
    paths = [hand_path([0, 1, 0], [0, -1, 0.1], np.eye(3), delay_s=0.0, doppler_hz=250.0),
             hand_path([0.2, 1, 0], [0.1, -1, 0], np.eye(3), delay_s=1e-7, doppler_hz=-40.0)]
    scene = Scene(tuple(paths))
    r, s = np.array([0.1, 0, 0.0]), np.array([0.0, 0, 0.1])
    np.testing.assert_allclose(spacetime_kernel(scene, r, s, 0.0, 0.0), spatial_kernel(scene, r, s), atol=1e-18)
    assert not np.any(spacetime_kernel(scene, r, s, 5e-6, 0.0))
    single = Scene((paths[0],))
    t = 1 / (2 * 250.0)
    np.testing.assert_allclose(spacetime_kernel(single, r, s, 0.0, t), -spacetime_kernel(single, r, s, 0.0, 0.0),
                               atol=1e-15)


def test_normalize_delay_doppler():
    assert normalize_delay_doppler(5e-6, 0.0, 1e6, 64) == (5, 0.0, False)
    assert normalize_delay_doppler(1e-6, 976.5625, 1e6, 64).f == 0.0625
    idx = normalize_delay_doppler(100e-6, 0.0, 1e6, 16)
    assert idx.zeta == 15 and idx.out_of_band
    with pytest.raises(InvalidArgumentError):
        normalize_delay_doppler(0.0, 0.0, 0.0, 4)


def _scalar_green(a, b, kappa):
    r = np.linalg.norm(a - b)
    return np.exp(-1j * kappa * r) / (4 * math.pi * r)


def test_greens_exact_matches_finite_difference_hessian():
    kappa = 50.0
    b = np.array([0.01, -0.02, 0.03])
    a = b + np.array([0.05, 0.08, -0.04])
    h = 1e-5
    hess = np.zeros((3, 3), dtype=complex)
    e = np.eye(3)
    for i in range(3):
        for j in range(3):
            hess[i, j] = (
                _scalar_green(a + h * e[i] + h * e[j], b, kappa) - _scalar_green(a + h * e[i] - h * e[j], b, kappa)
                - _scalar_green(a - h * e[i] + h * e[j], b, kappa) + _scalar_green(a - h * e[i] - h * e[j], b, kappa)
            ) / (4 * h * h)
    oracle = _scalar_green(a, b, kappa) * np.eye(3) + hess / kappa**2
    exact = greens_dyadic_exact(a, b, kappa)
    assert np.linalg.norm(exact - oracle) / np.linalg.norm(oracle) < 1e-6


def test_greens_far_field_and_symmetry():
    kappa = 2 * math.pi / 0.125
    d = unit([0.3, 0.5, 0.8])
    dists = []
    for kr in (10, 1e2, 1e3, 1e4, 1e6):
        a = d * kr / kappa
        ex = greens_dyadic_exact(a, np.zeros(3), kappa)
        np.testing.assert_allclose(ex, ex.T, atol=1e-12 * np.abs(ex).max())
        dists.append(np.linalg.norm(ex - greens_dyadic_far_field(a, np.zeros(3), kappa)) / np.linalg.norm(ex))
    assert all(x > y for x, y in zip(dists, dists[1:]))
    assert dists[-1] < 1e-5
    with pytest.raises(SingularityError):
        greens_dyadic_exact(np.ones(3), np.ones(3), kappa)


def test_scene_text_round_trip():
    s = sample_scene(SceneSamplingParams(n_paths=4, seed=9), tx_aperture=Aperture(0.3, 0.4))
    back = scene_from_text(scene_to_text(s))
    assert scene_to_text(back) == scene_to_text(s)
    for p, q in zip(s.paths, back.paths):
        np.testing.assert_array_equal(p.xi, q.xi)
        assert p.delay_s == q.delay_s and p.doppler_hz == q.doppler_hz
    assert back.tx_aperture == Aperture(0.3, 0.4)
