import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcmimo.exceptions import InvalidArgumentError, ShapeMismatchError
from ddcmimo.waveforms import (
    EffectiveChannel,
    NoiseModel,
    SymbolFrame,
    WaveformKind,
    afdm,
    afdm_default_c1,
    assemble_effective_channel,
    demodulate,
    demodulation_matrix,
    doppler_matrix_power,
    effective_op,
    modulate,
    ofdm,
    otfs,
    prefix_phase_matrix,
    shift_matrix_power,
    simulate_io,
    time_domain_op,
)


def kinds(n):
    out = [ofdm(n), afdm(n, afdm_default_c1(0.7, n), 0.013)]
    for mt in range(2, n):
        if n % mt == 0:
            out.append(otfs(mt, n // mt))
            break
    return out


def dft_loop(n):
    return np.array([[cmath.exp(-2j * math.pi * a * b / n) / math.sqrt(n) for b in range(n)] for a in range(n)])


def test_shift_matrix():
    np.testing.assert_array_equal(shift_matrix_power(5, 0), np.eye(5))
    np.testing.assert_array_equal(shift_matrix_power(2, 1), [[0, 1], [1, 0]])
    pi = np.array([[1.0 if (i == j + 1 or i == j - 3) else 0.0 for j in range(4)] for i in range(4)])
    np.testing.assert_array_equal(shift_matrix_power(4, 3), pi @ pi @ pi)
    with pytest.raises(InvalidArgumentError):
        shift_matrix_power(4, 4)


def test_doppler_matrix():
    np.testing.assert_array_equal(doppler_matrix_power(3, 0.0), np.eye(3))
    np.testing.assert_allclose(doppler_matrix_power(2, 1.0), np.diag([1, -1]), atol=1e-15)
    expected = np.diag([cmath.exp(-1j * math.pi * k / 4) for k in range(4)])
    np.testing.assert_allclose(doppler_matrix_power(4, 0.5), expected, atol=1e-15)


def test_prefix_phase():
    np.testing.assert_array_equal(prefix_phase_matrix(8, 3, ofdm(8)), np.eye(8))
    np.testing.assert_array_equal(prefix_phase_matrix(8, 0, afdm(8, 0.1)), np.eye(8))
    np.testing.assert_allclose(prefix_phase_matrix(4, 1, afdm(4, 1 / 8)), np.eye(4), atol=1e-12)
    # generic entry pattern: slot k < zeta carries exp(-j 2 pi c1 (N^2 - 2 N (zeta - k)))
    n, zeta, c1 = 8, 3, 0.0371
    d = np.diag(prefix_phase_matrix(n, zeta, afdm(n, c1)))
    for k in range(n):
        want = cmath.exp(-2j * math.pi * c1 * (n * n - 2 * n * (zeta - k))) if k < zeta else 1.0
        assert abs(d[k] - want) < 1e-12


def test_time_domain_op_examples():
    np.testing.assert_allclose(time_domain_op(6, 0, 0.0, ofdm(6)).matrix, np.eye(6))
    np.testing.assert_allclose(time_domain_op(6, 1, 0.0, ofdm(6)).matrix, shift_matrix_power(6, 1))
    g = time_domain_op(8, 3, 0.37, afdm(8, 0.1)).matrix
    explicit = prefix_phase_matrix(8, 3, afdm(8, 0.1)) @ doppler_matrix_power(8, 0.37) @ shift_matrix_power(8, 3)
    np.testing.assert_allclose(g, explicit, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(n=st.sampled_from([4, 6, 8, 12, 16]), data=st.data())
def test_singular_values_preserved(n, data):
    zeta = data.draw(st.integers(0, n - 1))
    f = data.draw(st.floats(-3, 3))
    for kind in kinds(n):
        g = time_domain_op(n, zeta, f, kind).matrix
        np.testing.assert_allclose(np.linalg.svd(g, compute_uv=False), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.svd(effective_op(g, kind), compute_uv=False), 1.0, atol=1e-10)


@pytest.mark.parametrize("n", [4, 16, 64])
def test_transforms_unitary(n):
    for kind in kinds(n):
        d = demodulation_matrix(kind)
        np.testing.assert_allclose(d @ d.conj().T, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(effective_op(np.eye(n), kind), np.eye(n), atol=1e-12)


def test_ofdm_shift_diagonalized():
    f4 = dft_loop(4)
    np.testing.assert_allclose(demodulation_matrix(ofdm(4)), f4, atol=1e-15)
    out = effective_op(shift_matrix_power(4, 1), ofdm(4))
    np.testing.assert_allclose(out, np.diag([cmath.exp(-2j * math.pi * k / 4) for k in range(4)]), atol=1e-12)


def test_modulate_examples():
    e0 = SymbolFrame(np.eye(4)[:1])
    np.testing.assert_allclose(modulate(e0, ofdm(4)), np.full((1, 4), 0.5), atol=1e-15)
    # OTFS of the identity grid against a hand-coded Kronecker product
    x_grid = np.eye(2)
    frame = SymbolFrame.from_grids([x_grid])
    f2h = dft_loop(2).conj().T
    kron = np.array([[f2h[i // 2, j // 2] * (i % 2 == j % 2) for j in range(4)] for i in range(4)])
    np.testing.assert_allclose(modulate(frame, otfs(2, 2))[0], kron @ x_grid.reshape(-1, order="F"), atol=1e-15)
    const = demodulate(np.ones((1, 4)), ofdm(4)).streams[0]
    np.testing.assert_allclose(const, [2, 0, 0, 0], atol=1e-14)
    x = SymbolFrame.random_qam(2, 8, 16, seed=3)
    np.testing.assert_allclose(demodulate(modulate(x, afdm(8, 0, 0)), ofdm(8)).streams, x.streams, atol=1e-12)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_round_trip_and_energy(n):
    x = SymbolFrame.random_qam(3, n, 4, energy=2.0, seed=n)
    for kind in kinds(n):
        t = modulate(x, kind)
        assert abs(np.sum(np.abs(t) ** 2) - np.sum(np.abs(x.streams) ** 2)) < 1e-12 * np.sum(np.abs(t) ** 2)
        np.testing.assert_allclose(demodulate(t, kind).streams, x.streams, atol=1e-12)
    with pytest.raises(ShapeMismatchError):
        modulate(x, ofdm(n + 1))


def test_kind_validation():
    with pytest.raises(InvalidArgumentError):
        WaveformKind("otfs", 8, m_tilde=3, m_tilde_prime=2)
    with pytest.raises(InvalidArgumentError):
        WaveformKind("ofdmx", 8)
    with pytest.raises(InvalidArgumentError):
        effective_op(np.eye(3), ofdm(4))
    assert afdm_default_c1(0.3, 16) == 3 / 32


def test_effective_channel_identity():
    ch = assemble_effective_channel([np.eye(2)], [(0, 0.0)], ofdm(4))
    x = np.arange(8) + 1j
    np.testing.assert_allclose(ch.apply(x), x, atol=1e-12)


@pytest.mark.parametrize("n,m", [(4, 2), (8, 3), (6, 1)])
def test_apply_matches_dense(rng, n, m):
    for kind in kinds(n):
        couplings = rng.standard_normal((3, m, m)) + 1j * rng.standard_normal((3, m, m))
        params = [(int(rng.integers(0, n)), float(rng.uniform(-1, 1))) for _ in range(3)]
        ch = assemble_effective_channel(couplings, params, kind)
        dense = sum(np.kron(h, effective_op(time_domain_op(n, z, f, kind).matrix, kind))
                    for h, (z, f) in zip(couplings, params))
        np.testing.assert_allclose(ch.dense(), dense, atol=1e-12)
        for _ in range(20):
            x = rng.standard_normal(n * m) + 1j * rng.standard_normal(n * m)
            np.testing.assert_allclose(ch.apply(x), dense @ x, atol=1e-11)
        assert abs(ch.frobenius_sq() - np.sum(np.abs(dense) ** 2)) < 1e-10 * np.sum(np.abs(dense) ** 2)


def test_apply_linearity(rng):
    ch = assemble_effective_channel(rng.standard_normal((2, 3, 3)), [(1, 0.2), (3, -0.4)], ofdm(8))
    x, y = rng.standard_normal(24), rng.standard_normal(24) * 1j
    a, b = 0.3 - 1j, 2.0
    np.testing.assert_allclose(ch.apply(a * x + b * y), a * ch.apply(x) + b * ch.apply(y), atol=1e-12)


def test_dense_cap_and_shapes(rng):
    big = EffectiveChannel(np.ones((1, 9, 9)), np.eye(64)[None], ofdm(64))
    with pytest.raises(InvalidArgumentError):
        big.dense()
    with pytest.raises(ShapeMismatchError):
        assemble_effective_channel([np.eye(2)], [(0, 0.0), (1, 0.0)], ofdm(4))
    with pytest.raises(ShapeMismatchError):
        big.apply(np.ones(10))


def test_frobenius_waveform_invariant(rng):
    n = 12
    couplings = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
    params = [(0, 0.3), (2, -0.8), (5, 1.7)]
    vals = [assemble_effective_channel(couplings, params, k).frobenius_sq() for k in kinds(n)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-12)


def test_simulate_io():
    ch = assemble_effective_channel([np.eye(2)], [(0, 0.0)], ofdm(8))
    x = SymbolFrame.random_qam(2, 8, seed=1)
    np.testing.assert_allclose(simulate_io(ch, x, NoiseModel(0.0)).streams, x.streams, atol=1e-12)
    a = simulate_io(ch, x, NoiseModel(0.5, seed=4)).streams
    b = simulate_io(ch, x, NoiseModel(0.5, seed=4)).streams
    np.testing.assert_array_equal(a, b)
    w = NoiseModel(0.7, seed=2).sample(10_000)
    assert abs(np.mean(np.abs(w) ** 2) - 0.7) < 0.05 * 0.7
    with pytest.raises(InvalidArgumentError):
        NoiseModel(-1.0)
