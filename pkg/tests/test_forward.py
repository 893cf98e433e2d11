import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mwgi.chaos import CarrierSpec, ChaoticPulseTrain, SampledWaveform
from mwgi.errors import DomainError
from mwgi.forward import (
    MeasurementSet,
    SamplingPlan,
    add_noise,
    autocorrelate,
    build_measurement_set,
    detection_times,
    field_at_pixel,
    field_matrix,
    mean_offpeak,
    pulses_needed,
)
from mwgi.geometry import (
    ArrayGeometry,
    Scene,
    TargetSpec,
    build_square_array,
    delay_table,
    paint_targets,
    pixel_centers,
)

PLAN = SamplingPlan.from_rate(500e6, 36, 2e9)


def _wave(values, dt=1e-10):
    return SampledWaveform(np.asarray(values, dtype=complex), dt)


def test_field_at_pixel_zero_waveform():
    g = build_square_array(1, 1.0, 1.0)
    assert field_at_pixel([_wave(np.zeros(1000))], g, [0.1, 0.0, 0.0], 50e-9) == 0


def test_field_at_pixel_identity_path():
    # transmitter, pixel and receiver coincide: zero delay
    g = build_square_array(1, 1.0, 1e-9)
    w = _wave(np.arange(1, 11))
    assert field_at_pixel([w], g, [0.0, 0.0, 1e-9], 0.0) == pytest.approx(1.0)


def test_field_at_pixel_superposition_of_identical_waves():
    g = build_square_array(2, 1.0, 1.0)  # both transmitters equidistant from the axis
    w = _wave(np.exp(1j * np.arange(1000)))
    pixel = [0.0, 0.0, 0.0]
    first = ArrayGeometry(g.tx_positions[:1], g.rx_position, g.standoff, g.array_side)
    one = field_at_pixel([w], first, pixel, 40e-9)
    both = field_at_pixel([w, w], g, pixel, 40e-9)
    assert both == pytest.approx(2 * one)


def test_field_at_pixel_before_support_raises(carrier):
    g = build_square_array(4, 4.0, 1.0)
    trains = ChaoticPulseTrain.from_seed(0, 4, 1, carrier)
    with pytest.raises(DomainError):
        field_at_pixel(trains, g, [0.0, 0.0, 0.0], 1e-9)
    with pytest.raises(DomainError):
        field_at_pixel(trains[:3], g, [0.0, 0.0, 0.0], 20e-9)


def test_field_at_pixel_matches_field_matrix(carrier, small_setup):
    grid, g = small_setup
    trains = ChaoticPulseTrain.from_seed(4, g.n_tx, 1, carrier)
    pts = pixel_centers(grid)
    times = 30e-9 + np.arange(5) * 2e-9
    E = field_matrix(trains, g, pts, times)
    for k in (0, 7, 35):
        np.testing.assert_allclose(field_at_pixel(trains, g, pts[k], times), E[:, k], rtol=1e-13)


def test_superposition_over_antennas(carrier, small_setup):
    grid, g = small_setup
    trains = ChaoticPulseTrain.from_seed(2, g.n_tx, 1, carrier)
    pts = pixel_centers(grid)
    times = 30e-9 + np.arange(10) * 2e-9
    total = field_matrix(trains, g, pts, times)
    parts = sum(
        field_matrix([t], ArrayGeometry(g.tx_positions[i:i + 1], g.rx_position, g.standoff, g.array_side), pts, times)
        for i, t in enumerate(trains)
    )
    np.testing.assert_allclose(total, parts, rtol=1e-12, atol=1e-14)


def test_table2_plan():
    plan = SamplingPlan.from_rate(500e6, 10, 2e9)
    assert plan.coherence_time == 0.5e-9
    assert plan.sample_interval == pytest.approx(2e-9)
    assert plan.strictness == pytest.approx(4.0)
    with pytest.raises(DomainError):
        SamplingPlan.from_rate(4e9, 10, 2e9)
    with pytest.raises(DomainError):
        SamplingPlan.from_rate(500e6, 10, 2e9, min_strictness=8)


def test_detection_times_follow_last_echo(small_setup):
    grid, g = small_setup
    t = detection_times(grid, g, PLAN)
    assert np.allclose(np.diff(t), 2e-9)
    assert t[0] >= delay_table(g, pixel_centers(grid)).max()
    assert t[0] - 2e-9 < delay_table(g, pixel_centers(grid)).max()


def test_all_zero_scene(carrier, small_setup):
    grid, g = small_setup
    ms = build_measurement_set(grid, g, carrier, PLAN, seed=0)
    assert np.all(ms.received == 0)
    assert np.any(ms.field_matrix != 0)


def test_single_pixel_scene(carrier):
    scene = Scene(np.ones((1, 1)), 0.015)
    g = build_square_array(4, 4.0, 1.0)
    ms = build_measurement_set(scene, g, carrier, SamplingPlan.from_rate(500e6, 50, 2e9), seed=1)
    np.testing.assert_array_equal(ms.received, ms.field_matrix[:, 0])


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    rows=st.integers(1, 5),
    cols=st.integers(1, 5),
    n_tx=st.integers(1, 8),
    side=st.floats(0.2, 5.0),
    standoff=st.floats(0.3, 3.0),
    rho=st.floats(0.1, 10.0),
)
def test_noiseless_consistency(seed, rows, cols, n_tx, side, standoff, rho):
    coef = np.random.default_rng(seed).uniform(0, 1, (rows, cols))
    scene = Scene(coef, 0.02)
    g = build_square_array(n_tx, side, standoff)
    ms = build_measurement_set(scene, g, CarrierSpec(), SamplingPlan.from_rate(500e6, 40, 2e9), seed, rho=rho)
    expected = rho * ms.field_matrix @ coef.ravel()
    assert np.linalg.norm(ms.received - expected) <= 1e-12 * np.linalg.norm(expected)
    assert ms.snr_db is None


def test_linearity(carrier, small_setup, rng):
    grid, g = small_setup
    s1, s2 = rng.uniform(0, 1, (2, *grid.shape))
    alpha, beta = 0.7, 2.3
    r = [build_measurement_set(grid.with_coefficients(s), g, carrier, PLAN, seed=5).received
         for s in (s1, s2, alpha * s1 + beta * s2)]
    np.testing.assert_allclose(r[2], alpha * r[0] + beta * r[1], rtol=1e-12, atol=1e-12)


def test_multi_pulse_rollover(carrier):
    scene = paint_targets(Scene.empty(4, 4, 0.015), [TargetSpec(1, 3, 1, 3)])
    g = build_square_array(4, 4.0, 1.0)
    plan = SamplingPlan.from_rate(500e6, 3000, 2e9)
    ms = build_measurement_set(scene, g, carrier, plan, seed=0)
    assert pulses_needed(ms.detection_times, carrier) == 3
    short = build_measurement_set(scene, g, carrier, SamplingPlan.from_rate(500e6, 1000, 2e9), seed=0)
    np.testing.assert_array_equal(ms.field_matrix[:1000], short.field_matrix)
    with pytest.raises(DomainError):
        build_measurement_set(scene, g, carrier, plan, seed=0, max_pulses=2)


def test_measurement_set_validation():
    with pytest.raises(DomainError):
        MeasurementSet(np.ones((3, 4)), np.ones(2), 1.0, np.arange(3.0), (2, 2))
    with pytest.raises(DomainError):
        MeasurementSet(np.ones((3, 4)), np.ones(3), 1.0, np.arange(3.0), (3, 3))


def _noise_case(n=10_000):
    rng = np.random.default_rng(0)
    R = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return MeasurementSet(np.ones((n, 1)), R, 1.0, np.arange(n) * 1e-9, (1, 1))


def test_noise_infinite_snr_is_identity():
    ms = _noise_case(100)
    out = add_noise(ms, math.inf, seed=3)
    np.testing.assert_array_equal(out.received, ms.received)
    assert out.snr_db is None


def test_noise_power_at_0db():
    ms = _noise_case()
    out = add_noise(ms, 0.0, seed=11)
    noise = out.received - ms.received
    ratio = np.mean(np.abs(noise) ** 2) / np.mean(np.abs(ms.received) ** 2)
    assert abs(ratio - 1) < 0.05
    np.testing.assert_array_equal(out.field_matrix, ms.field_matrix)


def test_noise_determinism_and_seed_dependence():
    ms = _noise_case(500)
    a, b, c = add_noise(ms, 10, 7), add_noise(ms, 10, 7), add_noise(ms, 10, 8)
    np.testing.assert_array_equal(a.received, b.received)
    assert not np.array_equal(a.received, c.received)
    assert a.snr_db == 10 and a.noise_seed == 7


def test_noise_rejects_zero_signal():
    ms = MeasurementSet(np.ones((5, 1)), np.zeros(5), 1.0, np.arange(5.0), (1, 1))
    with pytest.raises(DomainError):
        add_noise(ms, 10, 0)


def test_autocorrelate_examples():
    rng = np.random.default_rng(1)
    s = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    acf = autocorrelate(s, 10)
    assert acf[0] == 1.0 and acf.shape == (11,)
    np.testing.assert_allclose(autocorrelate(np.full(50, 2 - 1j), 5), 1.0)
    assert autocorrelate(_wave(np.full(20, 3.0)), 3)[2] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        autocorrelate(np.ones(5), 5)
    with pytest.raises(DomainError):
        autocorrelate(np.zeros(10), 2)


def test_autocorrelate_500mhz_below_4ghz(carrier):
    [train] = ChaoticPulseTrain.from_seed(0, 1, 1, carrier)
    n = 1000
    gi = mean_offpeak(autocorrelate(train.sample(2e-9, n), 16))
    ny = mean_offpeak(autocorrelate(train.sample(0.25e-9, n), 16))
    assert gi < ny


def _successive_row_corr(E):
    a, b = E[:-1], E[1:]
    num = np.abs(np.sum(a.conj() * b, axis=1))
    den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    return float(np.mean(num / den))


def test_successive_rows_less_correlated_at_500mhz(carrier):
    grid = Scene.empty(8, 8, 0.015)
    g = build_square_array(4, 4.0, 1.0)
    pts = pixel_centers(grid)
    wins = 0
    for seed in range(20):
        trains = ChaoticPulseTrain.from_seed(seed, 4, 1, carrier)
        t0 = 20e-9
        slow = field_matrix(trains, g, pts, t0 + np.arange(200) * 2e-9)
        fast = field_matrix(trains, g, pts, t0 + np.arange(200) * 0.25e-9)
        wins += _successive_row_corr(slow) < _successive_row_corr(fast)
    assert wins == 20
