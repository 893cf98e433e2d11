"""Illumination fields, bucket measurements and noise.

A detection at time t_n records the single received scalar

    R_n = rho * sum_{p,q} delta_{p,q} * E_n(p, q),
    E_n(p, q) = sum_i S_i(t_n - tau_i(p, q)),

where tau_i(p, q) is the full transmitter -> pixel -> receiver delay.  With
the return leg folded into E the linear model is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .chaos import DEFAULT_MAP_COEFFICIENT, CarrierSpec, ChaoticPulseTrain, SampledWaveform
from .errors import DomainError
from .geometry import ArrayGeometry, Scene, delay_table, pixel_centers, spreading_table

__all__ = [
    "MeasurementSet",
    "SamplingPlan",
    "add_noise",
    "autocorrelate",
    "build_measurement_set",
    "field_at_pixel",
    "field_matrix",
    "mean_offpeak",
]


@dataclass(frozen=True)
class SamplingPlan:
    """Detection schedule.

    ``strictness`` is the ratio of detection spacing to coherence time; the
    plan is rejected when it falls below ``min_strictness`` (never below 1).
    """

    sample_interval: float
    n_detections: int
    coherence_time: float
    min_strictness: float = 1.0

    def __post_init__(self):
        if self.n_detections < 1:
            raise DomainError("n_detections must be >= 1")
        if not (self.sample_interval > 0 and self.coherence_time > 0):
            raise DomainError("sample_interval and coherence_time must be > 0")
        if self.min_strictness < 1:
            raise DomainError("min_strictness must be >= 1")
        # 1e-9 slack absorbs 1/f round-off at strictness exactly 1
        if self.strictness < self.min_strictness * (1 - 1e-9):
            raise DomainError(
                f"detection spacing {self.sample_interval:g} s is below "
                f"{self.min_strictness:g} x coherence time {self.coherence_time:g} s"
            )

    @property
    def strictness(self) -> float:
        return self.sample_interval / self.coherence_time

    @classmethod
    def from_rate(cls, sampling_frequency, n_detections, bandwidth, min_strictness=1.0):
        return cls(1.0 / sampling_frequency, int(n_detections), 1.0 / bandwidth, min_strictness)


@dataclass(frozen=True)
class MeasurementSet:
    """Field matrix E (N x P*Q), received vector R (N) and scale rho.

    Columns of E follow the row-major flattening of the scene grid, whose
    shape is kept in ``grid_shape``.  ``snr_db`` is None for noiseless data.
    """

    field_matrix: np.ndarray = field(repr=False)
    received: np.ndarray = field(repr=False)
    rho: float
    detection_times: np.ndarray = field(repr=False)
    grid_shape: tuple
    snr_db: float | None = None
    seed: int | None = None
    noise_seed: int | None = None

    def __post_init__(self):
        E = np.asarray(self.field_matrix, dtype=complex)
        R = np.asarray(self.received, dtype=complex)
        t = np.asarray(self.detection_times, dtype=float)
        if E.ndim != 2 or R.shape != (E.shape[0],) or t.shape != (E.shape[0],):
            raise DomainError("field_matrix rows, received and detection_times must agree")
        if int(np.prod(self.grid_shape)) != E.shape[1]:
            raise DomainError("field_matrix columns must match the grid size")
        for arr in (E, R, t):
            arr.setflags(write=False)
        object.__setattr__(self, "field_matrix", E)
        object.__setattr__(self, "received", R)
        object.__setattr__(self, "detection_times", t)
        object.__setattr__(self, "grid_shape", tuple(int(v) for v in self.grid_shape))

    @property
    def n_detections(self) -> int:
        return self.field_matrix.shape[0]


def field_at_pixel(waveforms, geometry: ArrayGeometry, pixel, t, spreading_loss=False):
    """Total field sum_i S_i(t - tau_i) seen through ``pixel`` at time ``t``.

    ``waveforms`` holds one callable per transmitter: a
    :class:`SampledWaveform` (nearest-sample lookup) or a
    :class:`ChaoticPulseTrain` (exact evaluation).
    """
    if len(waveforms) != geometry.n_tx:
        raise DomainError(f"expected {geometry.n_tx} waveforms, got {len(waveforms)}")
    pixel = np.asarray(pixel, dtype=float)[None]
    tau = delay_table(geometry, pixel)[:, 0]
    gain = spreading_table(geometry, pixel)[:, 0] if spreading_loss else np.ones(geometry.n_tx)
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape, dtype=complex)
    for w, ti, g in zip(waveforms, tau, gain):
        total = total + g * w(t - ti)
    return total[()] if total.ndim == 0 else total


def field_matrix(trains, geometry: ArrayGeometry, points, times, spreading_loss=False) -> np.ndarray:
    """Fields at ``points`` for every time in ``times``, shape (len(times), len(points))."""
    tau = delay_table(geometry, points)
    times = np.asarray(times, dtype=float)
    E = np.zeros((times.size, tau.shape[1]), dtype=complex)
    gain = spreading_table(geometry, points) if spreading_loss else None
    for i, train in enumerate(trains):
        contrib = train(times[:, None] - tau[i][None, :])
        if gain is not None:
            contrib *= gain[i][None, :]
        E += contrib
    return E


def detection_times(scene: Scene, geometry: ArrayGeometry, plan: SamplingPlan) -> np.ndarray:
    """Detection instants, starting on the first grid tick after every echo has arrived."""
    tau_max = delay_table(geometry, pixel_centers(scene)).max()
    start = math.ceil(tau_max / plan.sample_interval) * plan.sample_interval
    return start + np.arange(plan.n_detections) * plan.sample_interval


def pulses_needed(times, carrier: CarrierSpec) -> int:
    return int(np.floor(np.max(times) / carrier.pulse_width)) + 1


def build_measurement_set(
    scene: Scene,
    geometry: ArrayGeometry,
    carrier: CarrierSpec,
    plan: SamplingPlan,
    seed: int,
    rho: float = 1.0,
    chip_interval: float | None = None,
    a: float = DEFAULT_MAP_COEFFICIENT,
    max_pulses: int = 64,
    spreading_loss: bool = False,
) -> MeasurementSet:
    """Simulate N detections of ``scene`` and assemble the linear system.

    Detections past the end of one pulse fall into the next, which carries
    fresh chaotic chips derived from ``seed``.

    Raises:
        DomainError: if the detections need more than ``max_pulses`` pulses.
    """
    times = detection_times(scene, geometry, plan)
    n_pulses = pulses_needed(times, carrier)
    if n_pulses > max_pulses:
        raise DomainError(f"{plan.n_detections} detections need {n_pulses} pulses, budget is {max_pulses}")
    trains = ChaoticPulseTrain.from_seed(seed, geometry.n_tx, n_pulses, carrier, chip_interval, a)
    E = field_matrix(trains, geometry, pixel_centers(scene), times, spreading_loss)
    received = rho * (E @ scene.coefficients.ravel())
    return MeasurementSet(E, received, float(rho), times, scene.shape, None, seed)


def add_noise(ms: MeasurementSet, snr_db: float, seed: int) -> MeasurementSet:
    """Add circular complex Gaussian noise to the received vector only.

    The noise variance is ``mean(|R|^2) / 10**(snr_db / 10)``.  An infinite
    SNR returns the data unchanged.
    """
    power = float(np.mean(np.abs(ms.received) ** 2))
    if power == 0:
        raise DomainError("received vector is all zero; SNR is undefined")
    if math.isinf(snr_db) and snr_db > 0:
        return replace(ms, snr_db=None, noise_seed=None)
    variance = power / 10.0 ** (snr_db / 10.0)
    # Philox is counter based: the stream depends only on the seed
    rng = np.random.Generator(np.random.Philox(seed))
    noise = rng.standard_normal((ms.n_detections, 2)) @ np.array([1.0, 1j])
    noisy = ms.received + math.sqrt(variance / 2.0) * noise
    return replace(ms, received=noisy, snr_db=float(snr_db), noise_seed=seed)


def autocorrelate(signal, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation magnitude at lags 0..max_lag.

    Each lag is normalized over its own overlap,
    ``|sum s[n+k] s*[n]| / sqrt(sum |s[n]|^2 * sum |s[n+k]|^2)``,
    so lag 0 is exactly 1 and a constant signal gives 1 everywhere.
    """
    s = signal.samples if isinstance(signal, SampledWaveform) else np.asarray(signal, dtype=complex)
    if max_lag < 0 or s.size <= max_lag:
        raise DomainError(f"signal of length {s.size} too short for max_lag={max_lag}")
    p = np.abs(s) ** 2
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        a, b = s[: s.size - k], s[k:]
        denom = math.sqrt(p[: s.size - k].sum() * p[k:].sum())
        if denom == 0:
            raise DomainError("signal has zero energy over the overlap")
        out[k] = abs(np.vdot(a, b)) / denom
    out[0] = 1.0
    return out


def mean_offpeak(acf) -> float:
    """Mean autocorrelation magnitude over nonzero lags."""
    return float(np.mean(np.asarray(acf)[1:]))
