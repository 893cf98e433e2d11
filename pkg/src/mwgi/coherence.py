"""Coherence time, coherence-size bounds and measured spatial correlation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chaos import DEFAULT_MAP_COEFFICIENT, CarrierSpec, ChaoticPulseTrain
from .errors import DomainError, WidthUnresolvedError
from .forward import SamplingPlan, detection_times, field_matrix, pulses_needed
from .geometry import SPEED_OF_LIGHT, ArrayGeometry, Scene, pixel_centers

__all__ = [
    "CoherenceReport",
    "coherence_report",
    "coherence_size_bounds",
    "coherence_time",
    "correlation_profile",
    "correlation_width",
    "spatial_correlation_map",
]

DEFAULT_DETECTION_INTERVAL = 2e-9


def coherence_time(bandwidth: float) -> float:
    if not bandwidth > 0:
        raise DomainError(f"bandwidth must be > 0, got {bandwidth!r}")
    return 1.0 / bandwidth


def coherence_size_bounds(standoff: float, wavelength: float, array_side: float) -> tuple[float, float]:
    """Return ``(R lambda / 2b, R lambda / b)``.

    The lower value is the two-point-source case, the upper one a
    continuous line source of the same extent.
    """
    for name, v in (("standoff", standoff), ("wavelength", wavelength), ("array_side", array_side)):
        if not v > 0:
            raise DomainError(f"{name} must be > 0, got {v!r}")
    upper = standoff * wavelength / array_side
    return upper / 2.0, upper


@dataclass(frozen=True)
class CoherenceReport:
    coherence_time: float
    wavelength: float
    dc_lower: float
    dc_upper: float
    measured_width: float | None = None

    def within_factor(self, factor: float = 2.0) -> bool:
        """Whether the measured width lies in ``[dc_lower / factor, dc_upper * factor]``."""
        if self.measured_width is None:
            return False
        return self.dc_lower / factor <= self.measured_width <= self.dc_upper * factor


def coherence_report(carrier: CarrierSpec, standoff: float, array_side: float, measured_width=None) -> CoherenceReport:
    # quasi-monochromatic bound: use the center frequency even for chirps
    wavelength = SPEED_OF_LIGHT / carrier.center_frequency
    lo, hi = coherence_size_bounds(standoff, wavelength, array_side)
    return CoherenceReport(coherence_time(carrier.bandwidth), wavelength, lo, hi, measured_width)


def _pearson_magnitude(E: np.ndarray, ref_col: int) -> np.ndarray:
    centered = E - E.mean(axis=0, keepdims=True)
    norms = np.sqrt(np.sum(np.abs(centered) ** 2, axis=0))
    if np.any(norms == 0):
        bad = int(np.flatnonzero(norms == 0)[0])
        raise DomainError(f"field series at flattened pixel {bad} has zero variance")
    ref = centered[:, ref_col]
    corr = np.abs(ref.conj() @ centered) / (norms * norms[ref_col])
    corr[ref_col] = 1.0
    return corr


def spatial_correlation_map(
    geometry: ArrayGeometry,
    carrier: CarrierSpec,
    scene_grid: Scene,
    reference_pixel: tuple[int, int],
    n_detections: int,
    seed: int,
    sample_interval: float = DEFAULT_DETECTION_INTERVAL,
    chip_interval: float | None = None,
    a: float = DEFAULT_MAP_COEFFICIENT,
    max_pulses: int = 64,
) -> np.ndarray:
    """Magnitude of the complex Pearson correlation between every pixel's
    field series and the reference pixel's, over ``n_detections`` detections.

    Only the grid layout of ``scene_grid`` is used; its coefficients are ignored.
    """
    if n_detections < 100:
        raise DomainError("spatial correlation needs at least 100 detections")
    p0, q0 = reference_pixel
    if not (0 <= p0 < scene_grid.rows and 0 <= q0 < scene_grid.cols):
        raise IndexError(f"reference pixel {reference_pixel} outside the grid")
    plan = SamplingPlan(sample_interval, n_detections, coherence_time(carrier.bandwidth))
    times = detection_times(scene_grid, geometry, plan)
    n_pulses = pulses_needed(times, carrier)
    if n_pulses > max_pulses:
        raise DomainError(f"{n_detections} detections need {n_pulses} pulses, budget is {max_pulses}")
    trains = ChaoticPulseTrain.from_seed(seed, geometry.n_tx, n_pulses, carrier, chip_interval, a)
    E = field_matrix(trains, geometry, pixel_centers(scene_grid), times)
    corr = _pearson_magnitude(E, p0 * scene_grid.cols + q0)
    return corr.reshape(scene_grid.shape)


def correlation_profile(corr_map, pixel_size: float, reference_pixel) -> np.ndarray:
    """Row through the reference pixel as (position_m, correlation) pairs,
    positions measured from the reference pixel center."""
    corr_map = np.asarray(corr_map, dtype=float)
    p0, q0 = reference_pixel
    pos = (np.arange(corr_map.shape[1]) - q0) * pixel_size
    return np.column_stack([pos, corr_map[p0]])


def _half_crossing(values, half):
    """Fractional offset where ``values`` (starting at the peak) first reaches ``half``."""
    for k in range(1, len(values)):
        if values[k] <= half:
            prev = values[k - 1]
            return k - 1 + (prev - half) / (prev - values[k])
    return None


def correlation_width(corr_map, pixel_size: float, reference_pixel) -> float:
    """Full width at half maximum along the row through the reference pixel.

    Linear interpolation between pixel centers locates each half-maximum
    crossing.

    Raises:
        WidthUnresolvedError: if either side of the profile stays above half
            maximum up to the grid edge.
    """
    corr_map = np.asarray(corr_map, dtype=float)
    p0, q0 = reference_pixel
    row = corr_map[p0]
    peak = row[q0]
    if peak <= 0 or np.any(corr_map > peak):
        raise DomainError("correlation map must peak at the reference pixel")
    half = peak / 2.0
    right = _half_crossing(row[q0:], half)
    left = _half_crossing(row[q0::-1], half)
    if right is None or left is None:
        raise WidthUnresolvedError("correlation profile stays above half maximum within the grid")
    return float((left + right) * pixel_size)
