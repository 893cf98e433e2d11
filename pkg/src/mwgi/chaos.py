"""Chaotic cubic-map sequences and the amplitude-modulated carriers built on them.

Each transmitter drives its antenna with a carrier whose amplitude follows a
cubic-map orbit, one map value per chip.  The map is

    x(n+1) = a * x(n)**3 + (1 - a) * x(n)

which sends [-1, 1] into itself for 0 < a <= 4 and reduces to the Chebyshev
cubic 4x^3 - 3x at a = 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError

__all__ = [
    "CarrierMode",
    "CarrierSpec",
    "ChaoticSequence",
    "ChaoticPulseTrain",
    "SampledWaveform",
    "cubic_map_step",
    "draw_initial_values",
    "generate_sequence",
    "lyapunov_exponent",
    "modulate",
    "table2_carrier",
]

DEFAULT_MAP_COEFFICIENT = 4.0
_FIXED_POINTS = (-1.0, 0.0, 1.0)


def _check_coefficient(a):
    if not (0.0 < a <= 4.0):
        raise DomainError(f"map coefficient a={a!r} outside (0, 4]")


def _check_state(x):
    if not (-1.0 <= x <= 1.0):
        raise DomainError(f"map state x={x!r} outside [-1, 1]")


def cubic_map_step(a: float, x: float) -> float:
    """One iteration of the cubic map.

    Raises:
        DomainError: if ``a`` is outside (0, 4] or ``x`` outside [-1, 1].
    """
    _check_coefficient(a)
    _check_state(x)
    y = a * x * x * x + (1.0 - a) * x
    # round-off can push |y| a few ulps past 1 near the end points
    return min(1.0, max(-1.0, y))


@dataclass(frozen=True)
class ChaoticSequence:
    """A finite cubic-map orbit starting at ``x0``."""

    a: float
    x0: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_coefficient(self.a)
        _check_state(self.x0)
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


def generate_sequence(a: float, x0: float, n: int) -> ChaoticSequence:
    """Iterate the cubic map ``n - 1`` times from ``x0``.

    ``values[0]`` is ``x0`` itself, so the result has exactly ``n`` entries.
    """
    _check_coefficient(a)
    _check_state(x0)
    if n < 1:
        raise DomainError(f"sequence length must be >= 1, got {n}")
    out = np.empty(n)
    x = float(x0)
    b = 1.0 - a
    for k in range(n):
        out[k] = x
        x = a * x * x * x + b * x
        if x > 1.0:
            x = 1.0
        elif x < -1.0:
            x = -1.0
    return ChaoticSequence(a=a, x0=float(x0), values=out)


def lyapunov_exponent(seq: ChaoticSequence) -> float:
    """Orbit average of log|f'(x)| with f'(x) = 3a x^2 + (1 - a)."""
    deriv = np.abs(3.0 * seq.a * seq.values**2 + (1.0 - seq.a))
    # an exact critical point would give -inf; skip it
    deriv = deriv[deriv > 0]
    return float(np.mean(np.log(deriv)))


def draw_initial_values(rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` initial states uniformly in (-1, 1), rejecting map fixed points."""
    out = []
    while len(out) < count:
        x = float(rng.uniform(-1.0, 1.0))
        if x in _FIXED_POINTS:
            continue
        out.append(x)
    return np.array(out)


class CarrierMode(str, Enum):
    CONSTANT_FREQUENCY = "constant_frequency"
    LINEAR_CHIRP = "linear_chirp"


@dataclass(frozen=True)
class CarrierSpec:
    """Carrier parameters.  Defaults are the standard experiment settings.

    In ``linear_chirp`` mode the instantaneous frequency sweeps from
    ``center_frequency`` upward at ``bandwidth / pulse_width`` Hz/s,
    restarting every pulse.
    """

    center_frequency: float = 1e9
    bandwidth: float = 2e9
    pulse_width: float = 3e-6
    phase: float = 0.0
    mode: CarrierMode = CarrierMode.LINEAR_CHIRP

    def __post_init__(self):
        object.__setattr__(self, "mode", CarrierMode(self.mode))
        for name in ("center_frequency", "bandwidth", "pulse_width"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    @property
    def chirp_rate(self) -> float:
        if self.mode is CarrierMode.LINEAR_CHIRP:
            return self.bandwidth / self.pulse_width
        return 0.0

    @property
    def max_frequency(self) -> float:
        return self.center_frequency + self.chirp_rate * self.pulse_width

    def phase_at(self, t):
        """Carrier phase at pulse-local time ``t`` (radians)."""
        t = np.asarray(t, dtype=float)
        return 2.0 * np.pi * self.center_frequency * t + np.pi * self.chirp_rate * t * t + self.phase

    def __call__(self, t):
        """Unit-modulus complex carrier at pulse-local time ``t``."""
        return np.exp(1j * self.phase_at(t))


def table2_carrier() -> CarrierSpec:
    return CarrierSpec()


@dataclass(frozen=True)
class SampledWaveform:
    """Complex samples on a uniform time grid starting at ``start_time``."""

    samples: np.ndarray = field(repr=False)
    sample_interval: float
    start_time: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size == 0:
            raise DomainError("waveform needs a nonempty 1-D sample array")
        if not self.sample_interval > 0:
            raise DomainError(f"sample_interval must be > 0, got {self.sample_interval!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def end_time(self) -> float:
        return self.start_time + (self.samples.size - 1) * self.sample_interval

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) * self.sample_interval

    def __call__(self, t):
        """Nearest-sample lookup.  Raises DomainError outside the support."""
        t = np.asarray(t, dtype=float)
        idx = np.rint((t - self.start_time) / self.sample_interval).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.samples.size):
            raise DomainError("requested time lies outside the waveform support")
        return self.samples[idx]


def modulate(
    seq: ChaoticSequence,
    carrier: CarrierSpec,
    chip_interval: float | None = None,
    sample_interval: float | None = None,
) -> SampledWaveform:
    """Sample one chaotic amplitude-modulated pulse.

    The chip values are held for ``chip_interval`` each and multiply the
    carrier ``exp(j(2 pi f t + pi gamma t^2 + phi))``.  Samples cover
    ``[0, pulse_width)``.

    Args:
        seq: chaotic chip amplitudes.
        carrier: carrier parameters.
        chip_interval: hold time per chip; defaults to ``1 / bandwidth``.
        sample_interval: output sample spacing; defaults to ``chip_interval``.
    """
    if chip_interval is None:
        chip_interval = 1.0 / carrier.bandwidth
    if sample_interval is None:
        sample_interval = chip_interval
    if not (sample_interval > 0 and chip_interval >= sample_interval):
        raise DomainError("need chip_interval >= sample_interval > 0")
    n_chips = math.ceil(carrier.pulse_width / chip_interval - 1e-9)
    if len(seq) < n_chips:
        raise DomainError(
            f"sequence has {len(seq)} chips, pulse needs {n_chips}"
        )
    n_samples = max(1, math.ceil(carrier.pulse_width / sample_interval - 1e-9))
    t = np.arange(n_samples) * sample_interval
    chip = np.minimum((t / chip_interval + 1e-9).astype(np.int64), len(seq) - 1)
    samples = seq.values[chip] * carrier(t)
    return SampledWaveform(samples=samples, sample_interval=sample_interval)


class ChaoticPulseTrain:
    """Continuous-time transmit signal of one antenna.

    Back-to-back pulses of length ``pulse_width``; pulse ``m`` uses its own
    chip sequence ``chips[m]``.  Evaluation is exact at any time, with no
    resampling: the amplitude is a zero-order hold of the chips and the
    carrier phase is computed analytically from the pulse-local time.

    Args:
        chips: array of shape (n_pulses, chips_per_pulse).
        carrier: carrier parameters.
        chip_interval: hold time per chip.
    """

    def __init__(self, chips, carrier: CarrierSpec, chip_interval: float):
        chips = np.atleast_2d(np.asarray(chips, dtype=float))
        need = math.ceil(carrier.pulse_width / chip_interval - 1e-9)
        if chips.shape[1] < need:
            raise DomainError(f"pulse needs {need} chips, got {chips.shape[1]}")
        self.chips = chips
        self.carrier = carrier
        self.chip_interval = float(chip_interval)

    @property
    def duration(self) -> float:
        return self.chips.shape[0] * self.carrier.pulse_width

    def amplitude(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.duration):
            raise DomainError("requested time lies outside the pulse train")
        tp = self.carrier.pulse_width
        pulse = np.floor(t / tp).astype(np.int64)
        local = t - pulse * tp
        chip = np.minimum(np.floor(local / self.chip_interval).astype(np.int64), self.chips.shape[1] - 1)
        return self.chips[pulse, chip]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tp = self.carrier.pulse_width
        local = t - np.floor(t / tp) * tp
        return self.amplitude(t) * self.carrier(local)

    def sample(self, sample_interval: float, n: int, start_time: float = 0.0) -> SampledWaveform:
        t = start_time + np.arange(n) * sample_interval
        return SampledWaveform(self(t), sample_interval, start_time)

    @classmethod
    def from_seed(
        cls,
        seed: int,
        n_antennas: int,
        n_pulses: int,
        carrier: CarrierSpec,
        chip_interval: float | None = None,
        a: float = DEFAULT_MAP_COEFFICIENT,
    ) -> list["ChaoticPulseTrain"]:
        """Build one pulse train per antenna from a master seed.

        Pulse ``m`` draws fresh initial values from a generator keyed on
        ``(seed, m)``, so adding pulses never changes earlier ones.
        """
        if chip_interval is None:
            chip_interval = 1.0 / carrier.bandwidth
        n_chips = math.ceil(carrier.pulse_width / chip_interval - 1e-9)
        chips = np.empty((n_antennas, n_pulses, n_chips))
        for m in range(n_pulses):
            rng = np.random.default_rng([seed, m])
            for i, x0 in enumerate(draw_initial_values(rng, n_antennas)):
                chips[i, m] = generate_sequence(a, x0, n_chips).values
        return [cls(chips[i], carrier, chip_interval) for i in range(n_antennas)]
