"""Microwave ghost imaging with distributed antennas and chaotic illumination.

Submodules:

- ``chaos``: cubic-map sequences and chaotic amplitude-modulated carriers
- ``geometry``: scene grids, antenna layouts, propagation delays
- ``forward``: illumination fields, measurement sets, noise, autocorrelation
- ``coherence``: coherence time and size, spatial correlation maps
- ``reconstruction``: direct, least-squares and gradient-projection solvers, MSE
- ``experiments`` / ``cli``: experiment drivers and the command line
"""
from .chaos import (
    CarrierMode,
    CarrierSpec,
    ChaoticPulseTrain,
    ChaoticSequence,
    SampledWaveform,
    cubic_map_step,
    generate_sequence,
    lyapunov_exponent,
    modulate,
)
from .coherence import (
    CoherenceReport,
    coherence_report,
    coherence_size_bounds,
    coherence_time,
    correlation_width,
    spatial_correlation_map,
)
from .errors import ConfigError, DomainError, IllConditionedError, WidthUnresolvedError
from .forward import (
    MeasurementSet,
    SamplingPlan,
    add_noise,
    autocorrelate,
    build_measurement_set,
    field_at_pixel,
    field_matrix,
    mean_offpeak,
)
from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Scene,
    TargetSpec,
    build_square_array,
    default_targets,
    paint_targets,
    pixel_center,
    two_way_delay,
)
from .reconstruction import (
    GPConfig,
    ReconstructionResult,
    mse,
    relative_error,
    solve_direct,
    solve_gradient_projection,
    solve_least_squares,
)

__version__ = "0.1.0"
