"""Pseudo-Doppler direction finding: simulation, demodulation, and bearing-only tracking.

The package covers the full desk-scale pipeline: synthesis of the IQ stream a
commutated 4-element antenna array would produce, the receive chain that turns
that stream into bearing measurements, and a particle filter that fuses
bearings into an emitter position estimate.
"""

from .errors import ConfigurationError, FilterDivergenceError
from .types import (
    ArrayGeometry,
    BearingMeasurement,
    GeometryReport,
    IqBuffer,
    RadioConfig,
    WorldPose,
    validate_geometry,
    wavelength,
    wrap_degrees,
    wrap_signed_degrees,
)
from .simulate import ChannelSpec, EmitterSpec, element_phase, simulate_capture, switching_frequency
from .dsp import (
    ChainConfig,
    FirSpec,
    NotchSpec,
    PhasePair,
    calibrate_offset,
    envelope_confidence,
    estimate_bearing,
    fft_phase_at_bin,
    frequency_translate_fir,
    notch_bandpass,
    rotation_bin,
    run_chain,
)
from .pfilter import (
    MeasurementNoise,
    MotionNoise,
    Particle,
    ParticleSet,
    PositionEstimate,
    estimate,
    init_uniform,
    log_likelihood,
    maybe_resample,
    predict,
    to_world,
    update,
)
from .harness import (
    RunResult,
    Scenario,
    chamber_test,
    downsample_bearings,
    error_metrics,
    run_scenario,
    true_bearing,
)

__version__ = "0.1.0"
