"""Shipped radio and filter configurations.

Two radio profiles share the same internal ratios (32 raw samples per
rotation, 330 FFT frames per second, rotation tone 1/6.4th of the working
rate) and differ only in scale:

* "default": 3.3792 Msps raw, decimate by 5 to 675.84 kHz, 2048-point frames.
  The rotation tone lands on FFT bin 320 and the chain emits exactly 330
  bearings per second.
* "desk": 105.6 ksps raw, 64-point frames, bin 10. Same bearing rate at a
  fraction of the compute; the scenario files use it.

Calibration offsets below were measured once with calibrate_offset() against
a noiseless bearing-0 capture and are frozen; a regression test re-derives
them.
"""

from .dsp import ChainConfig, calibrate_offset
from .pfilter import MeasurementNoise, MotionNoise
from .types import ArrayGeometry, RadioConfig

DEFAULT_CARRIER_HZ = 150e6
DEFAULT_ARRAY_SIDE_M = 0.44
DEFAULT_FREQUENCY_OFFSET_HZ = 25_000.0
DEFAULT_DECIMATION = 5

# measured by tests/test_dsp.py::test_frozen_calibration_offsets
CALIBRATION_DEG = {
    "default": 292.502035,
    "desk": 292.564166,
}


def default_radio():
    """Flagship profile: reproduces the 330 Hz bearing rate on FFT bin 320."""
    return RadioConfig(
        carrier_frequency_hz=DEFAULT_CARRIER_HZ,
        sample_rate_hz=3_379_200.0,
        samples_per_antenna=16,
        fft_length=2048,
    )


def desk_radio():
    """Scaled-down profile with the same ratios; 32x cheaper to simulate."""
    return RadioConfig(
        carrier_frequency_hz=DEFAULT_CARRIER_HZ,
        sample_rate_hz=105_600.0,
        samples_per_antenna=16,
        fft_length=64,
    )


def default_geometry(radio=None):
    """The 0.44 m square array (0.22 wavelengths at 150 MHz)."""
    return ArrayGeometry.square(DEFAULT_ARRAY_SIDE_M)


def chain_for(radio, profile_name=None, translation_hz=DEFAULT_FREQUENCY_OFFSET_HZ,
              calibrated=True, **kwargs):
    """ChainConfig for a radio profile, with the frozen calibration applied.

    For a radio that matches neither stored profile pass calibrated=False and
    run calibrate_offset() yourself.
    """
    chain = ChainConfig.for_radio(radio, DEFAULT_DECIMATION, translation_hz=translation_hz,
                                  **kwargs)
    if calibrated:
        if profile_name is None:
            profile_name = _profile_name_for(radio)
        chain = chain.with_calibration(CALIBRATION_DEG[profile_name])
    return chain


def _profile_name_for(radio):
    if radio.sample_rate_hz == 3_379_200.0 and radio.fft_length == 2048:
        return "default"
    if radio.sample_rate_hz == 105_600.0 and radio.fft_length == 64:
        return "desk"
    raise KeyError(
        "no frozen calibration for this radio configuration; use "
        "calibrate_offset() and ChainConfig.with_calibration()"
    )


def calibrate_chain(radio, geometry, **kwargs):
    """Build a chain and calibrate it from scratch (one short noiseless capture)."""
    chain = ChainConfig.for_radio(radio, DEFAULT_DECIMATION, **kwargs)
    offset = calibrate_offset(radio, geometry, chain)
    return chain.with_calibration(offset)


class FilterProfile:
    """Named particle-filter parameter bundles.

    default: the baseline constants (position noise variance 0.5, velocity
    noise variance 25, bearing variance 100 squared degrees).
    tuned: reduced motion noise, tighter bearing variance, and
    confidence-scaled updates.
    """

    def __init__(self, motion, measurement, use_confidence, min_confidence):
        self.motion = motion
        self.measurement = measurement
        self.use_confidence = use_confidence
        self.min_confidence = min_confidence


def filter_profile(name, dt_s=1.0):
    if name == "default":
        return FilterProfile(
            motion=MotionNoise(position_noise_std_m=0.5**0.5,
                               velocity_noise_std_mps=5.0, dt_s=dt_s),
            measurement=MeasurementNoise(bearing_variance_deg2=100.0),
            use_confidence=False,
            min_confidence=0.0,
        )
    if name == "tuned":
        return FilterProfile(
            motion=MotionNoise(position_noise_std_m=0.5,
                               velocity_noise_std_mps=1.0, dt_s=dt_s),
            measurement=MeasurementNoise(bearing_variance_deg2=25.0),
            use_confidence=True,
            min_confidence=0.3,
        )
    raise KeyError(f"unknown filter profile {name!r} (expected 'default' or 'tuned')")
