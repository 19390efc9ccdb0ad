"""Receive chain: IQ capture in, bearing measurements out.

Stages, in order:

1. frequency-translating FIR: shift the emitter tone to DC, lowpass wide
   enough to keep the commutation sidebands, decimate to the working rate.
2. FM discriminator: per-sample phase increments recover the instantaneous
   frequency, whose component at the rotation frequency encodes the bearing.
3. notch (narrow bandpass) at the rotation frequency: isolates that component
   and removes the DC left by any residual tuning offset.
4. per-frame FFT phase at the rotation bin, compared against the phase of the
   reference -sin(w_r t) generated from the cycle-aligned time origin.

All stages are linear-phase or phase-compensated; the single calibration
offset fixed against a known-bearing capture absorbs the remaining constant
terms (discriminator half-sample lag, dwell-center phase, reference sign).
"""

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from . import kernels
from .errors import ConfigurationError
from .simulate import switching_frequency
from .types import BearingMeasurement, IqBuffer, wrap_degrees

# kappa calibrated so chain output on noise-only captures stays below 0.3
# while a steady tone scores near 1; the window must span several envelope
# correlation times of the notch (bandwidth ~ bin/10)
DEFAULT_CONFIDENCE_KAPPA = 0.1
DEFAULT_CONFIDENCE_WINDOW_S = 0.5


@dataclass(frozen=True)
class FirSpec:
    """Frequency-translating FIR: shift by translation_hz, filter, decimate."""

    taps: np.ndarray
    translation_hz: float
    decimation: int

    def __post_init__(self):
        taps = np.ascontiguousarray(np.asarray(self.taps, dtype=np.float64))
        if taps.ndim != 1 or len(taps) == 0:
            raise ValueError("taps must be a non-empty 1-D sequence")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)
        if self.decimation < 1:
            raise ValueError("decimation must be >= 1")


@dataclass(frozen=True)
class NotchSpec:
    """Narrow bandpass isolating the rotation tone at center_hz."""

    center_hz: float
    width_hz: float

    def __post_init__(self):
        if self.width_hz <= 0:
            raise ValueError("width_hz must be positive")

    @classmethod
    def for_chain(cls, rotation_hz, effective_sample_rate_hz, fft_length):
        """Width fixed to a tenth of the FFT bin size, the rule the chain uses."""
        bin_hz = effective_sample_rate_hz / fft_length
        return cls(center_hz=rotation_hz, width_hz=bin_hz / 10.0)


@dataclass(frozen=True)
class PhasePair:
    """The two phases whose difference yields the bearing."""

    theta_signal_rad: float
    theta_reference_rad: float
    frame_index: int

    def __post_init__(self):
        for name in ("theta_signal_rad", "theta_reference_rad"):
            v = float(getattr(self, name))
            if v <= -np.pi:
                v += 2.0 * np.pi
            object.__setattr__(self, name, v)


def design_lowpass(num_taps, cutoff_hz, sample_rate_hz):
    """Windowed-sinc lowpass (Hamming); odd tap count keeps the delay integral."""
    if num_taps % 2 == 0:
        num_taps += 1
    return sps.firwin(num_taps, cutoff_hz, fs=sample_rate_hz)


def _convolve_aligned(x, taps):
    """Linear-phase filtering with the group delay removed.

    Output sample i depends on inputs centered at i, so time alignment of the
    buffer is preserved exactly for odd, symmetric taps.
    """
    delay = (len(taps) - 1) // 2
    full = sps.fftconvolve(x, taps, mode="full")
    return full[delay:delay + len(x)]


def frequency_translate_fir(buffer, spec):
    """Shift the spectrum by -translation_hz, lowpass, decimate.

    The buffer length must be a multiple of the decimation factor; the output
    keeps the input's start time (group delay compensated).
    """
    n = len(buffer)
    if n % spec.decimation != 0:
        raise ValueError(
            f"buffer length {n} is not divisible by decimation {spec.decimation}"
        )
    t = np.arange(n) / buffer.sample_rate_hz
    shifted = buffer.samples * np.exp(-2j * np.pi * spec.translation_hz * t)
    filtered = _convolve_aligned(shifted, spec.taps)
    decimated = filtered[::spec.decimation]
    return IqBuffer(
        samples=decimated,
        sample_rate_hz=buffer.sample_rate_hz / spec.decimation,
        start_time_s=buffer.start_time_s,
    )


def fm_demodulate(buffer):
    """Instantaneous-frequency signal via the polar discriminator.

    Output[i] is the phase advance from sample i-1 to i (radians); the first
    sample has no predecessor and is set to 0. A constant tuning offset shows
    up as a DC level, removed later by the notch stage.
    """
    demod = kernels.polar_discriminator(np.ascontiguousarray(buffer.samples, dtype=np.complex128))
    return IqBuffer(samples=demod.astype(np.complex128), sample_rate_hz=buffer.sample_rate_hz,
                    start_time_s=buffer.start_time_s)


def design_notch_taps(spec, sample_rate_hz, num_taps=None):
    """Complex bandpass taps: lowpass of half the notch width modulated to center.

    The modulation is referenced to the tap center so the frequency response
    at center_hz is real and positive: zero phase after delay compensation.
    """
    if num_taps is None:
        # transition from the passband edge out to two FFT bins (20 notch widths)
        transition_hz = 19.5 * spec.width_hz
        num_taps = int(np.ceil(3.3 * sample_rate_hz / transition_hz))
    if num_taps % 2 == 0:
        num_taps += 1
    lowpass = sps.firwin(num_taps, spec.width_hz / 2.0, fs=sample_rate_hz)
    n = np.arange(num_taps) - (num_taps - 1) / 2.0
    return lowpass * np.exp(2j * np.pi * spec.center_hz * n / sample_rate_hz)


def notch_bandpass(buffer, spec, num_taps=None):
    """Isolate a band of width_hz around center_hz, phase-preserving at center."""
    nyquist = buffer.sample_rate_hz / 2.0
    if not 0 <= spec.center_hz < nyquist:
        raise ValueError(
            f"notch center {spec.center_hz} Hz is not below Nyquist {nyquist} Hz"
        )
    taps = design_notch_taps(spec, buffer.sample_rate_hz, num_taps)
    out = _convolve_aligned(buffer.samples, taps)
    return IqBuffer(samples=out, sample_rate_hz=buffer.sample_rate_hz,
                    start_time_s=buffer.start_time_s)


def fft_phase_at_bin(frame, bin_index):
    """Phase of the DFT coefficient at bin_index, in (-pi, pi].

    frame may be an IqBuffer or a plain sample array.
    """
    samples = frame.samples if isinstance(frame, IqBuffer) else np.asarray(frame)
    if not 0 <= bin_index < len(samples):
        raise ValueError(f"bin {bin_index} out of range for frame of {len(samples)}")
    phase = float(np.angle(np.fft.fft(samples)[bin_index]))
    if phase <= -np.pi:
        phase += 2.0 * np.pi
    return phase


def rotation_bin(radio, effective_sample_rate_hz):
    """FFT bin index the rotation tone lands on; must be exact.

    The chain relies on the tone sitting on a bin center, so a fractional
    result is a configuration error, reported with the three values involved.
    """
    f_rot = switching_frequency(radio)
    exact = f_rot * radio.fft_length / effective_sample_rate_hz
    bin_index = int(round(exact))
    if abs(exact - bin_index) > 1e-9 * max(1.0, abs(exact)):
        raise ConfigurationError(
            f"rotation frequency {f_rot} Hz does not fall on an FFT bin center: "
            f"{f_rot} * {radio.fft_length} / {effective_sample_rate_hz} = {exact}"
        )
    if not 0 < bin_index < radio.fft_length // 2:
        raise ConfigurationError(
            f"rotation bin {bin_index} must lie strictly inside the positive half "
            f"of the {radio.fft_length}-point spectrum"
        )
    return bin_index


def reference_phase_closed_form():
    """DFT phase of -sin(w_r t) at its own bin for a cycle-aligned frame.

    With the forward DFT convention sum x[n] exp(-2 pi i k n / N), a full-cycle
    -sin gives coefficient +i N / 2, so the phase is exactly +pi/2.
    """
    return np.pi / 2.0


def reference_phase_fft(rotation_hz, effective_sample_rate_hz, fft_length, bin_index):
    """Same quantity as reference_phase_closed_form, via an explicit FFT."""
    n = np.arange(fft_length)
    ref = -np.sin(2.0 * np.pi * rotation_hz * n / effective_sample_rate_hz)
    return fft_phase_at_bin(ref, bin_index)


@dataclass(frozen=True)
class ChainConfig:
    """Assembled parameters for run_chain.

    Derived once per radio configuration; decimation ties the raw rate to the
    working rate and must put the rotation tone exactly on an FFT bin.
    """

    fir: FirSpec
    notch: NotchSpec
    rotation_hz: float
    effective_sample_rate_hz: float
    bin_index: int
    calibration_offset_deg: float = 0.0
    confidence_kappa: float = DEFAULT_CONFIDENCE_KAPPA
    confidence_window_s: float = DEFAULT_CONFIDENCE_WINDOW_S
    notch_taps: int = None

    @classmethod
    def for_radio(cls, radio, decimation, translation_hz=0.0, calibration_offset_deg=0.0,
                  fir_taps=None, notch_taps=None,
                  confidence_kappa=DEFAULT_CONFIDENCE_KAPPA,
                  confidence_window_s=DEFAULT_CONFIDENCE_WINDOW_S):
        s = radio.sample_rate_hz
        if abs(s / decimation - round(s / decimation)) > 1e-9:
            raise ConfigurationError(
                f"sample rate {s} not divisible by decimation {decimation}"
            )
        fs_e = s / decimation
        frame_rate = fs_e / radio.fft_length
        if abs(frame_rate - round(frame_rate)) > 1e-9:
            raise ConfigurationError(
                f"effective rate {fs_e} does not tile into whole FFT frames per "
                f"second (frame rate {frame_rate})"
            )
        f_rot = switching_frequency(radio)
        bin_index = rotation_bin(radio, fs_e)
        # keep commutation sidebands up to the 3rd harmonic; reject the 4th,
        # which would alias into the working band after decimation
        if fir_taps is None:
            fir_taps = int(np.ceil(3.3 * s / (0.9 * f_rot)))
        taps = design_lowpass(fir_taps, 3.5 * f_rot, s)
        fir = FirSpec(taps=taps, translation_hz=translation_hz, decimation=decimation)
        notch = NotchSpec.for_chain(f_rot, fs_e, radio.fft_length)
        return cls(
            fir=fir, notch=notch, rotation_hz=f_rot, effective_sample_rate_hz=fs_e,
            bin_index=bin_index, calibration_offset_deg=calibration_offset_deg,
            confidence_kappa=confidence_kappa, confidence_window_s=confidence_window_s,
            notch_taps=notch_taps,
        )

    def with_calibration(self, calibration_offset_deg):
        return ChainConfig(
            fir=self.fir, notch=self.notch, rotation_hz=self.rotation_hz,
            effective_sample_rate_hz=self.effective_sample_rate_hz,
            bin_index=self.bin_index, calibration_offset_deg=calibration_offset_deg,
            confidence_kappa=self.confidence_kappa,
            confidence_window_s=self.confidence_window_s,
            notch_taps=self.notch_taps,
        )


def envelope_confidence(segment, kappa=DEFAULT_CONFIDENCE_KAPPA):
    """Quality score from the stability of the notch-output envelope.

    confidence = 1 / (1 + cv / kappa) with cv the coefficient of variation of
    the magnitude envelope: 1 for a steady tone, small for noise, 0 for a dead
    segment.
    """
    samples = segment.samples if isinstance(segment, IqBuffer) else np.asarray(segment)
    if len(samples) == 0:
        raise ValueError("segment must be non-empty")
    envelope = np.abs(samples)
    mean = envelope.mean()
    if mean <= 0.0:
        return 0.0
    cv = envelope.std() / mean
    return float(1.0 / (1.0 + cv / kappa))


def extract_phase_pair(frame, bin_index, frame_index=0):
    """Signal phase at the rotation bin paired with the reference phase."""
    theta_signal = fft_phase_at_bin(frame, bin_index)
    return PhasePair(
        theta_signal_rad=theta_signal,
        theta_reference_rad=reference_phase_closed_form(),
        frame_index=frame_index,
    )


def _bearing_from_pair(pair, calibration_offset_deg):
    # reference minus signal: with the forward DFT convention the rotation-bin
    # phase lags by the bearing, so this difference advances with it
    raw = np.degrees(pair.theta_reference_rad - pair.theta_signal_rad)
    return float(wrap_degrees(raw + calibration_offset_deg))


def estimate_bearing(frame, chain, reference_origin_time_s=0.0):
    """Bearing from one notch-output frame.

    The frame must start on a commutation-cycle boundary relative to
    reference_origin_time_s. An all-zero frame yields confidence 0.
    """
    if not isinstance(frame, IqBuffer):
        raise TypeError("frame must be an IqBuffer")
    if len(frame) != 0 and frame.sample_rate_hz != chain.effective_sample_rate_hz:
        raise ValueError("frame sample rate does not match the chain configuration")
    offset_cycles = (frame.start_time_s - reference_origin_time_s) * chain.rotation_hz
    if abs(offset_cycles - round(offset_cycles)) > 1e-6:
        raise ValueError(
            f"frame start {frame.start_time_s} s is not aligned to a commutation "
            f"cycle boundary ({offset_cycles} cycles from the reference origin)"
        )
    timestamp_us = int(round(frame.start_time_s * 1e6))
    if not np.any(frame.samples):
        return BearingMeasurement(angle_deg=0.0, timestamp_us=timestamp_us, confidence=0.0)
    pair = extract_phase_pair(frame, chain.bin_index)
    angle = _bearing_from_pair(pair, chain.calibration_offset_deg)
    confidence = envelope_confidence(frame, chain.confidence_kappa)
    return BearingMeasurement(angle_deg=angle, timestamp_us=timestamp_us, confidence=confidence)


def run_chain(capture, radio, chain):
    """Full pipeline: one BearingMeasurement per FFT frame of the capture.

    Emits exactly floor(decimated_length / fft_length) measurements. Frame
    confidence uses a trailing window of the notch output so the envelope has
    room to fluctuate (the notch is far narrower than one frame).
    """
    translated = frequency_translate_fir(capture, chain.fir)
    demodulated = fm_demodulate(translated)
    notch_taps = design_notch_taps(chain.notch, chain.effective_sample_rate_hz,
                                   chain.notch_taps)
    notched = notch_bandpass(demodulated, chain.notch, len(notch_taps))

    n = radio.fft_length
    n_frames = len(notched) // n
    if n_frames < 1:
        raise ValueError(
            f"capture too short: {len(notched)} samples after decimation, "
            f"need at least one frame of {n}"
        )
    total = len(notched)
    window = max(n, int(round(chain.confidence_window_s * chain.effective_sample_rate_hz)))
    warmup = min(len(notch_taps), max(0, total - window))  # skip the fill-in ramp
    envelope = np.abs(notched.samples)
    reference = reference_phase_closed_form()
    spectra = np.fft.fft(notched.samples[:n_frames * n].reshape(n_frames, n), axis=1)
    phases = np.angle(spectra[:, chain.bin_index])

    measurements = []
    for i in range(n_frames):
        start = i * n
        frame_time = notched.start_time_s + start / chain.effective_sample_rate_hz
        timestamp_us = int(round(frame_time * 1e6))
        if not np.any(notched.samples[start:start + n]):
            measurements.append(
                BearingMeasurement(angle_deg=0.0, timestamp_us=timestamp_us, confidence=0.0)
            )
            continue
        theta_signal = phases[i]
        if theta_signal <= -np.pi:
            theta_signal += 2.0 * np.pi
        angle = wrap_degrees(
            np.degrees(reference - theta_signal) + chain.calibration_offset_deg
        )
        # envelope statistics over a full-width window of settled samples;
        # early frames borrow forward so the ramp-in does not masquerade as
        # envelope fluctuation
        lo = int(np.clip(start + n - window, warmup, max(warmup, total - window)))
        env = envelope[lo:min(total, lo + window)]
        mean = env.mean()
        if mean <= 0:
            confidence = 0.0
        else:
            confidence = 1.0 / (1.0 + (env.std() / mean) / chain.confidence_kappa)
        measurements.append(
            BearingMeasurement(angle_deg=float(angle), timestamp_us=timestamp_us,
                               confidence=float(confidence))
        )
    return measurements


def calibrate_offset(radio, geometry, chain, n_frames=8, skip_frames=3):
    """One-time scalar calibration against a known-bearing capture.

    Runs a noiseless bearing-0 capture through the chain and returns the
    offset that maps the steady-state estimate back to 0. The offset absorbs
    every pipeline-internal constant phase term and depends only on the chain
    configuration, not on the bearing.
    """
    from .simulate import ChannelSpec, EmitterSpec, simulate_capture

    frame_duration = radio.fft_length / chain.effective_sample_rate_hz
    duration = n_frames * frame_duration
    emitter = EmitterSpec(bearing_deg=0.0, frequency_offset_hz=chain.fir.translation_hz)
    channel = ChannelSpec(snr_db=np.inf, geometry_jitter_std_m=0.0, rng_seed=0)
    capture = simulate_capture(radio, geometry, emitter, channel, duration)
    raw = run_chain(capture, radio, chain.with_calibration(0.0))
    angles = np.deg2rad([m.angle_deg for m in raw[skip_frames:]])
    mean_angle = np.degrees(np.arctan2(np.sin(angles).mean(), np.cos(angles).mean()))
    return float(wrap_degrees(-mean_angle))


def write_bearings_csv(path, measurements):
    """Bearing log: timestamp_us,angle_deg,confidence with header, atomic write."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["timestamp_us", "angle_deg", "confidence"])
            for m in measurements:
                writer.writerow([m.timestamp_us, f"{m.angle_deg:.6f}", f"{m.confidence:.6f}"])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_bearings_csv(path):
    measurements = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            measurements.append(
                BearingMeasurement(
                    angle_deg=float(row["angle_deg"]),
                    timestamp_us=int(row["timestamp_us"]),
                    confidence=float(row["confidence"]),
                )
            )
    return measurements
