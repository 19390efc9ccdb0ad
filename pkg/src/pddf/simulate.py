"""Synthetic IQ capture generation for a commutated 4-element array.

The simulation is complex baseband: the RF carrier is never synthesized, the
emitter appears as a tone at its offset from the tuned center frequency, and
antenna commutation imprints the per-element geometric phase on each dwell.
Element switching is instantaneous and happens between samples.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .types import IqBuffer, validate_geometry, wrap_degrees

_CYCLE_TOL = 1e-6


@dataclass(frozen=True)
class EmitterSpec:
    """Far-field emitter: bearing, tone offset, amplitude, phase and duty cycle.

    active_intervals is a sequence of [start_s, end_s) windows measured on the
    capture clock; None means the emitter transmits for the whole capture, an
    empty sequence means it never does.
    """

    bearing_deg: float
    frequency_offset_hz: float = 0.0
    amplitude: float = 1.0
    phase_rad: float = 0.0
    active_intervals: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "bearing_deg", float(wrap_degrees(self.bearing_deg)))
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.active_intervals is not None:
            intervals = tuple((float(a), float(b)) for a, b in self.active_intervals)
            prev_end = -np.inf
            for a, b in intervals:
                if b <= a:
                    raise ValueError(f"empty or inverted interval [{a}, {b})")
                if a < prev_end:
                    raise ValueError("active intervals must be sorted and non-overlapping")
                prev_end = b
            object.__setattr__(self, "active_intervals", intervals)


@dataclass(frozen=True)
class ChannelSpec:
    """Channel impairments: AWGN level, per-cycle geometry jitter, RNG seed.

    snr_db is relative to the emitter amplitude; math.inf disables noise.
    geometry_jitter_std_m models the array flexing while moving: each
    commutation cycle perturbs every element position independently.
    """

    snr_db: float = np.inf
    geometry_jitter_std_m: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.geometry_jitter_std_m < 0:
            raise ValueError("geometry_jitter_std_m must be non-negative")


def switching_frequency(radio):
    """Full-rotation frequency of the commutation sweep, in Hz.

    This is the tone the bearing chain isolates: 2 * sample_rate / (4 *
    samples_per_antenna). One rotation therefore spans 2 * samples_per_antenna
    raw samples, half a samples_per_antenna dwell per element.
    """
    return (2.0 * radio.sample_rate_hz) / (4.0 * radio.samples_per_antenna)


def element_phase(geometry, element_index, bearing_deg, wavelength_m):
    """Spatial phase of one element for a far-field emitter at bearing_deg.

    Equals (2 pi / lambda) times the projection of the element position onto
    the unit vector toward the emitter; for an element at angle phi on the
    circle of radius R this is (2 pi R / lambda) cos(phi - bearing).
    """
    if not 0 <= element_index < 4:
        raise ValueError(f"element_index must be 0..3, got {element_index}")
    if wavelength_m <= 0:
        raise ValueError("wavelength_m must be positive")
    alpha = np.deg2rad(bearing_deg)
    direction = np.array([np.cos(alpha), np.sin(alpha)])
    return float(2.0 * np.pi / wavelength_m * geometry.element_positions[element_index] @ direction)


def _active_mask(n_samples, sample_rate_hz, intervals):
    if intervals is None:
        return np.ones(n_samples, dtype=np.uint8)
    mask = np.zeros(n_samples, dtype=np.uint8)
    for a, b in intervals:
        i0 = max(0, int(np.ceil(a * sample_rate_hz - 1e-9)))
        i1 = min(n_samples, int(np.ceil(b * sample_rate_hz - 1e-9)))
        if i1 > i0:
            mask[i0:i1] = 1
    return mask


def simulate_capture(radio, geometry, emitter, channel, duration_s, start_time_s=0.0):
    """Synthesize the IQ stream the receiver would capture.

    The capture must span an integer number of full commutation cycles so
    every rotation is complete; the returned buffer has exactly
    duration_s * sample_rate_hz samples and starts on a cycle boundary.
    """
    report = validate_geometry(geometry, radio)
    if report.rejected:
        raise ValueError("geometry rejected: " + "; ".join(report.messages))

    f_rot = switching_frequency(radio)
    cycles = duration_s * f_rot
    n_cycles = int(round(cycles))
    if n_cycles < 1 or abs(cycles - n_cycles) > _CYCLE_TOL * max(1.0, abs(cycles)):
        raise ValueError(
            f"duration {duration_s} s is not an integer number of commutation cycles "
            f"(rotation rate {f_rot} Hz gives {cycles} cycles)"
        )
    n_samples = n_cycles * 2 * radio.samples_per_antenna

    rng = np.random.default_rng(channel.rng_seed)
    lam = radio.wavelength_m
    alpha = np.deg2rad(emitter.bearing_deg)
    direction = np.array([np.cos(alpha), np.sin(alpha)])

    # one geometry per cycle; jitter drawn first so the stream layout is stable
    base = geometry.element_positions
    if channel.geometry_jitter_std_m > 0:
        jitter = rng.normal(0.0, channel.geometry_jitter_std_m, size=(n_cycles, 4, 2))
        positions = base[np.newaxis, :, :] + jitter
        phase_table = (2.0 * np.pi / lam) * (positions @ direction)
    else:
        phase_table = np.broadcast_to(
            (2.0 * np.pi / lam) * (base @ direction), (n_cycles, 4)
        ).copy()
    phase_table = np.ascontiguousarray(phase_table, dtype=np.float64)

    active = _active_mask(n_samples, radio.sample_rate_hz, emitter.active_intervals)
    phase_per_sample = 2.0 * np.pi * emitter.frequency_offset_hz / radio.sample_rate_hz
    signal = kernels.synthesize_commutated_iq(
        n_samples, radio.samples_per_antenna, phase_table, phase_per_sample,
        emitter.phase_rad, emitter.amplitude, active,
    )

    if np.isfinite(channel.snr_db):
        noise_power = emitter.amplitude**2 * 10.0 ** (-channel.snr_db / 10.0)
        sigma = np.sqrt(noise_power / 2.0)
        noise = sigma * (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples))
        signal = signal + noise

    return IqBuffer(samples=signal, sample_rate_hz=radio.sample_rate_hz, start_time_s=start_time_s)


def iq_filename(prefix, sample_rate_hz, center_frequency_hz):
    """Raw-capture filename carrying the sample rate and center frequency."""
    return f"{prefix}_fs{int(round(sample_rate_hz))}_fc{int(round(center_frequency_hz))}.iq"


def write_iq(path, buffer):
    """Dump a buffer as interleaved little-endian float32 I/Q pairs, no header."""
    interleaved = np.empty(2 * len(buffer), dtype="<f4")
    interleaved[0::2] = buffer.samples.real
    interleaved[1::2] = buffer.samples.imag
    with open(path, "wb") as fh:
        fh.write(interleaved.tobytes())


def read_iq(path, sample_rate_hz, start_time_s=0.0):
    """Load interleaved float32 I/Q pairs into an IqBuffer."""
    raw = np.fromfile(path, dtype="<f4")
    if len(raw) == 0 or len(raw) % 2 != 0:
        raise ValueError(f"{path} does not contain interleaved I/Q float32 pairs")
    samples = raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)
    return IqBuffer(samples=samples, sample_rate_hz=sample_rate_hz, start_time_s=start_time_s)
