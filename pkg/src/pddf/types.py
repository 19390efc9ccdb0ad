"""Shared domain types and unit conventions.

Angles cross API boundaries in degrees wrapped to [0, 360) and are converted
to radians only inside trigonometric code. Positions are planar meters in a
local east/north frame (x east, y north, angles counter-clockwise from +x).
"""

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, SI exact

# Square arrays wider than 0.22 wavelengths degrade commutated-phase recovery;
# half a wavelength is the hard spatial-Nyquist limit.
OPTIMAL_SIDE_WAVELENGTHS = 0.22
MAX_SIDE_WAVELENGTHS = 0.5

_GEOM_TOL = 1e-9


def wavelength(carrier_frequency_hz):
    """Free-space wavelength in meters for a carrier frequency in Hz."""
    if carrier_frequency_hz <= 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_frequency_hz}")
    return SPEED_OF_LIGHT / carrier_frequency_hz


def wrap_degrees(angle_deg):
    """Wrap an angle (scalar or array) into [0, 360)."""
    wrapped = np.mod(angle_deg, 360.0)
    # mod of a tiny negative rounds up to exactly 360.0; keep the range half-open
    return np.where(wrapped >= 360.0, 0.0, wrapped) if np.ndim(wrapped) else \
        (0.0 if wrapped >= 360.0 else float(wrapped))


def wrap_signed_degrees(angle_deg):
    """Wrap an angle difference into (-180, 180]."""
    wrapped = np.mod(np.asarray(angle_deg, dtype=float) + 180.0, 360.0) - 180.0
    wrapped = np.where(wrapped == -180.0, 180.0, wrapped)
    if np.isscalar(angle_deg) or np.ndim(angle_deg) == 0:
        return float(wrapped)
    return wrapped


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RadioConfig:
    """Receiver-side radio parameters.

    samples_per_antenna is the switching-schedule parameter tying the antenna
    rotation rate to the raw sample rate (see simulate.switching_frequency);
    fft_length is the frame size used by the bearing chain after decimation.
    """

    carrier_frequency_hz: float
    sample_rate_hz: float
    samples_per_antenna: int
    fft_length: int
    num_antennas: int = 4

    def __post_init__(self):
        if self.carrier_frequency_hz <= 0:
            raise ValueError("carrier_frequency_hz must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.samples_per_antenna < 1:
            raise ValueError("samples_per_antenna must be a positive integer")
        if not _is_power_of_two(self.fft_length) or self.fft_length < 64:
            raise ValueError(f"fft_length must be a power of two >= 64, got {self.fft_length}")
        if self.num_antennas != 4:
            raise ValueError("only 4-antenna arrays are supported")

    @property
    def wavelength_m(self):
        return wavelength(self.carrier_frequency_hz)


@dataclass(frozen=True)
class GeometryReport:
    """Outcome of an array-geometry check: 'ok', 'warn' or 'reject'."""

    status: str
    messages: tuple

    @property
    def ok(self):
        return self.status == "ok"

    @property
    def rejected(self):
        return self.status == "reject"


@dataclass(frozen=True)
class ArrayGeometry:
    """Positions of the four antenna elements, as offsets from the array center.

    Elements are indexed 0..3 counter-clockwise with element 0 on the +x axis,
    so element k sits at angle 90k degrees on a circle of radius radius_m. The
    commutation sweep follows this ordering, which fixes the bearing sign.
    """

    element_positions: np.ndarray
    radius_m: float
    side_m: float

    def __post_init__(self):
        pos = np.asarray(self.element_positions, dtype=float)
        if pos.shape != (4, 2):
            raise ValueError(f"element_positions must be 4x2, got {pos.shape}")
        object.__setattr__(self, "element_positions", pos)
        centroid = pos.mean(axis=0)
        if np.abs(centroid).max() > _GEOM_TOL:
            raise ValueError("element positions must be centered on the array origin")
        radii = np.hypot(pos[:, 0], pos[:, 1])
        if np.abs(radii - self.radius_m).max() > _GEOM_TOL:
            raise ValueError("all elements must lie at radius_m from the center")
        sides = np.hypot(*(pos - np.roll(pos, -1, axis=0)).T)
        if np.abs(sides - self.side_m).max() > _GEOM_TOL:
            raise ValueError("element spacing is not a square of side side_m")
        # right angles: adjacent edges must be orthogonal
        edges = np.roll(pos, -1, axis=0) - pos
        dots = np.abs(np.sum(edges * np.roll(edges, -1, axis=0), axis=1))
        if dots.max() > _GEOM_TOL * max(self.side_m, 1.0):
            raise ValueError("element layout is not square (corners are not right angles)")
        if abs(self.radius_m - self.side_m / np.sqrt(2.0)) > _GEOM_TOL:
            raise ValueError("radius_m must equal side_m / sqrt(2)")

    @classmethod
    def square(cls, side_m):
        """Square array of the given side, corners on the axes (element 0 at +x)."""
        radius = side_m / np.sqrt(2.0)
        angles = np.deg2rad(90.0 * np.arange(4))
        pos = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        # snap exact zeros so the geometry checks are bit-clean
        pos[np.abs(pos) < 1e-12] = 0.0
        return cls(element_positions=pos, radius_m=radius, side_m=side_m)

    def element_angles_rad(self):
        return np.arctan2(self.element_positions[:, 1], self.element_positions[:, 0])


def validate_geometry(geometry, radio):
    """Check an array against the carrier wavelength.

    Returns a GeometryReport: 'reject' above the lambda/2 spatial-Nyquist
    bound, 'warn' between 0.22 lambda and lambda/2, 'ok' otherwise.
    """
    lam = wavelength(radio.carrier_frequency_hz)
    side = geometry.side_m
    messages = []
    if side > MAX_SIDE_WAVELENGTHS * lam:
        messages.append(
            f"side {side:.4f} m exceeds lambda/2 = {MAX_SIDE_WAVELENGTHS * lam:.4f} m: "
            "bearing recovery is ambiguous"
        )
        return GeometryReport(status="reject", messages=tuple(messages))
    # 1% pad: array dimensions are usually quoted to the centimeter
    if side > 1.01 * OPTIMAL_SIDE_WAVELENGTHS * lam:
        messages.append(
            f"side {side:.4f} m exceeds 0.22 lambda = {OPTIMAL_SIDE_WAVELENGTHS * lam:.4f} m: "
            "expect degraded accuracy"
        )
        return GeometryReport(status="warn", messages=tuple(messages))
    return GeometryReport(status="ok", messages=())


@dataclass(frozen=True)
class IqBuffer:
    """Contiguous complex baseband samples with sample-rate metadata.

    Sample i corresponds to time start_time_s + i / sample_rate_hz. The sample
    array is frozen after construction; downstream stages allocate new buffers.
    """

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or len(samples) == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not np.iscomplexobj(samples):
            samples = samples.astype(np.complex128)
        samples = np.ascontiguousarray(samples)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self):
        return len(self.samples) / self.sample_rate_hz

    def time_of(self, index):
        return self.start_time_s + index / self.sample_rate_hz


@dataclass(frozen=True)
class BearingMeasurement:
    """One angle-of-incidence estimate with its timestamp and quality."""

    angle_deg: float
    timestamp_us: int
    confidence: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "angle_deg", float(wrap_degrees(self.angle_deg)))
        object.__setattr__(self, "timestamp_us", int(self.timestamp_us))
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class WorldPose:
    """Platform pose in the world frame.

    acceleration_mps2 is expressed in the platform (heading-rotated) frame,
    matching what an on-board accelerometer would report.
    """

    position_m: np.ndarray
    velocity_mps: np.ndarray = field(default_factory=lambda: np.zeros(2))
    heading_deg: float = 0.0
    acceleration_mps2: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        for name in ("position_m", "velocity_mps", "acceleration_mps2"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (2,):
                raise ValueError(f"{name} must be a 2-vector")
            vec.flags.writeable = False
            object.__setattr__(self, name, vec)
        object.__setattr__(self, "heading_deg", float(wrap_degrees(self.heading_deg)))

    def acceleration_world(self):
        """Platform-frame acceleration rotated into the world frame."""
        h = np.deg2rad(self.heading_deg)
        c, s = np.cos(h), np.sin(h)
        ax, ay = self.acceleration_mps2
        return np.array([c * ax - s * ay, s * ax + c * ay])
