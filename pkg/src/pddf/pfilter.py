"""Bearing-only particle filter in a sensor-centered frame.

The cloud lives in a frame whose origin rides with the platform but whose
axes stay world-aligned; bearing measurements are compared against each
particle's angle from the origin. Platform self-motion is compensated by
subtracting the platform acceleration from every particle's velocity, so a
track that starts at rest keeps a world-static emitter consistent with
zero-velocity particles.

The target's own motion is Brownian: at each step it moves with a freshly
drawn random velocity (white, per-axis Gaussian) plus a small direct position
perturbation. The persistent velocity state carries only the initial velocity
and the accumulated platform compensation.

All randomness is drawn from counter-based substreams keyed by (seed,
step_index, purpose), so runs are reproducible and two filters sharing a seed
see identical noise regardless of their other parameters.
"""

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import FilterDivergenceError
from .types import wrap_signed_degrees

DEFAULT_RESAMPLE_FRACTION = 0.5
DEFAULT_ELIMINATION_FACTOR = 10.0  # eliminated when weight < 1 / (factor * count)

_ORIGIN_EPS_M = 1e-6
_STREAM_INIT, _STREAM_PREDICT, _STREAM_RESAMPLE = 0, 1, 2


@dataclass(frozen=True)
class Particle:
    """Single state hypothesis; a read-only view into a ParticleSet row."""

    position_m: np.ndarray
    velocity_mps: np.ndarray
    orientation_deg: float
    log_weight: float


@dataclass(frozen=True)
class MotionNoise:
    """Per-step motion noise: direct position sigma, white velocity sigma, step."""

    position_noise_std_m: float = np.sqrt(0.5)
    velocity_noise_std_mps: float = 5.0
    dt_s: float = 1.0

    def __post_init__(self):
        if self.position_noise_std_m < 0 or self.velocity_noise_std_mps < 0:
            raise ValueError("noise standard deviations must be non-negative")
        if self.dt_s <= 0:
            raise ValueError("dt_s must be positive")


@dataclass(frozen=True)
class MeasurementNoise:
    """Bearing likelihood variance, in squared degrees."""

    bearing_variance_deg2: float = 100.0

    def __post_init__(self):
        if self.bearing_variance_deg2 <= 0:
            raise ValueError("bearing_variance_deg2 must be positive")


@dataclass(frozen=True)
class PositionEstimate:
    """Weighted cloud mean and per-axis variance, sensor or world frame."""

    mean_m: np.ndarray
    variance_m2: np.ndarray
    frame: str = "sensor"

    def __post_init__(self):
        mean = np.asarray(self.mean_m, dtype=float)
        var = np.asarray(self.variance_m2, dtype=float)
        if mean.shape != (2,) or var.shape != (2,):
            raise ValueError("mean_m and variance_m2 must be 2-vectors")
        if (var < 0).any():
            raise ValueError("variances must be non-negative")
        mean.flags.writeable = False
        var.flags.writeable = False
        object.__setattr__(self, "mean_m", mean)
        object.__setattr__(self, "variance_m2", var)


@dataclass(frozen=True)
class ParticleSet:
    """Weighted ensemble of hypotheses; operations return new sets."""

    positions: np.ndarray
    velocities: np.ndarray
    orientations: np.ndarray
    log_weights: np.ndarray
    rng_seed: int
    step_index: int = 0

    def __post_init__(self):
        n = len(self.positions)
        if n < 1:
            raise ValueError("particle set must be non-empty")
        for name, shape in (("positions", (n, 2)), ("velocities", (n, 2)),
                            ("orientations", (n,)), ("log_weights", (n,))):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float64))
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def count(self):
        return len(self.positions)

    def weights(self):
        return np.exp(self.log_weights)

    def particle(self, i):
        return Particle(
            position_m=self.positions[i].copy(),
            velocity_mps=self.velocities[i].copy(),
            orientation_deg=float(self.orientations[i]),
            log_weight=float(self.log_weights[i]),
        )

    def replace(self, **kwargs):
        fields = dict(
            positions=self.positions, velocities=self.velocities,
            orientations=self.orientations, log_weights=self.log_weights,
            rng_seed=self.rng_seed, step_index=self.step_index,
        )
        fields.update(kwargs)
        return ParticleSet(**fields)


def _stream(seed, step, purpose):
    return np.random.default_rng([int(seed), int(step), purpose])


def init_uniform(grid_half_extent_m, count, seed):
    """Uniform cloud over [-extent, extent]^2, at rest, equal weights."""
    if grid_half_extent_m <= 0:
        raise ValueError("grid_half_extent_m must be positive")
    if count < 100:
        raise ValueError("count must be at least 100")
    rng = _stream(seed, 0, _STREAM_INIT)
    positions = rng.uniform(-grid_half_extent_m, grid_half_extent_m, size=(count, 2))
    orientations = rng.uniform(0.0, 360.0, size=count)
    return ParticleSet(
        positions=positions,
        velocities=np.zeros((count, 2)),
        orientations=orientations,
        log_weights=np.full(count, -np.log(count)),
        rng_seed=seed,
        step_index=0,
    )


def predict(particle_set, platform, noise):
    """Propagate one step: platform compensation plus Brownian target motion.

    Every particle's velocity is shifted by minus the platform's world-frame
    acceleration times dt (keeping the cloud consistent in the sensor-centered
    frame), then the position moves with that velocity plus a white velocity
    draw and a direct position perturbation. Orientation is carried unchanged.
    """
    if noise.dt_s <= 0:
        raise ValueError("dt_s must be positive")
    step = particle_set.step_index + 1
    rng = _stream(particle_set.rng_seed, step, _STREAM_PREDICT)
    n = particle_set.count
    dt = noise.dt_s
    velocity_white = rng.normal(0.0, noise.velocity_noise_std_mps, size=(n, 2))
    position_noise = rng.normal(0.0, noise.position_noise_std_m, size=(n, 2))
    velocities = particle_set.velocities - platform.acceleration_world() * dt
    positions = particle_set.positions + (velocities + velocity_white) * dt + position_noise
    return particle_set.replace(positions=positions, velocities=velocities, step_index=step)


def _bearing_residuals_deg(positions, measured_bearing_deg):
    bearings = np.degrees(np.arctan2(positions[:, 1], positions[:, 0]))
    residuals = wrap_signed_degrees(bearings - measured_bearing_deg)
    at_origin = np.hypot(positions[:, 0], positions[:, 1]) <= _ORIGIN_EPS_M
    if np.any(at_origin):
        residuals = np.where(at_origin, 180.0, residuals)
    return residuals


def log_likelihood(particle, measured_bearing_deg, noise):
    """Gaussian bearing log-density for one particle.

    The residual is the wrapped difference between the sensor-to-particle
    angle and the measurement; a particle at the origin is assigned the
    180-degree (worst-case) residual.
    """
    residual = _bearing_residuals_deg(particle.position_m[np.newaxis, :],
                                      measured_bearing_deg)[0]
    sigma2 = noise.bearing_variance_deg2
    return float(-0.5 * np.log(2.0 * np.pi * sigma2) - residual**2 / (2.0 * sigma2))


def update(particle_set, measurement, noise, use_confidence=False):
    """Reweight the cloud by the bearing likelihood and renormalize.

    With use_confidence, the likelihood variance is inflated by the inverse of
    the measurement confidence, so a zero-confidence bearing is a no-op.
    """
    sigma2 = noise.bearing_variance_deg2
    if use_confidence:
        sigma2 = sigma2 / max(measurement.confidence, 1e-12)
    residuals = _bearing_residuals_deg(particle_set.positions, measurement.angle_deg)
    log_weights = particle_set.log_weights - 0.5 * np.log(2.0 * np.pi * sigma2) \
        - residuals**2 / (2.0 * sigma2)
    finite = np.isfinite(log_weights)
    if not finite.any():
        raise FilterDivergenceError(
            "all particle weights vanished during update",
            step_index=particle_set.step_index,
        )
    peak = log_weights[finite].max()
    shifted = log_weights - peak
    log_norm = peak + np.log(np.exp(shifted).sum())
    return particle_set.replace(log_weights=log_weights - log_norm)


def eliminated_fraction(particle_set, elimination_factor=DEFAULT_ELIMINATION_FACTOR):
    threshold = 1.0 / (elimination_factor * particle_set.count)
    return float(np.mean(particle_set.weights() < threshold))


def maybe_resample(particle_set, resample_fraction=DEFAULT_RESAMPLE_FRACTION,
                   elimination_factor=DEFAULT_ELIMINATION_FACTOR):
    """Systematic resampling once enough particles are effectively eliminated.

    A particle counts as eliminated when its normalized weight falls below
    1 / (elimination_factor * count); when at least resample_fraction of the
    cloud is eliminated, the set is resampled proportionally to weight and the
    weights reset equal. Otherwise the set is returned unchanged.
    """
    weights = particle_set.weights()
    if not np.isfinite(weights).all() or weights.sum() <= 0:
        raise FilterDivergenceError(
            "degenerate weights in resampling check",
            step_index=particle_set.step_index,
        )
    if eliminated_fraction(particle_set, elimination_factor) < resample_fraction:
        return particle_set
    rng = _stream(particle_set.rng_seed, particle_set.step_index, _STREAM_RESAMPLE)
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0  # guard the top edge against rounding
    indices = kernels.systematic_resample_indices(
        np.ascontiguousarray(cumulative), float(rng.uniform(0.0, 1.0)), particle_set.count
    )
    n = particle_set.count
    return particle_set.replace(
        positions=particle_set.positions[indices],
        velocities=particle_set.velocities[indices],
        orientations=particle_set.orientations[indices],
        log_weights=np.full(n, -np.log(n)),
    )


def estimate(particle_set):
    """Weighted mean and per-axis variance of the particle positions."""
    weights = particle_set.weights()
    mean = weights @ particle_set.positions
    centered = particle_set.positions - mean
    variance = weights @ centered**2
    return PositionEstimate(mean_m=mean, variance_m2=np.maximum(variance, 0.0), frame="sensor")


def to_world(position_estimate, platform):
    """Translate a sensor-frame estimate by the platform's world position."""
    if position_estimate.frame != "sensor":
        raise ValueError("estimate is already in the world frame")
    return PositionEstimate(
        mean_m=position_estimate.mean_m + platform.position_m,
        variance_m2=position_estimate.variance_m2,
        frame="world",
    )


def _atomic_writer(path):
    directory = os.path.dirname(os.path.abspath(path))
    return tempfile.mkstemp(dir=directory, suffix=".tmp")


def write_snapshot_csv(path, particle_set, step=None):
    """Particle cloud dump: step,x_m,y_m,vx,vy,orientation_deg,weight."""
    step = particle_set.step_index if step is None else step
    weights = particle_set.weights()
    fd, tmp = _atomic_writer(path)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "x_m", "y_m", "vx", "vy", "orientation_deg", "weight"])
            for i in range(particle_set.count):
                writer.writerow([
                    step,
                    f"{particle_set.positions[i, 0]:.6f}", f"{particle_set.positions[i, 1]:.6f}",
                    f"{particle_set.velocities[i, 0]:.6f}", f"{particle_set.velocities[i, 1]:.6f}",
                    f"{particle_set.orientations[i]:.6f}", f"{weights[i]:.9e}",
                ])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace_csv(path, rows):
    """Estimate trace: step,timestamp_us,mean_x,mean_y,var_x,var_y,err_x,err_y,err_total.

    rows is an iterable of dicts with those keys; error fields may be nan when
    ground truth is unknown.
    """
    fields = ["step", "timestamp_us", "mean_x", "mean_y", "var_x", "var_y",
              "err_x", "err_y", "err_total"]
    fd, tmp = _atomic_writer(path)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for row in rows:
                writer.writerow([
                    row["step"], row["timestamp_us"],
                    f"{row['mean_x']:.6f}", f"{row['mean_y']:.6f}",
                    f"{row['var_x']:.6f}", f"{row['var_y']:.6f}",
                    f"{row['err_x']:.6f}", f"{row['err_y']:.6f}", f"{row['err_total']:.6f}",
                ])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_trace_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "step": int(row["step"]), "timestamp_us": int(row["timestamp_us"]),
                "mean_x": float(row["mean_x"]), "mean_y": float(row["mean_y"]),
                "var_x": float(row["var_x"]), "var_y": float(row["var_y"]),
                "err_x": float(row["err_x"]), "err_y": float(row["err_y"]),
                "err_total": float(row["err_total"]),
            })
    return rows
