"""Scenario driver: simulate captures, run the chain, feed the filter.

A scenario ties together a platform track (1 Hz, like the GPS log it stands
in for), an emitter, channel impairments, a radio profile and the filter
configuration. Each one-second epoch synthesizes a capture at the true
bearing, runs the receive chain (~330 raw bearings), heading-corrects and
downsamples them to a single 1 Hz bearing, and steps the particle filter.
"""

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import pfilter
from .dsp import ChainConfig, calibrate_offset, run_chain
from .errors import ConfigurationError
from .profiles import (
    DEFAULT_DECIMATION,
    DEFAULT_FREQUENCY_OFFSET_HZ,
    default_radio,
    desk_radio,
    filter_profile,
)
from .simulate import ChannelSpec, EmitterSpec, simulate_capture
from .types import (
    ArrayGeometry,
    BearingMeasurement,
    RadioConfig,
    WorldPose,
    wrap_degrees,
    wrap_signed_degrees,
)


# ---------------------------------------------------------------------------
# platform tracks

@dataclass
class PlatformTrack:
    """1 Hz world-frame track: positions, headings, and derived kinematics."""

    positions: np.ndarray          # (n, 2), one row per integer second
    headings_deg: np.ndarray       # (n,)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.headings_deg = np.asarray(self.headings_deg, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ConfigurationError("track positions must be (n, 2)")
        if len(self.positions) != len(self.headings_deg):
            raise ConfigurationError("positions and headings must have equal length")
        if len(self.positions) < 3:
            raise ConfigurationError("track needs at least 3 samples")

    def __len__(self):
        return len(self.positions)

    @property
    def n_epochs(self):
        return len(self.positions) - 1

    @property
    def duration_s(self):
        return float(self.n_epochs)

    def position_at(self, t):
        t = np.clip(t, 0.0, self.duration_s)
        x = np.interp(t, np.arange(len(self)), self.positions[:, 0])
        y = np.interp(t, np.arange(len(self)), self.positions[:, 1])
        return np.array([x, y])

    def heading_at(self, t):
        t = np.clip(t, 0.0, self.duration_s)
        unwrapped = np.degrees(np.unwrap(np.deg2rad(self.headings_deg)))
        return float(wrap_degrees(np.interp(t, np.arange(len(self)), unwrapped)))

    def acceleration_world(self, epoch):
        """Central second difference of position at integer index epoch (m/s^2)."""
        p = self.positions
        if epoch < 1 or epoch > len(p) - 2:
            return np.zeros(2)
        return p[epoch + 1] - 2.0 * p[epoch] + p[epoch - 1]

    def pose_for_epoch(self, epoch):
        """WorldPose used for the filter step covering epoch -> epoch+1.

        Position and heading are taken at the epoch center (where the
        downsampled measurement lives); the acceleration is rotated into the
        platform frame as an IMU would report it. Averaging adjacent second
        differences makes the accumulated velocity compensation telescope to
        the platform velocity at epoch centers, so a cloud started at rest
        stays aligned with the measurement times.
        """
        center = epoch + 0.5
        heading = self.heading_at(center)
        acc_world = 0.5 * (self.acceleration_world(epoch)
                           + self.acceleration_world(epoch - 1))
        h = np.deg2rad(heading)
        c, s = np.cos(h), np.sin(h)
        acc_platform = np.array([c * acc_world[0] + s * acc_world[1],
                                 -s * acc_world[0] + c * acc_world[1]])
        velocity = (self.position_at(center + 0.5) - self.position_at(center - 0.5))
        return WorldPose(
            position_m=self.position_at(center),
            velocity_mps=velocity,
            heading_deg=heading,
            acceleration_mps2=acc_platform,
        )


def _headings_from_positions(positions):
    deltas = np.diff(positions, axis=0)
    headings = np.degrees(np.arctan2(deltas[:, 1], deltas[:, 0]))
    # a stationary sample keeps the previous heading
    for i in range(len(headings)):
        if np.allclose(deltas[i], 0.0):
            headings[i] = headings[i - 1] if i > 0 else 0.0
    return wrap_degrees(np.append(headings, headings[-1]))


def _speed_profile(target_speed, ramp_s, hold_s, total_arc):
    """Per-second arc positions: hold at rest, ramp up, then constant speed."""
    arcs = [0.0]
    v = 0.0
    while arcs[-1] < total_arc:
        if len(arcs) > hold_s:
            v = min(target_speed, v + target_speed / ramp_s)
        arcs.append(arcs[-1] + v)
    return np.array(arcs)


def line_track(start, heading_deg, length_m, speed_mps, ramp_s=8.0, hold_s=3):
    """Straight track: stationary hold, speed ramp, then constant velocity."""
    arcs = _speed_profile(speed_mps, ramp_s, hold_s, length_m)
    h = np.deg2rad(heading_deg)
    direction = np.array([np.cos(h), np.sin(h)])
    positions = np.asarray(start, dtype=float)[np.newaxis, :] + arcs[:, np.newaxis] * direction
    return PlatformTrack(positions=positions, headings_deg=_headings_from_positions(positions))


def loop_track(center, radius_m, speed_mps, n_loops=1, ramp_s=8.0, hold_s=3,
               start_angle_deg=0.0):
    """Circular track around center, counter-clockwise, starting at rest."""
    arcs = _speed_profile(speed_mps, ramp_s, hold_s, 2.0 * np.pi * radius_m * n_loops)
    angles = np.deg2rad(start_angle_deg) + arcs / radius_m
    positions = np.asarray(center, dtype=float)[np.newaxis, :] + radius_m * np.stack(
        [np.cos(angles), np.sin(angles)], axis=1
    )
    return PlatformTrack(positions=positions, headings_deg=_headings_from_positions(positions))


def points_track(rows):
    """Track from explicit [t, x, y, heading] rows at 1 Hz (t must be 0,1,2,...)."""
    rows = sorted(rows, key=lambda r: r[0])
    times = [r[0] for r in rows]
    if any(abs(t - i) > 1e-9 for i, t in enumerate(times)):
        raise ConfigurationError("points track must be sampled at 1 Hz starting at t=0")
    positions = np.array([[r[1], r[2]] for r in rows], dtype=float)
    if len(rows[0]) > 3:
        headings = np.array([r[3] for r in rows], dtype=float)
    else:
        headings = _headings_from_positions(positions)
    return PlatformTrack(positions=positions, headings_deg=headings)


# ---------------------------------------------------------------------------
# scenario definition

@dataclass
class EmitterTrack:
    """Static or 1 Hz-sampled moving emitter position."""

    positions: np.ndarray  # (n, 2); n == 1 means static

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))

    def position_at(self, t):
        if len(self.positions) == 1:
            return self.positions[0]
        n = len(self.positions)
        t = np.clip(t, 0.0, n - 1.0)
        x = np.interp(t, np.arange(n), self.positions[:, 0])
        y = np.interp(t, np.arange(n), self.positions[:, 1])
        return np.array([x, y])


@dataclass
class Scenario:
    """Everything needed for a reproducible end-to-end run."""

    name: str
    radio: RadioConfig
    geometry: ArrayGeometry
    track: PlatformTrack
    emitter_track: EmitterTrack
    seed: int = 1
    snr_db: float = 20.0
    geometry_jitter_std_m: float = 0.0
    frequency_offset_hz: float = DEFAULT_FREQUENCY_OFFSET_HZ
    emitter_amplitude: float = 1.0
    silence_intervals_s: tuple = ()
    decimation: int = DEFAULT_DECIMATION
    filter_config: dict = field(default_factory=dict)

    @property
    def duration_s(self):
        return self.track.duration_s

    def silence_for_epoch(self, epoch):
        """Emitter active intervals within [epoch, epoch+1), capture-relative."""
        active = []
        cursor = 0.0
        for a, b in sorted(self.silence_intervals_s):
            a_rel = max(0.0, a - epoch)
            b_rel = min(1.0, b - epoch)
            if b_rel <= 0.0 or a_rel >= 1.0:
                continue
            if a_rel > cursor:
                active.append((cursor, a_rel))
            cursor = max(cursor, b_rel)
        if cursor < 1.0:
            active.append((cursor, 1.0))
        return tuple(active)  # empty means the whole epoch is silent


_RADIO_PROFILES = {"default": default_radio, "desk": desk_radio}


def load_scenario(path):
    """Parse a scenario YAML file; see scenarios/ for the schema by example."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    try:
        radio_cfg = doc.get("radio", {})
        if "profile" in radio_cfg:
            radio = _RADIO_PROFILES[radio_cfg["profile"]]()
        else:
            radio = RadioConfig(
                carrier_frequency_hz=float(radio_cfg["carrier_frequency_hz"]),
                sample_rate_hz=float(radio_cfg["sample_rate_hz"]),
                samples_per_antenna=int(radio_cfg["samples_per_antenna"]),
                fft_length=int(radio_cfg["fft_length"]),
            )
        geometry = ArrayGeometry.square(float(doc.get("geometry", {}).get("side_m", 0.44)))

        platform = doc["platform"]
        kind = platform.get("type", "line")
        if kind == "line":
            track = line_track(
                start=platform["start"], heading_deg=float(platform.get("heading_deg", 0.0)),
                length_m=float(platform["length_m"]), speed_mps=float(platform["speed_mps"]),
                ramp_s=float(platform.get("ramp_s", 8.0)), hold_s=int(platform.get("hold_s", 3)),
            )
        elif kind == "loop":
            track = loop_track(
                center=platform.get("center", [0.0, 0.0]),
                radius_m=float(platform["radius_m"]), speed_mps=float(platform["speed_mps"]),
                n_loops=float(platform.get("loops", 1)),
                ramp_s=float(platform.get("ramp_s", 8.0)), hold_s=int(platform.get("hold_s", 3)),
                start_angle_deg=float(platform.get("start_angle_deg", 0.0)),
            )
        elif kind == "points":
            track = points_track(platform["points"])
        else:
            raise ConfigurationError(f"unknown platform type {kind!r}")

        emitter = doc.get("emitter", {})
        if "track" in emitter:
            emitter_track = EmitterTrack(positions=emitter["track"])
        else:
            emitter_track = EmitterTrack(positions=[emitter.get("position_m", [0.0, 0.0])])

        silence = []
        for interval in emitter.get("silence_intervals_s", []) or []:
            silence.append((float(interval[0]), float(interval[1])))
        for frac in emitter.get("silence_fractions", []) or []:
            silence.append((float(frac[0]) * track.duration_s,
                            float(frac[1]) * track.duration_s))

        channel = doc.get("channel", {})
        snr = channel.get("snr_db", 20.0)
        snr = math.inf if snr in ("inf", None) else float(snr)

        return Scenario(
            name=doc.get("name", os.path.splitext(os.path.basename(path))[0]),
            radio=radio,
            geometry=geometry,
            track=track,
            emitter_track=emitter_track,
            seed=int(doc.get("seed", 1)),
            snr_db=snr,
            geometry_jitter_std_m=float(channel.get("geometry_jitter_std_m", 0.0)),
            frequency_offset_hz=float(emitter.get("frequency_offset_hz",
                                                  DEFAULT_FREQUENCY_OFFSET_HZ)),
            emitter_amplitude=float(emitter.get("amplitude", 1.0)),
            silence_intervals_s=tuple(silence),
            decimation=int(doc.get("chain", {}).get("decimation", DEFAULT_DECIMATION)),
            filter_config=dict(doc.get("filter", {})),
        )
    except KeyError as exc:
        raise ConfigurationError(f"scenario file {path} is missing {exc}") from exc


# ---------------------------------------------------------------------------
# geometry helpers and bearing reduction

def true_bearing(platform, emitter_position):
    """Bearing from the platform to a world point, in the array frame.

    World-frame angle rotated by the platform heading: what the direction
    finder should report.
    """
    delta = np.asarray(emitter_position, dtype=float) - platform.position_m
    if np.hypot(*delta) < 1e-12:
        raise ValueError("emitter coincides with the platform position")
    world = np.degrees(np.arctan2(delta[1], delta[0]))
    return float(wrap_degrees(world - platform.heading_deg))


def circular_mean_deg(angles_deg, weights=None):
    """Vector-mean of angles in degrees; weights need not be normalized."""
    angles = np.deg2rad(np.asarray(angles_deg, dtype=float))
    if weights is None:
        weights = np.ones_like(angles)
    weights = np.asarray(weights, dtype=float)
    if weights.sum() <= 0:
        weights = np.ones_like(angles)
    x = (weights * np.cos(angles)).sum()
    y = (weights * np.sin(angles)).sum()
    return float(wrap_degrees(np.degrees(np.arctan2(y, x))))


def circular_std_deg(angles_deg):
    angles = np.deg2rad(np.asarray(angles_deg, dtype=float))
    r = np.hypot(np.cos(angles).mean(), np.sin(angles).mean())
    r = min(max(r, 1e-12), 1.0)
    return float(np.degrees(np.sqrt(-2.0 * np.log(r))))


def downsample_bearings(measurements, epoch_s):
    """One confidence-weighted circular-mean bearing per epoch.

    Output timestamps sit at epoch centers; the confidence is the plain mean
    of the inputs' confidences. Epochs with no measurements are omitted.
    """
    if epoch_s <= 0:
        raise ValueError("epoch_s must be positive")
    if not measurements:
        return []
    epoch_us = int(round(epoch_s * 1e6))
    t0 = measurements[0].timestamp_us
    groups = {}
    for m in measurements:
        groups.setdefault((m.timestamp_us - t0) // epoch_us, []).append(m)
    out = []
    for index in sorted(groups):
        group = groups[index]
        angles = [m.angle_deg for m in group]
        confidences = np.array([m.confidence for m in group])
        out.append(BearingMeasurement(
            angle_deg=circular_mean_deg(angles, confidences),
            timestamp_us=t0 + index * epoch_us + epoch_us // 2,
            confidence=float(confidences.mean()),
        ))
    return out


# ---------------------------------------------------------------------------
# end-to-end run

@dataclass
class RunResult:
    """Outputs of one scenario run."""

    bearing_log: list           # raw chain output, array frame
    downsampled: list           # 1 Hz, heading-corrected to world bearings
    trace: list                 # per-epoch dict rows (see pfilter.write_trace_csv)
    final_errors: tuple         # (err_x, err_y, err_total) at the last epoch
    burn_in_epochs: int

    @property
    def max_error_post_burn_in(self):
        errs = [row["err_total"] for row in self.trace[self.burn_in_epochs:]]
        return max(errs) if errs else math.nan

    def final_estimate(self):
        row = self.trace[-1]
        return np.array([row["mean_x"], row["mean_y"]])


def _epoch_bearings(scenario, chain, epoch):
    """Simulate one epoch's capture and run the chain over it."""
    center = epoch + 0.5
    pose = scenario.track.pose_for_epoch(epoch)
    bearing = true_bearing(pose, scenario.emitter_track.position_at(center))
    emitter = EmitterSpec(
        bearing_deg=bearing,
        frequency_offset_hz=scenario.frequency_offset_hz,
        amplitude=scenario.emitter_amplitude,
        active_intervals=scenario.silence_for_epoch(epoch),
    )
    channel = ChannelSpec(
        snr_db=scenario.snr_db,
        geometry_jitter_std_m=scenario.geometry_jitter_std_m,
        rng_seed=[scenario.seed, epoch],
    )
    capture = simulate_capture(scenario.radio, scenario.geometry, emitter, channel,
                               duration_s=1.0, start_time_s=float(epoch))
    return run_chain(capture, scenario.radio, chain)


def run_scenario(scenario, seed=None, profile_name="default", grid_half_extent_m=None,
                 particle_count=None, progress=None):
    """Drive a full scenario; returns a RunResult.

    Filter parameters resolve in order: profile defaults, scenario
    filter_config overrides, then explicit arguments.
    """
    scenario_seed = scenario.seed if seed is None else int(seed)
    scenario = replace(scenario, seed=scenario_seed)

    cfg = dict(scenario.filter_config)
    profile_name = cfg.pop("profile", profile_name) or "default"
    profile = filter_profile(profile_name)
    cfg_count = cfg.pop("count", 10_000)
    cfg_extent = cfg.pop("grid_half_extent_m", 100.0)
    count = int(particle_count if particle_count is not None else cfg_count)
    extent = float(grid_half_extent_m if grid_half_extent_m is not None else cfg_extent)
    burn_in = int(cfg.pop("burn_in_epochs", 10))
    min_confidence = float(cfg.pop("min_confidence", profile.min_confidence))
    use_confidence = bool(cfg.pop("use_confidence", profile.use_confidence))
    motion = profile.motion
    if cfg.get("velocity_noise_std") is not None:
        motion = replace(motion, velocity_noise_std_mps=float(cfg["velocity_noise_std"]))
    cfg.pop("velocity_noise_std", None)
    if cfg.get("position_noise_std") is not None:
        motion = replace(motion, position_noise_std_m=float(cfg["position_noise_std"]))
    cfg.pop("position_noise_std", None)
    measurement_noise = profile.measurement
    if cfg.get("sigma2_deg2") is not None:
        measurement_noise = pfilter.MeasurementNoise(float(cfg.pop("sigma2_deg2")))
    else:
        cfg.pop("sigma2_deg2", None)
    elimination_factor = float(cfg.pop("elimination_factor", pfilter.DEFAULT_ELIMINATION_FACTOR))
    if cfg:
        raise ConfigurationError(f"unknown filter_config keys: {sorted(cfg)}")

    chain = ChainConfig.for_radio(scenario.radio, scenario.decimation,
                                  translation_hz=scenario.frequency_offset_hz)
    chain = chain.with_calibration(calibrate_offset(scenario.radio, scenario.geometry, chain))

    cloud = pfilter.init_uniform(extent, count, seed=scenario_seed)
    bearing_log = []
    downsampled = []
    trace = []
    n_epochs = scenario.track.n_epochs
    for epoch in range(n_epochs):
        measurements = _epoch_bearings(scenario, chain, epoch)
        bearing_log.extend(measurements)

        # heading-correct each raw bearing at its own timestamp, then reduce
        corrected = [
            BearingMeasurement(
                angle_deg=wrap_degrees(
                    m.angle_deg + scenario.track.heading_at(m.timestamp_us / 1e6)
                ),
                timestamp_us=m.timestamp_us,
                confidence=m.confidence,
            )
            for m in measurements
        ]
        epoch_bearing = downsample_bearings(corrected, 1.0)[0]
        downsampled.append(epoch_bearing)

        pose = scenario.track.pose_for_epoch(epoch)
        cloud = pfilter.predict(cloud, pose, motion)
        if epoch_bearing.confidence >= min_confidence:
            cloud = pfilter.update(cloud, epoch_bearing, measurement_noise,
                                   use_confidence=use_confidence)
        cloud = pfilter.maybe_resample(cloud, elimination_factor=elimination_factor)

        est = pfilter.to_world(pfilter.estimate(cloud), pose)
        truth = scenario.emitter_track.position_at(epoch + 0.5)
        err = est.mean_m - truth
        trace.append({
            "step": epoch,
            "timestamp_us": epoch_bearing.timestamp_us,
            "mean_x": est.mean_m[0], "mean_y": est.mean_m[1],
            "var_x": est.variance_m2[0], "var_y": est.variance_m2[1],
            "err_x": err[0], "err_y": err[1],
            "err_total": float(np.hypot(err[0], err[1])),
        })
        if progress is not None:
            progress(epoch, n_epochs, trace[-1])

    final = trace[-1]
    return RunResult(
        bearing_log=bearing_log,
        downsampled=downsampled,
        trace=trace,
        final_errors=(final["err_x"], final["err_y"], final["err_total"]),
        burn_in_epochs=burn_in,
    )


# ---------------------------------------------------------------------------
# metrics and named experiments

def error_metrics(trace, emitter_track, burn_in_epochs=0):
    """Per-step and summary errors for an estimate trace against truth.

    trace rows need step/timestamp_us/mean_x/mean_y; truth is an EmitterTrack
    (or a static 2-vector). Returns (rows, summary) where rows carry the error
    columns filled in and summary holds final and post-burn-in maxima.
    """
    if not trace:
        raise ValueError("empty trace")
    if not isinstance(emitter_track, EmitterTrack):
        emitter_track = EmitterTrack(positions=[emitter_track])
    rows = []
    for row in trace:
        truth = emitter_track.position_at(row["step"] + 0.5)
        err_x = row["mean_x"] - truth[0]
        err_y = row["mean_y"] - truth[1]
        out = dict(row)
        out["err_x"], out["err_y"] = err_x, err_y
        out["err_total"] = float(np.hypot(err_x, err_y))
        rows.append(out)
    finals = rows[-1]
    post = rows[burn_in_epochs:] if burn_in_epochs < len(rows) else rows[-1:]
    summary = {
        "final_err_x": finals["err_x"],
        "final_err_y": finals["err_y"],
        "final_err_total": finals["err_total"],
        "max_err_post_burn_in": max(r["err_total"] for r in post),
        "burn_in_epochs": burn_in_epochs,
        "n_epochs": len(rows),
    }
    return rows, summary


def format_metrics_table(summary):
    lines = [
        f"{'epochs':>22}: {summary['n_epochs']}",
        f"{'burn-in epochs':>22}: {summary['burn_in_epochs']}",
        f"{'final X error':>22}: {summary['final_err_x']:10.3f} m",
        f"{'final Y error':>22}: {summary['final_err_y']:10.3f} m",
        f"{'final total error':>22}: {summary['final_err_total']:10.3f} m",
        f"{'max error after burn-in':>22}: {summary['max_err_post_burn_in']:10.3f} m",
    ]
    return "\n".join(lines)


@dataclass
class ChamberResult:
    """Pooled-histogram outcome of the two-bearing chamber experiment."""

    histogram: np.ndarray       # 360 bins, 1 degree each
    mode_a_deg: float
    mode_b_deg: float
    separation_deg: float
    mode_concentration: float   # worst-case fraction of a cluster within 15 deg
    passed: bool


def chamber_test(seed=0, snr_db=20.0, bearings=(50.0, 230.0), radio=None,
                 geometry=None, duration_s=1.0, skip_frames=3):
    """Two captures 180 degrees apart, pooled into a 360-bin histogram.

    Asserts the analog of the rotate-the-array chamber experiment: two
    distinct modes separated by 180 +/- 3 degrees, each tightly concentrated.
    """
    radio = radio or default_radio()
    geometry = geometry or ArrayGeometry.square(0.44)
    chain = ChainConfig.for_radio(radio, DEFAULT_DECIMATION,
                                  translation_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
    chain = chain.with_calibration(calibrate_offset(radio, geometry, chain))

    pooled = {}
    for which, bearing in enumerate(bearings):
        emitter = EmitterSpec(bearing_deg=bearing,
                              frequency_offset_hz=chain.fir.translation_hz)
        channel = ChannelSpec(snr_db=snr_db, rng_seed=[seed, which])
        capture = simulate_capture(radio, geometry, emitter, channel, duration_s)
        estimates = [m.angle_deg for m in run_chain(capture, radio, chain)[skip_frames:]]
        pooled[bearing] = estimates

    all_angles = np.concatenate([pooled[b] for b in bearings])
    histogram, _ = np.histogram(all_angles, bins=360, range=(0.0, 360.0))

    mode_a = circular_mean_deg(pooled[bearings[0]])
    mode_b = circular_mean_deg(pooled[bearings[1]])
    separation = abs(wrap_signed_degrees(mode_b - mode_a))
    concentration = min(
        np.mean(np.abs(wrap_signed_degrees(np.array(pooled[b]) - m)) <= 15.0)
        for b, m in ((bearings[0], mode_a), (bearings[1], mode_b))
    )
    passed = abs(separation - 180.0) <= 3.0 and concentration >= 0.6
    return ChamberResult(
        histogram=histogram, mode_a_deg=mode_a, mode_b_deg=mode_b,
        separation_deg=separation, mode_concentration=float(concentration),
        passed=passed,
    )


# ---------------------------------------------------------------------------
# CSV interfaces

def _write_atomic(path, write_fn):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_track_csv(path, track):
    """Track log: timestamp_us,x_m,y_m,heading_deg at 1 Hz."""
    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(["timestamp_us", "x_m", "y_m", "heading_deg"])
        for i in range(len(track)):
            writer.writerow([
                int(i * 1e6),
                f"{track.positions[i, 0]:.6f}", f"{track.positions[i, 1]:.6f}",
                f"{track.headings_deg[i]:.6f}",
            ])
    _write_atomic(path, _write)


def read_track_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((int(row["timestamp_us"]) / 1e6,
                         float(row["x_m"]), float(row["y_m"]),
                         float(row["heading_deg"])))
    rows.sort()
    positions = np.array([[r[1], r[2]] for r in rows])
    headings = np.array([r[3] for r in rows])
    return PlatformTrack(positions=positions, headings_deg=headings)


def write_histogram_csv(path, histogram):
    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(["bin_deg", "count"])
        for i, count in enumerate(histogram):
            writer.writerow([i, int(count)])
    _write_atomic(path, _write)
