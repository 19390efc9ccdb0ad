"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines and the
measured values behind them. These tests exercise the shipped configurations
end to end and are slower than the unit suite (a few minutes total).
"""

import cmath
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from _gridbayes import GridBayesFilter
from conftest import circular_mean_deg

from pddf import pfilter
from pddf.dsp import ChainConfig, calibrate_offset, fft_phase_at_bin, run_chain
from pddf.harness import (
    EmitterTrack,
    Scenario,
    chamber_test,
    downsample_bearings,
    line_track,
    load_scenario,
    run_scenario,
)
from pddf.profiles import (
    DEFAULT_DECIMATION,
    DEFAULT_FREQUENCY_OFFSET_HZ,
    default_geometry,
    default_radio,
    desk_radio,
)
from pddf.simulate import ChannelSpec, EmitterSpec, simulate_capture, switching_frequency
from pddf.types import BearingMeasurement, RadioConfig, WorldPose, wrap_signed_degrees


def report(criterion, passed, detail):
    verdict = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {criterion}: {verdict} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def test_criterion_1_switching_rate_exact():
    """Exact rational agreement of the switching-rate formula, 50 random configs."""
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(50):
        sample_rate = int(rng.integers(100_000, 20_000_001))
        spa = int(rng.integers(1, 10_000))
        fft_length = int(2 ** rng.integers(6, 16))
        radio = RadioConfig(150e6, float(sample_rate), spa, fft_length)
        exact = Fraction(2 * sample_rate, 4 * spa)
        assert switching_frequency(radio) == float(exact), (sample_rate, spa)
        checked += 1
    elapsed = time.perf_counter() - start
    report(1, checked == 50 and elapsed < 1.0,
           f"50 random configs exact in {elapsed * 1e3:.0f} ms")


def test_criterion_2_closed_loop_bearing_grid():
    """1-degree grid of true bearings, noiseless: wrapped error <= 1 degree."""
    start = time.perf_counter()
    radio = default_radio()
    geometry = default_geometry()
    chain = ChainConfig.for_radio(radio, DEFAULT_DECIMATION,
                                  translation_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
    chain = chain.with_calibration(calibrate_offset(radio, geometry, chain))
    frame_s = radio.fft_length / chain.effective_sample_rate_hz
    channel = ChannelSpec(snr_db=np.inf)
    worst = 0.0
    for bearing in range(360):
        emitter = EmitterSpec(bearing_deg=float(bearing),
                              frequency_offset_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
        capture = simulate_capture(radio, geometry, emitter, channel, 6 * frame_s)
        angles = [m.angle_deg for m in run_chain(capture, radio, chain)[3:]]
        err = abs(wrap_signed_degrees(circular_mean_deg(angles) - bearing))
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    report(2, worst <= 1.0 and elapsed < 120.0,
           f"max |error| {worst:.3f} deg over 360 bearings in {elapsed:.1f} s")


def test_criterion_3_chamber_two_modes():
    """Two captures 180 degrees apart pool into two modes 180 +/- 3 apart."""
    start = time.perf_counter()
    result = chamber_test(seed=0, snr_db=20.0)
    elapsed = time.perf_counter() - start
    ok = (abs(result.separation_deg - 180.0) <= 3.0
          and result.mode_concentration >= 0.6
          and elapsed < 60.0)
    report(3, ok,
           f"modes {result.mode_a_deg:.2f}/{result.mode_b_deg:.2f} deg, "
           f"separation {result.separation_deg:.2f}, "
           f"concentration {result.mode_concentration:.2f}, {elapsed:.1f} s")


def test_criterion_4_measurement_rate():
    """Default radio profile emits 330 +/- 1 bearings per simulated second."""
    start = time.perf_counter()
    radio = default_radio()
    geometry = default_geometry()
    chain = ChainConfig.for_radio(radio, DEFAULT_DECIMATION,
                                  translation_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
    emitter = EmitterSpec(bearing_deg=42.0, frequency_offset_hz=DEFAULT_FREQUENCY_OFFSET_HZ)
    capture = simulate_capture(radio, geometry, emitter,
                               ChannelSpec(snr_db=20.0, rng_seed=4), 1.0)
    count = len(run_chain(capture, radio, chain))
    elapsed = time.perf_counter() - start
    report(4, abs(count - 330) <= 1 and elapsed < 60.0,
           f"{count} bearings from 1 s of capture in {elapsed:.1f} s")


@pytest.fixture(scope="module")
def straight_pass_runs():
    scenario = load_scenario("scenarios/straight_pass.yaml")
    runs = {}
    for extent in (100.0, 1000.0):
        runs[extent] = run_scenario(scenario, grid_half_extent_m=extent)
    return scenario, runs


def test_criterion_5_error_envelope(straight_pass_runs):
    """Straight pass with mid-run silence: running error <= 40 m on both grids."""
    start = time.perf_counter()
    scenario, runs = straight_pass_runs
    details = []
    ok = True
    for extent, result in runs.items():
        final = result.final_errors[2]
        running = result.max_error_post_burn_in
        details.append(f"grid {int(2 * extent)} m: final {final:.1f} m, "
                       f"running max {running:.1f} m")
        ok = ok and final <= 40.0 and running <= 40.0
    elapsed = time.perf_counter() - start
    report("5a", ok, "; ".join(details) + f" (burn-in {runs[100.0].burn_in_epochs} epochs)")


def test_criterion_5_grid_agreement(straight_pass_runs):
    """Straight pass: 200 m and 2 km grids must land within 1 m of each other.

    Known limitation: on bearing-only straight-pass geometry the posterior
    mean of a 10^4-particle filter wanders by a few meters between runs
    (weak range observability plus resampling path degeneracy), so this
    agreement is seed-dependent; the loop scenario achieves it robustly
    (asserted within the loop criterion).
    """
    _, runs = straight_pass_runs
    diff = float(np.linalg.norm(runs[100.0].final_estimate() - runs[1000.0].final_estimate()))
    report("5b", diff <= 1.0, f"grid estimates differ by {diff:.2f} m (bound 1.0 m)")


@pytest.fixture(scope="module")
def loop_runs():
    scenario = load_scenario("scenarios/loop.yaml")
    finals = {("default", 100.0): [], ("default", 1000.0): [], ("tuned", 100.0): []}
    grid_diffs = []
    start = time.perf_counter()
    for seed in range(1, 11):
        by_extent = {}
        for profile, extent in finals:
            result = run_scenario(scenario, seed=seed, profile_name=profile,
                                  grid_half_extent_m=extent)
            finals[(profile, extent)].append(result.final_errors[2])
            if profile == "default":
                by_extent[extent] = result.final_estimate()
        grid_diffs.append(float(np.linalg.norm(by_extent[100.0] - by_extent[1000.0])))
    return finals, grid_diffs, time.perf_counter() - start


def test_criterion_6_loop_errors(loop_runs):
    """Loop scenario: seed-median final error, default and tuned profiles."""
    finals, grid_diffs, elapsed = loop_runs
    medians = {key: float(np.median(values)) for key, values in finals.items()}
    # the loop geometry is where grid-size insensitivity genuinely holds:
    # the posterior forgets the initial grid, so the two extents must agree
    ok = (medians[("default", 100.0)] <= 10.0
          and medians[("default", 1000.0)] <= 10.0
          and medians[("tuned", 100.0)] <= 5.0
          and max(grid_diffs) <= 1.0
          and elapsed < 600.0)
    report(6, ok,
           f"median finals: default 200 m {medians[('default', 100.0)]:.2f} m, "
           f"default 2 km {medians[('default', 1000.0)]:.2f} m, "
           f"tuned 200 m {medians[('tuned', 100.0)]:.2f} m; "
           f"loop grid agreement {max(grid_diffs):.2f} m worst-case; {elapsed:.0f} s")


def test_loop_beats_straight_pass(loop_runs):
    """Rapid bearing change must localize better than the straight pass.

    Seed-median comparison at equal noise settings: same channel, same default
    filter profile on both shipped scenarios (the straight pass's per-scenario
    motion-noise override is stripped so only the geometry differs).
    """
    from dataclasses import replace

    finals, _, _ = loop_runs
    scenario = load_scenario("scenarios/straight_pass.yaml")
    equal_noise = replace(scenario, filter_config={
        k: v for k, v in scenario.filter_config.items() if k != "velocity_noise_std"
    })
    straight = [run_scenario(equal_noise, seed=seed, profile_name="default").final_errors[2]
                for seed in range(1, 11)]
    loop_median = float(np.median(finals[("default", 100.0)]))
    straight_median = float(np.median(straight))
    report("6-geometry", loop_median < straight_median,
           f"loop median {loop_median:.2f} m < straight median {straight_median:.2f} m")


def _oracle_sensor_path(n_steps):
    """Sensor displacement sequence with exact per-step acceleration.

    First displacement is zero so a cloud initialized at rest tracks the
    sensor exactly through the acceleration-compensation term. The arc turns
    fast enough that every emitter direction gets angular diversity, keeping
    the posterior well inside the grid oracle's domain.
    """
    displacements = [np.zeros(2)]
    for k in range(1, n_steps):
        speed = min(8.0, 1.6 * k)
        angle = np.deg2rad(25.0 + 15.0 * k)
        displacements.append(speed * np.array([np.cos(angle), np.sin(angle)]))
    return displacements


def test_criterion_7_grid_bayes_oracle():
    """Particle filter posterior mean within 2 m of an independent grid filter."""
    start = time.perf_counter()
    n_steps, sigma2, z_std = 20, 100.0, math.sqrt(0.5)
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng([seed, 77])
        emitter = rng.uniform(-40.0, 40.0, 2)  # relative to the sensor start
        displacements = _oracle_sensor_path(n_steps)

        grid = GridBayesFilter(half_extent_m=100.0, cell_m=1.0)
        cloud = pfilter.init_uniform(100.0, 10_000, seed=seed)
        motion = pfilter.MotionNoise(position_noise_std_m=z_std,
                                     velocity_noise_std_mps=0.0, dt_s=1.0)
        noise = pfilter.MeasurementNoise(bearing_variance_deg2=sigma2)

        sensor = np.zeros(2)
        previous = np.zeros(2)
        for k in range(n_steps):
            sensor = sensor + displacements[k]
            acceleration = displacements[k] - previous
            previous = displacements[k]

            delta = emitter - sensor
            measured = math.degrees(math.atan2(delta[1], delta[0])) \
                + rng.normal(0.0, math.sqrt(sigma2))
            measurement = BearingMeasurement(angle_deg=measured % 360.0,
                                             timestamp_us=k * 1_000_000)

            pose = WorldPose(position_m=sensor, heading_deg=0.0,
                             acceleration_mps2=acceleration)
            cloud = pfilter.predict(cloud, pose, motion)
            cloud = pfilter.update(cloud, measurement, noise)
            cloud = pfilter.maybe_resample(cloud)

            grid.diffuse(z_std)
            grid.update_bearing(sensor, measured, sigma2)

        pf_world = pfilter.to_world(pfilter.estimate(cloud),
                                    WorldPose(position_m=sensor)).mean_m
        diff = float(np.linalg.norm(pf_world - grid.posterior_mean()))
        worst = max(worst, diff)
    elapsed = time.perf_counter() - start
    report(7, worst <= 2.0 and elapsed < 300.0,
           f"worst |pf - grid| {worst:.2f} m over 20 seeds in {elapsed:.0f} s")


def test_criterion_8_property_suite():
    """Invariant bundle: weights, counts, resampling, symmetry, wrap, FFT, determinism."""
    start = time.perf_counter()
    checks = []

    # weight normalization to 1e-9 and particle-count invariance
    rng = np.random.default_rng(1)
    cloud = pfilter.init_uniform(100.0, 5000, seed=2)
    pose = WorldPose(position_m=[0.0, 0.0])
    cloud = pfilter.predict(cloud, pose, pfilter.MotionNoise())
    measurement = BearingMeasurement(angle_deg=40.0, timestamp_us=0)
    cloud = pfilter.update(cloud, measurement, pfilter.MeasurementNoise())
    checks.append(("weight normalization",
                   abs(cloud.weights().sum() - 1.0) <= 1e-9))
    resampled = pfilter.maybe_resample(cloud)
    checks.append(("count invariance", resampled.count == 5000))

    # resampling preserves the mean within 3 standard errors over 200 trials
    positions = rng.normal(0, 25, (300, 2))
    weights = rng.dirichlet(np.full(300, 0.2))
    pre = weights @ positions
    diffs = []
    for trial in range(200):
        pset = pfilter.ParticleSet(
            positions=positions, velocities=np.zeros((300, 2)),
            orientations=np.zeros(300), log_weights=np.log(weights),
            rng_seed=trial, step_index=trial,
        )
        out = pfilter.maybe_resample(pset, resample_fraction=0.0)
        diffs.append(out.positions.mean(axis=0) - pre)
    diffs = np.array(diffs)
    se = diffs.std(axis=0) / math.sqrt(len(diffs))
    checks.append(("resampling mean preservation",
                   bool(np.all(np.abs(diffs.mean(axis=0)) <= 3.0 * se))))

    # likelihood symmetry
    noise = pfilter.MeasurementNoise(100.0)
    sym = True
    for theta in rng.uniform(1.0, 179.0, 20):
        p_plus = pfilter.ParticleSet(
            positions=np.array([[math.cos(math.radians(theta)),
                                 math.sin(math.radians(theta))]]),
            velocities=np.zeros((1, 2)), orientations=np.zeros(1),
            log_weights=np.zeros(1), rng_seed=0).particle(0)
        p_minus = pfilter.ParticleSet(
            positions=np.array([[math.cos(math.radians(-theta)),
                                 math.sin(math.radians(-theta))]]),
            velocities=np.zeros((1, 2)), orientations=np.zeros(1),
            log_weights=np.zeros(1), rng_seed=0).particle(0)
        a = pfilter.log_likelihood(p_plus, 0.0, noise)
        b = pfilter.log_likelihood(p_minus, 0.0, noise)
        sym = sym and math.isclose(a, b, abs_tol=1e-12)
    checks.append(("likelihood symmetry", sym))

    # circular-mean wraparound
    wrapped = downsample_bearings(
        [BearingMeasurement(359.0, 0), BearingMeasurement(1.0, 1000)], 1.0)[0]
    checks.append(("circular mean wraparound", abs(wrapped.angle_deg) < 1e-9
                   or abs(wrapped.angle_deg - 360.0) < 1e-9))

    # FFT phase against the direct DFT sum
    n, k, phase = 256, 17, 1.234
    frame = np.cos(2 * np.pi * k * np.arange(n) / n + phase)
    acc = 0j
    for i in range(n):
        acc += frame[i] * cmath.exp(-2j * cmath.pi * k * i / n)
    checks.append(("fft vs direct dft",
                   abs(fft_phase_at_bin(frame, k) - cmath.phase(acc)) <= 1e-9))

    # determinism: an end-to-end mini scenario reruns bit-identically
    track = line_track(start=[-20.0, -40.0], heading_deg=0.0, length_m=40.0,
                       speed_mps=4.0, hold_s=2, ramp_s=4.0)
    scenario = Scenario(
        name="determinism", radio=desk_radio(), geometry=default_geometry(),
        track=track, emitter_track=EmitterTrack(positions=[[0.0, 0.0]]),
        seed=11, snr_db=20.0, geometry_jitter_std_m=0.004,
        filter_config={"count": 1000, "grid_half_extent_m": 60.0},
    )
    first = run_scenario(scenario)
    second = run_scenario(scenario)
    same = all(
        a.angle_deg == b.angle_deg and a.confidence == b.confidence
        for a, b in zip(first.bearing_log, second.bearing_log)
    ) and all(
        ra["mean_x"] == rb["mean_x"] and ra["mean_y"] == rb["mean_y"]
        for ra, rb in zip(first.trace, second.trace)
    )
    checks.append(("bit-identical rerun", same))

    elapsed = time.perf_counter() - start
    failed = [name for name, ok in checks if not ok]
    report(8, not failed and elapsed < 120.0,
           f"{len(checks)} properties in {elapsed:.1f} s"
           + (f"; failed: {failed}" if failed else ""))
