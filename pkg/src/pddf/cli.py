"""Command-line driver.

Verbs:
  simulate  scenario file -> bearing logs, estimate trace, metrics
  chamber   two-bearing histogram experiment with pass/fail gate
  bearings  raw IQ file -> bearing CSV
  filter    bearing CSV + track CSV -> estimate trace
  metrics   estimate trace + emitter truth -> summary table

Exit codes: 0 success, 2 invalid configuration, 3 filter divergence,
4 acceptance assertion failure.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import pfilter
from .dsp import ChainConfig, calibrate_offset, read_bearings_csv, run_chain, write_bearings_csv
from .errors import ConfigurationError, FilterDivergenceError
from .harness import (
    chamber_test,
    downsample_bearings,
    error_metrics,
    format_metrics_table,
    load_scenario,
    read_track_csv,
    run_scenario,
    write_histogram_csv,
    write_track_csv,
)
from .profiles import (
    DEFAULT_DECIMATION,
    DEFAULT_FREQUENCY_OFFSET_HZ,
    default_geometry,
    default_radio,
    filter_profile,
)
from .simulate import read_iq
from .types import BearingMeasurement, RadioConfig, wrap_degrees

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_ASSERTION = 4


def _ensure_out(path):
    os.makedirs(path, exist_ok=True)
    return path


def _cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    out = _ensure_out(args.out)
    result = run_scenario(
        scenario,
        seed=args.seed,
        profile_name=args.profile,
        grid_half_extent_m=args.extent,
        particle_count=args.particles,
    )
    write_bearings_csv(os.path.join(out, "bearings_raw.csv"), result.bearing_log)
    write_bearings_csv(os.path.join(out, "bearings_1hz.csv"), result.downsampled)
    pfilter.write_trace_csv(os.path.join(out, "trace.csv"), result.trace)
    write_track_csv(os.path.join(out, "track.csv"), scenario.track)
    _, summary = error_metrics(result.trace, scenario.emitter_track,
                               burn_in_epochs=result.burn_in_epochs)
    table = format_metrics_table(summary)
    with open(os.path.join(out, "metrics.txt"), "w") as fh:
        fh.write(table + "\n")
    print(f"scenario {scenario.name!r}: {scenario.track.n_epochs} epochs")
    print(table)
    return EXIT_OK


def _cmd_chamber(args):
    out = _ensure_out(args.out)
    result = chamber_test(seed=args.seed, snr_db=args.snr_db)
    write_histogram_csv(os.path.join(out, "chamber_histogram.csv"), result.histogram)
    print(f"modes at {result.mode_a_deg:.2f} and {result.mode_b_deg:.2f} deg, "
          f"separation {result.separation_deg:.2f} deg, "
          f"concentration {result.mode_concentration:.2f}")
    if not result.passed:
        print("chamber check FAILED", file=sys.stderr)
        return EXIT_ASSERTION
    print("chamber check passed")
    return EXIT_OK


def _radio_from_args(args):
    return RadioConfig(
        carrier_frequency_hz=args.carrier,
        sample_rate_hz=args.sample_rate,
        samples_per_antenna=args.samples_per_antenna,
        fft_length=args.fft_length,
    )


def _cmd_bearings(args):
    radio = _radio_from_args(args)
    buffer = read_iq(args.iq, radio.sample_rate_hz)
    chain = ChainConfig.for_radio(radio, args.decimation, translation_hz=args.translation)
    if args.calibration is None:
        chain = chain.with_calibration(calibrate_offset(radio, default_geometry(), chain))
    else:
        chain = chain.with_calibration(args.calibration)
    measurements = run_chain(buffer, radio, chain)
    write_bearings_csv(args.out, measurements)
    print(f"{len(measurements)} bearings -> {args.out}")
    return EXIT_OK


def _cmd_filter(args):
    track = read_track_csv(args.track)
    measurements = read_bearings_csv(args.bearings)
    profile = filter_profile(args.profile)

    # heading-correct, then reduce to one bearing per second if needed
    corrected = [
        BearingMeasurement(
            angle_deg=wrap_degrees(m.angle_deg + track.heading_at(m.timestamp_us / 1e6)),
            timestamp_us=m.timestamp_us,
            confidence=m.confidence,
        )
        for m in measurements
    ]
    per_epoch = downsample_bearings(corrected, 1.0)

    cloud = pfilter.init_uniform(args.extent, args.particles, seed=args.seed)
    trace = []
    for i, measurement in enumerate(per_epoch):
        epoch = int(measurement.timestamp_us / 1e6)
        pose = track.pose_for_epoch(min(epoch, track.n_epochs - 1))
        cloud = pfilter.predict(cloud, pose, profile.motion)
        if measurement.confidence >= max(args.min_confidence, profile.min_confidence):
            cloud = pfilter.update(cloud, measurement, profile.measurement,
                                   use_confidence=profile.use_confidence)
        cloud = pfilter.maybe_resample(cloud)
        est = pfilter.to_world(pfilter.estimate(cloud), pose)
        err = (math.nan, math.nan, math.nan)
        if args.emitter is not None:
            delta = est.mean_m - np.asarray(args.emitter)
            err = (delta[0], delta[1], float(np.hypot(*delta)))
        trace.append({
            "step": i, "timestamp_us": measurement.timestamp_us,
            "mean_x": est.mean_m[0], "mean_y": est.mean_m[1],
            "var_x": est.variance_m2[0], "var_y": est.variance_m2[1],
            "err_x": err[0], "err_y": err[1], "err_total": err[2],
        })
    pfilter.write_trace_csv(args.out, trace)
    print(f"{len(trace)} filter steps -> {args.out}")
    return EXIT_OK


def _cmd_metrics(args):
    trace = pfilter.read_trace_csv(args.trace)
    rows, summary = error_metrics(trace, np.asarray(args.emitter),
                                  burn_in_epochs=args.burn_in)
    print(format_metrics_table(summary))
    if args.out:
        pfilter.write_trace_csv(args.out, rows)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="pddf", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario end to end")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--profile", choices=["default", "tuned"], default="default")
    p.add_argument("--extent", type=float, default=None,
                   help="override the initial grid half-extent in meters")
    p.add_argument("--particles", type=int, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("chamber", help="two-bearing histogram experiment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_chamber)

    p = sub.add_parser("bearings", help="raw IQ capture to bearing CSV")
    p.add_argument("--iq", required=True)
    p.add_argument("--out", default="bearings.csv")
    default = default_radio()
    p.add_argument("--sample-rate", type=float, default=default.sample_rate_hz)
    p.add_argument("--carrier", type=float, default=default.carrier_frequency_hz)
    p.add_argument("--samples-per-antenna", type=int, default=default.samples_per_antenna)
    p.add_argument("--fft-length", type=int, default=default.fft_length)
    p.add_argument("--decimation", type=int, default=DEFAULT_DECIMATION)
    p.add_argument("--translation", type=float, default=DEFAULT_FREQUENCY_OFFSET_HZ)
    p.add_argument("--calibration", type=float, default=None,
                   help="calibration offset in degrees (default: derive from a "
                        "noiseless reference capture)")
    p.set_defaults(func=_cmd_bearings)

    p = sub.add_parser("filter", help="bearing CSV + track CSV to estimate trace")
    p.add_argument("--bearings", required=True)
    p.add_argument("--track", required=True)
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--profile", choices=["default", "tuned"], default="default")
    p.add_argument("--particles", type=int, default=10_000)
    p.add_argument("--extent", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--min-confidence", type=float, default=0.0)
    p.add_argument("--emitter", type=float, nargs=2, default=None,
                   help="true emitter x y for error columns")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("metrics", help="summarize an estimate trace against truth")
    p.add_argument("--trace", required=True)
    p.add_argument("--emitter", type=float, nargs=2, required=True)
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FilterDivergenceError as exc:
        print(f"filter divergence: {exc} (step {exc.step_index})", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
