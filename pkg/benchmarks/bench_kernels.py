#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the three hot kernels on realistic workloads (one second of the default
radio profile; a 10^5-particle resampling pass) for whichever backends are
importable, and prints a comparison table.
"""

import argparse
import time

import numpy as np

from pddf import _kernels_py

try:
    from pddf import _kernels as _compiled
except ImportError:
    _compiled = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)

    # one second of the default profile: 3.3792 Msps, 105600 cycles
    n_cycles, spa = 105_600, 16
    n = n_cycles * 2 * spa
    table = np.ascontiguousarray(rng.normal(0, 1, (n_cycles, 4)))
    active = np.ones(n, dtype=np.uint8)
    synth_args = (n, spa, table, 0.0465, 0.3, 1.0, active)

    iq = np.ascontiguousarray(rng.normal(0, 1, n // 5) + 1j * rng.normal(0, 1, n // 5))

    weights = rng.dirichlet(np.full(100_000, 0.5))
    cum = np.cumsum(weights)
    cum[-1] = 1.0

    return [
        ("synthesize_commutated_iq (3.38 Msamples)",
         lambda impl: impl.synthesize_commutated_iq(*synth_args)),
        ("polar_discriminator (676 ksamples)",
         lambda impl: impl.polar_discriminator(iq)),
        ("systematic_resample_indices (1e5 particles)",
         lambda impl: impl.systematic_resample_indices(cum, 0.37, 100_000)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = [("python", _kernels_py)]
    if _compiled is not None:
        backends.append(("compiled", _compiled))
    else:
        print("compiled extension not available; timing the fallback only\n")

    rows = []
    for name, call in workloads():
        times = {label: timeit(lambda: call(impl), args.repeats)
                 for label, impl in backends}
        rows.append((name, times))

    width = max(len(name) for name, _ in rows)
    header = f"{'kernel':<{width}}  " + "".join(f"{label:>12}" for label, _ in backends)
    if _compiled is not None:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, times in rows:
        line = f"{name:<{width}}  " + "".join(
            f"{times[label] * 1e3:>10.2f}ms" for label, _ in backends)
        if _compiled is not None:
            line += f"{times['python'] / times['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
