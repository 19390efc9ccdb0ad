"""Pure-numpy implementations of the hot kernels.

These mirror the compiled extension in pddf._kernels; results agree to within
floating-point rounding. Keep the two files in sync.
"""

import numpy as np


def synthesize_commutated_iq(n_samples, samples_per_antenna, phase_table,
                             phase_per_sample, phase0, amplitude, active):
    """Commutated-array tone synthesis.

    Sample i belongs to element (2i // spa) mod 4 of cycle i // (2 spa) and
    carries phase  phase_per_sample * i + phase_table[cycle, element] + phase0.

    phase_table: (n_cycles, 4) float64, per-cycle geometric element phases.
    active: uint8/bool mask, zero outside the emitter's transmit intervals.
    """
    idx = np.arange(n_samples, dtype=np.int64)
    element = (2 * idx // samples_per_antenna) % 4
    cycle = idx // (2 * samples_per_antenna)
    total = phase_per_sample * idx + phase_table[cycle, element] + phase0
    out = amplitude * np.exp(1j * total)
    out[~active.astype(bool)] = 0.0
    return out


def polar_discriminator(x):
    """Per-sample phase increments arg(x[i] * conj(x[i-1])); first output is 0."""
    out = np.empty(len(x), dtype=np.float64)
    out[0] = 0.0
    out[1:] = np.angle(x[1:] * np.conj(x[:-1]))
    return out


def systematic_resample_indices(cum_weights, u0, n_out):
    """Ancestor indices for systematic resampling given a cumulative weight vector."""
    points = (u0 + np.arange(n_out)) / n_out
    idx = np.searchsorted(cum_weights, points, side="left")
    return np.minimum(idx, len(cum_weights) - 1).astype(np.int64)
