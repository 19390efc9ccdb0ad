# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: commutated IQ synthesis, FM discriminator, resampling.

Semantics match pddf._kernels_py exactly; that module is the fallback when
this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, sin

cnp.import_array()


def synthesize_commutated_iq(Py_ssize_t n_samples, Py_ssize_t samples_per_antenna,
                             const double[:, ::1] phase_table, double phase_per_sample,
                             double phase0, double amplitude,
                             const cnp.uint8_t[::1] active):
    """Commutated-array tone synthesis; see the pure-python twin for the contract."""
    out = np.zeros(n_samples, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i, element, cycle
    cdef double total
    for i in range(n_samples):
        if not active[i]:
            continue
        element = (2 * i // samples_per_antenna) % 4
        cycle = i // (2 * samples_per_antenna)
        total = phase_per_sample * i + phase_table[cycle, element] + phase0
        o[i] = amplitude * cos(total) + 1j * amplitude * sin(total)
    return out


def polar_discriminator(const cnp.complex128_t[::1] x):
    """Per-sample phase increments arg(x[i] * conj(x[i-1])); first output is 0."""
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double re, im
    o[0] = 0.0
    for i in range(1, n):
        re = x[i].real * x[i - 1].real + x[i].imag * x[i - 1].imag
        im = x[i].imag * x[i - 1].real - x[i].real * x[i - 1].imag
        o[i] = atan2(im, re)
    return out


def systematic_resample_indices(const double[::1] cum_weights, double u0, Py_ssize_t n_out):
    """Ancestor indices for systematic resampling given a cumulative weight vector."""
    cdef Py_ssize_t n_in = cum_weights.shape[0]
    out = np.empty(n_out, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t i, j = 0
    cdef double point
    for i in range(n_out):
        point = (u0 + i) / n_out
        while j < n_in - 1 and cum_weights[j] < point:
            j += 1
        o[i] = j
    return out
