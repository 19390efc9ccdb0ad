"""Backend selection for the hot kernels.

The compiled Cython extension is preferred; the pure-numpy fallback is used
when the extension was not built or when PDDF_PURE_PYTHON is set. Both expose
the same functions with identical semantics.
"""

import os

from . import _kernels_py

if os.environ.get("PDDF_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

synthesize_commutated_iq = _impl.synthesize_commutated_iq
systematic_resample_indices = _impl.systematic_resample_indices
# numpy's vectorized arctan2 outruns a scalar compiled loop for the
# discriminator (see benchmarks/bench_kernels.py), so that kernel always
# dispatches to the numpy implementation
polar_discriminator = _kernels_py.polar_discriminator
