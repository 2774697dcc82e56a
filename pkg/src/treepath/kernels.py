"""Backend selection: compiled extension if available, numpy fallback otherwise.

TREEPATH_PURE=1 forces the fallback (used by the benchmark and parity tests).
Both backends implement the same four sampling functions with the same draw
contract and produce bit-identical samples.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("TREEPATH_PURE"):
    _active = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _compiled

        _active = _compiled
        BACKEND = "compiled"
    except ImportError:  # built with TREEPATH_NO_EXT, or the build failed
        _active = _kernels_py
        BACKEND = "python"

theta_sample = _active.theta_sample
longest_open_sample = _active.longest_open_sample
longest_increasing_sample = _active.longest_increasing_sample
increasing_count_sample = _active.increasing_count_sample
