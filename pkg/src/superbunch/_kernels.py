"""Selects the pair-counting implementation at import time.

The compiled extension is preferred; the numpy fallback has identical
semantics (bit-identical counts).  Set SUPERBUNCH_PURE_PYTHON=1 to force
the fallback, e.g. for benchmarking one against the other.
"""

import os

FORCE_FALLBACK = os.environ.get("SUPERBUNCH_PURE_PYTHON", "") not in ("", "0")

if FORCE_FALLBACK:
    from ._corr_np import pair_histogram

    COMPILED = False
else:
    try:
        from ._corr_cy import pair_histogram  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from ._corr_np import pair_histogram  # type: ignore[no-redef]

        COMPILED = False

__all__ = ["pair_histogram", "COMPILED", "FORCE_FALLBACK"]
