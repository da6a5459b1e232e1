"""Kernel lane selection.

At import time the compiled extension (``hallmhd._kernels``, built from
Cython) is preferred; if it is missing or the environment variable
``HALLMHD_PURE_PYTHON`` is set to a non-empty value, the pure-NumPy
fallback is used instead.  Everything downstream imports the kernels
from here and never notices which lane is active.

Run ``python benchmarks/bench_kernels.py`` to compare the two lanes.
"""

import os

from hallmhd import _kernels_np

if os.environ.get("HALLMHD_PURE_PYTHON"):
    _impl = _kernels_np
    USING_COMPILED = False
else:
    try:
        from hallmhd import _kernels as _impl  # type: ignore[attr-defined]

        USING_COMPILED = True
    except ImportError:
        _impl = _kernels_np
        USING_COMPILED = False

cross3 = _impl.cross3
advect = _impl.advect
curl_mode = _impl.curl_mode
divergence_mode = _impl.divergence_mode
gradient_mode = _impl.gradient_mode
project_mode = _impl.project_mode
abs2_sum = _impl.abs2_sum
weighted_abs2_sum = _impl.weighted_abs2_sum
add_weighted = _impl.add_weighted
if_stage_pre = _impl.if_stage_pre
if_stage_mix = _impl.if_stage_mix
if_stage_end = _impl.if_stage_end
if_final = _impl.if_final
