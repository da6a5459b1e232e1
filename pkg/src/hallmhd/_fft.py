"""FFT backend wrappers.

Thin layer over ``scipy.fft`` so the worker-thread count can be set once
via the ``HALLMHD_FFT_WORKERS`` environment variable.  scipy's internal
plan cache is safe for concurrent use.
"""

import os

from scipy import fft as _sfft


def _workers() -> int:
    raw = os.environ.get("HALLMHD_FFT_WORKERS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


_WORKERS = _workers()


def fftn(a, axes=None):
    return _sfft.fftn(a, axes=axes, workers=_WORKERS)


def ifftn(a, axes=None):
    return _sfft.ifftn(a, axes=axes, workers=_WORKERS)
