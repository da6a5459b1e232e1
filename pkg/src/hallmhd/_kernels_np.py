"""Pure-NumPy implementations of the hot elementwise kernels.

Same call signatures as the compiled lane (``hallmhd._kernels``); all
functions take flattened views, never mutate their inputs, and return
freshly allocated arrays.  Kept deliberately free of any hallmhd imports
so both lanes can be benchmarked side by side.
"""

import numpy as np


def cross3(a, b):
    """Pointwise cross product of two (3, m) real arrays."""
    out = np.empty_like(a)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


def advect(u, grad):
    """Convective derivative sum(u_c * grad[c, j]) -> (ncomp, m).

    ``u`` has shape (nadv, m); ``grad`` has shape (nadv, ncomp, m) holding
    the directional derivatives of each advected component.
    """
    return np.einsum("cm,cjm->jm", u, grad)


def curl_mode(k, v):
    """Spectral curl i*k x v for k (3, m) real, v (3, m) complex."""
    out = np.empty_like(v)
    out[0] = 1j * (k[1] * v[2] - k[2] * v[1])
    out[1] = 1j * (k[2] * v[0] - k[0] * v[2])
    out[2] = 1j * (k[0] * v[1] - k[1] * v[0])
    return out


def divergence_mode(k, v):
    """Spectral divergence i*k.v -> (m,) complex."""
    return 1j * (k[0] * v[0] + k[1] * v[1] + k[2] * v[2])


def gradient_mode(k, f):
    """Spectral gradient i*k_j f -> (3, m) complex."""
    return 1j * k * f[np.newaxis, :]


def project_mode(k, inv_k2, v):
    """Remove the compressible part: v - k (k.v) / |k|^2 per mode.

    ``inv_k2`` must be 0 at the zero mode so the mean is left unchanged.
    """
    s = (k[0] * v[0] + k[1] * v[1] + k[2] * v[2]) * inv_k2
    return v - k * s[np.newaxis, :]


def abs2_sum(f):
    """Sum of |f|^2 over a flattened complex array."""
    fr = f.real
    fi = f.imag
    return float(np.dot(fr, fr) + np.dot(fi, fi))


def weighted_abs2_sum(w, f):
    """Sum of w * |f|^2 for real weights w and complex f."""
    fr = f.real
    fi = f.imag
    return float(np.dot(w, fr * fr) + np.dot(w, fi * fi))


def add_weighted(out, w, alpha, f):
    """In place: out[c, i] += alpha * w[i] * f[c, i] (real w, complex arrays)."""
    out += alpha * w[np.newaxis, :] * f
    return out


def if_stage_pre(e, y, c, k):
    """Integrating-factor stage e * (y + c * k) (flat complex, matching e)."""
    return e * (y + c * k)


def if_stage_mix(e, y, c, k):
    """Integrating-factor stage e * y + c * k."""
    return e * y + c * k


def if_stage_end(ef, y, c, eh, k):
    """Integrating-factor stage ef * y + c * eh * k."""
    return ef * y + c * eh * k


def if_final(ef, eh, y, k1, k2, k3, k4, dt):
    """Final fourth-order combination ef*y + dt/6 (ef k1 + 2 eh (k2+k3) + k4)."""
    return ef * y + (dt / 6.0) * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)
