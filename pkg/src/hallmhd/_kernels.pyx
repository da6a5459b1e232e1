# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise kernels for the spectral core.

Fused single-pass loops over flattened mode/collocation arrays; avoids the
intermediate temporaries of the NumPy lane.  Complex arrays are processed
as interleaved float pairs so no checked complex multiply is emitted.
Signatures mirror ``hallmhd._kernels_np`` exactly.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cross3(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t m = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((3, m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef double a0, a1, a2, b0, b1, b2
    for i in range(m):
        a0 = a[0, i]; a1 = a[1, i]; a2 = a[2, i]
        b0 = b[0, i]; b1 = b[1, i]; b2 = b[2, i]
        out[0, i] = a1 * b2 - a2 * b1
        out[1, i] = a2 * b0 - a0 * b2
        out[2, i] = a0 * b1 - a1 * b0
    return out_arr


def advect(double[:, ::1] u, double[:, :, ::1] grad):
    cdef Py_ssize_t nadv = u.shape[0]
    cdef Py_ssize_t ncomp = grad.shape[1]
    cdef Py_ssize_t m = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros((ncomp, m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t c, j, i
    for c in range(nadv):
        for j in range(ncomp):
            for i in range(m):
                out[j, i] += u[c, i] * grad[c, j, i]
    return out_arr


def curl_mode(double[:, ::1] k, v):
    """i k x v for k (3, m) real and v (3, m) complex."""
    cdef Py_ssize_t m = k.shape[1]
    out = np.empty((3, m), dtype=np.complex128)
    cdef double[:, ::1] vf = np.asarray(v).view(np.float64)
    cdef double[:, ::1] of = out.view(np.float64)
    cdef Py_ssize_t i
    cdef double re, im, k0, k1, k2
    for i in range(m):
        k0 = k[0, i]; k1 = k[1, i]; k2 = k[2, i]
        # i*(a+bi) = -b + ai per component of k x v
        re = k1 * vf[2, 2 * i] - k2 * vf[1, 2 * i]
        im = k1 * vf[2, 2 * i + 1] - k2 * vf[1, 2 * i + 1]
        of[0, 2 * i] = -im; of[0, 2 * i + 1] = re
        re = k2 * vf[0, 2 * i] - k0 * vf[2, 2 * i]
        im = k2 * vf[0, 2 * i + 1] - k0 * vf[2, 2 * i + 1]
        of[1, 2 * i] = -im; of[1, 2 * i + 1] = re
        re = k0 * vf[1, 2 * i] - k1 * vf[0, 2 * i]
        im = k0 * vf[1, 2 * i + 1] - k1 * vf[0, 2 * i + 1]
        of[2, 2 * i] = -im; of[2, 2 * i + 1] = re
    return out


def divergence_mode(double[:, ::1] k, v):
    """i k . v -> (m,) complex."""
    cdef Py_ssize_t m = k.shape[1]
    out = np.empty(m, dtype=np.complex128)
    cdef double[:, ::1] vf = np.asarray(v).view(np.float64)
    cdef double[::1] of = out.view(np.float64)
    cdef Py_ssize_t i
    cdef double re, im
    for i in range(m):
        re = k[0, i] * vf[0, 2 * i] + k[1, i] * vf[1, 2 * i] + k[2, i] * vf[2, 2 * i]
        im = (k[0, i] * vf[0, 2 * i + 1] + k[1, i] * vf[1, 2 * i + 1]
              + k[2, i] * vf[2, 2 * i + 1])
        of[2 * i] = -im
        of[2 * i + 1] = re
    return out


def gradient_mode(double[:, ::1] k, f):
    """i k_j f -> (3, m) complex."""
    cdef Py_ssize_t m = k.shape[1]
    out = np.empty((3, m), dtype=np.complex128)
    cdef double[::1] ff = np.asarray(f).view(np.float64)
    cdef double[:, ::1] of = out.view(np.float64)
    cdef Py_ssize_t i, j
    cdef double re, im
    for i in range(m):
        re = ff[2 * i]
        im = ff[2 * i + 1]
        for j in range(3):
            of[j, 2 * i] = -k[j, i] * im
            of[j, 2 * i + 1] = k[j, i] * re
    return out


def project_mode(double[:, ::1] k, double[::1] inv_k2, v):
    """v - k (k . v) / |k|^2 per mode (inv_k2 is 0 at the zero mode)."""
    cdef Py_ssize_t m = k.shape[1]
    out = np.empty((3, m), dtype=np.complex128)
    cdef double[:, ::1] vf = np.asarray(v).view(np.float64)
    cdef double[:, ::1] of = out.view(np.float64)
    cdef Py_ssize_t i
    cdef double sre, sim, k0, k1, k2, w
    for i in range(m):
        k0 = k[0, i]; k1 = k[1, i]; k2 = k[2, i]
        w = inv_k2[i]
        sre = (k0 * vf[0, 2 * i] + k1 * vf[1, 2 * i] + k2 * vf[2, 2 * i]) * w
        sim = (k0 * vf[0, 2 * i + 1] + k1 * vf[1, 2 * i + 1]
               + k2 * vf[2, 2 * i + 1]) * w
        of[0, 2 * i] = vf[0, 2 * i] - k0 * sre
        of[0, 2 * i + 1] = vf[0, 2 * i + 1] - k0 * sim
        of[1, 2 * i] = vf[1, 2 * i] - k1 * sre
        of[1, 2 * i + 1] = vf[1, 2 * i + 1] - k1 * sim
        of[2, 2 * i] = vf[2, 2 * i] - k2 * sre
        of[2, 2 * i + 1] = vf[2, 2 * i + 1] - k2 * sim
    return out


def abs2_sum(f):
    cdef double[::1] ff = np.asarray(f).view(np.float64)
    cdef Py_ssize_t n = ff.shape[0]
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += ff[i] * ff[i]
    return acc


def weighted_abs2_sum(double[::1] w, f):
    cdef double[::1] ff = np.asarray(f).view(np.float64)
    cdef Py_ssize_t m = w.shape[0]
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        acc += w[i] * (ff[2 * i] * ff[2 * i] + ff[2 * i + 1] * ff[2 * i + 1])
    return acc


def add_weighted(out, double[::1] w, double alpha, f):
    """In place: out[c, i] += alpha * w[i] * f[c, i]."""
    cdef double[:, ::1] of = np.asarray(out).view(np.float64)
    cdef double[:, ::1] ff = np.asarray(f).view(np.float64)
    cdef Py_ssize_t ncomp = of.shape[0]
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t c, i
    cdef double s
    for c in range(ncomp):
        for i in range(m):
            s = alpha * w[i]
            of[c, 2 * i] += s * ff[c, 2 * i]
            of[c, 2 * i + 1] += s * ff[c, 2 * i + 1]
    return out


def if_stage_pre(double[::1] e, y, double c, k):
    """e * (y + c * k) for flat complex y, k and real e of matching length."""
    out = np.empty_like(y)
    cdef double[::1] yf = np.asarray(y).view(np.float64)
    cdef double[::1] kf = np.asarray(k).view(np.float64)
    cdef double[::1] of = out.view(np.float64)
    cdef Py_ssize_t m = e.shape[0]
    cdef Py_ssize_t i
    for i in range(m):
        of[2 * i] = e[i] * (yf[2 * i] + c * kf[2 * i])
        of[2 * i + 1] = e[i] * (yf[2 * i + 1] + c * kf[2 * i + 1])
    return out


def if_stage_mix(double[::1] e, y, double c, k):
    """e * y + c * k."""
    out = np.empty_like(y)
    cdef double[::1] yf = np.asarray(y).view(np.float64)
    cdef double[::1] kf = np.asarray(k).view(np.float64)
    cdef double[::1] of = out.view(np.float64)
    cdef Py_ssize_t m = e.shape[0]
    cdef Py_ssize_t i
    for i in range(m):
        of[2 * i] = e[i] * yf[2 * i] + c * kf[2 * i]
        of[2 * i + 1] = e[i] * yf[2 * i + 1] + c * kf[2 * i + 1]
    return out


def if_stage_end(double[::1] ef, y, double c, double[::1] eh, k):
    """ef * y + c * eh * k."""
    out = np.empty_like(y)
    cdef double[::1] yf = np.asarray(y).view(np.float64)
    cdef double[::1] kf = np.asarray(k).view(np.float64)
    cdef double[::1] of = out.view(np.float64)
    cdef Py_ssize_t m = ef.shape[0]
    cdef Py_ssize_t i
    cdef double s
    for i in range(m):
        s = c * eh[i]
        of[2 * i] = ef[i] * yf[2 * i] + s * kf[2 * i]
        of[2 * i + 1] = ef[i] * yf[2 * i + 1] + s * kf[2 * i + 1]
    return out


def if_final(double[::1] ef, double[::1] eh, y, k1, k2, k3, k4, double dt):
    """ef*y + dt/6 (ef k1 + 2 eh (k2 + k3) + k4)."""
    out = np.empty_like(y)
    cdef double[::1] yf = np.asarray(y).view(np.float64)
    cdef double[::1] k1f = np.asarray(k1).view(np.float64)
    cdef double[::1] k2f = np.asarray(k2).view(np.float64)
    cdef double[::1] k3f = np.asarray(k3).view(np.float64)
    cdef double[::1] k4f = np.asarray(k4).view(np.float64)
    cdef double[::1] of = out.view(np.float64)
    cdef Py_ssize_t m = ef.shape[0]
    cdef Py_ssize_t i, j
    cdef double w = dt / 6.0
    for i in range(2 * m):
        j = i >> 1
        of[i] = ef[j] * yf[i] + w * (ef[j] * k1f[i]
                                     + 2.0 * eh[j] * (k2f[i] + k3f[i]) + k4f[i])
    return out
