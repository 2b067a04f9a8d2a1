# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: fixed-step RK4 and the retarded emission integral."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

ctypedef double complex cplx


cdef inline void _matvec(const cplx[:, ::1] a, const cplx[::1] x, cplx[::1] out) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0], i, j
    cdef cplx acc
    for i in range(n):
        acc = 0
        for j in range(n):
            acc = acc + a[i, j] * x[j]
        out[i] = acc


def rk4_fixed(const cplx[:, ::1] a, const cplx[::1] y0, const double[::1] times):
    """Classic RK4, one step per grid interval, for ``dy/dt = a @ y``."""
    cdef Py_ssize_t nt = times.shape[0], n = y0.shape[0], i, s
    cdef double h
    out_arr = np.empty((nt, n), dtype=np.complex128)
    cdef cplx[:, ::1] out = out_arr
    cdef cplx[::1] y = np.array(y0, dtype=np.complex128)
    cdef cplx[::1] tmp = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k1 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k2 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k3 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k4 = np.empty(n, dtype=np.complex128)
    with nogil:
        for i in range(n):
            out[0, i] = y[i]
        for s in range(nt - 1):
            h = times[s + 1] - times[s]
            _matvec(a, y, k1)
            for i in range(n):
                tmp[i] = y[i] + 0.5 * h * k1[i]
            _matvec(a, tmp, k2)
            for i in range(n):
                tmp[i] = y[i] + 0.5 * h * k2[i]
            _matvec(a, tmp, k3)
            for i in range(n):
                tmp[i] = y[i] + h * k3[i]
            _matvec(a, tmp, k4)
            for i in range(n):
                y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                out[s + 1, i] = y[i]
    return out_arr


def retarded_integral(const double[::1] times, const cplx[:, ::1] beta,
                      const double[::1] omegas, const cplx[:, ::1] phases):
    """``sum_m phases[k, m] * trapz(exp(i omegas[k] tau) * beta[:, m], tau)``."""
    cdef Py_ssize_t nt = times.shape[0], n = beta.shape[1], nk = omegas.shape[0]
    cdef Py_ssize_t k, s, m
    cdef double w, arg
    cdef cplx e, acc, inner
    out_arr = np.zeros(nk, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    if nt < 2:
        return out_arr
    with nogil:
        for k in range(nk):
            acc = 0
            for s in range(nt):
                if s == 0:
                    w = 0.5 * (times[1] - times[0])
                elif s == nt - 1:
                    w = 0.5 * (times[nt - 1] - times[nt - 2])
                else:
                    w = 0.5 * (times[s + 1] - times[s - 1])
                arg = omegas[k] * times[s]
                e = w * (cos(arg) + 1j * sin(arg))
                inner = 0
                for m in range(n):
                    inner = inner + phases[k, m] * beta[s, m]
                acc = acc + e * inner
            out[k] = acc
    return out_arr
