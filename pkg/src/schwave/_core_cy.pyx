# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled leapfrog kernel; semantics identical to _core_py.leapfrog_window."""

from libc.math cimport fabs, sqrt, pow as cpow


cdef inline double _abs_pow(double a, double p) noexcept nogil:
    cdef double b = fabs(a)
    if p == 2.0:
        return b * b
    if p == 1.5:
        return b * sqrt(b)
    return cpow(b, p)


def leapfrog_window(const double[::1] v_prev, const double[::1] v_curr,
                    double[::1] v_next,
                    const double[::1] W, const double[::1] h,
                    const double[::1] phi,
                    double p, double dt, double inv_ds2,
                    Py_ssize_t lo, Py_ssize_t hi):
    """Advance one leapfrog step on [lo, hi]; see the numpy twin for the contract."""
    cdef Py_ssize_t i
    cdef double lap, lin, base, pred, vtc, vn, vt, a
    cdef double dt2 = dt * dt
    cdef double inv2dt = 0.5 / dt
    cdef double max_abs = 0.0
    cdef double s_phi_vt = 0.0
    cdef double s_hphi = 0.0
    with nogil:
        for i in range(lo, hi + 1):
            lap = (v_curr[i - 1] - 2.0 * v_curr[i] + v_curr[i + 1]) * inv_ds2
            lin = lap - W[i] * v_curr[i]
            base = 2.0 * v_curr[i] - v_prev[i]
            pred = (v_curr[i] - v_prev[i]) / dt
            vn = base + dt2 * (lin + h[i] * _abs_pow(pred, p))
            vtc = (vn - v_prev[i]) * inv2dt
            vn = base + dt2 * (lin + h[i] * _abs_pow(vtc, p))
            v_next[i] = vn
            vt = (vn - v_prev[i]) * inv2dt
            a = fabs(vt)
            if a > max_abs:
                max_abs = a
            s_phi_vt += phi[i] * vt
            s_hphi += h[i] * phi[i] * _abs_pow(vt, p)
    return max_abs, s_phi_vt, s_hphi
