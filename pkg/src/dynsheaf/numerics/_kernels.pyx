# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Aberth-Ehrlich iteration and batched Horner evaluation.

Must stay behaviour-identical to ``_kernels_py``; the test-suite compares them.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

ctypedef double complex cplx


cdef inline double cabs(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline void _eval_ratio(const cplx[:] a, int n, cplx z, double eta,
                             cplx* ratio, int* done) nogil:
    # Newton ratio p/p' with reversed evaluation outside the unit disc.
    cdef cplx p, dp, y
    cdef double bound, ay
    cdef int k
    if cabs(z) <= 1.0:
        p = a[n]
        dp = 0
        bound = cabs(a[n])
        ay = cabs(z)
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + a[k]
            bound = bound * ay + cabs(a[k])
        if cabs(p) <= eta * bound:
            done[0] = 1
            return
        if dp == 0:
            ratio[0] = p
        else:
            ratio[0] = p / dp
    else:
        y = 1.0 / z
        ay = cabs(y)
        p = a[0]
        dp = 0
        bound = cabs(a[0])
        for k in range(1, n + 1):
            dp = dp * y + p
            p = p * y + a[k]
            bound = bound * ay + cabs(a[k])
        if cabs(p) <= eta * bound:
            done[0] = 1
            return
        # p'(z)/p(z) = y (n - y r'(y)/r(y))
        dp = y * (n - y * dp / p)
        if dp == 0:
            ratio[0] = z
        else:
            ratio[0] = 1.0 / dp
    done[0] = 0


def aberth(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
           cnp.ndarray[cnp.complex128_t, ndim=1] z0,
           int maxiter, double eta):
    """Run Aberth iterations in place on a copy of ``z0``.

    Returns ``(z, converged, iterations)``.
    """
    cdef const cplx[:] a = coeffs
    cdef int n = coeffs.shape[0] - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z_arr = z0.copy()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w_arr = np.zeros(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] conv = np.zeros(n, dtype=np.uint8)
    cdef cplx[:] z = z_arr
    cdef cplx[:] w = w_arr
    cdef cnp.uint8_t[:] c = conv
    cdef int it, i, j, active, done
    cdef cplx ratio, s
    it = 0
    with nogil:
        while it < maxiter:
            active = 0
            for i in range(n):
                w[i] = 0
                if c[i]:
                    continue
                _eval_ratio(a, n, z[i], eta, &ratio, &done)
                if done:
                    c[i] = 1
                    continue
                active += 1
                s = 0
                for j in range(n):
                    if j != i:
                        s = s + 1.0 / (z[i] - z[j])
                w[i] = ratio / (1.0 - ratio * s)
            if active == 0:
                break
            for i in range(n):
                z[i] = z[i] - w[i]
            it += 1
    return z_arr, conv.astype(bool), it


def horner(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
           cnp.ndarray[cnp.complex128_t, ndim=1] points):
    """Values and first derivatives of a polynomial at many points."""
    cdef const cplx[:] a = coeffs
    cdef const cplx[:] x = points
    cdef int n = coeffs.shape[0] - 1
    cdef int m = points.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] val = np.zeros(m, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] der = np.zeros(m, dtype=np.complex128)
    cdef cplx[:] v = val
    cdef cplx[:] d = der
    cdef int i, k
    cdef cplx p, dp, xi
    if n < 0:
        return val, der
    with nogil:
        for i in range(m):
            xi = x[i]
            p = a[n]
            dp = 0
            for k in range(n - 1, -1, -1):
                dp = dp * xi + p
                p = p * xi + a[k]
            v[i] = p
            d[i] = dp
    return val, der
