# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split-statistics kernel.

Bit-compatible with ``_pykernels.accumulate_chunk``; built with
``-ffp-contract=off`` so no multiply-add gets fused.
"""
from libc.stdint cimport int64_t


def accumulate_chunk(const double[:, ::1] data, const int64_t[::1] y, const double[::1] w,
                     const int64_t[::1] rows, Py_ssize_t start, Py_ssize_t stop,
                     const int64_t[::1] attrs, const int64_t[::1] nbranch,
                     const int64_t[::1] is_cat, const double[::1] cores,
                     double[:, :, ::1] out):
    cdef Py_ssize_t r, i, a, f, c, k
    cdef Py_ssize_t A = attrs.shape[0]
    cdef Py_ssize_t T = cores.shape[0]
    cdef int64_t code
    cdef double u, wi, c0, c1, d
    with nogil:
        for r in range(start, stop):
            i = rows[r]
            c = y[i]
            wi = w[r]
            for a in range(A):
                f = attrs[a]
                u = data[i, f]
                if is_cat[a]:
                    code = <int64_t>u
                    if 0 <= code < nbranch[a]:
                        out[a, code, c] += wi
                    continue
                if u < 0.0:
                    u = 0.0
                elif u > 1.0:
                    u = 1.0
                k = <Py_ssize_t>(u * (T - 1))
                if k > T - 2:
                    k = T - 2
                while k > 0 and cores[k] > u:
                    k -= 1
                while k < T - 2 and cores[k + 1] <= u:
                    k += 1
                c0 = cores[k]
                c1 = cores[k + 1]
                d = c1 - c0
                out[a, k, c] += wi * ((c1 - u) / d)
                out[a, k + 1, c] += wi * ((u - c0) / d)
