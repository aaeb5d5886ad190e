# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the exact simplex."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()

BACKEND = "cython"

from ._kernels_py import pivot_obj as _pivot_obj_py
from ._kernels_py import price_dantzig as _price_dantzig_py


cdef int64_t _floordiv(int64_t a, int64_t b) nogil:
    cdef int64_t q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


def price(row0, const int64_t[:] colptr, const int64_t[:] rowidx, vals, const unsigned char[:] basic, int sign):
    if row0.dtype != np.int64 or vals.dtype != np.int64:
        return _price_obj(row0, colptr, rowidx, vals, basic, sign)
    cdef const int64_t[:] r0 = row0
    cdef const int64_t[:] v = vals
    cdef Py_ssize_t j, k, ncols = colptr.shape[0] - 1
    cdef int64_t s
    cdef Py_ssize_t found = -1
    with nogil:
        for j in range(ncols):
            if basic[j]:
                continue
            s = 0
            for k in range(colptr[j], colptr[j + 1]):
                s += r0[rowidx[k]] * v[k]
            if s * sign < 0:
                found = j
                break
    return found


def _price_obj(row0, const int64_t[:] colptr, const int64_t[:] rowidx, vals, const unsigned char[:] basic, int sign):
    cdef Py_ssize_t j, k, ncols = colptr.shape[0] - 1
    cdef object s
    for j in range(ncols):
        if basic[j]:
            continue
        s = 0
        for k in range(colptr[j], colptr[j + 1]):
            s += row0[rowidx[k]] * vals[k]
        if s * sign < 0:
            return j
    return -1


def price_dantzig(row0, colptr_a, rowidx_a, vals, basic_a, int sign):
    if row0.dtype != np.int64 or vals.dtype != np.int64:
        return _price_dantzig_py(row0, colptr_a, rowidx_a, vals, basic_a, sign)
    cdef const int64_t[:] colptr = colptr_a
    cdef const int64_t[:] rowidx = rowidx_a
    cdef const unsigned char[:] basic = basic_a
    cdef const int64_t[:] r0 = row0
    cdef const int64_t[:] v = vals
    cdef Py_ssize_t j, k, ncols = colptr.shape[0] - 1
    cdef int64_t s, best = 0
    cdef Py_ssize_t found = -1
    with nogil:
        for j in range(ncols):
            if basic[j]:
                continue
            s = 0
            for k in range(colptr[j], colptr[j + 1]):
                s += r0[rowidx[k]] * v[k]
            s *= sign
            if s < best:
                best = s
                found = j
    return found


def pivot_i64(int64_t[:, :] T, Py_ssize_t r, const int64_t[:] alpha, int64_t D):
    cdef Py_ssize_t i, k, nr = T.shape[0], nc = T.shape[1]
    cdef int64_t ar = alpha[r], ai
    with nogil:
        for i in range(nr):
            if i == r:
                continue
            ai = alpha[i]
            if ai == 0:
                if ar == D:
                    continue
                for k in range(nc):
                    T[i, k] = _floordiv(T[i, k] * ar, D)
            else:
                for k in range(nc):
                    T[i, k] = _floordiv(T[i, k] * ar - ai * T[r, k], D)


def pivot_obj(T, r, alpha, D):
    _pivot_obj_py(T, r, alpha, D)
