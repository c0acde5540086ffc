# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_fallback.py`` for the contracts."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def tentative_gaps(gaps, right):
    cdef double[::1] g = np.ascontiguousarray(gaps, dtype=np.float64)
    cdef const cnp.uint8_t[::1] d = np.ascontiguousarray(right, dtype=bool).view(np.uint8)
    cdef Py_ssize_t n = g.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    merged_arr = np.zeros(n, dtype=bool)
    cdef double[::1] out = out_arr
    cdef cnp.uint8_t[::1] merged = merged_arr.view(np.uint8)
    cdef Py_ssize_t i, ip, inx
    cdef bint r0, r1
    with nogil:
        for i in range(n):
            ip = i - 1 if i > 0 else n - 1
            inx = i + 1 if i < n - 1 else 0
            r0 = d[i] != 0
            r1 = d[inx] != 0
            if r0 and r1:
                out[i] = 0.5 * g[i] + 0.5 * g[inx]
            elif (not r0) and (not r1):
                out[i] = 0.5 * g[ip] + 0.5 * g[i]
            elif (not r0) and r1:
                out[i] = (0.5 * g[ip] + g[i]) + 0.5 * g[inx]
            else:
                merged[i] = 1
    return out_arr, merged_arr


def fold(tentative, merged, multiplicity):
    cdef double[::1] t = np.ascontiguousarray(tentative, dtype=np.float64)
    cdef const cnp.uint8_t[::1] m = np.ascontiguousarray(merged, dtype=bool).view(np.uint8)
    cdef cnp.int64_t[::1] mult = np.ascontiguousarray(multiplicity, dtype=np.int64)
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, k = 0, n_keep = 0
    for i in range(n):
        if m[i] == 0:
            n_keep += 1
    gaps_arr = np.empty(n_keep, dtype=np.float64)
    mult_arr = np.empty(n_keep, dtype=np.int64)
    surv_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] ng = gaps_arr
    cdef cnp.int64_t[::1] nm = mult_arr
    cdef cnp.int64_t[::1] surv = surv_arr
    with nogil:
        for i in range(n):
            if m[i] == 0:
                ng[k] = t[i]
                nm[k] = mult[i]
                if m[i - 1 if i > 0 else n - 1] != 0:
                    nm[k] += mult[i - 1 if i > 0 else n - 1]
                surv[i] = k
                k += 1
        for i in range(n):
            if m[i] != 0:
                surv[i] = surv[i + 1] if i < n - 1 else surv[0]
    return gaps_arr, mult_arr, surv_arr


def reverse_expand(weights, Py_ssize_t offset, rho_mask, Py_ssize_t rho_start, bint cluster):
    cdef cnp.int64_t[::1] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef const cnp.uint8_t[::1] mask = np.ascontiguousarray(rho_mask, dtype=bool).view(np.uint8)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t a = offset
    cdef Py_ssize_t b = a + n - 1
    cdef Py_ssize_t i, j, below = 0, extra = 0

    # sites in [min(a,0), 0) shift index 0 relative to the first junction
    for i in range(rho_start, 0):
        if i >= a and mask[i - rho_start]:
            below += 1
    for i in range(a, b + 1):
        if mask[i - rho_start]:
            extra += 1

    cdef Py_ssize_t new_offset = a - below if a < 0 else a + _count(mask, rho_start, 0, a)
    out_arr = np.zeros(n + 1 + extra, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.int64_t left, right, prev_right = 0
    cdef bint r
    with nogil:
        j = 0
        for i in range(n):
            r = mask[a + i - rho_start] != 0
            if cluster and r:
                left = 0
                right = 2 * w[i]
            else:
                left = w[i]
                right = w[i]
            out[j] = prev_right + left
            j += 1
            if r:
                out[j] = 2 * w[i]
                j += 1
            prev_right = right
        out[j] = prev_right
    return out_arr, new_offset


cdef Py_ssize_t _count(const cnp.uint8_t[::1] mask, Py_ssize_t start, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t i, c = 0
    for i in range(lo, hi):
        if mask[i - start]:
            c += 1
    return c


def sum_squares_exact(weights):
    cdef cnp.int64_t[::1] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t n = w.shape[0], i
    if n == 0:
        return 0
    cdef cnp.int64_t mx = 0
    for i in range(n):
        if w[i] > mx:
            mx = w[i]
    if mx >= (1 << 31):
        return sum(int(x) * int(x) for x in np.asarray(w).tolist())
    cdef cnp.int64_t hi, lo
    cdef cnp.int64_t s_hh = 0, s_hl = 0, s_ll = 0
    with nogil:
        for i in range(n):
            hi = w[i] >> 16
            lo = w[i] & 0xFFFF
            s_hh += hi * hi
            s_hl += hi * lo
            s_ll += lo * lo
    return (int(s_hh) << 32) + (int(s_hl) << 17) + int(s_ll)
