# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for table-driven machines."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def transduce_ids(const int[::1] target, const int[::1] out_start, const int[::1] out_len,
                  const int[::1] out_flat, const int[::1] final_start, const int[::1] final_len,
                  const int[::1] syms, int initial, int n_symbols, Py_ssize_t capacity):
    """Run a subsequential table over symbol indices.

    Returns ``(status, ids, count)``: status 0 accepted, 1 run died,
    2 ended in a non-accepting state, 3 output buffer too small.
    """
    cdef Py_ssize_t n = syms.shape[0]
    cdef Py_ssize_t i, j, count = 0
    cdef int q = initial
    cdef int e, s, ln
    out = np.empty(capacity, dtype=np.int32)
    cdef int[::1] buf = out
    for i in range(n):
        e = q * n_symbols + syms[i]
        q = target[e]
        if q < 0:
            return 1, out, i
        ln = out_len[e]
        if count + ln > capacity:
            return 3, out, count
        s = out_start[e]
        for j in range(ln):
            buf[count + j] = out_flat[s + j]
        count += ln
    ln = final_len[q]
    if ln < 0:
        return 2, out, count
    if count + ln > capacity:
        return 3, out, count
    s = final_start[q]
    for j in range(ln):
        buf[count + j] = out_flat[s + j]
    count += ln
    return 0, out, count


def dfa_scan(const int[::1] target, int n_labels, const int[::1] labels, int initial):
    """Follow a DFA table over label indices.

    Returns ``(state, consumed)``; state is -1 when the run died after
    ``consumed`` labels were read successfully.
    """
    cdef Py_ssize_t n = labels.shape[0]
    cdef Py_ssize_t i
    cdef int q = initial
    cdef int r
    for i in range(n):
        r = target[q * n_labels + labels[i]]
        if r < 0:
            return -1, i
        q = r
    return q, n
