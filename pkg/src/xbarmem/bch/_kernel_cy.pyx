# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled error locator for binary BCH codes (syndromes, Berlekamp-Massey, Chien)."""

from libc.string cimport memcpy


cdef enum:
    MAXSYN = 64


cdef inline int _mod(long a, int order) nogil:
    cdef long r = a % order
    if r < 0:
        r += order
    return <int>r


cdef int _locate_one(const unsigned char[::1] row, const int[::1] exp_t, const int[::1] log_t,
                     int order, int n, int t, int[::1] pos) nogil:
    cdef int r = row.shape[0]
    cdef int nsyn = 2 * t
    cdef int syn[MAXSYN]
    cdef int C[MAXSYN + 1]
    cdef int B[MAXSYN + 1]
    cdef int T[MAXSYN + 1]
    cdef int logs_i[MAXSYN + 1]
    cdef int logs_v[MAXSYN + 1]
    cdef int k, c, i, s, d, L, shift, b, coef_log, nlog, e, v, found
    cdef int any_nz = 0

    for k in range(nsyn):
        s = 0
        for c in range(r):
            if row[c]:
                s ^= exp_t[_mod(<long>(k + 1) * c, order)]
        syn[k] = s
        if s:
            any_nz = 1
    if not any_nz:
        return 0

    for i in range(nsyn + 1):
        C[i] = 0
        B[i] = 0
    C[0] = 1
    B[0] = 1
    L = 0
    shift = 1
    b = 1
    for k in range(nsyn):
        d = syn[k]
        for i in range(1, L + 1):
            if C[i] and syn[k - i]:
                d ^= exp_t[log_t[C[i]] + log_t[syn[k - i]]]
        if d == 0:
            shift += 1
            continue
        coef_log = _mod(log_t[d] - log_t[b], order)
        if 2 * L <= k:
            memcpy(T, C, (nsyn + 1) * sizeof(int))
            for i in range(nsyn + 1 - shift):
                if B[i]:
                    C[i + shift] ^= exp_t[coef_log + log_t[B[i]]]
            L = k + 1 - L
            memcpy(B, T, (nsyn + 1) * sizeof(int))
            b = d
            shift = 1
        else:
            for i in range(nsyn + 1 - shift):
                if B[i]:
                    C[i + shift] ^= exp_t[coef_log + log_t[B[i]]]
            shift += 1
    if L > t or C[L] == 0:
        return -1

    nlog = 0
    for i in range(1, L + 1):
        if C[i]:
            logs_i[nlog] = i
            logs_v[nlog] = log_t[C[i]]
            nlog += 1
    found = 0
    for e in range(n):
        v = 1
        for i in range(nlog):
            v ^= exp_t[_mod(<long>logs_v[i] - <long>e * logs_i[i], order)]
        if v == 0:
            if found == L:
                return -1
            pos[found] = e
            found += 1
    if found != L:
        return -1
    return found


def locate_errors(const unsigned char[:, ::1] rem, const int[::1] exp_t, const int[::1] log_t,
                  int order, int n, int t, int[:, ::1] out_pos, int[::1] out_count):
    """See ``_kernel_py.locate_errors``; identical contract."""
    cdef Py_ssize_t w
    cdef Py_ssize_t nw = rem.shape[0]
    if 2 * t > MAXSYN:
        raise ValueError("t too large for the compiled kernel")
    with nogil:
        for w in range(nw):
            out_count[w] = _locate_one(rem[w], exp_t, log_t, order, n, t, out_pos[w])
