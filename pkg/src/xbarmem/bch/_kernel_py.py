"""Pure-Python error locator for binary BCH codes.

Mirrors ``_kernel_cy.pyx`` line for line; used when the extension is not
built or when ``XBARMEM_PURE_PYTHON=1``.
"""
from __future__ import annotations

import numpy as np


def locate_errors(rem, exp_t, log_t, order, n, t, out_pos, out_count):
    """Find error degrees from received-word remainders modulo the generator.

    Parameters
    ----------
    rem : uint8 array (N, r)
        ``rem[w, c]`` is the coefficient of ``x^c`` of word ``w`` reduced
        modulo the generator polynomial.
    exp_t, log_t : int32 arrays
        Antilog table of length ``2 * order`` and log table of length
        ``order + 1``.
    order : int
        ``2^m - 1``.
    n : int
        Shortened block length; only degrees ``0..n-1`` are searched.
    t : int
        Designed correction capability.
    out_pos : int32 array (N, t)
        Receives the error degrees.
    out_count : int32 array (N,)
        Number of errors located, or -1 when decoding fails.
    """
    exp_l = exp_t.tolist()
    log_l = log_t.tolist()
    nsyn = 2 * t
    for w, row in enumerate(np.asarray(rem).tolist()):
        ones = [c for c, bit in enumerate(row) if bit]
        syn = [0] * nsyn
        any_nz = False
        for k in range(nsyn):
            s = 0
            jj = k + 1
            for c in ones:
                s ^= exp_l[(jj * c) % order]
            syn[k] = s
            if s:
                any_nz = True
        if not any_nz:
            out_count[w] = 0
            continue

        # Berlekamp-Massey
        C = [0] * (nsyn + 1)
        B = [0] * (nsyn + 1)
        C[0] = B[0] = 1
        L, shift, b = 0, 1, 1
        for k in range(nsyn):
            d = syn[k]
            for i in range(1, L + 1):
                if C[i] and syn[k - i]:
                    d ^= exp_l[log_l[C[i]] + log_l[syn[k - i]]]
            if d == 0:
                shift += 1
                continue
            coef_log = (log_l[d] - log_l[b]) % order
            if 2 * L <= k:
                T = C[:]
                for i in range(nsyn + 1 - shift):
                    if B[i]:
                        C[i + shift] ^= exp_l[coef_log + log_l[B[i]]]
                L = k + 1 - L
                B = T
                b = d
                shift = 1
            else:
                for i in range(nsyn + 1 - shift):
                    if B[i]:
                        C[i + shift] ^= exp_l[coef_log + log_l[B[i]]]
                shift += 1
        if L > t or C[L] == 0:
            out_count[w] = -1
            continue

        # Chien search over the unshortened positions
        logs = [(i, log_l[C[i]]) for i in range(1, L + 1) if C[i]]
        found = 0
        for e in range(n):
            v = 1
            for i, lc in logs:
                v ^= exp_l[(lc - e * i) % order]
            if v == 0:
                if found == L:
                    found += 1
                    break
                out_pos[w, found] = e
                found += 1
        out_count[w] = found if found == L else -1
