"""Shortened narrow-sense binary BCH codes.

Bit layout of a codeword: position ``p`` (0-based) carries the coefficient
of ``x^(n-1-p)``. The first ``k`` positions hold the data and the last
``n - k`` the parity, so the code is systematic. Shortening drops the
high-degree positions of the length ``2^m - 1`` parent code; zero-padding a
shortened codeword at the front gives a parent codeword.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .gf import MAX_DEGREE, GF2m, field as gf_field, poly_degree, poly_mul

DECODE_FAILURE = -1


class CodeConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class CodeSpec:
    """A constructed BCH code; ``k = n - deg(generator)``."""

    n: int
    k: int
    t: int
    m_field: int
    generator: int = field(repr=False)
    _rem_rows: np.ndarray = field(repr=False, compare=False)

    @property
    def redundancy(self) -> int:
        return self.n - self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def gf(self) -> GF2m:
        return gf_field(self.m_field)

    @property
    def parity_matrix(self) -> np.ndarray:
        """``(k, n - k)`` matrix whose row ``p`` is the parity of a unit data bit at ``p``."""
        return self._rem_rows[: self.k]

    @property
    def remainder_matrix(self) -> np.ndarray:
        """``(n, n - k)``: row ``p`` is ``x^(n-1-p) mod g`` (low degree first)."""
        return self._rem_rows

    def label(self) -> str:
        return f"BCH({self.n},{self.k},{self.t})"


def field_degree_for(n: int) -> int:
    m = 2
    while (1 << m) - 1 < n:
        m += 1
    return m


def generator_polynomial(gf: GF2m, t: int) -> int:
    """Least common multiple of the minimal polynomials of ``alpha^1 .. alpha^2t``."""
    g, seen = 1, set()
    for s in range(1, 2 * t + 1):
        rep = min(gf.cyclotomic_coset(s))
        if rep in seen:
            continue
        seen.add(rep)
        g = poly_mul(g, gf.minimal_polynomial(s))
    return g


def make_code(n: int, t: int, m_field: int | None = None) -> CodeSpec:
    """Construct the ``t``-error-correcting BCH code shortened to length ``n``."""
    if t < 1:
        raise CodeConstructionError("t must be at least 1")
    if n < 2 * t + 1:
        raise CodeConstructionError(f"n={n} is too short for t={t}")
    m = field_degree_for(n) if m_field is None else m_field
    if m > MAX_DEGREE:
        raise CodeConstructionError(f"n={n} needs a field larger than GF(2^{MAX_DEGREE})")
    if (1 << m) - 1 < n:
        raise CodeConstructionError(f"n={n} exceeds 2^{m}-1")
    gf = gf_field(m)
    g = generator_polynomial(gf, t)
    r = poly_degree(g)
    k = n - r
    if k < 1:
        raise CodeConstructionError(f"BCH code with n={n}, t={t} has no information bits")
    rows = np.zeros((n, r), dtype=np.uint8)
    # x^(n-1-p) mod g for every position, reusing the previous remainder
    cur = 1
    for deg in range(n):
        if deg:
            cur <<= 1
            if cur >> r:
                cur ^= g
        p = n - 1 - deg
        for c in range(r):
            rows[p, c] = (cur >> c) & 1
    rows.setflags(write=False)
    return CodeSpec(n, k, t, m, g, rows)


def _as_bits(a, length: int, what: str) -> np.ndarray:
    a = np.asarray(a)
    if a.shape[-1] != length:
        raise ValueError(f"{what} must have length {length}, got {a.shape[-1]}")
    if a.dtype != np.uint8:
        a = (a != 0).astype(np.uint8)
    return a


def encode_batch(code: CodeSpec, data) -> np.ndarray:
    """Encode an ``(N, k)`` array of data bits into ``(N, n)`` codewords."""
    data = _as_bits(data, code.k, "data")
    data = np.atleast_2d(data)
    rem = (data.astype(np.int32) @ code.parity_matrix.astype(np.int32)) & 1
    return np.concatenate([data, rem[:, ::-1].astype(np.uint8)], axis=1)


def encode(code: CodeSpec, data) -> np.ndarray:
    return encode_batch(code, np.asarray(data)[None, :])[0]


def remainders(code: CodeSpec, words) -> np.ndarray:
    """Received words reduced modulo the generator, ``(N, n - k)``; zero rows are codewords."""
    words = np.atleast_2d(_as_bits(words, code.n, "received word"))
    return ((words.astype(np.int32) @ code.remainder_matrix.astype(np.int32)) & 1).astype(np.uint8)


def syndromes(code: CodeSpec, word) -> list[int]:
    """``S_1 .. S_2t`` of one word as field elements."""
    gf = code.gf
    word = _as_bits(word, code.n, "received word")
    out = []
    for j in range(1, 2 * code.t + 1):
        s = 0
        for p in np.flatnonzero(word):
            s ^= gf.alpha_pow(j * (code.n - 1 - int(p)))
        out.append(s)
    return out


def decode_batch(code: CodeSpec, words, kernel: str | None = None):
    """Bounded-distance decode of an ``(N, n)`` array.

    Returns ``(corrected, counts)``; ``counts[w]`` is the number of flipped
    bits or ``DECODE_FAILURE``, in which case the received word is returned
    unchanged.
    """
    words = np.atleast_2d(_as_bits(words, code.n, "received word"))
    out = words.copy()
    counts = np.zeros(words.shape[0], dtype=np.int32)
    rem = remainders(code, words)
    bad = np.flatnonzero(rem.any(axis=1))
    if bad.size == 0:
        return out, counts
    _, locate = _backend.get_kernel(kernel)
    gf = code.gf
    pos = np.zeros((bad.size, code.t), dtype=np.int32)
    cnt = np.zeros(bad.size, dtype=np.int32)
    locate(np.ascontiguousarray(rem[bad]), gf.exp, gf.log, gf.order, code.n, code.t, pos, cnt)
    counts[bad] = cnt
    ok = cnt > 0
    rows = np.repeat(bad[ok], cnt[ok])
    degs = np.concatenate([pos[w, :c] for w, c in zip(np.flatnonzero(ok), cnt[ok])]) \
        if ok.any() else np.zeros(0, dtype=np.int32)
    out[rows, code.n - 1 - degs] ^= 1
    return out, counts


def decode(code: CodeSpec, received, kernel: str | None = None) -> tuple[np.ndarray, int]:
    """Decode one word; returns ``(word, corrected_count or DECODE_FAILURE)``."""
    out, counts = decode_batch(code, np.asarray(received)[None, :], kernel)
    return out[0], int(counts[0])


def extract_data(code: CodeSpec, words) -> np.ndarray:
    return np.asarray(words)[..., : code.k]
