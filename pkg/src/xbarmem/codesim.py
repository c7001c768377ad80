"""Monte Carlo UBER/FER of BCH-coded arrays.

One frame fills the whole ``m x n`` array with ``m`` codewords of random
data. Each stored bit flips independently with the cell's cascaded
crossover for its value (``p5`` for a 0, ``p6`` for a 1). Flips are drawn by
thinning a Bernoulli process of rate ``p_max``, so only codewords that
receive a candidate flip are encoded and decoded.

UBER is data-bit errors after decoding divided by data bits stored; FER is
the fraction of codewords whose data differs after decoding. A detected
decoding failure passes the received word through unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bch import CodeSpec, decode_batch, encode_batch
from .capacity import ChannelMap
from .interleave import Placement, make_placement

DEFAULT_MIN_EVENTS = 100
DEFAULT_MAX_FRAMES = 200_000
BATCH_SLOTS = 1 << 22


@dataclass(frozen=True)
class CodeSimResult:
    scheme: str
    frames: int
    codewords: int
    data_bits: int
    bit_errors: int
    frame_errors: int
    decode_failures: int
    uber_se: float
    capped: bool

    @property
    def uber(self) -> float:
        return self.bit_errors / self.data_bits if self.data_bits else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.codewords if self.codewords else 0.0

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return max(0.0, self.uber - z * self.uber_se), self.uber + z * self.uber_se


def _gap_positions(rng, total: int, rate: float) -> np.ndarray:
    """Indices in ``[0, total)`` of a Bernoulli(rate) process, via geometric gaps."""
    if rate <= 0:
        return np.zeros(0, dtype=np.int64)
    if rate >= 1:
        return np.arange(total, dtype=np.int64)
    out = []
    pos = -1
    expect = int(total * rate + 6 * math.sqrt(total * rate) + 16)
    while True:
        gaps = rng.geometric(rate, size=expect)
        idx = pos + np.cumsum(gaps)
        keep = idx[idx < total]
        out.append(keep)
        if keep.size < idx.size:
            break
        pos = int(idx[-1])
    return np.concatenate(out)


def simulate_codes(cmap: ChannelMap, codes, choice=None, scheme: str = "wordline",
                   seed: int = 0, min_events: int = DEFAULT_MIN_EVENTS,
                   max_frames: int = DEFAULT_MAX_FRAMES, label: str | None = None) -> CodeSimResult:
    """Simulate frames until ``min_events`` codeword errors or ``max_frames``.

    Parameters
    ----------
    cmap : ChannelMap
        Analytic per-cell ``p5``/``p6``.
    codes : sequence of CodeSpec
        Code family; all share ``n`` equal to the number of bitlines.
    choice : array of int, optional
        Code index per codeword slot (wordline ``d`` in placement order);
        defaults to code 0 everywhere.
    scheme : {"wordline", "diagonal"}
        Placement of codeword bits.
    """
    g = cmap.geometry
    codes = tuple(codes) if not isinstance(codes, CodeSpec) else (codes,)
    if any(c.n != g.n for c in codes):
        raise ValueError(f"codes must have length {g.n}")
    choice = np.zeros(g.m, dtype=np.int64) if choice is None else np.asarray(choice, dtype=np.int64)
    if choice.shape != (g.m,):
        raise ValueError("one code index per wordline is required")
    placement: Placement = make_placement(scheme, g)
    # per-slot flip probabilities in codeword order, for stored 0 and 1
    p0 = placement.gather(cmap.p5).ravel()
    p1 = placement.gather(cmap.p6).ravel()
    pmax = float(max(p0.max(), p1.max()))
    ks = np.array([codes[l].k for l in choice])
    frame_bits = int(ks.sum())
    slots = g.m * g.n
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    frames_per_batch = max(1, BATCH_SLOTS // slots)

    frames = bit_err = word_err = fails = 0
    sum_x = sum_x2 = 0.0
    while frames < max_frames and (word_err < min_events):
        nf = min(frames_per_batch, max_frames - frames)
        if pmax == 0:
            frames += nf
            continue
        cand = _gap_positions(rng, nf * slots, pmax)
        f_idx, slot = np.divmod(cand, slots)
        d_idx, bit = np.divmod(slot, g.n)
        word_id = f_idx * g.m + d_idx
        words, inv = np.unique(word_id, return_inverse=True)
        frame_x = np.zeros(nf)
        for l, code in enumerate(codes):
            sel = np.flatnonzero(choice[words % g.m] == l)
            if sel.size == 0:
                continue
            data = rng.integers(0, 2, size=(sel.size, code.k), dtype=np.uint8)
            cw = encode_batch(code, data)
            # candidates belonging to these words
            local = np.full(words.size, -1, dtype=np.int64)
            local[sel] = np.arange(sel.size)
            ci = np.flatnonzero(local[inv] >= 0)
            w_loc = local[inv[ci]]
            b = bit[ci]
            stored = cw[w_loc, b]
            s = slot[ci]
            prob = np.where(stored == 0, p0[s], p1[s])
            flip = rng.random(ci.size) * pmax < prob
            recv = cw.copy()
            recv[w_loc[flip], b[flip]] ^= 1
            dec, cnt = decode_batch(code, recv)
            errs = np.count_nonzero(dec[:, : code.k] != cw[:, : code.k], axis=1)
            bit_err += int(errs.sum())
            word_err += int(np.count_nonzero(errs))
            fails += int(np.count_nonzero(cnt < 0))
            np.add.at(frame_x, (words[sel] // g.m), errs)
        sum_x += float(frame_x.sum())
        sum_x2 += float(np.dot(frame_x, frame_x))
        frames += nf
    total_bits = frames * frame_bits
    if frames > 1:
        mean = sum_x / frames
        var = max(0.0, (sum_x2 - frames * mean * mean) / (frames - 1))
        se = math.sqrt(var / frames) / frame_bits
    else:
        se = math.nan
    return CodeSimResult(label or scheme, frames, frames * g.m, total_bits, bit_err, word_err,
                         fails, se, word_err < min_events)


def rber_spread(cmap: ChannelMap, scheme: str) -> float:
    """Standard deviation across codewords of their mean cascaded BER."""
    pl = make_placement(scheme, cmap.geometry)
    return float(np.std(pl.gather(cmap.cascaded_ber).mean(axis=1)))
