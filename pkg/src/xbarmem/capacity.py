"""Cascaded write/read channel and its capacity.

The write crossovers scale with the input distribution (the previous state
has the same prior as the data), so the per-cell capacity is a maximization
of the mutual information over ``q`` with the channel re-evaluated at each
trial ``q``. That is a bounded 1-D search: a coarse grid followed by
golden-section refinement around the best grid point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import accumulated_line_resistance, accumulated_line_resistance_map
from .numerics import binary_entropy
from .params import ArrayGeometry, BacParams, CellLocation, DeviceParams
from .read_channel import read_crossovers
from .threshold import resolve_thresholds
from .write_channel import failure_probs, write_bac

GRID_POINTS = 201
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CascadedChannel:
    bac: BacParams
    loc: CellLocation
    q_used: float

    @property
    def p5(self) -> float:
        return self.bac.p_01

    @property
    def p6(self) -> float:
        return self.bac.p_10


def cascade_arrays(p1, p2, p3, p4):
    p5 = p1 * (1.0 - p4) + (1.0 - p1) * p3
    p6 = p2 * (1.0 - p3) + (1.0 - p2) * p4
    return p5, p6


def cascade(write: BacParams, read: BacParams) -> BacParams:
    """Write channel followed by read channel."""
    p5, p6 = cascade_arrays(write.p_01, write.p_10, read.p_01, read.p_10)
    return BacParams(float(np.clip(p5, 0, 1)), float(np.clip(p6, 0, 1)))


def mutual_information_arrays(q, p5, p6):
    """``I(X; Z)`` in bits with ``P(X=0) = q``; broadcasts."""
    q = np.asarray(q, dtype=float)
    pz0 = q * (1.0 - p5) + (1.0 - q) * p6
    mi = binary_entropy(pz0) - q * binary_entropy(p5) - (1.0 - q) * binary_entropy(p6)
    return np.maximum(np.asarray(mi), 0.0)


def mutual_information(q: float, bac: BacParams) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must be a probability")
    return float(mutual_information_arrays(q, bac.p_01, bac.p_10))


def _mi_composite(q, set_fail, reset_fail, p3, p4):
    p1, p2 = write_bac(set_fail, reset_fail, q)
    p5, p6 = cascade_arrays(p1, p2, p3, p4)
    return mutual_information_arrays(q, p5, p6)


def maximize_mi(set_fail, reset_fail, p3, p4, grid_points: int = GRID_POINTS,
                iterations: int = 60):
    """Capacity and maximizing ``q`` for each cell given its failure/read probabilities.

    All inputs are 1-D arrays of equal length.
    """
    sf, rf, p3, p4 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (set_fail, reset_fail, p3, p4))
    qs = np.linspace(0.0, 1.0, grid_points)[:, None]
    vals = _mi_composite(qs, sf[None], rf[None], p3[None], p4[None])
    k = np.argmax(vals, axis=0)
    step = 1.0 / (grid_points - 1)
    lo = np.clip(qs[k, 0] - step, 0.0, 1.0)
    hi = np.clip(qs[k, 0] + step, 0.0, 1.0)

    def f(q):
        return _mi_composite(q, sf, rf, p3, p4)

    a = hi - _GOLDEN * (hi - lo)
    b = lo + _GOLDEN * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(iterations):
        left = fa >= fb
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
        b_new = np.where(left, a, lo + _GOLDEN * (hi - lo))
        a_new = np.where(left, hi - _GOLDEN * (hi - lo), b)
        a, b = a_new, b_new
        fa_new = np.where(left, f(a), fb)
        fb_new = np.where(left, fa, f(b))
        fa, fb = fa_new, fb_new
    q_ref = 0.5 * (lo + hi)
    c_ref = f(q_ref)
    c_grid = vals[k, np.arange(vals.shape[1])]
    better = c_ref >= c_grid
    return np.where(better, c_ref, c_grid), np.where(better, q_ref, qs[k, 0])


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    q: float


def cell_capacity(loc: CellLocation, p: DeviceParams, r_th: float | None = None) -> CapacityResult:
    """Capacity (bits) of one cell and the input prior that attains it."""
    r_th = p.r_th if r_th is None else r_th
    acc = accumulated_line_resistance(loc, p)
    sf = failure_probs(acc, "set", p)
    rf = failure_probs(acc, "reset", p)
    p3, p4 = read_crossovers(acc, r_th, p)
    c, q = maximize_mi(sf, rf, p3, p4)
    return CapacityResult(float(c[0]), float(q[0]))


def capacity_map(geom: ArrayGeometry, p: DeviceParams, r_th=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell capacity and maximizing prior, each of shape ``(m, n)``.

    Cells sharing the same accumulated resistance and threshold are solved once.
    """
    acc = accumulated_line_resistance_map(geom, p)
    th = resolve_thresholds(p.r_th if r_th is None else r_th, geom)
    key = np.stack([acc.ravel(), np.broadcast_to(th, geom.shape).ravel()], axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    sf = failure_probs(uniq[:, 0], "set", p)
    rf = failure_probs(uniq[:, 0], "reset", p)
    p3, p4 = read_crossovers(uniq[:, 0], uniq[:, 1], p)
    c, q = maximize_mi(sf, rf, p3, p4)
    return c[inv].reshape(geom.shape), q[inv].reshape(geom.shape)


def averaged_capacity(geom: ArrayGeometry, p: DeviceParams, r_th=None) -> float:
    """Mean per-cell capacity over the array (bits/cell)."""
    c, _ = capacity_map(geom, p, r_th)
    # row sums first, then a fixed-order total
    return float(np.sum(np.sum(c, axis=1)) / geom.size)


# -- analytic channel map --------------------------------------------------------


@dataclass(frozen=True)
class ChannelMap:
    """All per-cell channel parameters at a fixed prior ``q`` (arrays of shape ``(m, n)``)."""

    geometry: ArrayGeometry
    q: float
    acc: np.ndarray
    r_th: np.ndarray
    set_fail: np.ndarray
    reset_fail: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    p5: np.ndarray
    p6: np.ndarray

    @property
    def write_ber(self) -> np.ndarray:
        return self.q * self.p1 + (1 - self.q) * self.p2

    @property
    def read_ber(self) -> np.ndarray:
        """``P(Z != Y)`` using the distribution of the written state."""
        py0 = self.q * (1 - self.p1) + (1 - self.q) * self.p2
        return py0 * self.p3 + (1 - py0) * self.p4

    @property
    def cascaded_ber(self) -> np.ndarray:
        return self.q * self.p5 + (1 - self.q) * self.p6

    def quantity(self, name: str) -> np.ndarray:
        if name in ("write", "write_ber"):
            return self.write_ber
        if name in ("read", "read_ber"):
            return self.read_ber
        if name in ("cascaded", "cascaded_ber"):
            return self.cascaded_ber
        return np.asarray(getattr(self, name))


def channel_map(geom: ArrayGeometry, p: DeviceParams, r_th=None, q: float | None = None) -> ChannelMap:
    q = p.q_prior if q is None else float(q)
    acc = accumulated_line_resistance_map(geom, p)
    th = np.broadcast_to(resolve_thresholds(p.r_th if r_th is None else r_th, geom), geom.shape)
    sf = failure_probs(acc, "set", p)
    rf = failure_probs(acc, "reset", p)
    p1, p2 = write_bac(sf, rf, q)
    p3, p4 = read_crossovers(acc, th, p)
    p5, p6 = cascade_arrays(p1, p2, p3, p4)
    return ChannelMap(geom, q, acc, np.array(th), sf, rf, p1, p2, p3, p4, p5, p6)
