"""Read-threshold selection.

Four schemes are supported:

``naive``
    the zero-line-resistance optimum ``R_th0`` used everywhere;
``dtec``
    a different threshold for each cell, ``R_th0`` shifted by the cell's
    series resistance;
``stmc-approx``
    one threshold for many cells, the mean of the DTEC thresholds;
``stmc-exact``
    one threshold solving ``ln R_th0 = mean(ln(R - acc))`` by fixed-point
    iteration.

STMC thresholds may also be solved per bitline (one threshold per sense
amplifier) with ``stmc_columns``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .circuit import accumulated_line_resistance, accumulated_line_resistance_map, series_resistance
from .numerics import qfunc
from .params import ArrayGeometry, CellLocation, DeviceParams

KINDS = ("naive", "dtec", "stmc-approx", "stmc-exact")


class ThresholdDomainError(ValueError):
    """An iterate leaves the region where every ``R - acc`` is positive."""


class ThresholdConvergenceError(RuntimeError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


@dataclass(frozen=True)
class ThresholdPlan:
    """Resistance-domain read threshold(s) for an array.

    ``value`` is a scalar (one threshold for the array), a length-``n``
    vector (one per bitline) or an ``(m, n)`` matrix (one per cell).
    """

    kind: str
    value: float | np.ndarray
    geometry: ArrayGeometry
    r_th0: float
    iterations: int = 0
    trace: tuple = field(default=(), repr=False)

    def matrix(self) -> np.ndarray:
        v = np.asarray(self.value, dtype=float)
        g = self.geometry
        if v.ndim == 0:
            return np.full(g.shape, float(v))
        if v.shape == (g.n,):
            return np.broadcast_to(v[None, :], g.shape).copy()
        if v.shape == g.shape:
            return v.copy()
        raise ValueError(f"threshold shape {v.shape} does not fit {g.shape}")

    def at(self, loc: CellLocation) -> float:
        v = np.asarray(self.value, dtype=float)
        if v.ndim == 0:
            return float(v)
        if v.ndim == 1:
            return float(v[loc.j - 1])
        return float(v[loc.i - 1, loc.j - 1])


def resolve_thresholds(r_th, geom: ArrayGeometry):
    """Scalar or ``(m, n)`` array of thresholds from a plan, vector or scalar."""
    if isinstance(r_th, ThresholdPlan):
        v = np.asarray(r_th.value, dtype=float)
        return float(v) if v.ndim == 0 else r_th.matrix()
    v = np.asarray(r_th, dtype=float)
    if v.ndim == 0:
        return float(v)
    if v.shape == (geom.n,):
        return np.broadcast_to(v[None, :], geom.shape).copy()
    if v.shape == geom.shape:
        return v
    raise ValueError(f"threshold shape {v.shape} does not fit {geom.shape}")


def read_error_objective(ln_r, p: DeviceParams, q: float | None = None):
    """Zero-line-resistance read BER as a function of ``ln R_th``."""
    q = p.q_prior if q is None else q
    ln_r = np.asarray(ln_r, dtype=float)
    return q * qfunc((p.mu_h - ln_r) / p.sigma_h) + (1 - q) * qfunc((ln_r - p.mu_l) / p.sigma_l)


def _golden_min(f, lo, hi, tol=1e-12, max_iter=300):
    g = (math.sqrt(5) - 1) / 2
    a, b = hi - g * (hi - lo), lo + g * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = hi - g * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + g * (hi - lo)
            fb = f(b)
    return 0.5 * (lo + hi)


def naive_threshold(p: DeviceParams, q: float | None = None) -> float:
    """Threshold minimizing the read BER when line resistance is ignored.

    Setting the derivative of the objective to zero equates the two
    prior-weighted Gaussian densities of ``ln R``, a quadratic in ``ln R``.
    When it has two roots the one between ``mu_l`` and ``mu_h`` is taken.
    """
    q = p.q_prior if q is None else float(q)
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    sl2, sh2 = p.sigma_l ** 2, p.sigma_h ** 2
    a = 0.5 / sl2 - 0.5 / sh2
    b = -p.mu_l / sl2 + p.mu_h / sh2
    c = (p.mu_l ** 2 / (2 * sl2) - p.mu_h ** 2 / (2 * sh2)
         + math.log(q * p.sigma_l / ((1 - q) * p.sigma_h)))
    f = lambda x: float(read_error_objective(x, p, q))
    candidates = []
    if abs(a) < 1e-14 * max(abs(b), 1.0):
        candidates.append(-c / b)
    else:
        disc = b * b - 4 * a * c
        if disc >= 0:
            s = math.sqrt(disc)
            # numerically stable pair of roots
            t = -0.5 * (b + math.copysign(s, b))
            candidates += [t / a, c / t] if t != 0 else [-b / (2 * a)]
    inside = [x for x in candidates if p.mu_l <= x <= p.mu_h]
    if inside:
        x = min(inside, key=f)
    else:
        lo = p.mu_l - 8 * p.sigma_l
        hi = p.mu_h + 8 * p.sigma_h
        x = _golden_min(f, lo, hi)
        for cand in candidates:
            if f(cand) < f(x):
                x = cand
    return math.exp(x)


def dtec_threshold(loc: CellLocation, r_th0: float, p: DeviceParams) -> float:
    """Per-cell optimum: ``r_th0`` shifted right by the cell's series resistance."""
    return r_th0 + float(series_resistance(accumulated_line_resistance(loc, p), p))


def dtec_thresholds(geom: ArrayGeometry, r_th0: float, p: DeviceParams) -> np.ndarray:
    return r_th0 + series_resistance(accumulated_line_resistance_map(geom, p), p)


def stmc_approx(geom: ArrayGeometry, r_th0: float, p: DeviceParams) -> float:
    """Mean of the per-cell optima over the array."""
    return r_th0 + (geom.m + 1) / 2 * p.r_b + (geom.n + 1) / 2 * p.r_w + p.r_sf


@dataclass(frozen=True)
class StmcResult:
    value: float
    trace: tuple
    iterations: int


def _unique_weights(acc):
    uniq, counts = np.unique(np.asarray(acc, dtype=float).ravel(), return_counts=True)
    return uniq, counts / counts.sum()


def stmc_equation_residual(r: float, acc, r_th0: float) -> float:
    """``mean(ln(r - acc)) - ln(r_th0)``; zero at the exact STMC threshold."""
    uniq, w = _unique_weights(acc)
    if r <= uniq.max():
        return -math.inf
    return float(np.dot(w, np.log(r - uniq)) - math.log(r_th0))


def stmc_fixed_point(acc, r_th0: float, eps: float = 1e-6, max_iter: int = 50,
                     r_init: float | None = None) -> StmcResult:
    """Iterate ``R <- r_th0 * exp(-mean(ln(1 - acc / R)))`` from ``r_init`` (default ``r_th0``).

    Stops when successive iterates differ by at most ``eps`` ohms. The
    iteration map is decreasing, so iterates alternate around the solution.
    """
    uniq, w = _unique_weights(acc)
    r = float(r_th0 if r_init is None else r_init)
    trace = [r]
    for it in range(1, max_iter + 1):
        frac = uniq / r
        if np.any(frac >= 1.0):
            raise ThresholdDomainError(
                f"iterate {it - 1} ({r:.6g} ohm) does not exceed the largest series "
                f"resistance {uniq.max():.6g} ohm")
        r_new = r_th0 * math.exp(-float(np.dot(w, np.log1p(-frac))))
        trace.append(r_new)
        if abs(r_new - r) <= eps:
            return StmcResult(r_new, tuple(trace), it)
        r = r_new
    raise ThresholdConvergenceError(
        f"no convergence to {eps:g} ohm within {max_iter} iterations", tuple(trace))


def stmc_root(acc, r_th0: float, xtol: float = 1e-9) -> float:
    """Root of :func:`stmc_equation_residual` by bracketing.

    The residual increases from minus infinity just above the largest series
    resistance, so a root always exists; this is the fallback when the
    fixed-point iteration leaves its domain.
    """
    uniq, w = _unique_weights(acc)
    top = float(uniq.max())

    def f(r):
        return float(np.dot(w, np.log(r - uniq)) - math.log(r_th0))

    lo = top + max(1e-9 * max(top, 1.0), 1e-12)
    while f(lo) > 0:
        lo = top + (lo - top) * 1e-3
    hi = max(r_th0 + float(np.dot(w, uniq)), lo) * 2.0
    while f(hi) < 0:
        hi *= 2.0
    return float(brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))


def stmc_solve(geom: ArrayGeometry, r_th0: float, p: DeviceParams, eps: float = 1e-6,
               max_iter: int = 50, r_init: float | None = None) -> StmcResult:
    acc = series_resistance(accumulated_line_resistance_map(geom, p), p)
    return stmc_fixed_point(acc, r_th0, eps, max_iter, r_init)


def stmc_columns(geom: ArrayGeometry, r_th0: float, p: DeviceParams, eps: float = 1e-6,
                 max_iter: int = 50) -> np.ndarray:
    """One exact STMC threshold per bitline (each column is an ``m x 1`` sub-array)."""
    acc = series_resistance(accumulated_line_resistance_map(geom, p), p)
    return np.array([stmc_fixed_point(acc[:, j], r_th0, eps, max_iter).value
                     for j in range(geom.n)])


def make_plan(kind: str, geom: ArrayGeometry, p: DeviceParams, r_th0: float | None = None,
              eps: float = 1e-6, max_iter: int = 50, r_init: float | None = None) -> ThresholdPlan:
    r_th0 = naive_threshold(p) if r_th0 is None else float(r_th0)
    if kind == "naive":
        return ThresholdPlan(kind, r_th0, geom, r_th0)
    if kind == "dtec":
        return ThresholdPlan(kind, dtec_thresholds(geom, r_th0, p), geom, r_th0)
    if kind == "stmc-approx":
        return ThresholdPlan(kind, stmc_approx(geom, r_th0, p), geom, r_th0)
    if kind == "stmc-exact":
        res = stmc_solve(geom, r_th0, p, eps, max_iter, r_init)
        return ThresholdPlan(kind, res.value, geom, r_th0, res.iterations, res.trace)
    if kind == "raw":
        # the threshold implied by the configured I_th
        return ThresholdPlan("naive", p.r_th, geom, p.r_th)
    raise ValueError(f"unknown threshold scheme {kind!r}; expected one of {KINDS}")


def read_ber_map(geom: ArrayGeometry, r_th, p: DeviceParams, q: float | None = None) -> np.ndarray:
    """Per-cell ``q * p3 + (1 - q) * p4``."""
    from .read_channel import read_crossovers

    q = p.q_prior if q is None else q
    acc = accumulated_line_resistance_map(geom, p)
    p3, p4 = read_crossovers(acc, resolve_thresholds(r_th, geom), p)
    return q * p3 + (1 - q) * p4


def avg_read_ber(geom: ArrayGeometry, plan, p: DeviceParams, q: float | None = None) -> float:
    """Array-averaged read BER under a plan (or a raw threshold value)."""
    ber = read_ber_map(geom, plan, p, q)
    return float(np.sum(np.sum(ber, axis=1)) / geom.size)


def jensen_bound(geom: ArrayGeometry, r_th: float, p: DeviceParams, q: float | None = None) -> float:
    """Surrogate objective obtained by averaging ``ln(R - acc)`` before the Q-functions.

    The Q-function is convex for nonnegative arguments, so when every argument
    involved is nonnegative this value never exceeds :func:`avg_read_ber`.
    Minimizing it leads to the STMC fixed-point equation.
    """
    q = p.q_prior if q is None else q
    acc = series_resistance(accumulated_line_resistance_map(geom, p), p)
    a = float(np.mean(np.log(r_th - acc)))
    return float(read_error_objective(a, p, q))
