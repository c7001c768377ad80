"""Write channel: switching-failure probabilities and the write BAC.

A write that would flip the stored state succeeds when the log-normal
switching time is shorter than the applied pulse. The median switching
time depends exponentially on the voltage actually delivered to the cell,
which in turn depends on the previous resistance of the cell and on its
position in the array. Averaging over the previous resistance gives the
per-cell failure probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import (
    BiasScheme,
    accumulated_line_resistance,
    series_resistance,
    solve_kcl,
    background_grid,
)
from .numerics import probabilists_hermite, qfunc
from .params import ArrayGeometry, BacParams, CellLocation, DeviceParams

QUAD_TOL = 1e-10
_QUAD_START = 16
_QUAD_MAX = 1024


class QuadratureError(RuntimeError):
    """Gauss-Hermite refinement did not reach the requested tolerance."""


@dataclass(frozen=True)
class SwitchingModel:
    """``ln tau = alpha * V + beta`` (tau in microseconds), log-normal spread ``sigma``."""

    alpha: float
    beta: float
    sigma: float
    t_pulse: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.t_pulse > 0:
            raise ValueError("t_pulse must be positive")

    def log_median(self, v):
        return self.alpha * np.asarray(v, dtype=float) + self.beta

    def failure_given_voltage(self, v):
        """Probability that switching is not complete within ``t_pulse``."""
        return qfunc((math.log(self.t_pulse) - self.log_median(v)) / self.sigma)


@dataclass(frozen=True)
class _Kind:
    model: SwitchingModel
    voltage: float
    mu: float
    sigma: float


def _kind(kind: str, p: DeviceParams) -> _Kind:
    if kind == "set":
        return _Kind(SwitchingModel(p.alpha_set, p.beta_set, p.sigma_set, p.t_set),
                     p.v_w_set, p.mu_h, p.sigma_h)
    if kind == "reset":
        return _Kind(SwitchingModel(p.alpha_reset, p.beta_reset, p.sigma_reset, p.t_reset),
                     p.v_w_reset, p.mu_l, p.sigma_l)
    raise ValueError(f"kind must be 'set' or 'reset', got {kind!r}")


def switching_model(kind: str, p: DeviceParams) -> SwitchingModel:
    return _kind(kind, p).model


@dataclass(frozen=True)
class WriteChannelResult:
    """Write BAC of one cell. ``bac.p_01`` is p1 and ``bac.p_10`` is p2."""

    bac: BacParams
    set_fail: float
    reset_fail: float
    q: float

    @property
    def p1(self) -> float:
        return self.bac.p_01

    @property
    def p2(self) -> float:
        return self.bac.p_10

    @property
    def write_ber(self) -> float:
        """``P(Y != X)`` with the data equal to 0 with probability ``q``."""
        return self.bac.error_rate(self.q)


# -- Thevenin view of the write path -------------------------------------------


def write_thevenin(loc: CellLocation, kind: str, p: DeviceParams,
                   geom: ArrayGeometry | None = None, background=None) -> tuple[float, float]:
    """Open-circuit voltage and source resistance seen by the cell being written.

    The delivered voltage is then ``v_oc * r / (r + r_src)`` for any cell
    resistance ``r``. With open half/un-selected branches this is the plain
    series divider; otherwise two nodal solves fix the two unknowns.
    """
    k = _kind(kind, p)
    if p.ideal_selectors or geom is None:
        return k.voltage, float(series_resistance(accumulated_line_resistance(loc, p), p))
    grid = background_grid(geom, p, background)
    bias = BiasScheme("write", loc, k.voltage)
    r1, r2 = math.exp(k.mu), math.exp(k.mu) * 10.0
    v1 = solve_kcl(grid.with_cell(loc, r1), bias, p).cell_voltage(loc)
    v2 = solve_kcl(grid.with_cell(loc, r2), bias, p).cell_voltage(loc)
    # 1/V = (1/v_oc) * (1 + r_src / r), linear in 1/r
    slope = (1 / v1 - 1 / v2) / (1 / r1 - 1 / r2)
    inv_voc = 1 / v1 - slope / r1
    v_oc = 1 / inv_voc
    return float(v_oc), float(slope * v_oc)


def _delivered(v_oc, r_src, r_prev):
    return v_oc * r_prev / (r_prev + r_src)


def switch_success_given_r(r_prev: float, loc: CellLocation, model: SwitchingModel | None,
                           kind: str, p: DeviceParams, geom: ArrayGeometry | None = None,
                           background=None) -> float:
    """Probability that a set/reset from resistance ``r_prev`` succeeds.

    ``model`` defaults to the coefficients in ``p`` for ``kind``.
    """
    if not r_prev > 0:
        raise ValueError("r_prev must be positive")
    model = switching_model(kind, p) if model is None else model
    v_oc, r_src = write_thevenin(loc, kind, p, geom, background)
    return float(1.0 - model.failure_given_voltage(_delivered(v_oc, r_src, r_prev)))


def _marginal_failure(v_oc, r_src, k: _Kind, tol: float = QUAD_TOL) -> np.ndarray:
    """E over ln R* ~ N(mu, sigma^2) of the failure probability, vectorized over sources."""
    v_oc = np.atleast_1d(np.asarray(v_oc, dtype=float))
    r_src = np.atleast_1d(np.asarray(r_src, dtype=float))[:, None]
    prev = None
    n = _QUAD_START
    while n <= _QUAD_MAX:
        x, w = probabilists_hermite(n)
        r = np.exp(k.mu + k.sigma * x)[None, :]
        vals = k.model.failure_given_voltage(_delivered(v_oc[:, None], r_src, r)) @ w
        if prev is not None and np.max(np.abs(vals - prev)) < tol:
            return np.clip(vals, 0.0, 1.0)
        prev = vals
        n *= 2
    raise QuadratureError(f"quadrature did not reach {tol:g} with {_QUAD_MAX} nodes")


def failure_probs(acc, kind: str, p: DeviceParams) -> np.ndarray:
    """Marginal switching-failure probability for accumulated resistances ``acc``.

    Ideal-selector path; repeated ``acc`` values are evaluated once.
    """
    acc = np.asarray(acc, dtype=float)
    k = _kind(kind, p)
    uniq, inv = np.unique(acc.ravel(), return_inverse=True)
    vals = _marginal_failure(np.full(uniq.shape, k.voltage), series_resistance(uniq, p), k)
    return vals[inv].reshape(acc.shape)


def _failure_prob(kind: str, loc: CellLocation, p: DeviceParams,
                  geom: ArrayGeometry | None, background) -> float:
    v_oc, r_src = write_thevenin(loc, kind, p, geom, background)
    return float(_marginal_failure(v_oc, r_src, _kind(kind, p))[0])


def set_failure_prob(loc: CellLocation, p: DeviceParams, geom: ArrayGeometry | None = None,
                     background=None) -> float:
    """``P(Y=0 | X=1, previous state HRS)`` averaged over the HRS resistance."""
    return _failure_prob("set", loc, p, geom, background)


def reset_failure_prob(loc: CellLocation, p: DeviceParams, geom: ArrayGeometry | None = None,
                       background=None) -> float:
    """``P(Y=1 | X=0, previous state LRS)`` averaged over the LRS resistance."""
    return _failure_prob("reset", loc, p, geom, background)


def write_bac(set_fail, reset_fail, q: float):
    """p1 and p2 from failure probabilities; the previous state is HRS with probability ``q``."""
    return (1.0 - q) * np.asarray(reset_fail), q * np.asarray(set_fail)


def write_channel(loc: CellLocation, p: DeviceParams, q: float | None = None,
                  geom: ArrayGeometry | None = None, background=None) -> WriteChannelResult:
    q = p.q_prior if q is None else float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must be a probability")
    sf = set_failure_prob(loc, p, geom, background)
    rf = reset_failure_prob(loc, p, geom, background)
    p1, p2 = write_bac(sf, rf, q)
    return WriteChannelResult(BacParams(float(p1), float(p2)), sf, rf, q)
