"""Read channel under current-mode sensing with a fixed threshold.

With ideal selectors the sensed current is ``V_r / (acc + R)``, so comparing
it against ``I_th`` is the same as comparing the cell resistance against
``r_th - acc`` where ``r_th = V_r / I_th``: line resistance shifts the
effective resistance threshold to the left.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import accumulated_line_resistance, series_resistance
from .numerics import qfunc
from .params import BacParams, CellLocation, DeviceParams


def threshold_detect(current, i_th: float):
    """0 when ``current <= i_th`` (read as HRS), 1 otherwise."""
    out = (np.asarray(current) > i_th).astype(np.int8)
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ReadChannelResult:
    """Read BAC of one cell. ``bac.p_01`` is p3 and ``bac.p_10`` is p4."""

    bac: BacParams
    r_th: float
    loc: CellLocation

    @property
    def p3(self) -> float:
        return self.bac.p_01

    @property
    def p4(self) -> float:
        return self.bac.p_10


def read_crossovers(acc, r_th, p: DeviceParams):
    """Vectorized ``(p3, p4)`` for accumulated resistances ``acc`` and thresholds ``r_th``.

    When the series resistance reaches the threshold no LRS cell can be read
    as 1: ``p4 = 1`` and ``p3 = 0``.
    """
    margin = np.asarray(r_th, dtype=float) - series_resistance(acc, p)
    ok = margin > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ln_eff = np.log(np.where(ok, margin, 1.0))
    p3 = np.where(ok, qfunc((p.mu_h - ln_eff) / p.sigma_h), 0.0)
    p4 = np.where(ok, qfunc((ln_eff - p.mu_l) / p.sigma_l), 1.0)
    return p3, p4


def read_channel(loc: CellLocation, r_th: float, p: DeviceParams) -> ReadChannelResult:
    if not r_th > 0:
        raise ValueError("r_th must be positive")
    p3, p4 = read_crossovers(accumulated_line_resistance(loc, p), r_th, p)
    return ReadChannelResult(BacParams(float(p3), float(p4)), float(r_th), loc)


def read_channel_from_threshold(loc: CellLocation, r_eff: float, p: DeviceParams) -> ReadChannelResult:
    """Read BAC from an effective cell-resistance threshold (e.g. from nodal analysis).

    ``r_eff`` is the cell resistance below which the detector outputs 1.
    """
    if r_eff > 0:
        ln_eff = np.log(r_eff)
        p3 = qfunc((p.mu_h - ln_eff) / p.sigma_h)
        p4 = qfunc((ln_eff - p.mu_l) / p.sigma_l)
    else:
        p3, p4 = 0.0, 1.0
    return ReadChannelResult(BacParams(float(p3), float(p4)), float(r_eff), loc)
