"""Write voltages and read currents of a single crosspoint.

Two views of the same network are provided. Closed forms hold when every
half- and un-selected branch is open, which leaves a single series path
driver -> ``j`` wordline segments -> selector -> cell -> ``i`` bitline
segments -> sense amplifier. ``solve_kcl`` handles finite selector
resistances by nodal analysis of the full crossbar.

Node model: every crosspoint has a wordline-side and a bitline-side node.
Wordline ``i`` is driven at its ``j = 0`` end and bitline ``j`` terminates
at its ``i = 0`` end, so the accumulated line resistance seen by cell
``(i, j)`` is ``i * r_b + j * r_w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import cg, spsolve

from .params import ArrayGeometry, CellLocation, DeviceParams

FULL, HALF, UNSELECTED = 0, 1, 2

DIRECT_SOLVE_MAX_CELLS = 256 * 256
"""Arrays larger than this use preconditioned conjugate gradients."""


class SingularNetworkError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


def accumulated_line_resistance(loc: CellLocation, p: DeviceParams) -> float:
    return loc.i * p.r_b + loc.j * p.r_w


def accumulated_line_resistance_map(geom: ArrayGeometry, p: DeviceParams) -> np.ndarray:
    """``i * r_b + j * r_w`` for every cell, shape ``(m, n)``."""
    i = np.arange(1, geom.m + 1, dtype=float)[:, None]
    j = np.arange(1, geom.n + 1, dtype=float)[None, :]
    return i * p.r_b + j * p.r_w


def series_resistance(acc, p: DeviceParams):
    """Resistance in series with the selected cell on the ideal-selector path."""
    return np.asarray(acc, dtype=float) + p.r_sf


def divider_voltage(acc, r_prev, v_w: float, p: DeviceParams):
    """Vectorized voltage across the cell for accumulated resistance ``acc``."""
    r_prev = np.asarray(r_prev, dtype=float)
    return v_w * r_prev / (r_prev + series_resistance(acc, p))


def effective_write_voltage_ideal(loc: CellLocation, r_prev: float, v_w: float,
                                  p: DeviceParams) -> float:
    """Voltage delivered to a cell of resistance ``r_prev`` when writing with ``v_w``."""
    if not r_prev > 0:
        raise ValueError("r_prev must be positive")
    return float(divider_voltage(accumulated_line_resistance(loc, p), r_prev, v_w, p))


def sensed_read_current_ideal(loc: CellLocation, r_cell: float, p: DeviceParams) -> float:
    if not r_cell > 0:
        raise ValueError("r_cell must be positive")
    return p.v_r / (accumulated_line_resistance(loc, p) + p.r_sf + r_cell)


# -- nodal analysis ------------------------------------------------------------


@dataclass(frozen=True)
class ResistanceGrid:
    """Memristor resistance at every crosspoint, shape ``(m, n)``."""

    geometry: ArrayGeometry
    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != self.geometry.shape:
            raise ValueError(f"grid shape {r.shape} does not match {self.geometry.shape}")
        if not (np.all(np.isfinite(r)) and np.all(r > 0)):
            raise ValueError("cell resistances must be positive and finite")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @classmethod
    def uniform(cls, geometry: ArrayGeometry, value: float) -> "ResistanceGrid":
        return cls(geometry, np.full(geometry.shape, float(value)))

    def with_cell(self, loc: CellLocation, value: float) -> "ResistanceGrid":
        r = self.r.copy()
        r[loc.i - 1, loc.j - 1] = value
        return ResistanceGrid(self.geometry, r)


@dataclass(frozen=True)
class BiasScheme:
    """Line biasing for one access.

    ``write``: selected wordline at ``voltage``, selected bitline at 0, every
    other line at ``voltage / 2``. Cells sharing a line with the selected
    cell are half-selected, the rest un-selected.

    ``read``: selected wordline at ``voltage``, every other line grounded.
    Only the selected cell is fully selected; all others are assigned the
    un-selected resistance.
    """

    kind: str
    cell: CellLocation
    voltage: float

    def __post_init__(self):
        if self.kind not in ("write", "read"):
            raise ValueError(f"unknown bias scheme {self.kind!r}")

    def line_voltages(self, geom: ArrayGeometry) -> tuple[np.ndarray, np.ndarray]:
        """Driver voltages of the ``m`` wordlines and terminal voltages of the ``n`` bitlines."""
        idle = self.voltage / 2 if self.kind == "write" else 0.0
        wl = np.full(geom.m, idle)
        bl = np.full(geom.n, idle)
        wl[self.cell.i - 1] = self.voltage
        bl[self.cell.j - 1] = 0.0
        return wl, bl

    def selector_classes(self, geom: ArrayGeometry) -> np.ndarray:
        cls = np.full(geom.shape, UNSELECTED, dtype=np.int8)
        i, j = self.cell.i - 1, self.cell.j - 1
        if self.kind == "write":
            cls[i, :] = HALF
            cls[:, j] = HALF
        cls[i, j] = FULL
        return cls


def _selector_resistances(classes: np.ndarray, p: DeviceParams) -> np.ndarray:
    return np.choose(classes, [p.r_sf, p.r_sh, p.r_su]).astype(float)


@dataclass(frozen=True)
class KclSolution:
    """Node voltages of a solved crossbar.

    ``v_wl[i-1, j-1]`` and ``v_bl[i-1, j-1]`` are the wordline- and
    bitline-side potentials at crosspoint ``(i, j)``.
    """

    grid: ResistanceGrid
    bias: BiasScheme
    v_wl: np.ndarray
    v_bl: np.ndarray
    branch_g: np.ndarray
    residual: float

    def branch_voltage(self, loc: CellLocation) -> float:
        return float(self.v_wl[loc.i - 1, loc.j - 1] - self.v_bl[loc.i - 1, loc.j - 1])

    def branch_current(self, loc: CellLocation) -> float:
        return self.branch_voltage(loc) * float(self.branch_g[loc.i - 1, loc.j - 1])

    def cell_voltage(self, loc: CellLocation) -> float:
        """Voltage across the memristor itself (selector drop excluded)."""
        return self.branch_current(loc) * float(self.grid.r[loc.i - 1, loc.j - 1])

    def sensed_current(self, p: DeviceParams) -> float:
        """Current delivered into the terminal of the selected bitline."""
        j = self.bias.cell.j - 1
        _, bl = self.bias.line_voltages(self.grid.geometry)
        gb = _line_conductance(p.r_b)
        if gb > 0:
            return float((self.v_bl[0, j] - bl[j]) * gb)
        col = (self.v_wl[:, j] - self.v_bl[:, j]) * self.branch_g[:, j]
        return float(col.sum())

    def currents(self) -> np.ndarray:
        return (self.v_wl - self.v_bl) * self.branch_g


def _line_conductance(r: float) -> float:
    """``1 / r``, or 0 when the segment is short enough to collapse onto its driver."""
    if r <= 0:
        return 0.0
    g = 1.0 / r
    return g if math.isfinite(g) else 0.0


def _laplacian(edges_a, edges_b, g, size):
    rows = np.concatenate([edges_a, edges_b, edges_a, edges_b])
    cols = np.concatenate([edges_a, edges_b, edges_b, edges_a])
    vals = np.concatenate([g, g, -g, -g])
    return sp.csr_matrix((vals, (rows, cols)), shape=(size, size))


def solve_kcl(grid: ResistanceGrid, bias: BiasScheme, p: DeviceParams,
              rtol: float = 1e-10) -> KclSolution:
    """Solve the crossbar's nodal equations under ``bias``.

    Every cell is a branch made of its selector (resistance chosen by the
    cell's selection class) in series with its memristor; open selectors
    drop the branch entirely. Lines with zero segment resistance collapse
    onto their driver potential.
    """
    geom = grid.geometry
    if not geom.contains(bias.cell):
        raise ValueError(f"{bias.cell} outside {geom}")
    m, n = geom.shape
    mn = m * n
    r_sel = _selector_resistances(bias.selector_classes(geom), p)
    open_branch = np.isinf(r_sel)
    if open_branch.all():
        raise SingularNetworkError("every branch is open")
    branch_g = np.where(open_branch, 0.0, 1.0 / np.where(open_branch, 1.0, r_sel + grid.r))
    wl_v, bl_v = bias.line_voltages(geom)

    # global node ids: W(i,j) -> i*n + j, B(i,j) -> mn + i*n + j,
    # wordline drivers -> 2mn + i, bitline terminals -> 2mn + m + j
    size = 2 * mn + m + n
    known = np.zeros(size, dtype=bool)
    value = np.zeros(size)
    known[2 * mn:] = True
    value[2 * mn:2 * mn + m] = wl_v
    value[2 * mn + m:] = bl_v
    W = np.arange(mn).reshape(m, n)
    B = mn + np.arange(mn).reshape(m, n)

    ea, eb, eg = [], [], []
    gw = _line_conductance(p.r_w)
    gb = _line_conductance(p.r_b)
    if gw > 0:
        ea += [2 * mn + np.arange(m), W[:, :-1].ravel()]
        eb += [W[:, 0], W[:, 1:].ravel()]
        eg += [np.full(m, gw), np.full(m * (n - 1), gw)]
    else:
        known[W.ravel()] = True
        value[W.ravel()] = np.repeat(wl_v, n)
    if gb > 0:
        ea += [2 * mn + m + np.arange(n), B[:-1, :].ravel()]
        eb += [B[0, :], B[1:, :].ravel()]
        eg += [np.full(n, gb), np.full((m - 1) * n, gb)]
    else:
        known[B.ravel()] = True
        value[B.ravel()] = np.tile(bl_v, m)
    live = ~open_branch.ravel()
    ea.append(W.ravel()[live])
    eb.append(B.ravel()[live])
    eg.append(branch_g.ravel()[live])

    L = _laplacian(np.concatenate(ea), np.concatenate(eb), np.concatenate(eg), size)
    unknown = np.flatnonzero(~known)
    v = value.copy()
    residual = 0.0
    if unknown.size:
        kn = np.flatnonzero(known)
        A = L[unknown][:, unknown].tocsr()
        rhs = -(L[unknown][:, kn] @ value[kn])
        asym = abs(A - A.T)
        if asym.nnz and asym.max() > 1e-12 * abs(A).max():
            raise AssertionError("conductance matrix is not symmetric")
        diag = A.diagonal()
        if np.any(diag <= 0):
            raise SingularNetworkError("floating node in network")
        if mn <= DIRECT_SOLVE_MAX_CELLS:
            x = spsolve(A.tocsc(), rhs)
        else:
            M = sp.diags(1.0 / diag)
            x, info = cg(A, rhs, rtol=rtol, atol=0.0, M=M, maxiter=20 * unknown.size)
            if info != 0:
                raise ConvergenceError(f"conjugate gradients did not converge (info={info})")
        scale = max(np.abs(rhs).max(), np.abs(diag * x).max(), 1e-300)
        residual = float(np.abs(A @ x - rhs).max() / scale)
        if residual > 1e-9:
            raise ConvergenceError(f"nodal residual {residual:.3e} exceeds 1e-9")
        v[unknown] = x
    return KclSolution(grid, bias, v[:mn].reshape(m, n), v[mn:2 * mn].reshape(m, n),
                       branch_g, residual)


def background_grid(geom: ArrayGeometry, p: DeviceParams, background) -> ResistanceGrid:
    if background is None:
        return ResistanceGrid.uniform(geom, math.exp(p.mu_l))
    if isinstance(background, ResistanceGrid):
        return background
    return ResistanceGrid.uniform(geom, float(background))


def effective_write_voltage(loc: CellLocation, r_prev: float, v_w: float, p: DeviceParams,
                            geom: ArrayGeometry | None = None, background=None) -> float:
    """Delivered write voltage, via nodal analysis when selectors leak.

    ``background`` fixes the resistance of the other cells (a scalar, a
    ``ResistanceGrid``, or ``None`` for the LRS median, the worst case for
    leakage).
    """
    if p.ideal_selectors or geom is None:
        return effective_write_voltage_ideal(loc, r_prev, v_w, p)
    grid = background_grid(geom, p, background).with_cell(loc, r_prev)
    sol = solve_kcl(grid, BiasScheme("write", loc, v_w), p)
    return sol.cell_voltage(loc)


def kcl_read_threshold(loc: CellLocation, geom: ArrayGeometry, p: DeviceParams,
                       i_th: float | None = None, background=None) -> float:
    """Cell resistance at which the sensed current equals ``i_th``.

    The sensed current decreases with the selected cell's resistance, so
    the detector outputs 1 exactly when the cell resistance is below the
    returned value. Returns 0 when no cell resistance can reach ``i_th``.
    """
    i_th = p.i_th if i_th is None else i_th
    grid0 = background_grid(geom, p, background)
    bias = BiasScheme("read", loc, p.v_r)

    def excess(log_r):
        sol = solve_kcl(grid0.with_cell(loc, math.exp(log_r)), bias, p)
        return sol.sensed_current(p) - i_th

    lo, hi = math.log(1e-6), math.log(p.v_r / i_th) + 1.0
    if excess(lo) <= 0:
        return 0.0
    while excess(hi) > 0:
        hi += 2.0
    return math.exp(brentq(excess, lo, hi, xtol=1e-13, rtol=1e-13))
