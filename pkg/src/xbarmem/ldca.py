"""Location-dependent code allocation.

Each wordline ``i`` gets one code ``l`` from a family sharing the block
length ``n``. The cost ``c_il`` is the block failure probability of code
``l`` on a binary symmetric channel whose crossover is the wordline's mean
cascaded BER. The allocation minimizes total cost subject to a mean code
rate of at least ``R_LP``; the relaxed problem is a multiple-choice
knapsack LP, solved exactly by walking the lower convex hull of every row.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .bch import CodeSpec, make_code
from .capacity import ChannelMap, channel_map
from .params import ArrayGeometry, DeviceParams
from .threshold import make_plan

DEFAULT_R_TOL = 1e-3
DEFAULT_MAX_ITER = 20


class InfeasibleRateError(ValueError):
    pass


# -- cost model --------------------------------------------------------------


def block_cost(n: int, t, p_bar):
    """``P(more than t errors in n)`` for crossover ``p_bar``; the binomial upper tail."""
    out = binom.sf(np.asarray(t), n, np.asarray(p_bar, dtype=float))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def wordline_mean_ps(cmap: ChannelMap) -> np.ndarray:
    """Per-row mean of ``q p5 + (1 - q) p6``."""
    return cmap.cascaded_ber.mean(axis=1)


def wordline_mean_p(i: int, geom: ArrayGeometry, p: DeviceParams, r_th) -> float:
    """Mean cascaded BER over wordline ``i`` (1-based)."""
    if not 1 <= i <= geom.m:
        raise IndexError(f"wordline {i} outside [1, {geom.m}]")
    cm = channel_map(geom, p, r_th)
    return float(cm.cascaded_ber[i - 1].mean())


@dataclass(frozen=True)
class CostMatrix:
    """``c`` is ``(m, L)``; ``rates`` and ``t`` have length ``L``."""

    c: np.ndarray
    rates: np.ndarray
    t: np.ndarray
    n: int
    r_goal: float | None = None
    codes: tuple = field(default=(), repr=False)
    p_bar: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 2 or c.shape[1] != len(self.rates):
            raise ValueError(f"cost shape {c.shape} does not match {len(self.rates)} codes")
        if np.any((c < 0) | (c > 1)):
            raise ValueError("costs must lie in [0, 1]")

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def num_codes(self) -> int:
        return self.c.shape[1]

    def with_offsets(self, c_dec) -> "CostMatrix":
        """Costs plus a per-code additive weight (the column-separable regularizer).

        The result may leave ``[0, 1]``, so it skips validation.
        """
        c_dec = np.asarray(c_dec, dtype=float)
        if c_dec.shape != (self.num_codes,):
            raise ValueError(f"c_dec must have length {self.num_codes}")
        if np.any(c_dec < 0):
            raise ValueError("c_dec must be nonnegative")
        out = object.__new__(CostMatrix)
        for k, v in self.__dict__.items():
            object.__setattr__(out, k, v)
        object.__setattr__(out, "c", np.asarray(self.c, dtype=float) + c_dec[None, :])
        return out


def code_family(n: int, ts) -> tuple[CodeSpec, ...]:
    return tuple(make_code(n, int(t)) for t in sorted(ts))


def cost_from_pbar(p_bar, codes, r_goal: float | None = None) -> CostMatrix:
    codes = tuple(codes)
    n = codes[0].n
    if any(c.n != n for c in codes):
        raise ValueError("all codes must share the block length")
    p_bar = np.asarray(p_bar, dtype=float)
    t = np.array([c.t for c in codes])
    c = block_cost(n, t[None, :], p_bar[:, None])
    rates = np.array([c_.rate for c_ in codes])
    return CostMatrix(np.atleast_2d(c), rates, t, n, r_goal, codes, p_bar)


def build_cost_matrix(geom: ArrayGeometry, p: DeviceParams, codes, r_goal: float | None = None,
                      plan=None) -> CostMatrix:
    """Cost matrix from the analytic channel map; the default threshold is exact STMC."""
    codes = tuple(codes)
    if codes[0].n != geom.n:
        raise ValueError(f"block length {codes[0].n} differs from the {geom.n} bitlines")
    if plan is None:
        plan = make_plan("stmc-exact", geom, p)
    cm = channel_map(geom, p, plan)
    return cost_from_pbar(wordline_mean_ps(cm), codes, r_goal)


# -- allocations -----------------------------------------------------------------


@dataclass(frozen=True)
class AllocationMatrix:
    """``a`` is ``(L, m)``; column ``i`` is the selection for wordline ``i``."""

    a: np.ndarray
    integral: bool

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if np.any(a < -1e-12) or not np.allclose(a.sum(axis=0), 1.0, atol=1e-9):
            raise ValueError("allocation columns must be nonnegative and sum to 1")
        if self.integral and not np.all((a == 0) | (a == 1)):
            raise ValueError("integral allocation must have one-hot columns")

    @property
    def choice(self) -> np.ndarray:
        """Index of the selected code per wordline (integral allocations)."""
        return np.argmax(self.a, axis=0)

    def rate(self, rates) -> float:
        return float(np.mean(np.asarray(rates) @ self.a))

    def objective(self, cost: CostMatrix) -> float:
        return float(np.sum(cost.c * self.a.T))

    @classmethod
    def from_choice(cls, choice, num_codes: int) -> "AllocationMatrix":
        choice = np.asarray(choice)
        a = np.zeros((num_codes, choice.size))
        a[choice, np.arange(choice.size)] = 1.0
        return cls(a, True)


@dataclass(frozen=True)
class LpSolution:
    allocation: AllocationMatrix
    value: float
    lam: float
    r_lp: float

    def reduced_costs(self, cost: CostMatrix) -> np.ndarray:
        """``c_il - (lam / m) r_l`` minus the row minimum; zero on the optimal support."""
        red = cost.c - (self.lam / cost.m) * cost.rates[None, :]
        return red - red.min(axis=1, keepdims=True)

    def slackness(self, cost: CostMatrix) -> tuple[float, float]:
        """``(lam * (rate - r_lp), max support reduced cost)``; both vanish at an optimum."""
        gap = self.lam * (self.allocation.rate(cost.rates) - self.r_lp)
        support = float(np.max(self.allocation.a.T * self.reduced_costs(cost)))
        return float(gap), support


def _row_hull(c_row, rates):
    """Lower-convex frontier of ``(rate, cost)`` starting at the cheapest code.

    Returns the list of visited code indices; successive slopes are
    nondecreasing. Among equal costs the higher rate is preferred.
    """
    order = np.lexsort((-rates, c_row))
    cur = int(order[0])
    path = [cur]
    while True:
        higher = np.flatnonzero(rates > rates[cur])
        if higher.size == 0:
            return path
        slopes = (c_row[higher] - c_row[cur]) / (rates[higher] - rates[cur])
        best = slopes.min()
        cands = higher[slopes <= best]
        cur = int(cands[np.argmax(rates[cands])])
        path.append(cur)


def solve_lp(cost: CostMatrix, r_lp: float) -> LpSolution:
    """Exact minimizer of ``sum c_il a_li`` over relaxed allocations with mean rate >= ``r_lp``.

    Rows start at their cheapest code; hull segments are then bought in order
    of increasing cost per unit rate until the rate target is met, the last
    one possibly fractionally. ``lam`` is the multiplier of the rate
    constraint written as ``(1/m) sum r^T a_i >= r_lp``.
    """
    c = np.asarray(cost.c, dtype=float)
    rates = np.asarray(cost.rates, dtype=float)
    m, L = c.shape
    tol = 1e-12
    if r_lp > rates.max() + tol:
        raise InfeasibleRateError(f"rate {r_lp:.6g} exceeds the highest code rate {rates.max():.6g}")
    a = np.zeros((L, m))
    segments = []  # (slope, row, from, to)
    for i in range(m):
        path = _row_hull(c[i], rates)
        a[path[0], i] = 1.0
        for u, v in zip(path[:-1], path[1:]):
            segments.append(((c[i, v] - c[i, u]) / (rates[v] - rates[u]), i, u, v))
    need = r_lp * m - float(np.sum(rates @ a))
    lam = 0.0
    if need > tol * m:
        # stable sort keeps row order among equal slopes for determinism
        segments.sort(key=lambda s: s[0])
        for slope, i, u, v in segments:
            gain = rates[v] - rates[u]
            lam = slope * m
            if gain >= need - tol * m:
                frac = min(1.0, need / gain)
                a[u, i] -= frac
                a[v, i] += frac
                need = 0.0
                break
            a[u, i] = 0.0
            a[v, i] = 1.0
            need -= gain
        lam = max(lam, 0.0)
    alloc = AllocationMatrix(np.clip(a, 0.0, 1.0), False)
    return LpSolution(alloc, alloc.objective(cost), lam, float(r_lp))


def round_allocation(relaxed: AllocationMatrix, t=None) -> AllocationMatrix:
    """Per-column argmax; ties go to the code with the larger ``t`` (higher index if ``t`` is None)."""
    a = np.asarray(relaxed.a, dtype=float)
    L, m = a.shape
    key = np.arange(L) if t is None else np.asarray(t)
    choice = np.empty(m, dtype=np.int64)
    for i in range(m):
        col = a[:, i]
        tied = np.flatnonzero(col >= col.max() - 1e-12)
        choice[i] = tied[np.argmax(key[tied])]
    return AllocationMatrix.from_choice(choice, L)


@dataclass(frozen=True)
class LdcaResult:
    allocation: AllocationMatrix
    relaxed: AllocationMatrix
    rate: float
    r_lp: float
    lam: float
    iterations: int
    converged: bool
    objective: float

    @property
    def choice(self) -> np.ndarray:
        return self.allocation.choice


def ldca_solve(cost: CostMatrix, r_goal: float | None = None, r_tol: float = DEFAULT_R_TOL,
               r_update: float | None = None, max_iter: int = DEFAULT_MAX_ITER,
               objective_cost: CostMatrix | None = None) -> LdcaResult:
    """LP-and-round loop: solve at ``R_LP``, round, and step ``R_LP`` toward ``r_goal``.

    When ``max_iter`` runs out the allocation whose rate came closest to
    ``r_goal`` is returned with ``converged=False``.
    """
    r_goal = cost.r_goal if r_goal is None else float(r_goal)
    if r_goal is None:
        raise ValueError("a target rate is required")
    rates = np.asarray(cost.rates, dtype=float)
    if not rates.min() - 1e-12 <= r_goal <= rates.max() + 1e-12:
        raise InfeasibleRateError(
            f"target rate {r_goal:.6g} outside [{rates.min():.6g}, {rates.max():.6g}]")
    if r_update is None:
        r_update = (rates.max() - rates.min()) / (2 * len(rates))
    obj_cost = cost if objective_cost is None else objective_cost
    r_lp = r_goal
    best = None
    for it in range(1, max_iter + 1):
        lp = solve_lp(cost, r_lp)
        hard = round_allocation(lp.allocation, cost.t)
        r_hat = hard.rate(rates)
        res = LdcaResult(hard, lp.allocation, r_hat, r_lp, lp.lam, it,
                         abs(r_hat - r_goal) <= r_tol, hard.objective(obj_cost))
        if res.converged:
            return res
        if best is None or abs(r_hat - r_goal) < abs(best.rate - r_goal):
            best = res
        if r_hat > r_goal + r_tol:
            r_lp -= r_update
        else:
            r_lp += r_update
        r_lp = float(np.clip(r_lp, rates.min(), rates.max()))
    return LdcaResult(best.allocation, best.relaxed, best.rate, best.r_lp, best.lam,
                      max_iter, False, best.objective)


def ldca_solve_regularized(cost: CostMatrix, r_goal: float | None = None, c_dec=None,
                           **kwargs) -> LdcaResult:
    """:func:`ldca_solve` on ``c_il + c_dec[l]``; the reported objective uses the raw costs."""
    if c_dec is None:
        c_dec = np.zeros(cost.num_codes)
    return ldca_solve(cost.with_offsets(c_dec), r_goal, objective_cost=cost, **kwargs)


# -- exports ------------------------------------------------------------------------


def allocation_csv(alloc: AllocationMatrix, codes, header: str = "") -> str:
    buf = io.StringIO()
    if header:
        buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["wordline", "code_index", "n", "k", "t"])
    for i, l in enumerate(alloc.choice, start=1):
        c = codes[l]
        w.writerow([i, int(l), c.n, c.k, c.t])
    return buf.getvalue()


def weights_csv(alloc: AllocationMatrix, codes, header: str = "") -> str:
    """Rows of the allocation matrix: one line per wordline with the weight of each code."""
    buf = io.StringIO()
    if header:
        buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["wordline"] + [c.label() for c in codes])
    for i, col in enumerate(np.asarray(alloc.a).T, start=1):
        w.writerow([i] + [repr(float(x)) for x in col])
    return buf.getvalue()


def cost_csv(cost: CostMatrix, header: str = "") -> str:
    buf = io.StringIO()
    if header:
        buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    labels = [c.label() for c in cost.codes] if cost.codes else [f"t={t}" for t in cost.t]
    w.writerow(["wordline", "p_bar"] + labels)
    pb = cost.p_bar if cost.p_bar is not None else np.full(cost.m, np.nan)
    for i in range(cost.m):
        w.writerow([i + 1, repr(float(pb[i]))] + [repr(float(x)) for x in cost.c[i]])
    return buf.getvalue()
