"""Seeded Monte Carlo of the write/read channel and heatmap export.

Each cell ``(i, j)`` draws from its own Philox stream keyed by
``(seed, i, j)``, so results do not depend on which cells are simulated or
in what order. A trial follows one bit through the device:

previous state -> previous resistance -> target bit -> switching draw
-> written state -> fresh stored resistance -> sensed current -> detected bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .capacity import channel_map
from .circuit import accumulated_line_resistance, series_resistance
from .params import ArrayGeometry, CellLocation, DeviceParams
from .threshold import resolve_thresholds
from .write_channel import write_thevenin

CHUNK = 1 << 18
MODES = ("analytic", "sampled")


def cell_rng(seed: int, i: int, j: int) -> np.random.Generator:
    """Independent counter-based stream for cell ``(i, j)`` (1-based)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(i), int(j)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class CellCounts:
    """Joint counts from ``trials`` passes through one cell.

    ``n_x0`` trials wrote a 0; ``e_x0y1`` of those stored a 1, and so on for
    the other stage pairs.
    """

    trials: int
    n_x0: int
    e_x0y1: int
    e_x1y0: int
    n_y0: int
    e_y0z1: int
    e_y1z0: int
    e_x0z1: int
    e_x1z0: int

    @property
    def n_x1(self) -> int:
        return self.trials - self.n_x0

    @property
    def n_y1(self) -> int:
        return self.trials - self.n_y0

    @property
    def write_errors(self) -> int:
        return self.e_x0y1 + self.e_x1y0

    @property
    def read_errors(self) -> int:
        return self.e_y0z1 + self.e_y1z0

    @property
    def cascaded_errors(self) -> int:
        return self.e_x0z1 + self.e_x1z0

    def __add__(self, other: "CellCounts") -> "CellCounts":
        return CellCounts(*(a + b for a, b in zip(self._fields(), other._fields())))

    def _fields(self):
        return (self.trials, self.n_x0, self.e_x0y1, self.e_x1y0, self.n_y0,
                self.e_y0z1, self.e_y1z0, self.e_x0z1, self.e_x1z0)

    def estimates(self) -> dict[str, tuple[float, float]]:
        """Crossover estimates with standard errors, keyed ``p1``..``p6``."""
        pairs = {
            "p1": (self.e_x0y1, self.n_x0),
            "p2": (self.e_x1y0, self.n_x1),
            "p3": (self.e_y0z1, self.n_y0),
            "p4": (self.e_y1z0, self.n_y1),
            "p5": (self.e_x0z1, self.n_x0),
            "p6": (self.e_x1z0, self.n_x1),
        }
        out = {}
        for k, (e, n) in pairs.items():
            ph = e / n if n else math.nan
            out[k] = (ph, math.sqrt(ph * (1 - ph) / n) if n else math.nan)
        return out


def _write_paths(loc, p, geom):
    """``(v_oc, r_src)`` for set and reset at ``loc``."""
    if p.ideal_selectors or geom is None:
        rs = float(series_resistance(accumulated_line_resistance(loc, p), p))
        return (p.v_w_set, rs), (p.v_w_reset, rs)
    return write_thevenin(loc, "set", p, geom), write_thevenin(loc, "reset", p, geom)


def _chunk(rng, size, q, p, set_path, reset_path, series, r_th):
    s_prev = rng.random(size) >= q          # True: previous state 1 (LRS)
    x = rng.random(size) >= q               # True: target bit 1
    z_prev = rng.standard_normal(size)
    mu_prev = np.where(s_prev, p.mu_l, p.mu_h)
    sig_prev = np.where(s_prev, p.sigma_l, p.sigma_h)
    r_prev = np.exp(mu_prev + sig_prev * z_prev)

    # set when writing 1 over 0, reset when writing 0 over 1
    do_set = x & ~s_prev
    v_oc = np.where(do_set, set_path[0], reset_path[0])
    r_src = np.where(do_set, set_path[1], reset_path[1])
    v_cell = v_oc * r_prev / (r_prev + r_src)
    alpha = np.where(do_set, p.alpha_set, p.alpha_reset)
    beta = np.where(do_set, p.beta_set, p.beta_reset)
    sig_t = np.where(do_set, p.sigma_set, p.sigma_reset)
    t_pulse = np.where(do_set, p.t_set, p.t_reset)
    ln_tau = alpha * v_cell + beta + sig_t * rng.standard_normal(size)
    switched = ln_tau <= np.log(t_pulse)
    y = np.where(x != s_prev, np.where(switched, x, s_prev), x)

    z_store = rng.standard_normal(size)
    r_cell = np.exp(np.where(y, p.mu_l + p.sigma_l * z_store, p.mu_h + p.sigma_h * z_store))
    current = p.v_r / (series + r_cell)
    z = current > p.v_r / r_th              # current at or below I_th reads as 0

    x0 = ~x
    y0 = ~y
    return np.array([
        size, x0.sum(), (x0 & y).sum(), (x & y0).sum(), y0.sum(),
        (y0 & z).sum(), (y & ~z).sum(), (x0 & z).sum(), (x & ~z).sum(),
    ], dtype=np.int64)


def simulate_cell_trials(loc: CellLocation, p: DeviceParams, plan, trials: int, seed: int,
                         q: float | None = None, geom: ArrayGeometry | None = None,
                         chunk: int = CHUNK) -> CellCounts:
    """Run ``trials`` independent write-then-read passes through one cell.

    ``plan`` is anything accepted as a threshold (plan, scalar, matrix);
    ``geom`` is required for matrix or per-bitline plans and for finite
    selectors.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    q = p.q_prior if q is None else float(q)
    if geom is None:
        geom = getattr(plan, "geometry", None)
    th = resolve_thresholds(p.r_th if plan is None else plan, geom) if geom is not None \
        else float(plan if plan is not None else p.r_th)
    r_th = float(th) if np.ndim(th) == 0 else float(np.asarray(th)[loc.i - 1, loc.j - 1])
    set_path, reset_path = _write_paths(loc, p, geom)
    series = float(series_resistance(accumulated_line_resistance(loc, p), p))
    rng = cell_rng(seed, loc.i, loc.j)
    tot = np.zeros(9, dtype=np.int64)
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        tot += _chunk(rng, size, q, p, set_path, reset_path, series, r_th)
        done += size
    return CellCounts(*(int(v) for v in tot))


# -- maps ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    geometry: ArrayGeometry
    params: DeviceParams
    plan: object = None
    trials: int = 1
    seed: int = 0
    mode: str = "analytic"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class ErrorMap:
    """Per-cell write, read and cascaded BER with standard errors (zero in analytic mode)."""

    geometry: ArrayGeometry
    write: np.ndarray
    read: np.ndarray
    cascaded: np.ndarray
    write_se: np.ndarray
    read_se: np.ndarray
    cascaded_se: np.ndarray
    trials: int = 0
    seed: int = 0
    mode: str = "analytic"
    extra: dict = field(default_factory=dict, repr=False)

    def quantity(self, name: str) -> np.ndarray:
        key = name.removesuffix("_ber")
        if key in ("write", "read", "cascaded"):
            return getattr(self, key)
        if key in self.extra:
            return self.extra[key]
        raise KeyError(name)

    def ratio(self, name: str = "cascaded") -> float:
        """Worst-to-best ratio of a quantity."""
        a = self.quantity(name)
        lo = float(a.min())
        return math.inf if lo == 0 else float(a.max()) / lo


def _se(ph, n):
    return np.sqrt(ph * (1 - ph) / n)


def build_error_map(config: SimConfig) -> ErrorMap:
    g, p = config.geometry, config.params
    plan = config.plan if config.plan is not None else p.r_th
    if config.mode == "analytic":
        cm = channel_map(g, p, plan)
        z = np.zeros(g.shape)
        extra = {k: getattr(cm, k) for k in ("p1", "p2", "p3", "p4", "p5", "p6")}
        return ErrorMap(g, cm.write_ber, cm.read_ber, cm.cascaded_ber, z, z.copy(), z.copy(),
                        0, config.seed, "analytic", extra)
    w, r, c = (np.zeros(g.shape) for _ in range(3))
    extra = {k: np.zeros(g.shape) for k in ("p1", "p2", "p3", "p4", "p5", "p6")}
    for loc in g.cells():
        cc = simulate_cell_trials(loc, p, plan, config.trials, config.seed, geom=g)
        ij = (loc.i - 1, loc.j - 1)
        w[ij] = cc.write_errors / cc.trials
        r[ij] = cc.read_errors / cc.trials
        c[ij] = cc.cascaded_errors / cc.trials
        for k, (ph, _) in cc.estimates().items():
            extra[k][ij] = ph
    n = config.trials
    return ErrorMap(g, w, r, c, _se(w, n), _se(r, n), _se(c, n), n, config.seed, "sampled", extra)


# -- export -------------------------------------------------------------------------


def heatmap_csv(a: np.ndarray, quantity: str, seed: int, spec_hash: str | None = None) -> str:
    """CSV text: ``#rows,cols,quantity,seed`` line, optional hash comment, then one row per wordline."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    lines = [f"#{a.shape[0]},{a.shape[1]},{quantity},{seed}"]
    if spec_hash:
        lines.append(f"# spec_sha256={spec_hash}")
    lines.extend(",".join(repr(float(v)) for v in row) for row in a)
    return "\n".join(lines) + "\n"


def log_gray(a: np.ndarray) -> np.ndarray:
    """8-bit gray levels: ``255 * (log10 x - lo) / (hi - lo)`` over the positive range.

    Zeros map to black; a constant map is mid-gray (128).
    """
    a = np.asarray(a, dtype=float)
    pos = a[a > 0]
    if pos.size == 0:
        return np.zeros(a.shape, dtype=np.uint8)
    lo, hi = math.log10(pos.min()), math.log10(pos.max())
    if hi == lo:
        return np.where(a > 0, 128, 0).astype(np.uint8)
    with np.errstate(divide="ignore"):
        la = np.where(a > 0, np.log10(np.where(a > 0, a, 1.0)), lo)
    g = np.rint(255.0 * (la - lo) / (hi - lo))
    return np.clip(g, 0, 255).astype(np.uint8)


def pgm_bytes(a: np.ndarray) -> bytes:
    g = log_gray(a)
    h, w = g.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + g.tobytes()


def export_heatmap(emap: ErrorMap, path, quantity: str = "cascaded", pgm_path=None,
                   spec_hash: str | None = None) -> Path:
    """Write the CSV matrix (and optionally a log-scaled PGM image)."""
    path = Path(path)
    a = emap.quantity(quantity)
    path.write_text(heatmap_csv(a, quantity, emap.seed, spec_hash))
    if pgm_path is not None:
        Path(pgm_path).write_bytes(pgm_bytes(a))
    return path


def read_heatmap_csv(path) -> tuple[dict, np.ndarray]:
    text = Path(path).read_text().splitlines()
    rows, cols, quantity, seed = text[0].lstrip("#").split(",")
    a = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return {"rows": int(rows), "cols": int(cols), "quantity": quantity, "seed": int(seed)}, a
