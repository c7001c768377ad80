"""Domain types and parameter ingestion.

The configuration document is YAML (JSON is accepted as a subset). Keys are
the ``DeviceParams`` field names; they may be grouped into nested sections
of any depth, which are flattened on load. Numeric values may be plain
numbers or short arithmetic expressions such as ``"4*ln(10)"``. A selector
resistance of ``open`` (or ``inf``) marks a branch that carries no current.

Units follow the usual device tables: volts, ohms, microseconds for the
switching times and amperes for the read threshold current.
"""
from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Iterator, Mapping

import yaml

OPEN = math.inf
"""Selector resistance of a branch that is treated as an open circuit."""

OPEN_TOKENS = ("open", "inf", "infinity")


class ParameterError(ValueError):
    """Raised when a configuration document is missing keys or is invalid."""


@dataclass(frozen=True)
class DeviceParams:
    """Device, bias and variability parameters of a 1S1R crossbar.

    ``q_prior`` is the probability of symbol 0 (HRS). The same value is used
    as the prior of the previously stored state and of the data being
    written, i.e. the stored data are assumed stationary.

    ``mu_*``/``sigma_*`` are the location/scale of ``ln R`` for the two
    resistance states. The switching-time medians follow
    ``ln tau = alpha * V + beta`` with ``tau`` in microseconds and ``V`` the
    signed voltage delivered to the cell.
    """

    v_w_set: float
    v_w_reset: float
    v_r: float
    q_prior: float
    r_w: float
    r_b: float
    r_sf: float
    r_sh: float
    r_su: float
    mu_l: float
    mu_h: float
    sigma_l: float
    sigma_h: float
    alpha_set: float
    beta_set: float
    alpha_reset: float
    beta_reset: float
    sigma_set: float
    sigma_reset: float
    t_set: float
    t_reset: float
    i_th: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ParameterError(f"{f.name} must be a number, got {v!r}")
            if math.isnan(v):
                raise ParameterError(f"{f.name} is NaN")
            object.__setattr__(self, f.name, float(v))
        if not 0.0 < self.q_prior < 1.0:
            raise ParameterError("q_prior must lie strictly between 0 and 1")
        if self.r_w < 0 or self.r_b < 0:
            raise ParameterError("line resistances must be nonnegative")
        for name in ("sigma_l", "sigma_h", "sigma_set", "sigma_reset",
                     "t_set", "t_reset", "i_th"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")
        if not self.mu_l < self.mu_h:
            raise ParameterError("mu_l must be smaller than mu_h")
        if self.r_sf < 0:
            raise ParameterError("r_sf must be nonnegative")
        if not self.r_sf <= self.r_sh <= self.r_su:
            raise ParameterError("selector resistances must satisfy r_sf <= r_sh <= r_su")
        for name in ("v_w_set", "v_w_reset", "v_r", "r_w", "r_b", "mu_l", "mu_h",
                     "alpha_set", "beta_set", "alpha_reset", "beta_reset", "r_sf"):
            if math.isinf(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def r_th(self) -> float:
        """Resistance-domain read threshold ``V_r / I_th``."""
        return self.v_r / self.i_th

    @property
    def ideal_selectors(self) -> bool:
        """Half- and un-selected branches are open."""
        return math.isinf(self.r_sh) and math.isinf(self.r_su)

    def with_lines(self, r: float | None = None, *, r_w: float | None = None,
                   r_b: float | None = None) -> "DeviceParams":
        """Copy with new line resistances; ``r`` sets both lines."""
        if r is not None:
            r_w = r_b = r
        return replace(self, r_w=self.r_w if r_w is None else r_w,
                       r_b=self.r_b if r_b is None else r_b)

    def replace(self, **changes) -> "DeviceParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for k, v in asdict(self).items():
            out[k] = "open" if math.isinf(v) else v
        return out

    @classmethod
    def table1(cls, r_line: float = 10.0) -> "DeviceParams":
        """The reference parameter set with both line resistances ``r_line``."""
        return load_params(_default_document()).with_lines(r_line)


@dataclass(frozen=True)
class ArrayGeometry:
    """``m`` wordlines (rows) by ``n`` bitlines (columns).

    Cell ``(1, 1)`` is next to the drivers and the sense amplifiers and
    cell ``(m, n)`` is the farthest one.
    """

    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 1 or self.n < 1:
            raise ValueError(f"invalid array size {self.m}x{self.n}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def size(self) -> int:
        return self.m * self.n

    def contains(self, loc: "CellLocation") -> bool:
        return 1 <= loc.i <= self.m and 1 <= loc.j <= self.n

    def cells(self) -> Iterator["CellLocation"]:
        for i in range(1, self.m + 1):
            for j in range(1, self.n + 1):
                yield CellLocation(i, j)

    @property
    def best(self) -> "CellLocation":
        return CellLocation(1, 1)

    @property
    def worst(self) -> "CellLocation":
        return CellLocation(self.m, self.n)


@dataclass(frozen=True)
class CellLocation:
    """1-indexed crosspoint address: wordline ``i``, bitline ``j``."""

    i: int
    j: int

    def __post_init__(self):
        if self.i < 1 or self.j < 1:
            raise ValueError(f"cell indices are 1-based, got ({self.i}, {self.j})")


@dataclass(frozen=True)
class BacParams:
    """Binary asymmetric channel: ``p_01 = P(out=1 | in=0)``, ``p_10 = P(out=0 | in=1)``."""

    p_01: float
    p_10: float

    def __post_init__(self):
        for name in ("p_01", "p_10"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
            object.__setattr__(self, name, v)

    def error_rate(self, q0: float) -> float:
        """``P(out != in)`` when the input is 0 with probability ``q0``."""
        return q0 * self.p_01 + (1.0 - q0) * self.p_10


# -- configuration documents ---------------------------------------------------

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_FUNCS = {"ln": math.log, "log": math.log, "log10": math.log10,
          "exp": math.exp, "sqrt": math.sqrt}
_CONSTS = {"e": math.e, "pi": math.pi}


def _eval_expr(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCS and len(node.args) == 1:
            return _FUNCS[node.func.id](ev(node.args[0]))
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        raise ParameterError(f"unsupported expression {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParameterError(f"cannot parse value {text!r}") from exc
    return ev(tree)


def _to_number(key: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ParameterError(f"{key}: boolean is not a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        if value.strip().lower() in OPEN_TOKENS:
            return OPEN
        return _eval_expr(value)
    raise ParameterError(f"{key}: cannot interpret {value!r} as a number")


def _flatten(doc: Mapping[str, Any], out: dict[str, Any] | None = None) -> dict[str, Any]:
    out = {} if out is None else out
    for k, v in doc.items():
        if isinstance(v, Mapping):
            _flatten(v, out)
        else:
            if k in out:
                raise ParameterError(f"duplicate key {k!r}")
            out[k] = v
    return out


def load_params(config_document: str | Mapping[str, Any] | Path) -> DeviceParams:
    """Parse and validate a parameter document.

    ``config_document`` may be YAML/JSON text, an already-parsed mapping or a
    path to a file.
    """
    if isinstance(config_document, Path):
        config_document = config_document.read_text()
    if isinstance(config_document, str):
        try:
            doc = yaml.safe_load(config_document)
        except yaml.YAMLError as exc:
            raise ParameterError(f"malformed parameter document: {exc}") from exc
    else:
        doc = config_document
    if not isinstance(doc, Mapping):
        raise ParameterError("parameter document must be a mapping")
    flat = _flatten(doc)
    names = [f.name for f in fields(DeviceParams)]
    missing = [k for k in names if k not in flat]
    if missing:
        raise ParameterError(f"missing keys: {', '.join(missing)}")
    unknown = sorted(set(flat) - set(names))
    if unknown:
        raise ParameterError(f"unknown keys: {', '.join(unknown)}")
    return DeviceParams(**{k: _to_number(k, flat[k]) for k in names})


def dump_params(p: DeviceParams) -> str:
    """Serialize to a flat JSON document that ``load_params`` reads back exactly."""
    return json.dumps(p.to_dict(), indent=2)


def load_params_file(path: str | Path) -> DeviceParams:
    return load_params(Path(path))


def _default_document() -> str:
    return resources.files("xbarmem").joinpath("data/table1.yaml").read_text()
