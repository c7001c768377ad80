"""Codeword placement on the array: one per wordline, or along wrapped sub-diagonals.

In the diagonal layout codeword ``d`` (0-based) puts bit ``j`` (1-based) in
column ``j`` of row ``((j - 1 + d) mod m) + 1``, so every codeword touches
each bitline once and, on a square array, each wordline once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ArrayGeometry, CellLocation

SCHEMES = ("wordline", "diagonal")


def _check(d: int, j: int, geom: ArrayGeometry) -> None:
    if not 0 <= d < geom.m:
        raise IndexError(f"codeword index {d} outside [0, {geom.m})")
    if not 1 <= j <= geom.n:
        raise IndexError(f"bit index {j} outside [1, {geom.n}]")


def diagonal_place(d: int, j: int, geom: ArrayGeometry) -> CellLocation:
    _check(d, j, geom)
    return CellLocation((j - 1 + d) % geom.m + 1, j)


def wordline_place(d: int, j: int, geom: ArrayGeometry) -> CellLocation:
    _check(d, j, geom)
    return CellLocation(d + 1, j)


@dataclass(frozen=True)
class Placement:
    """Bijection between (codeword, bit) pairs and cells.

    ``rows[d, j - 1]`` is the 0-based row holding bit ``j`` of codeword
    ``d``; the column is always ``j - 1``.
    """

    scheme: str
    geometry: ArrayGeometry
    rows: np.ndarray

    @property
    def codeword_length(self) -> int:
        return self.geometry.n

    @property
    def codewords(self) -> int:
        return self.geometry.m

    def locate(self, d: int, j: int) -> CellLocation:
        _check(d, j, self.geometry)
        return CellLocation(int(self.rows[d, j - 1]) + 1, j)

    def inverse(self, loc: CellLocation) -> tuple[int, int]:
        """``(d, j)`` stored at a cell."""
        if not self.geometry.contains(loc):
            raise IndexError(f"{loc} outside {self.geometry.shape}")
        d = int(self._owner[loc.i - 1, loc.j - 1])
        return d, loc.j

    @property
    def _owner(self) -> np.ndarray:
        m, n = self.geometry.shape
        owner = np.empty((m, n), dtype=np.int64)
        owner[self.rows, np.arange(n)[None, :]] = np.arange(m)[:, None]
        return owner

    def gather(self, cell_values) -> np.ndarray:
        """Rearrange an ``(m, n)`` cell array into ``(codewords, n)`` bit order."""
        a = np.asarray(cell_values)
        if a.shape[:2] != self.geometry.shape:
            raise ValueError(f"array shape {a.shape} does not match {self.geometry.shape}")
        return a[self.rows, np.arange(self.geometry.n)[None, :]]

    def scatter(self, codeword_values) -> np.ndarray:
        """Inverse of :meth:`gather`."""
        a = np.asarray(codeword_values)
        out = np.empty_like(a)
        out[self.rows, np.arange(self.geometry.n)[None, :]] = a
        return out


def make_placement(scheme: str, geom: ArrayGeometry) -> Placement:
    d = np.arange(geom.m)[:, None]
    j = np.arange(geom.n)[None, :]
    if scheme == "wordline":
        rows = np.broadcast_to(d, geom.shape).copy()
    elif scheme == "diagonal":
        rows = (j + d) % geom.m
    else:
        raise ValueError(f"unknown placement {scheme!r}; expected one of {SCHEMES}")
    rows.setflags(write=False)
    return Placement(scheme, geom, rows)


def placement_stats(placement: Placement, error_map) -> np.ndarray:
    """Mean cell error probability seen by each codeword."""
    return placement.gather(error_map).mean(axis=1)
