import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xbarmem.capacity import (
    averaged_capacity,
    cascade,
    cascade_arrays,
    cell_capacity,
    channel_map,
    maximize_mi,
    mutual_information,
)
from xbarmem.numerics import binary_entropy
from xbarmem.params import ArrayGeometry, BacParams, CellLocation, DeviceParams
from xbarmem.read_channel import read_channel
from xbarmem.write_channel import write_channel


def test_cascade_identities():
    rd = BacParams(0.05, 0.15)
    wr = BacParams(0.1, 0.2)
    assert cascade(BacParams(0, 0), rd) == rd
    assert cascade(wr, BacParams(0, 0)) == wr
    c = cascade(wr, rd)
    assert c.p_01 == pytest.approx(0.13) and c.p_10 == pytest.approx(0.31)


def test_mutual_information_values():
    assert mutual_information(0.5, BacParams(0, 0)) == pytest.approx(1.0)
    for q in (0.1, 0.5, 0.9):
        assert mutual_information(q, BacParams(0.5, 0.5)) == pytest.approx(0.0, abs=1e-15)
    assert mutual_information(0.5, BacParams(0.11, 0.11)) == pytest.approx(1 - binary_entropy(0.11))
    assert mutual_information(0.5, BacParams(0.11, 0.11)) == pytest.approx(0.5, abs=1e-3)


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_mi_concave_in_q(a, b, q1, q2):
    bac = BacParams(a, b)
    mid = mutual_information((q1 + q2) / 2, bac)
    assert mid >= (mutual_information(q1, bac) + mutual_information(q2, bac)) / 2 - 1e-12


def test_bsc_capacity():
    cap, q = maximize_mi(np.array([0.0]), np.array([0.0]), np.array([0.07]), np.array([0.07]))
    assert cap[0] == pytest.approx(1 - binary_entropy(0.07), abs=1e-12)
    assert q[0] == pytest.approx(0.5, abs=1e-5)


def test_noiseless_limit():
    p = DeviceParams.table1(0.0).replace(sigma_set=1e-3, sigma_reset=1e-3, sigma_l=1e-3, sigma_h=1e-3)
    res = cell_capacity(CellLocation(1, 1), p)
    assert res.capacity == pytest.approx(1.0, abs=1e-9)
    assert res.q == pytest.approx(0.5, abs=1e-4)


def test_cell_capacity_grid_oracle(table1):
    loc = CellLocation(800, 900)
    res = cell_capacity(loc, table1)
    rd = read_channel(loc, table1.r_th, table1)
    best = -1.0
    for q in np.arange(1e-4, 1.0, 1e-4):
        w = write_channel(loc, table1, q=q)
        best = max(best, mutual_information(q, cascade(w.bac, rd.bac)))
    assert res.capacity >= best - 1e-12
    assert res.capacity - best < 1e-8


def test_single_cell_average(table1):
    assert averaged_capacity(ArrayGeometry(1, 1), table1) == pytest.approx(
        cell_capacity(CellLocation(1, 1), table1).capacity, rel=1e-14)


def test_capacity_falls_with_line_resistance():
    g = ArrayGeometry(64, 64)
    caps = [averaged_capacity(g, DeviceParams.table1(r)) for r in (0, 20, 40, 60, 80, 100)]
    assert all(a > b for a, b in zip(caps, caps[1:]))


def test_channel_map_consistency(table1):
    g = ArrayGeometry(5, 7)
    cm = channel_map(g, table1)
    loc = CellLocation(4, 6)
    w = write_channel(loc, table1)
    r = read_channel(loc, table1.r_th, table1)
    assert cm.p1[3, 5] == pytest.approx(w.p1, rel=1e-12)
    assert cm.p4[3, 5] == pytest.approx(r.p4, rel=1e-12)
    p5, p6 = cascade_arrays(w.p1, w.p2, r.p3, r.p4)
    assert cm.p5[3, 5] == pytest.approx(p5) and cm.p6[3, 5] == pytest.approx(p6)
    assert np.all(np.diff(cm.cascaded_ber, axis=0) >= 0)
    assert np.all(np.diff(cm.cascaded_ber, axis=1) >= 0)
