import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import q_mp
from xbarmem.circuit import sensed_read_current_ideal
from xbarmem.params import ArrayGeometry, CellLocation, DeviceParams
from xbarmem.read_channel import read_channel, read_crossovers, threshold_detect


def test_detector_boundaries():
    assert threshold_detect(30e-6, 30e-6) == 0
    assert threshold_detect(60e-6, 30e-6) == 1
    assert threshold_detect(0.0, 30e-6) == 0


def test_worst_cell_values(table1):
    r = read_channel(CellLocation(1024, 1024), 1e5, table1)
    ln10 = math.log(10)
    assert r.p4 == pytest.approx(q_mp((math.log(79520) - 4 * ln10) / (0.3 * ln10)), rel=1e-10)
    assert r.p3 == pytest.approx(q_mp((6 * ln10 - math.log(79520)) / (0.3 * ln10)), rel=1e-10)
    assert r.p4 == pytest.approx(1.35e-3, rel=0.01)
    assert r.p3 == pytest.approx(1.2e-4, rel=0.05)


def test_saturated_regime(table1):
    r = read_channel(CellLocation(10, 10), 150.0, table1)
    assert r.p4 == 1.0 and r.p3 == 0.0


def test_symmetric_threshold():
    p = DeviceParams.table1(0.0)
    r = read_channel(CellLocation(3, 3), math.exp((p.mu_l + p.mu_h) / 2), p)
    assert r.p3 == pytest.approx(r.p4, rel=1e-12)


@given(st.integers(1, 2000), st.integers(1, 2000), st.floats(0, 50), st.floats(5e4, 5e5))
def test_shift_identity(i, j, r, th):
    p = DeviceParams.table1(r)
    a = p.r_b * i + p.r_w * j
    if th - a <= 0:
        return
    got = read_channel(CellLocation(i, j), th, p)
    ref = read_channel(CellLocation(i, j), th - a, DeviceParams.table1(0.0))
    assert got.p3 == pytest.approx(ref.p3, rel=1e-9, abs=1e-300)
    assert got.p4 == pytest.approx(ref.p4, rel=1e-9, abs=1e-300)


def test_monotone_in_acc(table1):
    acc = np.linspace(0, 9e4, 200)
    p3, p4 = read_crossovers(acc, 1e5, table1)
    assert np.all(np.diff(p4) >= 0) and np.all(np.diff(p3) <= 0)


def test_monte_carlo_consistency(table1):
    loc = CellLocation(500, 700)
    r = read_channel(loc, 1e5, table1)
    rng = np.random.default_rng(2)
    n = 1_000_000
    for state, mu, sig, expect in [(0, table1.mu_h, table1.sigma_h, r.p3),
                                   (1, table1.mu_l, table1.sigma_l, r.p4)]:
        cells = np.exp(mu + sig * rng.standard_normal(n))
        cur = table1.v_r / (loc.i * table1.r_b + loc.j * table1.r_w + cells)
        z = threshold_detect(cur, table1.v_r / 1e5)
        err = np.mean(z != state)
        se = math.sqrt(expect * (1 - expect) / n)
        assert abs(err - expect) <= 4 * se
    # the closed-form current matches the same formula
    assert sensed_read_current_ideal(loc, 1e4, table1) == pytest.approx(3.0 / (1e4 + 12000))
