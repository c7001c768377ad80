import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_kcl
from xbarmem.circuit import (
    BiasScheme,
    ResistanceGrid,
    accumulated_line_resistance,
    effective_write_voltage,
    effective_write_voltage_ideal,
    kcl_read_threshold,
    sensed_read_current_ideal,
    solve_kcl,
)
from xbarmem.params import ArrayGeometry, CellLocation, DeviceParams

G1024 = ArrayGeometry(1024, 1024)


def test_accumulated_resistance(table1):
    assert accumulated_line_resistance(CellLocation(1, 1), table1) == 20.0
    assert accumulated_line_resistance(CellLocation(1024, 1024), table1) == 20480.0
    assert accumulated_line_resistance(CellLocation(7, 3), DeviceParams.table1(0.0)) == 0.0


def test_write_margin_reproduction(table1):
    worst = effective_write_voltage_ideal(G1024.worst, 1e4, 5.0, table1)
    best = effective_write_voltage_ideal(G1024.best, 1e4, 5.0, table1)
    assert worst == pytest.approx(1.64, abs=0.01)
    assert best == pytest.approx(4.99, abs=0.01)
    assert effective_write_voltage_ideal(G1024.worst, 1e4, 5.0, DeviceParams.table1(0.0)) == 5.0


def test_read_margin_reproduction(table1):
    def margin(loc):
        return (sensed_read_current_ideal(loc, 1e4, table1)
                - sensed_read_current_ideal(loc, 1e6, table1))
    assert margin(G1024.best) == pytest.approx(296e-6, abs=2e-6)
    assert margin(G1024.worst) == pytest.approx(95e-6, abs=2e-6)
    p0 = DeviceParams.table1(0.0)
    assert sensed_read_current_ideal(CellLocation(5, 5), 1e4, p0) == 3.0 / 1e4


def test_single_cell_divider(table1):
    p = table1.replace(r_sf=1e3)
    g = ArrayGeometry(1, 1)
    sol = solve_kcl(ResistanceGrid.uniform(g, 1e4), BiasScheme("write", CellLocation(1, 1), 5.0), p)
    # driver -> r_w -> r_sf + cell -> r_b -> ground
    expect = 5.0 * 1e4 / (1e4 + 1e3 + 20.0)
    assert sol.cell_voltage(CellLocation(1, 1)) == pytest.approx(expect, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.floats(0, 100), st.floats(1e3, 1e6),
       st.data())
def test_open_selectors_match_closed_form(m, n, r, rc, data):
    p = DeviceParams.table1(r)
    g = ArrayGeometry(m, n)
    loc = CellLocation(data.draw(st.integers(1, m)), data.draw(st.integers(1, n)))
    grid = ResistanceGrid.uniform(g, 1e5).with_cell(loc, rc)
    sol = solve_kcl(grid, BiasScheme("write", loc, 5.0), p)
    assert sol.cell_voltage(loc) == pytest.approx(
        effective_write_voltage_ideal(loc, rc, 5.0, p), rel=1e-9)
    rd = solve_kcl(grid, BiasScheme("read", loc, p.v_r), p)
    assert rd.sensed_current(p) == pytest.approx(sensed_read_current_ideal(loc, rc, p), rel=1e-9)


@pytest.mark.parametrize("kind", ["write", "read"])
def test_dense_elimination_oracle(table1, kind):
    p = table1.replace(r_sh=1e6, r_su=1e8)
    g = ArrayGeometry(2, 2)
    rng = np.random.default_rng(3)
    r = np.exp(rng.uniform(np.log(1e4), np.log(1e6), size=(2, 2)))
    loc = CellLocation(2, 1)
    bias = BiasScheme(kind, loc, 5.0)
    sol = solve_kcl(ResistanceGrid(g, r), bias, p)
    cls = bias.selector_classes(g)
    r_sel = np.choose(cls, [p.r_sf, p.r_sh, p.r_su]).astype(float)
    wl, bl = bias.line_voltages(g)
    v_wl, v_bl = dense_kcl(r, r_sel, wl, bl, p.r_w, p.r_b)
    np.testing.assert_allclose(sol.v_wl, v_wl, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(sol.v_bl, v_bl, rtol=1e-9, atol=1e-12)


def test_superposition(table1):
    p = table1.replace(r_sh=1e5, r_su=1e7)
    g = ArrayGeometry(5, 4)
    grid = ResistanceGrid.uniform(g, 2e4)
    loc = CellLocation(3, 2)
    a = solve_kcl(grid, BiasScheme("write", loc, 2.0), p)
    b = solve_kcl(grid, BiasScheme("write", loc, 6.0), p)
    np.testing.assert_allclose(3 * a.v_wl, b.v_wl, rtol=1e-10)
    np.testing.assert_allclose(3 * a.currents(), b.currents(), rtol=1e-9, atol=1e-18)


def test_zero_line_resistance_network(table1):
    p = DeviceParams.table1(0.0).replace(r_sh=1e5, r_su=1e7)
    g = ArrayGeometry(3, 3)
    loc = CellLocation(2, 2)
    sol = solve_kcl(ResistanceGrid.uniform(g, 1e4), BiasScheme("write", loc, 5.0), p)
    assert sol.cell_voltage(loc) == pytest.approx(5.0)


def test_iterative_path_matches_direct(table1, monkeypatch):
    import xbarmem.circuit as circuit

    p = table1.replace(r_sh=1e5, r_su=1e7)
    g = ArrayGeometry(12, 10)
    grid = ResistanceGrid.uniform(g, 1e4)
    bias = BiasScheme("write", CellLocation(12, 10), 5.0)
    direct = solve_kcl(grid, bias, p)
    monkeypatch.setattr(circuit, "DIRECT_SOLVE_MAX_CELLS", 1)
    it = solve_kcl(grid, bias, p)
    np.testing.assert_allclose(it.v_wl, direct.v_wl, rtol=1e-8)
    assert it.residual <= 1e-9


def test_leaky_selectors_reduce_write_voltage(table1):
    g = ArrayGeometry(8, 8)
    ideal = effective_write_voltage(g.worst, 1e4, 5.0, table1, g)
    leaky = effective_write_voltage(g.worst, 1e4, 5.0, table1.replace(r_sh=2e4, r_su=1e6), g)
    assert leaky < ideal


def test_kcl_read_threshold_ideal(table1):
    g = ArrayGeometry(4, 4)
    loc = CellLocation(4, 4)
    r = kcl_read_threshold(loc, g, table1)
    assert r == pytest.approx(table1.r_th - 80.0, rel=1e-9)
