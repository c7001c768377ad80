import numpy as np
import pytest
from hypothesis import given, strategies as st

from xbarmem.capacity import channel_map
from xbarmem.interleave import diagonal_place, make_placement, placement_stats, wordline_place
from xbarmem.params import ArrayGeometry, CellLocation, DeviceParams


def test_diagonal_examples():
    g = ArrayGeometry(8, 8)
    assert [diagonal_place(0, j, g) for j in range(1, 9)] == [CellLocation(j, j) for j in range(1, 9)]
    assert diagonal_place(1, 8, g) == CellLocation(1, 8)
    g1 = ArrayGeometry(1, 5)
    assert diagonal_place(0, 3, g1) == wordline_place(0, 3, g1) == CellLocation(1, 3)
    assert wordline_place(0, 4, g) == CellLocation(1, 4)


@pytest.mark.parametrize("args", [(8, 1), (-1, 1), (0, 0), (0, 9)])
def test_out_of_range(args):
    with pytest.raises(IndexError):
        diagonal_place(*args, ArrayGeometry(8, 8))
    with pytest.raises(IndexError):
        wordline_place(*args, ArrayGeometry(8, 8))


@given(st.integers(1, 64), st.integers(1, 64), st.sampled_from(["wordline", "diagonal"]))
def test_bijection(m, n, scheme):
    g = ArrayGeometry(m, n)
    pl = make_placement(scheme, g)
    cells = {(int(pl.rows[d, j]), j) for d in range(m) for j in range(n)}
    assert len(cells) == m * n
    a = np.arange(m * n).reshape(m, n)
    assert np.array_equal(pl.scatter(pl.gather(a)), a)
    d, j = int(m // 2), int(n)
    assert pl.inverse(pl.locate(d, j)) == (d, j)
    f = diagonal_place if scheme == "diagonal" else wordline_place
    assert pl.locate(d, j) == f(d, j, g)


@given(st.integers(1, 32), st.integers(1, 32))
def test_mean_preserved(m, n):
    g = ArrayGeometry(m, n)
    e = np.random.default_rng(m * 100 + n).random((m, n))
    a = placement_stats(make_placement("wordline", g), e).mean()
    b = placement_stats(make_placement("diagonal", g), e).mean()
    assert a == pytest.approx(b, rel=1e-12)


def test_constant_and_single_row():
    g = ArrayGeometry(6, 9)
    c = np.full(g.shape, 0.01)
    assert np.all(placement_stats(make_placement("diagonal", g), c) == 0.01)
    g1 = ArrayGeometry(1, 9)
    e = np.arange(9.0)[None, :]
    assert np.array_equal(placement_stats(make_placement("wordline", g1), e),
                          placement_stats(make_placement("diagonal", g1), e))


def test_interleaving_flattens_rber():
    g = ArrayGeometry(128, 128)
    cm = channel_map(g, DeviceParams.table1(50.0))
    w = placement_stats(make_placement("wordline", g), cm.cascaded_ber)
    d = placement_stats(make_placement("diagonal", g), cm.cascaded_ber)
    assert np.all(np.diff(w) > 0)
    assert d.std() < 0.1 * w.std()


def test_unknown_scheme():
    with pytest.raises(ValueError):
        make_placement("spiral", ArrayGeometry(2, 2))
