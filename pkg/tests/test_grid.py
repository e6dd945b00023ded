import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecsmg.grid import (GridError, TensorGrid2D, build_grid, can_coarsen, coarsen,
                        mesh_width, square_grid)

T = math.pi / 6


def test_example_small_high_layer():
    g = build_grid(4, 0, 2, 1.0, 0.5, T)
    assert g.h == 0.25
    assert g.h_gamma == pytest.approx(0.25 * np.exp(1j * T), abs=1e-15)
    assert g.nodes[6] == pytest.approx(1 + 0.5 * np.exp(1j * T), abs=1e-15)
    assert g.num_unknowns == 5


def test_degenerate_theta_zero_is_uniform():
    g = build_grid(2, 0, 2, 1.0, 1.0, 0.0)
    np.testing.assert_allclose(g.nodes, [0, 0.5, 1.0, 1.5, 2.0])
    assert g.gamma == pytest.approx(1.0)


def test_table1_axis_gamma_from_node_differences():
    g = build_grid(256, 64, 64, 1.0, 0.25, T)
    assert len(g.nodes) == 385
    gam = (g.nodes[-1] - g.nodes[-2]) / (g.nodes[100] - g.nodes[99])
    assert gam == pytest.approx(np.exp(1j * T), rel=1e-12)
    assert g.gamma == pytest.approx(gam, rel=1e-12)


def test_mesh_width_examples():
    g = build_grid(4, 0, 2, 1.0, 0.5, T)
    assert mesh_width(g, 3) == pytest.approx(0.25)
    assert mesh_width(g, 4) == pytest.approx(0.25 * np.exp(1j * T))
    u = build_grid(8)
    assert all(mesh_width(u, j) == pytest.approx(1 / 8) for j in range(8))
    with pytest.raises(IndexError):
        mesh_width(g, 6)


def test_coarsen_examples():
    g = build_grid(4, 0, 2, 1.0, 0.5, T)
    c = coarsen(g)
    assert (c.n, c.m_lo, c.m_hi) == (2, 0, 1)
    assert np.array_equal(c.nodes, g.nodes[::2])
    g = build_grid(256, 64, 64, 1.0, 0.25, T)
    for _ in range(4):
        g = coarsen(g)
    assert (g.n, g.m_lo, g.m_hi) == (16, 4, 4)


def test_coarsen_twice_preserves_gamma():
    g = build_grid(8, 0, 4, 1.0, 0.5, T)
    c2 = coarsen(coarsen(g))
    assert c2.gamma == g.gamma
    assert np.array_equal(c2.nodes, g.nodes[::4])


def test_odd_counts_refuse_to_coarsen():
    g = build_grid(6, 0, 3, 1.0, 0.5, T)
    assert not can_coarsen(g)
    with pytest.raises(GridError):
        coarsen(g)


@pytest.mark.parametrize("args", [
    dict(n=1), dict(n=4, a=0.0), dict(n=4, m_hi=2, w=0.0), dict(n=4, m_lo=-1),
    dict(n=4, m_hi=2, w=0.5, theta=math.pi / 2),
])
def test_invalid_grids_rejected(args):
    with pytest.raises(GridError):
        build_grid(**args)


def test_tensor_grid_layout():
    tg = TensorGrid2D(build_grid(4, 1, 1, 1.0, 0.25, T), build_grid(6, 0, 2, 1.0, 0.3, T))
    assert tg.shape == (5, 7)
    assert tg.size == 35
    X, Y = tg.coordinates()
    assert X.shape == tg.shape
    np.testing.assert_array_equal(X[:, 0], tg.gx.interior)
    np.testing.assert_array_equal(Y[0, :], tg.gy.interior)
    mask = tg.real_mask()
    assert mask.sum() == 5 * 6  # real nodes include x = a
    assert np.all(X[mask].imag == 0) and np.all(Y[mask].imag == 0)


grids = st.builds(
    lambda n, mlo, mhi, a, frac, th: build_grid(2 * n, 2 * mlo, 2 * mhi, a,
                                                frac * a if (mlo or mhi) else 0.0, th),
    st.integers(1, 16), st.integers(0, 4), st.integers(0, 4),
    st.floats(0.5, 80.0), st.floats(0.05, 1.0), st.floats(0.01, 1.5))


@given(grids)
def test_grid_invariants(g):
    z = g.nodes
    real = z[g.m_lo:g.m_lo + g.n + 1]
    assert np.all(real.imag == 0)
    np.testing.assert_allclose(np.diff(real.real), g.h, rtol=1e-12)
    hi = z[g.m_lo + g.n:]
    lo = z[:g.m_lo + 1]
    assert np.all(np.diff(hi.imag) > 0)
    assert np.all(np.diff(lo.imag) > 0)  # decreasing toward index 0
    if g.m_hi:
        np.testing.assert_allclose(np.diff(hi), g.h_gamma, rtol=1e-10)
        assert hi[-1] == pytest.approx(g.a + g.w * np.exp(1j * g.theta), rel=1e-13)
        assert (hi[-1] - hi[-2]) / (real[1] - real[0]) == pytest.approx(g.gamma, rel=1e-10)


@given(grids)
def test_coarsen_keeps_endpoints_and_gamma_bitwise(g):
    if not can_coarsen(g):
        return
    c = coarsen(g)
    assert np.array_equal(c.nodes, g.nodes[::2])
    assert c.gamma == g.gamma
    assert (c.a, c.w, c.theta) == (g.a, g.w, g.theta)


def test_square_grid():
    sg = square_grid(8, 2, 2, 1.0, 0.25)
    assert sg.gx == sg.gy
    assert sg.coarsen().shape == (5, 5)
