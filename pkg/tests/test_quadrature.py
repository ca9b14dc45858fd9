import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oscillab.quadrature import (
    GAUSS7_WEIGHTS,
    KRONROD_NODES,
    KRONROD_WEIGHTS,
    adaptive_kronrod,
    gauss_legendre,
    graded_edges,
    panel_nodes,
)


def _exact(d):
    return (1 - (-1) ** (d + 1)) / (d + 1)


@pytest.mark.parametrize("degree", range(30))
def test_kronrod_and_gauss_exactness(degree):
    f = KRONROD_NODES**degree
    if degree <= 22:
        assert (f * KRONROD_WEIGHTS).sum() == pytest.approx(_exact(degree), abs=1e-14)
    if degree <= 13:
        assert (f * GAUSS7_WEIGHTS).sum() == pytest.approx(_exact(degree), abs=1e-14)
    if degree == 14:
        assert abs((f * GAUSS7_WEIGHTS).sum() - _exact(degree)) > 1e-8


def test_gauss_legendre_unit_interval():
    x, w = gauss_legendre(16)
    assert np.all((x > 0) & (x < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert (w * x**31).sum() == pytest.approx(1 / 32, rel=1e-13)


def test_panel_nodes_integrate_piecewise():
    x, w = panel_nodes(np.array([0.0, 0.5, 2.0, 3.0]), 8)
    assert x.shape == (3, 8)
    assert (w * np.exp(x)).sum() == pytest.approx(math.e**3 - 1, rel=1e-14)


@given(st.floats(0.05, 3), st.floats(-5, 5), st.floats(1e-6, 0.5))
def test_graded_edges_cover_and_refine(max_len, focus, dist):
    e = graded_edges(-5.0, 5.0, max_len, focus=((focus, dist),))
    assert e[0] == -5.0 and e[-1] == 5.0
    assert np.all(np.diff(e) > 0)
    assert np.max(np.diff(e)) <= max_len * (1 + 1e-12)
    # the panel containing the focus point is no longer than ~dist
    k = min(np.searchsorted(e, focus), len(e) - 1)
    assert e[k] - e[max(k - 1, 0)] <= max(dist, 1e-15) * 1.01 + 1e-12 or max_len <= dist


def test_graded_panels_integrate_near_pole():
    d = 1e-4
    e = graded_edges(-1.0, 1.0, 0.5, focus=((0.0, d),))
    x, w = panel_nodes(e, 16)
    val = (w * (d / (x**2 + d**2))).sum()
    assert val == pytest.approx(2 * math.atan(1 / d), rel=1e-12)


def test_adaptive_kronrod():
    val, err = adaptive_kronrod(np.sin, [0.0, math.pi])
    assert val == pytest.approx(2.0, rel=1e-13)
    assert err < 1e-10
    # endpoint singularity: refinement stops after max_rounds bisections
    val, _ = adaptive_kronrod(lambda x: 1 / np.sqrt(x), [0.0, 1.0], rtol=1e-10)
    assert val == pytest.approx(2.0, rel=1e-7)
