import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptflow.model import (
    ModelParams,
    SpatialGrid,
    bare_potential,
    classical_minima,
    default_grid,
)


class TestModelParams:
    def test_defaults(self):
        p = ModelParams(m_squared=-1.0, lam=0.05)
        assert p.cutoff == 1500.0
        assert p.dimension == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"m_squared": 1.0, "lam": -0.1},
            {"m_squared": 1.0, "lam": 0.1, "cutoff": 0.0},
            {"m_squared": 1.0, "lam": 0.1, "cutoff": -3.0},
            {"m_squared": 4.0, "lam": 0.1, "cutoff": 10.0},  # cutoff^2 < 100*|m2|
            {"m_squared": math.nan, "lam": 0.1},
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)


class TestBarePotential:
    def test_double_well_origin(self):
        assert bare_potential(ModelParams(-1.0, 0.05), 0.0) == 0.0

    def test_hand_value_convex(self):
        assert bare_potential(ModelParams(1.0, 1.0), 1.0) == pytest.approx(1.5)

    def test_hand_value_at_minimum(self):
        p = ModelParams(-1.0, 0.05)
        assert bare_potential(p, math.sqrt(5.0)) == pytest.approx(-1.25)

    def test_vectorized(self):
        p = ModelParams(-1.0, 0.05)
        x = np.array([0.0, 1.0, -1.0])
        v = bare_potential(p, x)
        assert v.shape == (3,)
        assert v[1] == v[2]

    @given(
        m2=st.sampled_from([-1.0, 1.0]),
        lam=st.floats(0.0, 2.0),
        x=st.floats(-10.0, 10.0),
    )
    def test_even_in_x(self, m2, lam, x):
        p = ModelParams(m2, lam)
        assert bare_potential(p, x) == pytest.approx(bare_potential(p, -x), abs=1e-12)


class TestClassicalMinima:
    def test_convex_gives_origin(self):
        assert classical_minima(ModelParams(1.0, 0.4)) == [0.0]

    def test_quarter_coupling(self):
        assert classical_minima(ModelParams(-1.0, 0.25)) == pytest.approx([-1.0, 1.0])

    def test_shallow_well(self):
        assert classical_minima(ModelParams(-1.0, 0.05)) == pytest.approx(
            [-2.2360680, 2.2360680], abs=1e-6
        )

    def test_zero_coupling_gives_origin(self):
        assert classical_minima(ModelParams(-1.0, 0.0)) == [0.0]

    @pytest.mark.parametrize("lam", [0.05, 0.1, 0.4])
    def test_minima_below_origin(self, lam):
        p = ModelParams(-1.0, lam)
        for x_star in classical_minima(p):
            assert bare_potential(p, x_star) < bare_potential(p, 0.0)


class TestSpatialGrid:
    def test_center_node_is_origin(self):
        g = SpatialGrid(x_max=8.0, n_points=2001)
        assert g.x[g.center] == 0.0
        assert g.h == pytest.approx(0.008)

    def test_span(self):
        g = SpatialGrid(x_max=5.0, n_points=11)
        assert g.x[0] == -5.0 and g.x[-1] == 5.0

    @pytest.mark.parametrize("n", [4, 2000, 3])
    def test_rejects_bad_counts(self, n):
        with pytest.raises(ValueError):
            SpatialGrid(x_max=8.0, n_points=n)

    def test_rejects_bad_extent(self):
        with pytest.raises(ValueError):
            SpatialGrid(x_max=0.0)


class TestDefaultGrid:
    def test_floor_extent(self):
        assert default_grid(ModelParams(1.0, 0.4)).x_max == 8.0

    def test_tracks_outer_minimum(self):
        g = default_grid(ModelParams(-1.0, 0.02))
        assert g.x_max == pytest.approx(3.0 * math.sqrt(1.0 / 0.08))

    def test_configurable_resolution(self):
        assert default_grid(ModelParams(1.0, 0.4), n_points=501).n_points == 501
