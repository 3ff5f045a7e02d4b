import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptflow.model import SpatialGrid
from ptflow.stencil import Field, apply_stencil, derivative, fornberg_weights


def _grid(x_max=3.0, n=25):
    return SpatialGrid(x_max=x_max, n_points=n)


class TestFornberg:
    def test_central_first_derivative(self):
        w = fornberg_weights(0.0, np.arange(-2.0, 3.0), 1)
        assert w == pytest.approx(np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0)

    def test_central_second_derivative(self):
        w = fornberg_weights(0.0, np.arange(-2.0, 3.0), 2)
        assert w == pytest.approx(np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0)

    def test_one_sided_first_derivative(self):
        w = fornberg_weights(0.0, np.arange(0.0, 5.0), 1)
        assert w == pytest.approx(np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0)

    def test_needs_enough_nodes(self):
        with pytest.raises(ValueError):
            fornberg_weights(0.0, np.arange(0.0, 3.0), 3)


class TestExactness:
    """The 5- and 6-point rules are exact on polynomials through x^4."""

    @pytest.mark.parametrize("order,expected", [(1, lambda x: 4 * x**3),
                                                (2, lambda x: 12 * x**2),
                                                (3, lambda x: 24 * x)])
    def test_quartic_all_nodes(self, order, expected):
        g = _grid()
        f = Field(g.x**4, g)
        out = derivative(f, order).values
        np.testing.assert_allclose(out, expected(g.x), atol=5e-11)

    def test_quartic_interior_value(self):
        g = SpatialGrid(x_max=2.0, n_points=17)
        f = Field(g.x**4, g)
        i = np.argmin(np.abs(g.x - 1.0))
        assert derivative(f, 2).values[i] == pytest.approx(12.0, abs=1e-10)
        assert derivative(f, 3).values[i] == pytest.approx(24.0, abs=1e-9)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_constant_field(self, order):
        g = _grid()
        out = derivative(Field(np.full(g.n_points, 7.5), g), order).values
        np.testing.assert_allclose(out, 0.0, atol=1e-10)


class TestProperties:
    @given(a=st.floats(-5, 5), b=st.floats(-5, 5), order=st.sampled_from([1, 2, 3]))
    @settings(max_examples=25)
    def test_linearity(self, a, b, order):
        g = _grid()
        f = np.sin(g.x)
        h = np.exp(-g.x**2)
        lhs = apply_stencil(a * f + b * h, g.h, order)
        rhs = a * apply_stencil(f, g.h, order) + b * apply_stencil(h, g.h, order)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_parity(self):
        g = _grid(n=41)
        f = np.cosh(g.x)  # even
        d1 = apply_stencil(f, g.h, 1)
        d2 = apply_stencil(f, g.h, 2)
        d3 = apply_stencil(f, g.h, 3)
        np.testing.assert_allclose(d1, -d1[::-1], atol=1e-11)
        np.testing.assert_allclose(d2, d2[::-1], atol=1e-11)
        np.testing.assert_allclose(d3, -d3[::-1], atol=1e-9)

    def test_fourth_order_convergence_on_sine(self):
        errs = []
        for n in (101, 201):
            g = SpatialGrid(x_max=3.0, n_points=n)
            d2 = apply_stencil(np.sin(g.x), g.h, 2)
            interior = slice(2, -2)
            errs.append(np.max(np.abs(d2[interior] + np.sin(g.x)[interior])))
        assert errs[0] / errs[1] >= 2**4 * 0.8


class TestValidation:
    def test_rejects_bad_order(self):
        g = _grid()
        with pytest.raises(ValueError):
            derivative(Field(np.zeros(g.n_points), g), 4)

    def test_rejects_small_grid(self):
        with pytest.raises(ValueError):
            apply_stencil(np.zeros(5), 0.1, 2)

    def test_field_checks_length(self):
        g = _grid()
        with pytest.raises(ValueError):
            Field(np.zeros(g.n_points + 2), g)

    def test_field_checks_finite(self):
        g = _grid()
        vals = np.zeros(g.n_points)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            Field(vals, g)
