import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from galdnls.lattice import (
    L2, L3, L4, LINF, Boundary, ComplexField, IncompatibleFieldsError, LatticeGrid, NormKind,
    backward_diff, distance, laplacian, norm,
)

PER = Boundary.PERIODIC
DIR = Boundary.DIRICHLET


def field(values, h=1.0, boundary=PER):
    return ComplexField(np.asarray(values, dtype=complex), LatticeGrid(len(values), h, boundary))


def random_field(rng, n=17, boundary=PER):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    if boundary is DIR:
        v[0] = v[-1] = 0
    return field(v, boundary=boundary)


complex_arrays = st.lists(
    st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=3, max_size=40
).map(lambda xs: np.array([a + 1j * b for a, b in xs]))


class TestGrid:
    def test_kappa(self):
        g = LatticeGrid(10, 0.3)
        assert g.kappa * g.spacing**2 == pytest.approx(1.0, rel=1e-15)

    def test_half_length_and_nodes(self):
        g = LatticeGrid.from_half_length(300, 1.0)
        assert g.n_nodes == 600 and g.half_length == 300
        assert g.x[0] == -300 and g.x[300] == 0

    @pytest.mark.parametrize("n", [0, 2, 2.5])
    def test_rejects_small_or_fractional(self, n):
        with pytest.raises(ValueError):
            LatticeGrid(n)

    def test_rejects_bad_spacing(self):
        with pytest.raises(ValueError):
            LatticeGrid(5, 0.0)

    def test_field_shape_checked(self):
        with pytest.raises(ValueError):
            ComplexField(np.zeros(4), LatticeGrid(5))

    def test_dirichlet_clamp_check(self):
        f = field([1, 0, 1, 0, 0], boundary=DIR)
        with pytest.raises(ValueError):
            f.check_clamped()
        field([0, 1, 1, 0], boundary=DIR).check_clamped()

    def test_mixing_grids_raises(self):
        with pytest.raises(IncompatibleFieldsError):
            field([1, 2, 3]) + field([1, 2, 3], h=0.5)


class TestOperators:
    def test_laplacian_constant(self):
        assert np.all(laplacian(field([2 + 1j] * 6)).values == 0)

    def test_laplacian_periodic_stencil(self):
        np.testing.assert_array_equal(laplacian(field([1, 0, 0, 0])).values, [-2, 1, 0, 1])

    def test_laplacian_dirichlet_stencil(self):
        np.testing.assert_array_equal(laplacian(field([0, 0, 1, 0, 0], boundary=DIR)).values, [0, 1, -2, 1, 0])

    def test_backward_diff_periodic(self):
        np.testing.assert_array_equal(backward_diff(field([1, 2, 4])).values, [-3, 1, 2])

    def test_backward_diff_constant(self):
        assert np.all(backward_diff(field([3.0] * 5)).values == 0)

    def test_second_difference_is_shifted_laplacian(self):
        f = random_field(np.random.default_rng(0), 23)
        d2 = backward_diff(backward_diff(f)).values
        np.testing.assert_allclose(d2, np.roll(laplacian(f).values, 1), atol=1e-13)

    def test_summation_by_parts(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            u = random_field(rng, 31).values
            lhs = np.vdot(u, np.roll(u, -1) + np.roll(u, 1) - 2 * u)
            rhs = -np.sum(np.abs(np.roll(u, -1) - u) ** 2)
            assert lhs.real == pytest.approx(rhs, rel=1e-12)
            assert abs(lhs.imag) <= 1e-12 * abs(rhs)


class TestNorms:
    def test_pythagoras(self):
        assert norm(field([3, 4, 0]), L2) == pytest.approx(5.0)

    def test_sup(self):
        assert norm(field([3, 4, 0]), LINF) == 4.0

    def test_h_weighted(self):
        assert norm(field([2, 2, 0], h=0.5), NormKind(2, True)) == pytest.approx(2.0)

    def test_dirichlet_weighted_uses_interior(self):
        f = field([0, 2, 2, 0], h=0.5, boundary=DIR)
        assert norm(f, NormKind(2, True)) == pytest.approx(2.0)

    def test_sup_ignores_weighting(self):
        assert norm(field([1, -5, 2], h=0.1), NormKind(math.inf, True)) == 5.0

    def test_invalid_exponent(self):
        with pytest.raises(ValueError):
            NormKind(0.5)

    def test_distance(self):
        f = random_field(np.random.default_rng(2))
        assert distance(f, f, L3) == 0.0
        assert distance(f, f.grid.zeros(), L4) == pytest.approx(norm(f, L4))

    def test_distance_grid_mismatch(self):
        with pytest.raises(IncompatibleFieldsError):
            distance(field([1, 2, 3]), field([1, 2, 3, 4]))

    @settings(max_examples=200, deadline=None)
    @given(complex_arrays)
    def test_embedding(self, v):
        f = field(v)
        chain = [norm(f, k) for k in (L2, L3, L4, LINF)]
        for a, b in zip(chain, chain[1:]):
            assert b <= a * (1 + 1e-12) + 1e-300

    @settings(max_examples=200, deadline=None)
    @given(complex_arrays)
    def test_gradient_bound(self, v):
        f = field(v)
        assert norm(backward_diff(f)) ** 2 <= 4 * norm(f) ** 2 * (1 + 1e-12) + 1e-300

    @settings(max_examples=100, deadline=None)
    @given(complex_arrays, st.one_of(st.just(0.0), st.floats(1e-3, 5), st.floats(-5, -1e-3)))
    def test_homogeneity_and_triangle(self, v, c):
        f = field(v)
        g = field(np.roll(v, 1) * 1j)
        for k in (L2, L3, LINF):
            assert norm(c * f, k) == pytest.approx(abs(c) * norm(f, k), rel=1e-12, abs=1e-300)
            assert norm(f + g, k) <= (norm(f, k) + norm(g, k)) * (1 + 1e-12) + 1e-300
