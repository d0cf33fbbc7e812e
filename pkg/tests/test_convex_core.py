"""
Tests for the convex-analysis kernel

Covers:
- Grids and extended-real grid functions
- Primal functions with affine tails
- Legendre transforms (fast against brute force, round trips)
- 1D lower hulls (monotone chain against qhull) and the 2D envelope
"""

import numpy as np
import pytest

from src.convex_core import (
    INF,
    ConvexityError,
    DomainError,
    ExtGridFn,
    Grid1D,
    PrimalFunction,
    ProductGrid,
    SlopeData,
    conjugate_brute,
    conjugate_fast,
    convex_envelope,
    convexity_defect,
    ext_difference,
    hull_of_min,
    hull_values,
    hull_values_qhull,
    legendre,
    legendre_inv,
    second_difference_defect,
    sup_distance,
)
from src.convex_core import _merge_counts


class TestGrids:
    """Test Grid1D and ProductGrid"""

    def test_polytope_grid_nodes(self):
        """Test node placement and spacing"""
        grid = Grid1D.polytope(64)

        assert grid.h == pytest.approx(1 / 64)
        assert grid.n_nodes == 65
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == 1.0

    def test_index_of(self):
        """Test node lookup"""
        grid = Grid1D.polytope(64)

        assert grid.index_of(0.5) == 32
        assert grid.index_of(0.3) is None

    def test_invalid_grids(self):
        """Test rejected grid parameters"""
        with pytest.raises(DomainError):
            Grid1D(0.0, 1.0, 4)
        with pytest.raises(DomainError):
            Grid1D(1.0, 0.0, 16)

    def test_simplex_mask(self):
        """Test the simplex mask of a product grid"""
        grid = ProductGrid(Grid1D.polytope(8), simplex=True)

        assert grid.shape == (9, 9)
        assert grid.mask[0, 8]
        assert not grid.mask[1, 8]
        assert grid.mask.sum() == 45


class TestExtGridFn:
    """Test extended-real grid functions"""

    def test_domain_and_shift(self):
        """Test domain detection and constant shifts"""
        grid = Grid1D.polytope(8)
        values = np.array([INF, INF, 1.0, 0.5, 0.25, 0.5, 1.0, 2.0, 3.0])
        fn = ExtGridFn(grid, values)

        assert fn.domain_indices == (2, 8)
        assert fn.domain == (0.25, 1.0)
        assert not fn.finite_everywhere

        shifted = fn.shift(1.0)
        assert np.isinf(shifted.values[0])
        assert shifted.values[3] == 1.5

    def test_rejects_bad_values(self):
        """Test NaN, -inf, holes and shape mismatches"""
        grid = Grid1D.polytope(8)
        good = np.zeros(9)

        with pytest.raises(DomainError):
            ExtGridFn(grid, np.where(np.arange(9) == 4, np.nan, good))
        with pytest.raises(DomainError):
            ExtGridFn(grid, np.where(np.arange(9) == 4, -INF, good))
        with pytest.raises(DomainError):
            ExtGridFn(grid, np.where(np.arange(9) == 4, INF, good))
        with pytest.raises(DomainError):
            ExtGridFn(grid, np.zeros(8))

    def test_values_read_only(self):
        """Test that stored values cannot be mutated"""
        fn = ExtGridFn(Grid1D.polytope(8), np.zeros(9))

        with pytest.raises(ValueError):
            fn.values[0] = 1.0

    def test_ext_difference(self):
        """Test extended-real subtraction"""
        diff = ext_difference(np.array([1.0, INF]), np.array([0.5, 2.0]))
        assert diff[0] == 0.5
        assert np.isinf(diff[1])

        with pytest.raises(DomainError):
            ext_difference(np.array([INF]), np.array([INF]))

    def test_sup_distance(self):
        """Test that matching infinities are ignored and mismatches are infinite"""
        a = np.array([0.0, 1.0, INF])

        assert sup_distance(a, np.array([0.5, 1.0, INF])) == 0.5
        assert np.isinf(sup_distance(a, np.array([0.0, 1.0, 2.0])))


class TestPrimalFunction:
    """Test primal functions with affine tails"""

    def test_build_and_evaluate(self):
        """Test tails continue the window data"""
        window = Grid1D.window(2.0, 8)
        x = window.nodes
        f = PrimalFunction.build(window, np.abs(x), SlopeData(-1.0, 1.0))

        out = f.evaluate(np.array([-5.0, 0.0, 3.0]))
        assert out == pytest.approx([5.0, 0.0, 3.0])

    def test_rejects_nonconvex(self):
        """Test concave window data"""
        window = Grid1D.window(2.0, 8)

        with pytest.raises(ConvexityError):
            PrimalFunction.build(window, -window.nodes ** 2, SlopeData(0.0, 0.0), exact_tails=False)

    def test_rejects_wrong_tail_slopes(self):
        """Test exact tails must match the edge slopes"""
        window = Grid1D.window(2.0, 8)

        with pytest.raises(DomainError):
            PrimalFunction.build(window, np.abs(window.nodes), SlopeData(-2.0, 1.0))

    def test_slope_order(self):
        """Test left slope above right slope"""
        with pytest.raises(DomainError):
            SlopeData(1.0, 0.0)

    def test_relative_values_need_reference(self):
        """Test relative values without a reference"""
        window = Grid1D.window(2.0, 8)
        f = PrimalFunction.build(window, np.abs(window.nodes), SlopeData(-1.0, 1.0))

        with pytest.raises(DomainError):
            f.relative_values()


class TestLegendre:
    """Test discrete Legendre transforms"""

    def test_fast_matches_brute(self):
        """Test the merge kernel against enumeration on random convex data"""
        rng = np.random.default_rng(0)
        xs = np.sort(rng.uniform(-4, 4, 200))
        slopes = np.sort(rng.uniform(-3, 3, 199))
        fs = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
        ps = np.linspace(-4, 4, 301)

        np.testing.assert_allclose(conjugate_fast(xs, fs, ps), conjugate_brute(xs, fs, ps), atol=1e-12)

    def test_merge_counts_match_search(self):
        """Test the merged slope counts equal a left-sided sorted search, ties included"""
        rng = np.random.default_rng(3)
        slopes = np.sort(rng.integers(-5, 6, 40).astype(float))
        ps = np.sort(np.concatenate([rng.integers(-6, 7, 30).astype(float), [-0.5, 0.5]]))

        np.testing.assert_array_equal(_merge_counts(slopes, ps), np.searchsorted(slopes, ps, side="left"))

    def test_unsorted_targets(self):
        """Test targets out of order take the search path and still match enumeration"""
        rng = np.random.default_rng(1)
        xs = np.sort(rng.uniform(-4, 4, 120))
        slopes = np.sort(rng.uniform(-3, 3, 119))
        fs = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
        ps = rng.uniform(-4, 4, 50)

        np.testing.assert_allclose(conjugate_fast(xs, fs, ps), conjugate_brute(xs, fs, ps), atol=1e-12)

    def test_round_trip(self, geom, window):
        """Test g -> f -> g on the polytope grid"""
        f = legendre_inv(geom.g0, window)
        assert f.exact_tails

        back = legendre(f, geom.polytope_grid)
        brute = legendre(f, geom.polytope_grid, method="brute")

        np.testing.assert_allclose(back.values, brute.values, atol=1e-12)
        np.testing.assert_allclose(back.values, geom.g0.values, atol=2e-3)

    def test_inverse_of_reference(self, geom, window):
        """Test the conjugate of g0 against log(1 + e^x)"""
        f = legendre_inv(geom.g0, window)
        exact = np.logaddexp(0.0, window.nodes)

        assert np.all(f.values <= exact + 1e-12)
        assert np.max(exact - f.values) < 1e-2

    def test_domain_gives_tails(self, geom, window):
        """Test tail slopes equal the domain ends"""
        values = np.where(geom.nodes >= 0.25, geom.g0.values, INF)
        f = legendre_inv(ExtGridFn(geom.polytope_grid, values), window)

        assert f.tails.slope_left == 0.25
        assert f.tails.slope_right == 1.0

    def test_nonconvex_dual(self, geom, window):
        """Test that a concave dual is rejected"""
        with pytest.raises(ConvexityError):
            legendre_inv(geom.g0.with_values(-geom.g0.values), window)

    def test_unknown_method(self, geom, window):
        """Test method validation"""
        with pytest.raises(ValueError):
            legendre_inv(geom.g0, window, method="newton")


class TestHulls:
    """Test lower hulls and envelopes"""

    def test_convex_data_unchanged(self):
        """Test that strictly convex data is kept bit for bit"""
        x = np.linspace(-1, 1, 41)
        values = x ** 2

        assert np.array_equal(hull_values(values, x), values)

    def test_hull_matches_qhull(self):
        """Test monotone chain against qhull on oscillating data"""
        x = np.linspace(0, 6, 61)
        values = np.sin(3 * x) + 0.1 * x ** 2

        ours = hull_values(values, x)
        theirs = hull_values_qhull(values, x)

        np.testing.assert_allclose(ours, theirs, atol=1e-12)
        assert np.all(ours <= values)
        assert second_difference_defect(ours) < 1e-12

    def test_infinite_ends_kept(self):
        """Test entries outside the finite block stay infinite"""
        out = hull_values(np.array([INF, 3.0, 1.0, 2.0, INF]))

        assert np.isinf(out[0]) and np.isinf(out[-1])
        assert np.isfinite(out[1:4]).all()

    def test_hull_of_min_is_below_both(self, geom):
        """Test hull of the minimum of two duals"""
        a = geom.g0
        b = a.with_values(np.where(geom.nodes >= 0.5, a.values - 0.3, INF))
        out = hull_of_min(a, b)

        assert np.all(out.values <= a.values)
        finite = np.isfinite(b.values)
        assert np.all(out.values[finite] <= b.values[finite])
        assert convexity_defect(out) < 1e-12

    def test_envelope_2d(self):
        """Test the lattice sweep envelope on a separable function"""
        grid = ProductGrid(Grid1D.polytope(8), simplex=False)
        p1, p2 = grid.points
        data = -((p1 - 0.5) ** 2) + 0.5 * p2 ** 2
        out = convex_envelope(ExtGridFn(grid, data))

        assert convexity_defect(out) < 1e-10
        np.testing.assert_allclose(out.values, -0.25 + 0.5 * p2 ** 2, atol=1e-12)

    def test_envelope_2d_simplex(self):
        """Test that a raised node is pulled down and the mask survives"""
        grid = ProductGrid(Grid1D.polytope(8), simplex=True)
        p1, p2 = grid.points
        base = np.where(grid.mask, p1 ** 2 + p2 ** 2, INF)
        data = base.copy()
        data[2, 3] += 1.0
        out = convex_envelope(ExtGridFn(grid, data))

        assert out.values[2, 3] <= base[2, 3] + 2 * grid.h ** 2 + 1e-12
        assert np.all(out.values[grid.mask] <= data[grid.mask] + 1e-12)
        assert np.isinf(out.values[~grid.mask]).all()
