"""
Tests for test curves, Legendre transforms in t and the test-curve ray
"""

import numpy as np
import pytest

from src.convex_core import DomainError, OrderingError, UnboundedPotentialError
from src.rays import build_ray, hand_built_ray
from src.rwn import (
    RefinementStudy,
    compare_rays,
    curve_properties,
    fixed_point_gap,
    inverse_transform,
    involution_gap,
    ray_legendre,
    refinement_study,
    rwn_ordering_excess,
    rwn_ray,
    test_curve,
    test_curve_times,
)
from src.toric_model import ToricGeometry
from src.zoo import bump

TS = np.linspace(0.0, 4.0, 9)
# tau step 1/16 lines up with p/nu - 1 on the 64-cell grid for nu = 1/4
TAUS = np.arange(-24, 5) / 16.0


@pytest.fixture(scope="module")
def nu(zoo_small):
    return zoo_small["NU(0.25)"]


@pytest.fixture(scope="module")
def curve(zero, nu):
    return test_curve(zero, nu, TAUS)


@pytest.fixture(scope="module")
def rwn(zero, nu, wide_window):
    return rwn_ray(zero, nu, TAUS, TS, wide_window)


class TestCurves:
    """Test gamma*_tau = inf_t (max(phi - t, psi) - t tau)"""

    def test_times(self):
        """Test uniform times followed by doublings"""
        ts = test_curve_times(4.0, step=1.0, tail_exponent=4)

        np.testing.assert_array_equal(ts, [0.0, 1.0, 2.0, 3.0, 4.0, 8.0, 16.0])

    def test_pair_properties(self, curve, zero, nu, window):
        """Test phi below -1, psi at 0 and bottom above 0"""
        props = curve_properties(curve, zero, nu, window)

        assert props.below_minus_one < 1e-12
        assert props.at_zero < 1e-12
        assert props.bottom_above_zero
        assert curve.c_bound == 0.0

    def test_domains_shrink(self, curve):
        """Test dom gamma*_tau = [nu (1 + tau), 1] for -1 < tau <= 0"""
        for tau in (-0.75, -0.5, -0.25, 0.0):
            pot = curve.potential(curve.index(tau))
            assert pot.dual.domain[0] == pytest.approx(0.25 * (1.0 + tau), abs=1e-12)

    def test_requirements(self, zero, nu, zoo_small):
        """Test ordering, boundedness and dimension"""
        with pytest.raises(OrderingError):
            test_curve(zoo_small["CONST(-1)"], zero, TAUS)
        with pytest.raises(UnboundedPotentialError):
            test_curve(nu, nu, TAUS)

        geom2 = ToricGeometry.simplex(8)
        with pytest.raises(DomainError):
            test_curve(bump(geom2, 1), bump(geom2, 1).shift(-1.0), TAUS)

    def test_unknown_tau(self, curve):
        """Test lookup of a tau that was not sampled"""
        with pytest.raises(DomainError):
            curve.index(0.01)


class TestTransforms:
    """Test Legendre transforms in t"""

    def test_transform_of_hand_ray(self, zero, wide_window):
        """Test phi*_tau of the closed-form NU ray"""
        ray = hand_built_ray(zero, 0.25, TS, window=wide_window)
        star = ray_legendre(ray, -0.5)

        assert star.dual.domain == pytest.approx((0.125, 1.0))
        finite = star.dual.finite_mask
        np.testing.assert_allclose(star.values[finite], zero.values[finite], atol=1e-12)

    def test_bottom_transform(self, zero, wide_window):
        """Test tau above every velocity gives the bottom value"""
        ray = hand_built_ray(zero, 0.25, TS, window=wide_window)

        assert ray_legendre(ray, 0.5) is None
        with pytest.raises(DomainError):
            fixed_point_gap(ray, 0.5, 2.0)

    def test_inverse_needs_data(self, geom):
        """Test the empty inverse transform"""
        with pytest.raises(DomainError):
            inverse_transform(geom, [], TS)


class TestRwnRay:
    """Test the ray built from the maximized test curve"""

    def test_matches_cutoff_ray(self, zero, nu, rwn, wide_window):
        """Test agreement with the l-limit construction"""
        ray = build_ray(zero, nu, t_samples=TS, window=wide_window)
        comparison = compare_rays(ray, rwn)

        assert comparison.dual_gap < 1e-9
        assert comparison.primal_gap < 1e-9

    def test_fixed_point(self, rwn):
        """Test P(phi*_tau + C, phi_0) = phi*_tau"""
        for c in (2.0, 8.0, 32.0):
            assert fixed_point_gap(rwn.path, -0.5, c) < 1e-12

    def test_involution(self, rwn):
        """Test the transform of the ray returns the maximized curve"""
        gap = involution_gap(rwn)

        assert gap.domain_gap == 0.0
        assert gap.value_gap < 1e-12

    def test_below_competitor(self, zero, rwn, wide_window):
        """Test the ray sits below the closed-form competitor"""
        competitor = hand_built_ray(zero, 0.25, TS, window=wide_window)

        assert rwn_ordering_excess(rwn, competitor) < 1e-9

    def test_competitor_sampling(self, zero, rwn, wide_window):
        """Test competitors on other times"""
        competitor = hand_built_ray(zero, 0.25, np.linspace(0.0, 4.0, 5), window=wide_window)

        with pytest.raises(DomainError):
            rwn_ordering_excess(rwn, competitor)

    def test_constant_case(self, zero, zoo_small, window):
        """Test bounded psi gives the constant ray"""
        out = rwn_ray(zero, zoo_small["CONST(-1)"], TAUS, TS, window)

        for dual in out.path.duals:
            np.testing.assert_allclose(dual.values, zero.values, atol=1e-9)


class TestRefinement:
    """Test refinement studies"""

    def test_ray_agreement_study(self):
        """Test the ray comparison across polytope grids"""
        study = refinement_study(
            "ray_agreement", [16, 32], window_L=40.0, window_m=1024, nu=0.25,
            t_samples=TS, tau_samples=TAUS,
        )

        assert study.spacings == [1 / 16, 1 / 32]
        assert max(study.errors) < 1e-9
        assert [row['level'] for row in study.rows()] == [16.0, 32.0]

    def test_worst_ratio_per_halving(self):
        """Test one weak halving decides even when the overall ratio is large"""
        study = RefinementStudy("ray_agreement", [16, 32, 64], [1 / 16, 1 / 32, 1 / 64], [0.4, 0.1, 0.08])

        assert study.ratios == pytest.approx([4.0, 1.25])
        assert study.worst_ratio() == pytest.approx(1.25)
        assert study.errors[0] / study.errors[-1] >= 1.5

    def test_worst_ratio_skips_resolved(self):
        """Test halvings that start at round-off level are skipped"""
        resolved = RefinementStudy("ray_agreement", [16, 32], [1 / 16, 1 / 32], [1e-14, 3e-14])
        mixed = RefinementStudy("ray_agreement", [16, 32, 64], [1 / 16, 1 / 32, 1 / 64], [0.1, 1e-13, 1e-13])

        assert np.isinf(resolved.worst_ratio())
        assert mixed.worst_ratio() == pytest.approx(1e12)

    def test_hcma_study_levels(self):
        """Test the oracle study refines the polytope grid with a scaled window"""
        study = refinement_study("hcma", [16, 32], window_L=8.0, window_m=128, t_rows=9)

        assert study.levels == [16, 32]
        assert study.spacings == [1 / 16, 1 / 32]
        assert all(np.isfinite(e) and e < 0.1 for e in study.errors)

    def test_unknown_kind(self):
        """Test study validation"""
        with pytest.raises(ValueError):
            refinement_study("newton", [16])
