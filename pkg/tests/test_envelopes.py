"""
Tests for psh envelopes and the singularity-type envelope P_[psi](phi)
"""

import numpy as np
import pytest

from src.convex_core import DomainError, Grid1D, UnboundedPotentialError, sup_distance
from src.envelopes import (
    Obstacle,
    closed_form_bracket,
    domination_check,
    e_check,
    envelope_gap,
    maximality_defect,
    p_bracket,
    proj,
    proj_pair,
    proj_potentials,
)
from src.toric_model import ToricGeometry
from src.zoo import bump, einf


class TestObstacle:
    """Test window obstacles"""

    def test_from_potential(self, zero, window):
        """Test the reference gives the zero obstacle"""
        b0 = Obstacle.from_potential(zero, window)

        assert np.max(np.abs(b0.values)) == 0.0
        assert b0.tails.slope_left == 0.0
        assert b0.tails.slope_right == 0.0
        assert b0.sources == (zero,)

    def test_validation(self, geom, window):
        """Test shape, finiteness and window mismatches"""
        with pytest.raises(DomainError):
            Obstacle.from_window(geom, window, np.zeros(5))
        with pytest.raises(DomainError):
            Obstacle.from_window(geom, window, np.full(window.n_nodes, np.inf))

        other = Grid1D.window(4.0, 128)
        a = Obstacle.from_window(geom, window, np.zeros(window.n_nodes))
        b = Obstacle.from_window(geom, other, np.zeros(other.n_nodes))
        with pytest.raises(DomainError):
            a.minimum(b)

    def test_minimum_keeps_sources(self, bumps, window):
        """Test sources survive min only when both sides have them"""
        a = Obstacle.from_potential(bumps[0], window)
        b = Obstacle.from_potential(bumps[1], window)
        plain = Obstacle.from_window(bumps[0].geom, window, np.zeros(window.n_nodes))

        assert len(a.minimum(b).sources) == 2
        assert a.minimum(plain).sources == ()


class TestProjection:
    """Test P(b0) by the dual identity and by the primal conjugate"""

    def test_min_of_ordered_potentials(self, zero, zoo_small):
        """Test P(min(ZERO, CONST(-1))) = CONST(-1)"""
        out = proj_potentials(zero, zoo_small["CONST(-1)"])

        np.testing.assert_allclose(out.values, zoo_small["CONST(-1)"].values, atol=1e-12)

    def test_two_paths_agree(self, bumps, window):
        """Test dual identity against the window conjugate"""
        a = Obstacle.from_potential(bumps[0], window)
        b = Obstacle.from_potential(bumps[1], window)

        exact = proj_pair(a, b)
        primal = proj_pair(a, b, use_sources=False)

        assert sup_distance(exact.values, primal.values) < 1e-2

    def test_constant_window_obstacle(self, geom, window):
        """Test P(-1) is CONST(-1)"""
        b0 = Obstacle.from_window(geom, window, np.full(window.n_nodes, -1.0))
        out = proj(b0)

        np.testing.assert_allclose(out.values, geom.g0.values + 1.0, atol=2e-3)

    def test_unreachable_obstacle(self, geom, window):
        """Test tails that miss the polytope"""
        b0 = Obstacle.from_window(geom, window, np.zeros(window.n_nodes), tail_slopes=(2.0, 3.0))

        with pytest.raises(DomainError):
            proj(b0)

    def test_needs_potentials(self):
        """Test the empty projection"""
        with pytest.raises(DomainError):
            proj_potentials()

    def test_simplex_projection(self):
        """Test the dual identity on the simplex"""
        geom2 = ToricGeometry.simplex(8)
        a, b = bump(geom2, 1), bump(geom2, 2)
        out = proj_potentials(a, b)

        mask = geom2.polytope_grid.mask
        np.testing.assert_array_equal(out.values[mask], np.maximum(a.values, b.values)[mask])


class TestBracket:
    """Test P_[psi](phi)"""

    def test_closed_form_nu(self, zero, zoo_small):
        """Test P_[NU](ZERO) = NU"""
        out = closed_form_bracket(zoo_small["NU(0.25)"], zero)

        np.testing.assert_array_equal(out.values, zoo_small["NU(0.25)"].values)

    def test_iteration_matches_closed_form(self, zero, zoo_small, window):
        """Test the C-iteration stabilizes on the closed form"""
        result = p_bracket(zoo_small["NU(0.25)"], zero, window=window)

        assert result.stabilization_C is not None
        assert result.closed_form_gap < 1e-12
        assert result.c_monotone_violation <= 1e-12
        assert result.c_schedule[0] == 1.0

    def test_bounded_psi_gives_phi(self, zero, zoo_small, window):
        """Test P_[CONST(-1)](ZERO) = ZERO"""
        result = p_bracket(zoo_small["CONST(-1)"], zero, window=window)

        np.testing.assert_allclose(result.result.values, zero.values, atol=1e-12)
        assert envelope_gap(result.result, zero, window) < 1e-12

    def test_shift_invariance(self, zero, zoo_small):
        """Test P_[psi - c](phi) = P_[psi](phi)"""
        psi = zoo_small["NU(0.5)"]
        a = closed_form_bracket(psi, zero)
        b = closed_form_bracket(psi.shift(-2.0), zero)

        assert sup_distance(a.values, b.values) == 0.0

    def test_phi_must_be_bounded(self, zoo_small):
        """Test unbounded phi"""
        with pytest.raises(UnboundedPotentialError):
            p_bracket(zoo_small["CONST(-1)"], zoo_small["NU(0.25)"])

    def test_empty_schedule(self, zero, zoo_small):
        """Test an empty C schedule"""
        with pytest.raises(DomainError):
            p_bracket(zoo_small["NU(0.25)"], zero, c_schedule=())


class TestSaturation:
    """Test psi in E iff P_[psi](phi) = phi"""

    def test_nu_not_saturated(self, zero, zoo_small, window):
        """Test the envelope gap of NU reaches nu L / 2"""
        report = e_check(zoo_small["NU(0.25)"], zero, window)

        assert not report.in_E
        assert report.lelong_number == 0.25
        assert report.gap >= report.threshold
        assert report.consistent

    def test_constant_saturated(self, zero, zoo_small, window):
        """Test bounded psi saturates"""
        report = e_check(zoo_small["CONST(-1)"], zero, window)

        assert report.in_E
        assert report.gap <= report.threshold

    @pytest.mark.slow
    def test_einf_saturated(self, desk_geom, desk_window):
        """Test the unbounded full-mass potential at desk scale"""
        report = e_check(einf(desk_geom), desk_geom.reference(), desk_window)

        assert report.in_E
        assert report.consistent

    def test_maximality(self, zero, zoo_small, window):
        """Test P = phi on the support of MA(P)"""
        report = maximality_defect(zoo_small["NU(0.25)"], zero, window)

        assert report.ok
        assert report.mass == pytest.approx(0.75, abs=1e-9)

    def test_domination(self, zero, zoo_small, window):
        """Test domination holds for full mass and fails without it"""
        nu = zoo_small["NU(0.25)"]

        assert domination_check(zero, nu, window).ok

        report = domination_check(nu, zero, window)
        assert not report.conclusion
        assert report.everywhere_min < -1.0

    def test_one_dimensional_checks(self):
        """Test 2D inputs"""
        geom2 = ToricGeometry.simplex(8)
        a = bump(geom2, 1)

        with pytest.raises(DomainError):
            e_check(a, a)
        with pytest.raises(DomainError):
            maximality_defect(a, a)
