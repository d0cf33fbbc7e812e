"""
Tests for the Aubin-Mabuchi energy, the cutoff constant and class E membership
"""

import numpy as np
import pytest

from src.convex_core import (
    DomainError,
    InconsistencyError,
    OrderingError,
    ScheduleError,
    UnboundedPotentialError,
)
from src.energy import (
    C_METHODS,
    am,
    am_bounds_check,
    am_difference,
    am_mixed,
    c_of,
    energy_report,
    is_in_E,
    strict_domination_gap,
)
from src.toric_model import ToricGeometry, potential_sup
from src.zoo import const, einf, nu_singular


class TestEnergy:
    """Test am by the dual formula and by mixed measures"""

    def test_reference_and_constants(self, geom, zero):
        """Test am(ZERO) = 0 and am(CONST(c)) = c"""
        assert am(zero) == 0.0
        for c in (-1.0, -0.3, 0.7):
            assert am(const(geom, c)) == pytest.approx(c, abs=1e-12)

    def test_shift_rule(self, bumps):
        """Test am(phi + c) = am(phi) + c"""
        for pot in bumps:
            assert am(pot.shift(0.4)) == pytest.approx(am(pot) + 0.4, abs=1e-12)

    def test_unbounded_rejected(self, zoo_small):
        """Test am needs a bounded potential"""
        with pytest.raises(UnboundedPotentialError):
            am(zoo_small["NU(0.25)"])

    def test_simplex_constant(self):
        """Test am(CONST(-1)) on the simplex"""
        geom2 = ToricGeometry.simplex(16)

        assert am(const(geom2, -1.0)) == pytest.approx(-1.0, abs=1e-12)

    def test_two_paths_agree(self, bumps, window):
        """Test dual integral against mixed measures on the window"""
        for pot in bumps:
            mixed = am_mixed(pot, window)

            assert mixed.tail_bound < 5e-3
            assert abs(am(pot) - mixed.value) < 1e-2

    def test_energy_report(self, bumps, window):
        """Test the two-path report fills its gap"""
        report = energy_report(bumps[0], window)

        assert report.two_path_gap == pytest.approx(abs(report.am_dual - report.am_mixed))
        assert report.to_dict()['am_dual'] == report.am_dual

    def test_am_difference(self, geom, window):
        """Test the primal difference formula on constants"""
        assert am_difference(const(geom, -0.2), const(geom, -1.0), window) == pytest.approx(0.8, abs=1e-9)


class TestBounds:
    """Test the sandwich bounds and strict domination"""

    def test_constant_bounds(self, zoo_small, window):
        """Test int u MA(u) <= am(u) <= half of it for CONST(-1)"""
        check = am_bounds_check(zoo_small["CONST(-1)"], window)

        assert check.ok
        assert check.lhs == pytest.approx(-1.0, abs=1e-9)
        assert check.rhs == pytest.approx(-0.5, abs=1e-9)

    def test_bump_bounds(self, bumps, window):
        """Test the bounds on non-positive bumps"""
        for pot in bumps:
            u = pot.shift(-potential_sup(pot) - 1.0)
            assert am_bounds_check(u, window).ok, pot.label

    def test_positive_part_rejected(self, geom, window):
        """Test the bounds need u <= 0"""
        with pytest.raises(DomainError):
            am_bounds_check(const(geom, 0.5), window)

    def test_strict_domination(self, zero, zoo_small):
        """Test energy gap and sup gap for ZERO over CONST(-1)"""
        gap, sup_gap = strict_domination_gap(zero, zoo_small["CONST(-1)"])

        assert gap == pytest.approx(1.0, abs=1e-12)
        assert sup_gap == pytest.approx(1.0, abs=1e-12)

    def test_domination_order(self, zero, zoo_small):
        """Test reversed arguments"""
        with pytest.raises(OrderingError):
            strict_domination_gap(zoo_small["CONST(-1)"], zero)


class TestCutoffConstant:
    """Test c_psi by both methods"""

    @pytest.mark.parametrize("nu", [0.25, 0.5])
    def test_energy_slope_nu(self, geom, nu):
        """Test c = -nu/2 for NU(nu)"""
        report = c_of(nu_singular(geom, nu), "energy_slope")

        assert report.c_energy_slope == pytest.approx(-nu / 2, abs=5e-3)
        assert report.cutoff_energy_decreasing
        assert report.cutoff_energy_convex

    @pytest.mark.parametrize("nu", [0.25, 0.5])
    def test_mass_deficit_nu(self, geom, nu):
        """Test the sublevel-mass limit agrees"""
        report = c_of(nu_singular(geom, nu), "mass_deficit")

        assert report.c_mass_deficit == pytest.approx(-nu / 2, abs=1e-2)
        assert all('c_l' in row for row in report.per_l_values)

    def test_constant_has_zero_c(self, zoo_small):
        """Test bounded potentials have c = 0"""
        report = c_of(zoo_small["CONST(-1)"])

        assert report.c == pytest.approx(0.0, abs=5e-3)

    def test_rows(self, zoo_small, window):
        """Test the per-level table"""
        report = c_of(zoo_small["NU(0.25)"], window=window)

        assert [row['l'] for row in report.per_l_values] == list(report.l_schedule)
        for row in report.per_l_values:
            assert row['am_over_l'] == pytest.approx(row['am_cutoff'] / row['l'])
            assert 'bracket_low' in row and 'bracket_high' in row

    def test_tail_tolerance(self, zoo_small):
        """Test tight tolerances pass on an exactly linear energy"""
        report = c_of(zoo_small["NU(0.25)"], tol=1e-6)

        assert report.tail_estimate <= 1e-6

    def test_schedule_validation(self, zoo_small):
        """Test short and non-increasing schedules"""
        with pytest.raises(ScheduleError):
            c_of(zoo_small["NU(0.25)"], l_schedule=(1.0, 2.0))
        with pytest.raises(ScheduleError):
            c_of(zoo_small["NU(0.25)"], l_schedule=(1.0, 1.0, 2.0))

    def test_unknown_method(self, zoo_small):
        """Test method validation"""
        assert "energy_slope" in C_METHODS
        with pytest.raises(ValueError):
            c_of(zoo_small["NU(0.25)"], "guess")


class TestMembership:
    """Test class E membership"""

    def test_nu_not_in_E(self, zoo_small):
        """Test NU fails both criteria"""
        result = is_in_E(zoo_small["NU(0.25)"])

        assert not result.in_E
        assert result.deficit == pytest.approx(0.25)
        assert result.consistent

    def test_constant_in_E(self, zoo_small):
        """Test bounded potentials have full mass"""
        result = is_in_E(zoo_small["CONST(-1)"])

        assert result.in_E
        assert result.consistent

    def test_disagreement_raises(self, zoo_small):
        """Test a loose cutoff tolerance splits the criteria and raises"""
        with pytest.raises(InconsistencyError):
            is_in_E(zoo_small["NU(0.25)"], tol_c=1.0)

    def test_disagreement_lenient(self, zoo_small):
        """Test the lenient call reports the split instead of raising"""
        result = is_in_E(zoo_small["NU(0.25)"], tol_c=1.0, lenient=True)

        assert not result.consistent
        assert not result.in_E
        assert result.by_energy and not result.by_mass

    @pytest.mark.slow
    def test_einf_in_E(self, desk_geom):
        """Test the unbounded full-mass potential at desk scale"""
        result = is_in_E(einf(desk_geom))

        assert result.in_E
        assert result.consistent

    @pytest.mark.slow
    def test_desk_scale_nu(self, desk_geom):
        """Test c for NU(0.3) at desk scale by both methods"""
        pot = nu_singular(desk_geom, 0.3)
        slope = c_of(pot, "energy_slope").c_energy_slope
        mass = c_of(pot, "mass_deficit").c_mass_deficit

        assert slope == pytest.approx(-0.15, abs=5e-3)
        assert abs(slope - mass) <= 1e-2
