"""
Tests for verification suites and their check builders
"""

import pytest

from src.config_manager import NumericConfig
from src.suites import (
    ANCHORS,
    SUITES,
    SuiteContext,
    build_tasks,
    c_checks,
    domination_pairs,
    envelope_checks,
    rwn_checks,
    segment_checks,
    slug,
    verify_suite,
    with_anchors,
)
from src.report import CheckResult, TaskOutcome
from src.toric_model import dual_sup_diff, is_below
from src.zoo import const, nu_singular


class TestSuiteContext:
    """Test geometry and metadata resolution"""

    def test_geometries(self, small_config):
        """Test the interval and simplex contexts"""
        assert SuiteContext(small_config).geom.dim == 1
        assert SuiteContext(small_config, dim=2).geom.dim == 2

    def test_grid_metadata(self, small_ctx):
        """Test metadata written into reports"""
        meta = small_ctx.grid_metadata

        assert meta == {'n': 64, 'window_L': 8.0, 'window_m': 256, 'h': 1 / 64, 'h_x': 1 / 16}
        assert small_ctx.window.n_nodes == 257

    @pytest.mark.parametrize("label, expected", [
        ("NU(0.3)", "nu_0.3"),
        ("CONST(-1)", "const_-1"),
        ("EINF", "einf"),
        ("BUMP(12)", "bump_12"),
    ])
    def test_slug(self, label, expected):
        """Test file-name forms of labels"""
        assert slug(label) == expected


class TestBuildTasks:
    """Test suite selection"""

    def test_rays_suite_ids(self, small_config):
        """Test one task per zoo potential"""
        ids = [t.id for t in build_tasks('rays', small_config)]

        assert ids == ['rays.const_-1', 'rays.nu_0.1', 'rays.nu_0.3', 'rays.nu_0.6', 'rays.einf']

    def test_all_suites(self, small_config):
        """Test 'all' covers every module with unique ids"""
        tasks = build_tasks('all', small_config)
        ids = [t.id for t in tasks]

        assert {t.suite for t in tasks} == set(SUITES)
        assert len(ids) == len(set(ids))
        assert all(t.id.startswith(f"{t.suite}.") for t in tasks)

    def test_unknown_suite(self, small_config):
        """Test selector validation"""
        with pytest.raises(ValueError):
            build_tasks('plots', small_config)


class TestCheckBuilders:
    """Test check builders at reduced scale"""

    def test_constant_segment(self, small_ctx, zero):
        """Test every segment check passes on a constant path"""
        out = segment_checks(small_ctx, zero, zero, tables=False)
        names = {c.name for c in out.checks}

        assert out.tables == []
        assert {"geodesics.am_affine", "geodesics.lipschitz", "geodesics.restriction"} <= names
        assert "geodesics.normalize" not in names
        assert all(c.passed for c in out.checks), [c.name for c in out.checks if not c.passed]

    def test_segment_tables(self, small_ctx, bumps):
        """Test energy and quotient tables are named by suffix"""
        out = segment_checks(small_ctx, bumps[0], bumps[1], suffix="bump")

        assert [t.name for t in out.tables] == ["energy_profile_bump", "quotients_bump"]
        assert len(out.tables[0].rows) == small_ctx.config.t_count

    def test_envelope_nu(self, small_ctx, zero):
        """Test the NU bracket passes closed form, shift and maximality checks"""
        out = envelope_checks(small_ctx, nu_singular(small_ctx.geom, 0.25), zero)

        assert all(c.passed for c in out.checks), [c.name for c in out.checks if not c.passed]
        assert out.tables[0].name == "envelope_profile"
        assert len(out.tables[0].rows) == small_ctx.window.n_nodes

    def test_c_checks_names(self, small_ctx):
        """Test the c study reports the Lelong relation for NU"""
        out = c_checks(small_ctx, nu_singular(small_ctx.geom, 0.25), "nu")
        names = [c.name for c in out.checks]

        assert "energy.c_two_path" in names
        assert "energy.c_lelong" in names
        assert out.tables[0].name == "c_study_nu"
        assert [row['l'] for row in out.tables[0].rows] == list(small_ctx.config.l_schedule)

    def test_rwn_constant(self, small_ctx, zero):
        """Test both rays are constant for bounded psi"""
        out = rwn_checks(small_ctx, zero, const(small_ctx.geom, -1.0))

        assert all(c.passed for c in out.checks), [c.name for c in out.checks if not c.passed]
        assert out.tables[0].name == "ray_comparison"


class TestVerifySuite:
    """Test running a suite end to end"""

    def test_report_assembly(self, small_config):
        """Test checks are tagged with sorted task ids"""
        config = NumericConfig(n=64, window_L=8.0, window_m=256, max_concurrent=2)
        report = verify_suite('convex_core', config)
        task_ids = [c.task_id for c in report.checks]

        assert report.name == "verify convex_core"
        assert report.grid['n'] == 64
        assert task_ids == sorted(task_ids)
        assert set(task_ids) == {"convex_core.hulls", "convex_core.transforms"}
        assert {'convex_core.hulls', 'convex_core.transforms', 'total'} == set(report.timings)


def _run(config, task_id):
    task = next(t for t in build_tasks(task_id.split('.', 1)[0], config) if t.id == task_id)
    return task.run()


class TestSuiteCoverage:
    """Test the sweeps behind the acceptance checks"""

    def test_rwn_suite_covers_zoo(self, small_config):
        """Test ray agreement runs for every zoo potential, EINF and NU(0.1) included"""
        ids = [t.id for t in build_tasks('rwn', small_config)]

        assert ids == ['rwn.const_-1', 'rwn.nu_0.1', 'rwn.nu_0.3', 'rwn.nu_0.6', 'rwn.einf', 'rwn.refinement']

    def test_fixed_point_sweeps_tau(self, small_ctx, zero):
        """Test the fixed-point identity is checked on every tau sample in (-1, 0)"""
        out = rwn_checks(small_ctx, zero, nu_singular(small_ctx.geom, 0.25), tables=False)
        check = next(c for c in out.checks if c.name == "rwn.fixed_point")
        taus = [t for t in small_ctx.config.tau_samples() if -1.0 < t < 0.0]

        assert len(taus) > 10
        assert check.detail.endswith(f"of {len(taus)}")
        assert check.passed, check.detail

    def test_domination_pairs_are_ordered(self, small_ctx):
        """Test every pair is ordered and several are far apart"""
        pairs = domination_pairs(small_ctx.geom)

        assert all(is_below(v, u, tol=1e-12) for u, v in pairs)
        assert sum(dual_sup_diff(u.dual, v.dual) >= 0.1 for u, v in pairs) >= 4

    def test_energy_domination(self, small_config):
        """Test monotonicity on every pair and strict gaps on the far-apart ones"""
        out = _run(small_config, 'energy.domination')
        names = [c.name for c in out.checks]

        assert names.count("energy.am_monotone") == len(domination_pairs(SuiteContext(small_config).geom))
        assert names.count("energy.strict_domination") >= 4
        assert all(c.passed for c in out.checks), [c.detail for c in out.checks if not c.passed]
        assert {c.anchor for c in out.checks} == {"Prop 2.3"}

    @pytest.mark.slow
    def test_oracle_refinement_levels(self, small_config):
        """Test the oracle study refines the polytope grid three times"""
        out = _run(small_config, 'geodesics.oracle')
        table = out.tables[0]

        assert table.name == "hcma_refinement"
        assert [row['level'] for row in table.rows] == [32.0, 64.0, 128.0]
        assert [c.name for c in out.checks] == ["geodesics.oracle_refinement", "geodesics.oracle_agreement"]
        assert out.checks[0].threshold == 1.7


class TestAnchorMap:
    """Test every check traces to the statement it instantiates"""

    def test_listed_statements_are_anchored(self):
        """Test the verify report can list each statement"""
        expected = {
            "Thm 2.1", "Prop 2.2", "Prop 2.3", "Prop 2.4", "Thm 2.5", "Rem 2.6", "Prop 2.9",
            "Lem 3.1", "Lem 3.2", "Lem 3.3", "Thm 3.4",
            "Thm 4.1(i)", "Thm 4.1(ii)", "Thm 4.1(iii)", "Prop 5.1", "Thm 5.2", "Thm 6.1",
        }

        assert expected <= set(ANCHORS.values())
        assert all(name.split('.', 1)[0] in SUITES for name in ANCHORS)

    def test_builder_checks_get_anchors(self, small_ctx, zero, bumps):
        """Test with_anchors fills every segment check"""
        out = with_anchors(segment_checks(small_ctx, bumps[0], bumps[1], tables=False))
        anchors = {c.name: c.anchor for c in out.checks}

        assert all(anchors.values()), [n for n, a in anchors.items() if not a]
        assert anchors["geodesics.am_affine"] == "Thm 2.1"
        assert anchors["geodesics.lipschitz"] == "Thm 3.4"

    def test_explicit_anchor_kept(self):
        """Test a check built with its own anchor is not overwritten"""
        out = with_anchors(TaskOutcome(checks=[
            CheckResult.holds("geodesics.am_affine", "x", True, anchor="custom"),
        ]))

        assert out.checks[0].anchor == "custom"

    def test_verify_report_lists_anchors(self, small_config):
        """Test a suite run carries anchors into the summary"""
        report = verify_suite('convex_core', small_config)

        assert all(c.anchor == "§5 envelopes" for c in report.checks)
        lines = report.summary_lines()
        assert any(line.startswith("  §5 envelopes: ") for line in lines)
        assert lines[-1] == "result: PASS"
