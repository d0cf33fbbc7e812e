"""
Performance Benchmark Tests for the Numeric Kernels

Reduced-scale timings of the transforms, envelopes and ray construction.
"""

import numpy as np
import pytest

from src.convex_core import hull_values, legendre, legendre_inv
from src.envelopes import p_bracket
from src.geodesics import segment
from src.rays import build_ray
from src.scheduler import ExecutionMode, VerificationScheduler
from src.suites import build_tasks
from src.toric_model import to_primal


@pytest.mark.benchmark
class TestKernelPerformance:
    """Transform and hull benchmarks"""

    def test_legendre_fast(self, bumps, window, benchmark):
        """Benchmark: sorted-search conjugate on the window"""
        f = to_primal(bumps[0], window, strict=False)
        grid = bumps[0].geom.polytope_grid

        result = benchmark(legendre, f, grid, "fast")

        assert result.values.shape == (grid.n_nodes,)
        assert benchmark.stats['mean'] < 1.0

    def test_legendre_inverse_fast(self, desk_geom, desk_window, benchmark):
        """Benchmark: inverse transform at desk scale"""
        g0 = desk_geom.g0

        result = benchmark(legendre_inv, g0, desk_window, "fast")

        assert result.values.shape == (desk_window.n_nodes,)
        assert benchmark.stats['mean'] < 1.0

    def test_hull(self, desk_geom, benchmark):
        """Benchmark: lower hull of a random walk with 1025 nodes"""
        rng = np.random.default_rng(0)
        values = np.cumsum(rng.normal(size=desk_geom.nodes.size))

        hull = benchmark(hull_values, values, desk_geom.nodes)

        assert np.all(hull <= values + 1e-12)


@pytest.mark.benchmark
class TestConstructionPerformance:
    """Segment, envelope and ray benchmarks"""

    def test_segment(self, bumps, window, benchmark):
        """Benchmark: 33-sample segment with energies"""
        def run():
            path = segment(bumps[0], bumps[1], np.linspace(0.0, 1.0, 33), window=window)
            return path.energies()

        energies = benchmark(run)

        assert len(energies) == 33

    def test_bracket(self, zero, zoo_small, window, benchmark):
        """Benchmark: C-iteration for NU(0.25)"""
        result = benchmark(p_bracket, zoo_small["NU(0.25)"], zero, window=window)

        assert result.closed_form_gap < 1e-12

    @pytest.mark.slow
    def test_ray(self, zero, zoo_small, wide_window, benchmark):
        """Benchmark: l-limit ray on the wide window"""
        ts = np.linspace(0.0, 4.0, 9)

        ray = benchmark.pedantic(build_ray, args=(zero, zoo_small["NU(0.25)"]),
                                 kwargs={'t_samples': ts, 'window': wide_window}, rounds=3)

        assert ray.converged


@pytest.mark.benchmark
class TestSuitePerformance:
    """Scheduler overhead on real suite tasks"""

    @pytest.mark.parametrize("mode", [ExecutionMode.SERIAL, ExecutionMode.PARALLEL])
    def test_convex_core_suite(self, small_config, mode, benchmark):
        """Benchmark: convex_core suite serially and in parallel"""
        tasks = build_tasks('convex_core', small_config)
        scheduler = VerificationScheduler(max_concurrent=2)

        result = benchmark.pedantic(scheduler.run_sync, args=(tasks, mode), rounds=3)

        assert result.task_count == len(tasks)
        assert result.mode == mode
