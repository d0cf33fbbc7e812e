"""
Tests for run metrics
"""

import threading

from src.metrics import MetricsCollector, get_metrics


class TestMetricsCollector:
    """Test counters, gauges and timers"""

    def test_counters_and_gauges(self):
        """Test increments and gauge updates"""
        metrics = MetricsCollector()
        metrics.inc('checks.passed')
        metrics.inc('checks.passed', 2)
        metrics.set_gauge('grid.n', 64)

        stats = metrics.get_stats()
        assert stats['counters'] == {'checks.passed': 3}
        assert stats['gauges'] == {'grid.n': 64}

    def test_timer(self):
        """Test timing blocks are recorded"""
        metrics = MetricsCollector()
        with metrics.time('task.energy') as timer:
            sum(range(1000))
        metrics.record_time('task.energy', 0.5)

        stats = metrics.get_stats()['timers']['task.energy']
        assert timer.elapsed >= 0.0
        assert stats['count'] == 2
        assert stats['max'] == 0.5
        assert stats['total'] >= 0.5

    def test_format_stats(self):
        """Test summary lines"""
        metrics = MetricsCollector()
        metrics.inc('tasks.failed')
        metrics.record_time('suite.rays', 2.0)

        lines = metrics.format_stats()
        assert lines[0] == "  tasks.failed: 1"
        assert lines[1] == "  suite.rays: 2.00s over 1 (max 2.00s)"

    def test_thread_safety(self):
        """Test concurrent increments"""
        metrics = MetricsCollector()

        def work():
            for _ in range(1000):
                metrics.inc('n')

        threads = [threading.Thread(target=work) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert metrics.get_stats()['counters']['n'] == 4000

    def test_reset(self):
        """Test reset clears everything"""
        metrics = MetricsCollector()
        metrics.inc('a')
        metrics.record_time('b', 1.0)
        metrics.reset()

        assert metrics.get_stats() == {'counters': {}, 'gauges': {}, 'timers': {}}

    def test_global_instance(self):
        """Test the shared collector"""
        assert get_metrics() is get_metrics()
