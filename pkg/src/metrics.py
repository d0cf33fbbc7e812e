"""
Run Metrics

Counters and wall-clock timings recorded while verify tasks execute.
They surface in summary.txt and report.json; CSV tables never carry them.
"""

import threading
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np


@dataclass
class Timer:
    """Elapsed seconds of one timed block, reported to its collector on exit"""

    name: str
    collector: 'MetricsCollector'
    elapsed: float = 0.0
    _started: Optional[float] = field(default=None, repr=False)

    def __enter__(self) -> 'Timer':
        self._started = time.perf_counter()
        return self

    def __exit__(self, *exc_info) -> None:
        if self._started is None:
            return
        self.elapsed = time.perf_counter() - self._started
        self.collector.record_time(self.name, self.elapsed)


def _summarize(samples: List[float]) -> Dict[str, float]:
    arr = np.asarray(samples, dtype=float)
    p50, p95 = np.percentile(arr, [50, 95])
    return {
        'count': int(arr.size),
        'total': float(arr.sum()),
        'min': float(arr.min()),
        'max': float(arr.max()),
        'avg': float(arr.mean()),
        'p50': float(p50),
        'p95': float(p95),
    }


class MetricsCollector:
    """
    Counters, gauges and timing samples shared by the scheduler's workers

    All mutation goes through one lock; worker threads record concurrently.

    Example:
        >>> metrics = MetricsCollector()
        >>> metrics.inc('checks.passed')
        >>> with metrics.time('task.rays'):
        ...     pass
        >>> metrics.get_stats()['counters']
        {'checks.passed': 1}
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._counts: Counter = Counter()
        self._gauges: Dict[str, float] = {}
        self._samples: Dict[str, List[float]] = {}

    def inc(self, name: str, value: int = 1) -> None:
        """Add ``value`` to the counter ``name``."""
        with self._lock:
            self._counts[name] += value

    def set_gauge(self, name: str, value: float) -> None:
        with self._lock:
            self._gauges[name] = value

    def record_time(self, name: str, duration: float) -> None:
        """Append one duration (seconds) to the samples kept under ``name``."""
        with self._lock:
            self._samples.setdefault(name, []).append(duration)

    @contextmanager
    def time(self, name: str) -> Iterator[Timer]:
        """Time the enclosed block under ``name``."""
        with Timer(name, self) as timer:
            yield timer

    def get_stats(self) -> Dict[str, Any]:
        """Snapshot: raw counters and gauges, plus count/total/min/max/avg/p50/p95 per timer."""
        with self._lock:
            counters = dict(self._counts)
            gauges = dict(self._gauges)
            samples = {name: list(values) for name, values in self._samples.items() if values}
        return {
            'counters': counters,
            'gauges': gauges,
            'timers': {name: _summarize(values) for name, values in samples.items()},
        }

    def format_stats(self) -> List[str]:
        """Indented summary lines: counters first, then timers, each sorted by name."""
        stats = self.get_stats()
        lines = [f"  {name}: {count}" for name, count in sorted(stats['counters'].items())]
        for name, timing in sorted(stats['timers'].items()):
            lines.append(
                f"  {name}: {timing['total']:.2f}s over {timing['count']} "
                f"(max {timing['max']:.2f}s)"
            )
        return lines

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()
            self._gauges.clear()
            self._samples.clear()


_shared: Optional[MetricsCollector] = None


def get_metrics() -> MetricsCollector:
    """Process-wide collector, created on first use"""
    global _shared
    if _shared is None:
        _shared = MetricsCollector()
    return _shared


__all__ = ['Timer', 'MetricsCollector', 'get_metrics']
