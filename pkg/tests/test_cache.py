"""
Tests for the transform cache
"""

import threading

import numpy as np

from src.cache import TransformCache, array_digest, get_transform_cache
from src.convex_core import Grid1D


class TestArrayDigest:
    """Test digest keys"""

    def test_digest_depends_on_bytes(self):
        """Test equal arrays share a digest and perturbed ones do not"""
        a = np.linspace(0, 1, 9)
        b = a.copy()
        b[3] += 1e-15

        assert array_digest(a) == array_digest(a.copy())
        assert array_digest(a) != array_digest(b)

    def test_digest_includes_grid_key(self):
        """Test grid keys change the digest"""
        values = np.zeros(9)

        assert array_digest(Grid1D.polytope(8).key(), values) != array_digest(Grid1D.window(1.0, 8).key(), values)


class TestTransformCache:
    """Test LRU behaviour and statistics"""

    def test_hit_miss(self):
        """Test cache hit and miss"""
        cache = TransformCache(max_size=4)

        assert cache.get('k1') is None
        cache.set('k1', 1.5)
        assert cache.get('k1') == 1.5

        stats = cache.get_stats()
        assert stats['hits'] == 1
        assert stats['misses'] == 1
        assert stats['hit_rate'] == 50.0

    def test_lru_eviction(self):
        """Test the least recently used entry goes first"""
        cache = TransformCache(max_size=2)
        cache.set('a', 1)
        cache.set('b', 2)
        cache.get('a')
        cache.set('c', 3)

        assert cache.get('b') is None
        assert cache.get('a') == 1
        assert cache.get_stats()['evictions'] == 1

    def test_get_or_compute(self):
        """Test computation runs once per key"""
        cache = TransformCache(max_size=4)
        calls = []

        def compute():
            calls.append(1)
            return np.ones(3)

        first = cache.get_or_compute('x', compute)
        second = cache.get_or_compute('x', compute)

        assert first is second
        assert len(calls) == 1

    def test_clear(self):
        """Test clear resets entries and counters"""
        cache = TransformCache(max_size=4)
        cache.set('a', 1)
        cache.get('a')
        cache.clear()

        stats = cache.get_stats()
        assert stats['size'] == 0
        assert stats['total_requests'] == 0

    def test_thread_safety(self):
        """Test concurrent writers stay within capacity"""
        cache = TransformCache(max_size=16)

        def worker(offset):
            for i in range(200):
                cache.set(f"{offset}-{i}", i)
                cache.get(f"{offset}-{i // 2}")

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert cache.get_stats()['size'] <= 16

    def test_global_cache_singleton(self):
        """Test the process-wide cache is shared"""
        assert get_transform_cache() is get_transform_cache()
