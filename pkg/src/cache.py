"""
Transform Caching

LRU cache for primal transforms. The same (dual, window) pair is converted to
window values many times during a verify run (the reference f0, ray samples
compared by several checks); caching keeps those conversions single.
"""

import hashlib
import threading
from collections import OrderedDict
from typing import Any, Callable, Dict, Optional, TypeVar

import numpy as np

T = TypeVar("T")


def array_digest(*parts: Any) -> str:
    """sha256 over grid keys and raw array bytes.

    Args:
        *parts: numpy arrays, tuples from ``Grid1D.key()`` or plain scalars

    Returns:
        Hex digest
    """
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            arr = np.ascontiguousarray(part, dtype=float)
            digest.update(str(arr.shape).encode())
            digest.update(arr.tobytes())
        else:
            digest.update(repr(part).encode())
        digest.update(b"|")
    return digest.hexdigest()


class TransformCache:
    """
    Thread-safe LRU cache keyed by array digests

    Features:
    - LRU eviction policy
    - Hit/miss/eviction statistics
    - Safe under the thread pool used by the verify runner

    Example:
        >>> cache = TransformCache(max_size=64)
        >>> key = array_digest(window.key(), dual.values)
        >>> f = cache.get_or_compute(key, lambda: legendre_inv(dual, window))
    """

    def __init__(self, max_size: int = 256):
        """
        Initialize transform cache

        Args:
            max_size: Maximum number of cached items
        """
        self.max_size = max_size
        self.cache: "OrderedDict[str, Any]" = OrderedDict()
        self._lock = threading.Lock()
        self.stats = {
            'hits': 0,
            'misses': 0,
            'evictions': 0,
        }

    def get(self, key: str) -> Optional[Any]:
        """
        Get cached value

        Args:
            key: Digest from :func:`array_digest`

        Returns:
            Cached value or None
        """
        with self._lock:
            if key not in self.cache:
                self.stats['misses'] += 1
                return None
            self.cache.move_to_end(key)
            self.stats['hits'] += 1
            return self.cache[key]

    def set(self, key: str, value: Any) -> None:
        """
        Store a value, evicting the least recently used entry at capacity

        Args:
            key: Digest
            value: Immutable value to cache
        """
        with self._lock:
            if key not in self.cache and len(self.cache) >= self.max_size:
                self.cache.popitem(last=False)
                self.stats['evictions'] += 1
            self.cache[key] = value
            self.cache.move_to_end(key)

    def get_or_compute(self, key: str, compute: Callable[[], T]) -> T:
        """Return the cached value or compute, store and return it.

        The computation runs outside the lock; two threads racing on the same
        key both compute and the later store wins with an identical value.
        """
        value = self.get(key)
        if value is not None:
            return value
        value = compute()
        self.set(key, value)
        return value

    def clear(self) -> None:
        """Drop all entries and reset statistics"""
        with self._lock:
            self.cache.clear()
            self.stats = {'hits': 0, 'misses': 0, 'evictions': 0}

    def get_stats(self) -> Dict[str, Any]:
        """
        Get cache statistics

        Returns:
            Dictionary with cache statistics
        """
        with self._lock:
            total = self.stats['hits'] + self.stats['misses']
            hit_rate = (self.stats['hits'] / total * 100) if total > 0 else 0.0
            return {
                **self.stats,
                'size': len(self.cache),
                'max_size': self.max_size,
                'hit_rate': hit_rate,
                'total_requests': total,
            }


_global_cache: Optional[TransformCache] = None
_global_lock = threading.Lock()


def get_transform_cache(max_size: int = 256) -> TransformCache:
    """
    Get the process-wide TransformCache

    Args:
        max_size: Size used when the cache is first created

    Returns:
        Global TransformCache instance
    """
    global _global_cache
    with _global_lock:
        if _global_cache is None:
            _global_cache = TransformCache(max_size=max_size)
        return _global_cache

