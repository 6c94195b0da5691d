"""Bounded in-memory cache for eigen-decompositions of discretized Hamiltonians."""
import hashlib
import json
import logging
import os
import threading
from itertools import count
from typing import Any, Optional

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


class CacheEntry:
    """Cached value with its insertion order"""
    _sequence = count()

    def __init__(self, value: Any):
        self.value = value
        self.order = next(self._sequence)


class SpectrumCache:
    """
    In-memory cache for spectra keyed by model parameters and grid.

    Entries never expire: a spectrum is a pure function of its key. When
    the cache is full the oldest 10% of entries are evicted.
    """

    def __init__(self, max_size: int = 64):
        """
        Initialize cache

        Args:
            max_size: Maximum number of entries before eviction
        """
        if max_size < 1:
            raise ValueError(f"Cache size must be positive, got {max_size}")
        self._cache = {}
        self._max_size = max_size
        self._hits = 0
        self._misses = 0
        self._lock = threading.Lock()

    def generate_key(self, prefix: str, data: Any) -> str:
        """
        Generate cache key from data

        Args:
            prefix: Cache key prefix (e.g., 'scarf', 'morse')
            data: Parameters and discretization (dict, string, etc.)

        Returns:
            Cache key string
        """
        if isinstance(data, dict):
            data_str = json.dumps(data, sort_keys=True, default=str)
        else:
            data_str = str(data)

        hash_obj = hashlib.md5(data_str.encode())
        return f"{prefix}:{hash_obj.hexdigest()}"

    def get(self, key: str) -> Optional[Any]:
        with self._lock:
            entry = self._cache.get(key)
            if entry is None:
                self._misses += 1
                return None
            self._hits += 1
        logger.debug(f"Cache hit: {key}")
        return entry.value

    def set(self, key: str, value: Any):
        with self._lock:
            if key not in self._cache and len(self._cache) >= self._max_size:
                self._evict_oldest()
            self._cache[key] = CacheEntry(value)
        logger.debug(f"Cache set: {key}")

    def _evict_oldest(self):
        """Evict 10% of oldest entries; caller holds the lock"""
        if not self._cache:
            return
        sorted_keys = sorted(self._cache.keys(), key=lambda k: self._cache[k].order)
        evict_count = max(1, len(sorted_keys) // 10)
        for key in sorted_keys[:evict_count]:
            del self._cache[key]
            logger.debug(f"Cache evicted: {key}")

    def clear(self):
        with self._lock:
            count_before = len(self._cache)
            self._cache.clear()
        logger.info(f"Cache cleared: {count_before} entries removed")

    def __len__(self) -> int:
        return len(self._cache)

    def stats(self) -> dict:
        """
        Get cache statistics

        Returns:
            Dictionary with cache stats
        """
        with self._lock:
            hits, misses, size = self._hits, self._misses, len(self._cache)
        total_requests = hits + misses
        hit_rate = (hits / total_requests * 100) if total_requests > 0 else 0

        return {
            "size": size,
            "max_size": self._max_size,
            "hits": hits,
            "misses": misses,
            "hit_rate": f"{hit_rate:.1f}%",
            "total_requests": total_requests
        }


spectrum_cache = SpectrumCache(max_size=int(os.getenv("SL2C_CACHE_SIZE", "64")))
