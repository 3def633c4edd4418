"""
Small in-process LRU cache for expensive numerical factors.

Field generation factorizes an n_cells x n_cells correlation matrix. That
matrix depends only on the grid and the correlation structure, not on the
mean or standard deviation of log-permeability, so one factor serves every
proposal that shares a correlation length. Each worker process holds its own
cache; entries are immutable arrays.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Callable, Generic, Optional, TypeVar


T = TypeVar("T")


@dataclass(frozen=True)
class CacheStats:
    hits: int
    misses: int
    items: int


class FactorCache(Generic[T]):
    """
    Bounded least-recently-used cache.

    - Keys are plain strings built with ``stable_cache_key``.
    - Values are never mutated by readers (factors are marked read-only).
    """

    def __init__(self, max_items: int = 8):
        self._max_items = max(1, int(max_items))
        self._data: "OrderedDict[str, T]" = OrderedDict()
        self._hits = 0
        self._misses = 0

    def get(self, key: str) -> Optional[T]:
        item = self._data.get(key)
        if item is None:
            self._misses += 1
            return None
        self._data.move_to_end(key)
        self._hits += 1
        return item

    def set(self, key: str, value: T) -> None:
        self._data[key] = value
        self._data.move_to_end(key)
        while len(self._data) > self._max_items:
            self._data.popitem(last=False)

    def get_or_compute(self, key: str, compute: Callable[[], T]) -> T:
        value = self.get(key)
        if value is None:
            value = compute()
            self.set(key, value)
        return value

    def clear(self) -> None:
        self._data.clear()

    def stats(self) -> CacheStats:
        return CacheStats(
            hits=self._hits,
            misses=self._misses,
            items=len(self._data),
        )


def stable_cache_key(*parts: Any) -> str:
    """
    Build a stable string key from arbitrary parts.

    Floats are rendered with ``repr`` so keys distinguish values that differ
    in the last bit.
    """
    return "|".join("" if p is None else (repr(p) if isinstance(p, float) else str(p)) for p in parts)
