"""
Table Cache - Cache LRU thread-safe con limite in byte.

Contiene le tabelle di Kloosterman per modulo e le cache di Phi.
Un solo writer costruisce ogni voce; i lettori concorrenti vedono
sempre tabelle complete (la voce entra nella cache solo a costruzione finita).
"""

import logging
import threading
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Optional

import numpy as np

logger = logging.getLogger(__name__)


def nbytes_of(value: Any) -> int:
    """Stima dell'occupazione di una voce (array numpy o oggetti con .nbytes)."""
    if isinstance(value, np.ndarray):
        return int(value.nbytes)
    size = getattr(value, "nbytes", None)
    if size is not None:
        return int(size)
    return 64


class TableCache:
    """
    Cache LRU con capacita' in byte.

    Caratteristiche:
    - get_or_build: costruzione lazy, una sola volta per chiave
    - Thread-safe (Lock per la mappa, Lock per chiave durante il build)
    - Statistiche hits/misses/evictions
    """

    _instance = None

    @classmethod
    def get_instance(cls) -> "TableCache":
        if cls._instance is None:
            # Default ragionevole se nessuno ha chiamato initialize()
            cls._instance = cls(max_bytes=256 * 1024 * 1024)
        return cls._instance

    @classmethod
    def initialize(cls, max_bytes: int) -> "TableCache":
        if cls._instance is not None:
            cls._instance.max_bytes = int(max_bytes)
            return cls._instance
        cls._instance = cls(max_bytes=max_bytes)
        return cls._instance

    def __init__(self, max_bytes: int):
        self.max_bytes = int(max_bytes)
        self._entries: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._sizes: Dict[Hashable, int] = {}
        self._bytes = 0
        self._lock = threading.Lock()
        self._build_locks: Dict[Hashable, threading.Lock] = {}
        self._stats = {
            'hits': 0,
            'misses': 0,
            'evictions': 0
        }
        logger.info(f"🗄️ TableCache initialized (cap {self.max_bytes / 2**20:.0f} MiB)")

    def get(self, key: Hashable) -> Optional[Any]:
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                self._stats['hits'] += 1
                return self._entries[key]
            return None

    def put(self, key: Hashable, value: Any) -> None:
        size = nbytes_of(value)
        with self._lock:
            if key in self._entries:
                self._bytes -= self._sizes.pop(key)
                del self._entries[key]
            self._entries[key] = value
            self._sizes[key] = size
            self._bytes += size
            while self._bytes > self.max_bytes and len(self._entries) > 1:
                old_key, _ = self._entries.popitem(last=False)
                self._bytes -= self._sizes.pop(old_key)
                self._stats['evictions'] += 1
                logger.debug(f"♻️ Evicted {old_key}")

    def get_or_build(self, key: Hashable, builder: Callable[[], Any]) -> Any:
        """Ritorna la voce in cache o la costruisce (un solo builder per chiave)."""
        value = self.get(key)
        if value is not None:
            return value

        with self._lock:
            build_lock = self._build_locks.setdefault(key, threading.Lock())

        with build_lock:
            value = self.get(key)
            if value is not None:
                return value
            with self._lock:
                self._stats['misses'] += 1
            value = builder()
            self.put(key, value)

        with self._lock:
            self._build_locks.pop(key, None)
        return value

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._sizes.clear()
            self._bytes = 0

    @property
    def current_bytes(self) -> int:
        with self._lock:
            return self._bytes

    def get_stats(self) -> Dict[str, int]:
        with self._lock:
            stats = self._stats.copy()
            stats['entries'] = len(self._entries)
            stats['bytes'] = self._bytes
            return stats

    def log_stats(self) -> None:
        stats = self.get_stats()
        logger.info(
            f"📋 TableCache: {stats['entries']} entries, {stats['bytes'] / 2**20:.1f} MiB, "
            f"hits={stats['hits']} misses={stats['misses']} evictions={stats['evictions']}"
        )
