import hashlib
import logging
import threading
from collections import OrderedDict
from typing import Optional, Tuple

from core.analysis.unit_analysis import UnitAnalysis, analyze_unit
from core.solidity.ast_nodes import SourceUnit
from core.solidity.parser import parse

logger = logging.getLogger(__name__)

CacheEntry = Tuple[SourceUnit, UnitAnalysis]


class AnalysisCache:
    """
    Parsed units and their analyses keyed by the SHA-256 of the source text.

    Entries are shared between callers and must be treated as read-only;
    patching works on a deep copy.
    """

    def __init__(self, max_entries: int = 64):
        self.cache: "OrderedDict[str, CacheEntry]" = OrderedDict()
        self.max_entries = max_entries
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    @staticmethod
    def key(text: str) -> str:
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    def get(self, key: str) -> Optional[CacheEntry]:
        with self._lock:
            entry = self.cache.get(key)
            if entry is not None:
                self.cache.move_to_end(key)
                self.hits += 1
            return entry

    def set(self, key: str, value: CacheEntry) -> None:
        with self._lock:
            self.cache[key] = value
            self.cache.move_to_end(key)
            while len(self.cache) > self.max_entries:
                evicted, _ = self.cache.popitem(last=False)
                logger.debug(f"Evicted analysis {evicted[:12]}")

    def analyze_text(self, text: str, path: str = '<memory>') -> CacheEntry:
        """Parse and analyze ``text``, reusing an earlier result for identical text"""
        key = self.key(text)
        entry = self.get(key)
        if entry is not None:
            return entry
        self.misses += 1
        unit = parse(text, path)
        entry = (unit, analyze_unit(unit))
        self.set(key, entry)
        return entry

    def clear(self) -> None:
        with self._lock:
            self.cache.clear()

    def __len__(self) -> int:
        return len(self.cache)
