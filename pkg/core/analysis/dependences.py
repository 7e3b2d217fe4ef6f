import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set

from core.analysis.dataflow import Dfg
from core.analysis.locations import AbstractLocation, AccessMode

logger = logging.getLogger(__name__)


class DependenceKind(Enum):
    RAW = 'RAW'
    WAR = 'WAR'
    WAW = 'WAW'
    RAR = 'RAR'


@dataclass(frozen=True)
class Dependence:
    from_stmt: int
    to_stmt: int
    kind: DependenceKind
    location: AbstractLocation

    def sort_key(self):
        return (self.from_stmt, self.to_stmt, self.kind.value, self.location.decl_id)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.from_stmt} -> {self.to_stmt} on {self.location}"


def _access_sets(dfg: Dfg, statement_id: int):
    reads: Set[AbstractLocation] = set()
    writes: Set[AbstractLocation] = set()
    for event in dfg.events.get(statement_id, []):
        if event.mode is AccessMode.READ:
            reads.add(event.target)
        else:
            writes.add(event.target)
    return reads, writes


def classify_dependences(dfg: Dfg, window: Optional[Iterable[int]] = None) -> List[Dependence]:
    """
    Every RAW, WAR and WAW pair between statements ``a`` and ``b`` where ``b``
    is reachable from ``a`` in the CFG; loops yield both directions.

    With a ``window``, only pairs inside it are considered and RAR pairs are
    materialized as well.
    """
    statements = sorted(dfg.events) if window is None else sorted(set(window) & set(dfg.events))
    include_rar = window is not None
    sets = {s: _access_sets(dfg, s) for s in statements}
    reachable: Dict[int, Set[int]] = {s: dfg.cfg.reachable_from(s) for s in statements}

    found: Set[Dependence] = set()
    for first in statements:
        first_reads, first_writes = sets[first]
        for second in statements:
            if second == first or second not in reachable[first]:
                continue
            second_reads, second_writes = sets[second]
            for location in first_writes & second_reads:
                found.add(Dependence(first, second, DependenceKind.RAW, location))
            for location in first_reads & second_writes:
                found.add(Dependence(first, second, DependenceKind.WAR, location))
            for location in first_writes & second_writes:
                found.add(Dependence(first, second, DependenceKind.WAW, location))
            if include_rar:
                for location in first_reads & second_reads:
                    found.add(Dependence(first, second, DependenceKind.RAR, location))
    return sorted(found, key=Dependence.sort_key)


def dependences_between(dependences: Iterable[Dependence], first: int, second: int) -> List[Dependence]:
    return [d for d in dependences if d.from_stmt == first and d.to_stmt == second]
