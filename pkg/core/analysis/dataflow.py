"""
Def-use graphs from reaching definitions over a Cfg.

Statement ids are CFG block ids; ``Cfg.blocks[i].node`` maps them back to
the AST. Writes to a whole variable kill earlier definitions of its
location, writes through an index or a field do not.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from core.analysis.accesses import AccessCollector
from core.analysis.cfg import Cfg
from core.analysis.locations import AbstractLocation, AccessEvent, AccessMode
from core.analysis.pointers import PointsToMap
from core.analysis.summaries import MethodSummary, callee_effects, function_ids
from core.solidity.ast_nodes import SourceUnit
from core.solidity.calls import TypeScope

logger = logging.getLogger(__name__)

Definition = Tuple[int, AbstractLocation]


@dataclass
class Dfg:
    cfg: Cfg
    graph: nx.MultiDiGraph
    events: Dict[int, List[AccessEvent]] = field(default_factory=dict)
    reaching: Dict[int, FrozenSet[Definition]] = field(default_factory=dict)

    @property
    def function_id(self) -> str:
        return self.cfg.function_id

    def defs(self, statement_id: int) -> Set[AbstractLocation]:
        return {e.target for e in self.events.get(statement_id, []) if e.mode.is_write}

    def uses(self, statement_id: int) -> Set[AbstractLocation]:
        return {e.target for e in self.events.get(statement_id, []) if e.mode is AccessMode.READ}

    def edges(self) -> List[Tuple[int, int, AbstractLocation]]:
        found = {(u, v, data['location']) for u, v, data in self.graph.edges(data=True)}
        return sorted(found, key=lambda e: (e[0], e[1], e[2].decl_id))

    def uses_of(self, statement_id: int, location: Optional[AbstractLocation] = None) -> List[int]:
        """Statements that read what ``statement_id`` defines"""
        targets = set()
        for _, v, data in self.graph.out_edges(statement_id, data=True):
            if location is None or data['location'] == location:
                targets.add(v)
        return sorted(targets)

    def definitions_of(self, statement_id: int) -> List[int]:
        return sorted({u for u, _ in self.graph.in_edges(statement_id)})


class DfgBuilder:
    def __init__(self, cfg: Cfg, points_to: PointsToMap, summaries: Optional[Dict[str, MethodSummary]] = None,
                 unit: Optional[SourceUnit] = None):
        self.cfg = cfg
        self.points_to = points_to
        self.unit = unit
        effects = None
        if summaries is not None and unit is not None:
            effects = callee_effects(summaries, function_ids(unit))
        self.effects = effects
        self.body_collector = AccessCollector(TypeScope(unit, cfg.contract, cfg.function), points_to, effects)
        self._collectors: Dict[int, AccessCollector] = {}

    def _collector(self, block) -> AccessCollector:
        if block.owner is None or block.owner is self.cfg.function:
            return self.body_collector
        key = block.frame
        if key not in self._collectors:
            self._collectors[key] = AccessCollector(
                TypeScope(self.unit, self.cfg.contract, block.owner), self.points_to, self.effects,
                bindings=block.bindings, binding_scope=self.body_collector,
            )
        return self._collectors[key]

    def build(self) -> Dfg:
        events: Dict[int, List[AccessEvent]] = {}
        for block in self.cfg.statement_blocks():
            events[block.block_id] = self._collector(block).header_events(block.node, block.block_id)

        gen: Dict[int, Set[Definition]] = {}
        killed: Dict[int, Set[AbstractLocation]] = {}
        for block_id, block_events in events.items():
            gen[block_id] = {(block_id, e.target) for e in block_events if e.mode.is_write}
            killed[block_id] = {e.target for e in block_events if e.mode.is_write and e.strong}

        reaching_in: Dict[int, Set[Definition]] = {b: set() for b in self.cfg.blocks}
        reaching_out: Dict[int, Set[Definition]] = {b: set() for b in self.cfg.blocks}
        worklist = sorted(self.cfg.blocks)
        while worklist:
            block_id = worklist.pop(0)
            incoming: Set[Definition] = set()
            for predecessor in self.cfg.predecessors(block_id):
                incoming |= reaching_out[predecessor]
            reaching_in[block_id] = incoming
            kill = killed.get(block_id, set())
            outgoing = gen.get(block_id, set()) | {d for d in incoming if d[1] not in kill}
            if outgoing != reaching_out[block_id]:
                reaching_out[block_id] = outgoing
                for successor in self.cfg.successors(block_id):
                    if successor not in worklist:
                        worklist.append(successor)

        graph = nx.MultiDiGraph()
        graph.add_nodes_from(events)
        for block_id, block_events in events.items():
            for event in block_events:
                if event.mode is not AccessMode.READ:
                    continue
                for definition, location in reaching_in[block_id]:
                    if location == event.target:
                        graph.add_edge(definition, block_id, key=location, location=location)
        logger.debug(f"DFG for {self.cfg.function_id}: {graph.number_of_edges()} def-use edge(s)")
        return Dfg(self.cfg, graph, events, {b: frozenset(s) for b, s in reaching_in.items()})


def build_dfg(cfg: Cfg, points_to: PointsToMap, summaries: Optional[Dict[str, MethodSummary]] = None,
              unit: Optional[SourceUnit] = None) -> Dfg:
    """Reaching-definitions def-use graph; internal calls read and write through callee summaries"""
    return DfgBuilder(cfg, points_to, summaries, unit).build()
