"""
Method summaries: state variables a function reads and writes, and whether it
reaches an external call or an ether transfer, closed over internal calls.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import networkx as nx

from core.analysis.accesses import AccessCollector
from core.analysis.pointers import PointsToMap, pointer_analysis
from core.solidity.ast_nodes import ContractDef, FunctionDef, ModifierDef, SourceUnit
from core.solidity.calls import (
    CallKind, TypeScope, call_sites, internal_callee_name, is_transfer_builtin, resolve_call,
)
from core.solidity.inheritance import merge_contract

logger = logging.getLogger(__name__)


@dataclass
class MethodSummary:
    function_id: str
    state_vars_written: Set[str] = field(default_factory=set)
    state_vars_read: Set[str] = field(default_factory=set)
    makes_external_call: bool = False
    makes_ether_transfer: bool = False
    callees: Set[str] = field(default_factory=set)

    def absorb(self, other: "MethodSummary") -> bool:
        """Union ``other``'s effects into this summary; True when anything grew"""
        before = (len(self.state_vars_written), len(self.state_vars_read),
                  self.makes_external_call, self.makes_ether_transfer)
        self.state_vars_written |= other.state_vars_written
        self.state_vars_read |= other.state_vars_read
        self.makes_external_call = self.makes_external_call or other.makes_external_call
        self.makes_ether_transfer = self.makes_ether_transfer or other.makes_ether_transfer
        after = (len(self.state_vars_written), len(self.state_vars_read),
                 self.makes_external_call, self.makes_ether_transfer)
        return before != after

    def to_dict(self) -> Dict:
        return {
            'function': self.function_id,
            'writes': sorted(self.state_vars_written),
            'reads': sorted(self.state_vars_read),
            'external_call': self.makes_external_call,
            'ether_transfer': self.makes_ether_transfer,
        }


def function_id(contract: ContractDef, function: FunctionDef) -> str:
    return f"{contract.name}.{function.display_name}"


def function_ids(unit: SourceUnit) -> Dict[int, str]:
    """Function node id to ``Contract.function`` for every declared function"""
    ids = {}
    for contract in unit.contracts:
        for function in contract.functions:
            ids[function.node_id] = function_id(contract, function)
    return ids


def _applied_modifiers(function: FunctionDef, merged: ContractDef) -> List[ModifierDef]:
    applied = []
    for invocation in function.modifiers:
        modifier = merged.modifier(invocation.name)
        if modifier is not None and modifier.body is not None:
            applied.append(modifier)
    return applied


class SummaryBuilder:
    def __init__(self, unit: SourceUnit, points_to: Optional[PointsToMap] = None):
        self.unit = unit
        self.points_to = points_to or pointer_analysis(unit)
        self.ids = function_ids(unit)
        self.summaries: Dict[str, MethodSummary] = {}
        self.call_graph = nx.DiGraph()

    def build(self) -> Dict[str, MethodSummary]:
        for contract in self.unit.contracts:
            merged = merge_contract(contract, self.unit)
            for function in contract.functions:
                if function.body is None:
                    continue
                fid = self.ids[function.node_id]
                self.call_graph.add_node(fid)
                summary = MethodSummary(fid)
                owners = [function] + _applied_modifiers(function, merged)
                for owner in owners:
                    self._direct_effects(summary, owner, TypeScope(self.unit, merged, owner))
                self.summaries[fid] = summary
                for callee in summary.callees:
                    self.call_graph.add_edge(fid, callee)
        self._close()
        return self.summaries

    def _direct_effects(self, summary: MethodSummary, owner, scope: TypeScope):
        collector = AccessCollector(scope, self.points_to)
        for event in collector.collect(owner.body):
            if not event.target.state:
                continue
            if event.mode.is_write:
                summary.state_vars_written.add(event.target.name)
            else:
                summary.state_vars_read.add(event.target.name)

        for call in call_sites(owner.body):
            if is_transfer_builtin(call):
                summary.makes_ether_transfer = True
                continue
            kind = resolve_call(call, scope).kind
            if kind.is_ether_transfer:
                summary.makes_ether_transfer = True
            if kind.is_external:
                summary.makes_external_call = True
            if kind is CallKind.INTERNAL and scope.contract is not None:
                name = internal_callee_name(call)
                for function in scope.contract.functions:
                    if name and function.display_name == name and function.node_id in self.ids:
                        summary.callees.add(self.ids[function.node_id])

    def _close(self):
        condensed = nx.condensation(self.call_graph)
        # callees first
        for component in reversed(list(nx.topological_sort(condensed))):
            members = sorted(m for m in condensed.nodes[component]['members'] if m in self.summaries)
            merged = MethodSummary('')
            for member in members:
                merged.absorb(self.summaries[member])
                for callee in self.summaries[member].callees:
                    if callee in self.summaries and callee not in members:
                        merged.absorb(self.summaries[callee])
            for member in members:
                self.summaries[member].absorb(merged)
        logger.debug(f"Summarized {len(self.summaries)} function(s) over "
                     f"{condensed.number_of_nodes()} call-graph component(s)")


def summarize(unit: SourceUnit, points_to: Optional[PointsToMap] = None) -> Dict[str, MethodSummary]:
    """Fixpoint of method summaries over the internal call graph of ``unit``"""
    return SummaryBuilder(unit, points_to).build()


def callee_effects(summaries: Dict[str, MethodSummary], ids: Dict[int, str]):
    """Adapter handing an AccessCollector the (reads, writes) of an internal callee"""
    def effects(function: FunctionDef) -> Optional[Tuple[Set[str], Set[str]]]:
        summary = summaries.get(ids.get(function.node_id, ''))
        if summary is None:
            return None
        return summary.state_vars_read, summary.state_vars_written
    return effects

