"""
Per-unit analysis bundle: merged contracts, points-to, summaries and a
CFG/DFG pair for every function with a body. Passes run in that order.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from core.analysis.cfg import Cfg, CfgBlock, build_cfg, header_nodes, is_revert
from core.analysis.dataflow import Dfg, build_dfg
from core.analysis.pointers import PointsToMap, pointer_analysis
from core.analysis.summaries import MethodSummary, function_id, function_ids, summarize
from core.errors import MissingModifier, SolmendError, UnsupportedConstruct
from core.solidity.ast_nodes import (
    Assignment, Block, ContractDef, ElementaryType, ExpressionStatement, FunctionCall, FunctionDef,
    Identifier, IfStatement, Literal, SourceUnit, UnaryOp, walk,
)
from core.solidity.calls import CallClassification, TypeScope, is_transfer_builtin, resolve_call
from core.solidity.inheritance import merge_contract

logger = logging.getLogger(__name__)


@dataclass
class CallSite:
    block_id: int
    call: FunctionCall
    classification: CallClassification
    ordinal: int

    @property
    def kind(self):
        return self.classification.kind


@dataclass
class FunctionAnalysis:
    contract: ContractDef
    function: FunctionDef
    function_id: str
    scope: TypeScope
    cfg: Cfg
    dfg: Dfg
    guarded: bool = False
    unit: Optional[SourceUnit] = None
    _scopes: Dict[int, TypeScope] = field(default_factory=dict, repr=False)

    def scope_for(self, block: CfgBlock) -> TypeScope:
        if block.owner is None or block.owner is self.function:
            return self.scope
        key = block.frame
        if key not in self._scopes:
            self._scopes[key] = TypeScope(self.unit, self.contract, block.owner)
        return self._scopes[key]

    def calls(self) -> List[CallSite]:
        """Every call site in execution order of blocks, with its classification"""
        sites = []
        for block in self.cfg.statement_blocks():
            scope = self.scope_for(block)
            for root in header_nodes(block):
                for node in walk(root):
                    if isinstance(node, FunctionCall):
                        sites.append(CallSite(block.block_id, node, resolve_call(node, scope), 0))
        return sites

    def external_calls(self) -> List[CallSite]:
        """External calls and ether transfers in the function body, numbered in source order"""
        sites = []
        for site in self.calls():
            block = self.cfg.blocks[site.block_id]
            if not block.in_body:
                continue
            if site.kind.is_external or is_transfer_builtin(site.call):
                site.ordinal = len(sites)
                sites.append(site)
        return sites

    def state_writes(self, block_id: int):
        return {e.target for e in self.dfg.events.get(block_id, []) if e.mode.is_write and e.target.state}


@dataclass
class UnitAnalysis:
    unit: SourceUnit
    contracts: Dict[str, ContractDef]
    points_to: PointsToMap
    summaries: Dict[str, MethodSummary]
    functions: Dict[str, FunctionAnalysis] = field(default_factory=dict)
    function_ids: Dict[int, str] = field(default_factory=dict)
    errors: List[SolmendError] = field(default_factory=list)  # per-function failures, function left out

    def function(self, contract: str, name: str) -> Optional[FunctionAnalysis]:
        return self.functions.get(f"{contract}.{name}")

    def for_contract(self, contract: str) -> List[FunctionAnalysis]:
        return [fa for fid, fa in self.functions.items() if fa.contract.name == contract]

    def summary_of(self, function: FunctionDef) -> Optional[MethodSummary]:
        return self.summaries.get(self.function_ids.get(function.node_id, ''))


def _is_bool_state(name: str, scope: TypeScope) -> bool:
    decl = scope.state_declarations.get(name)
    return (decl is not None and scope.resolve(name) is decl
            and isinstance(decl.type_name, ElementaryType) and decl.type_name.name == 'bool')


def _checked_flag(block: CfgBlock, scope: TypeScope) -> Optional[str]:
    """Flag ``v`` of ``require(!v)`` or ``if (v) revert();``"""
    node = block.node
    if isinstance(node, ExpressionStatement) and isinstance(node.expression, FunctionCall):
        call = node.expression
        if isinstance(call.callee, Identifier) and call.callee.name == 'require' and call.arguments:
            argument = call.arguments[0]
            if isinstance(argument, UnaryOp) and argument.operator == '!' \
                    and isinstance(argument.operand, Identifier) and _is_bool_state(argument.operand.name, scope):
                return argument.operand.name
    if isinstance(node, IfStatement) and isinstance(node.condition, Identifier) \
            and _is_bool_state(node.condition.name, scope):
        body = node.true_body
        first = body.statements[0] if isinstance(body, Block) and body.statements else body
        if is_revert(first):
            return node.condition.name
    return None


def _set_flag(block: CfgBlock) -> Optional[Tuple[str, str]]:
    node = block.node
    if isinstance(node, ExpressionStatement) and isinstance(node.expression, Assignment):
        assignment = node.expression
        if assignment.operator == '=' and isinstance(assignment.left, Identifier) \
                and isinstance(assignment.right, Literal) and assignment.right.kind == 'bool':
            return assignment.left.name, assignment.right.value
    return None


def is_reentrancy_guarded(analysis: FunctionAnalysis) -> bool:
    """
    True when a bool state flag is tested false and then set true before the
    first external call, in the body or in a modifier prefix.
    """
    checked = set()
    for block in analysis.cfg.statement_blocks():
        scope = analysis.scope_for(block)
        flag = _checked_flag(block, scope)
        if flag is not None:
            checked.add(flag)
        assigned = _set_flag(block)
        if assigned is not None and assigned[1] == 'true' and assigned[0] in checked:
            return True
        for root in header_nodes(block):
            for node in walk(root):
                if isinstance(node, FunctionCall) and resolve_call(node, scope).kind.is_external:
                    return False
    return False


def analyze_function(unit: SourceUnit, contract: ContractDef, merged: ContractDef, function: FunctionDef,
                     points_to: PointsToMap, summaries: Dict[str, MethodSummary]) -> FunctionAnalysis:
    cfg = build_cfg(function, merged, unit)
    cfg.function_id = function_id(contract, function)
    dfg = build_dfg(cfg, points_to, summaries, unit)
    analysis = FunctionAnalysis(merged, function, cfg.function_id, TypeScope(unit, merged, function),
                                cfg, dfg, unit=unit)
    analysis.guarded = is_reentrancy_guarded(analysis)
    return analysis


def analyze_unit(unit: SourceUnit) -> UnitAnalysis:
    """Run pointer analysis, summaries and per-function CFG/DFG construction"""
    points_to = pointer_analysis(unit)
    summaries = summarize(unit, points_to)
    contracts = {c.name: merge_contract(c, unit) for c in unit.contracts}
    result = UnitAnalysis(unit, contracts, points_to, summaries, function_ids=function_ids(unit))
    for contract in unit.contracts:
        merged = contracts[contract.name]
        for function in contract.functions:
            if function.body is None:
                continue
            try:
                analysis = analyze_function(unit, contract, merged, function, points_to, summaries)
            except (MissingModifier, UnsupportedConstruct) as e:
                logger.error(f"Error analyzing {contract.name}.{function.display_name}: {str(e)}")
                result.errors.append(e)
                continue
            result.functions[analysis.function_id] = analysis
    logger.info(f"Analyzed {len(result.functions)} function(s) in {unit.path}")
    return result
