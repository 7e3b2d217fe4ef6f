"""
Shared detector plumbing: the strategy base class and site helpers.
"""
import logging
from typing import Iterable, List, Optional, Set

from core.analysis.cfg import CfgBlock, header_nodes, is_revert
from core.analysis.locations import TIMESTAMP
from core.analysis.unit_analysis import CallSite, FunctionAnalysis, UnitAnalysis
from core.solidity.ast_nodes import (
    Block, ContractDef, Expression, ExpressionStatement, FunctionCall, Identifier, IfStatement, Node,
    VarDecl, walk,
)
from core.solidity.calls import resolve_call
from core.solidity.printer import print_node
from models.finding import DetectorVote, Site, VulnerabilityClass

logger = logging.getLogger(__name__)

CHECK_FUNCTIONS = ('require', 'assert')
COMPARISON_OPS = ('==', '!=', '<', '>', '<=', '>=')


class AbstractDetector:
    """
    One detection strategy for one vulnerability class.

    Subclasses set NAME (syntactic | dataflow | semantic), VULN_CLASS and
    HELP, and implement ``_detect``.
    """
    NAME = ''
    VULN_CLASS: Optional[VulnerabilityClass] = None
    HELP = ''

    def detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        try:
            votes = self._detect(analysis)
        except Exception as e:
            logger.error(f"Error in detector {self.NAME}/{self.VULN_CLASS.value}: {str(e)}")
            return []
        unique = {}
        for vote in votes:
            unique.setdefault(vote.site.key, vote)
        return list(unique.values())

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        raise NotImplementedError

    def vote(self, site: Site, note: str = '') -> DetectorVote:
        return DetectorVote(self.NAME, self.VULN_CLASS, site, note)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.NAME}, {self.VULN_CLASS.value})"


def describe(node: Node, limit: int = 80) -> str:
    try:
        text = ' '.join(print_node(node).split())
    except Exception:
        text = type(node).__name__
    return text if len(text) <= limit else text[:limit - 3] + '...'


def call_site(analysis: FunctionAnalysis, site: CallSite) -> Site:
    span = site.call.span
    return Site(analysis.contract.name, analysis.function.display_name, site.ordinal, site.call.node_id,
                span.line, span.start, span.end, describe(site.call))


def parameter_site(analysis: FunctionAnalysis, index: int, param: VarDecl) -> Site:
    span = param.span
    return Site(analysis.contract.name, analysis.function.display_name, index, param.node_id,
                span.line, span.start, span.end, param.name)


def contract_site(contract: ContractDef) -> Site:
    span = contract.span
    return Site(contract.name, '', 0, contract.node_id, span.line, span.start, span.end, contract.name)


def analyzed_functions(analysis: UnitAnalysis) -> List[FunctionAnalysis]:
    return [analysis.functions[fid] for fid in sorted(analysis.functions)]


def is_check_call(node: Node) -> bool:
    return (isinstance(node, FunctionCall) and isinstance(node.callee, Identifier)
            and node.callee.name in CHECK_FUNCTIONS)


def check_expressions(block: CfgBlock) -> List[Expression]:
    """Conditions a block tests: require/assert arguments or a branch/loop condition"""
    node = block.node
    if block.role == 'condition':
        return [n for n in header_nodes(block) if n is not None]
    if isinstance(node, ExpressionStatement):
        found = []
        for inner in walk(node.expression):
            if is_check_call(inner) and inner.arguments:
                found.append(inner.arguments[0])
        return found
    return []


def contains(root: Optional[Node], target: Node) -> bool:
    return root is not None and any(n is target for n in walk(root))


def is_inside_condition(analysis: FunctionAnalysis, block_id: int, call: FunctionCall) -> bool:
    """True when ``call`` sits in a require/assert argument or in a branch/loop condition"""
    block = analysis.cfg.blocks[block_id]
    return any(contains(expression, call) for expression in check_expressions(block))


def external_call_blocks(analysis: FunctionAnalysis) -> Set[int]:
    blocks = set()
    for block in analysis.cfg.statement_blocks():
        scope = analysis.scope_for(block)
        for root in header_nodes(block):
            for node in walk(root):
                if isinstance(node, FunctionCall) and resolve_call(node, scope).kind.is_external:
                    blocks.add(block.block_id)
    return blocks


def flows_from(analysis: FunctionAnalysis, sources: Iterable[int]) -> Set[int]:
    """Blocks transitively reached through def-use edges from ``sources``, sources included"""
    seen = set(sources)
    stack = list(seen)
    while stack:
        current = stack.pop()
        for use in analysis.dfg.uses_of(current):
            if use not in seen:
                seen.add(use)
                stack.append(use)
    return seen


def storage_writes_after(analysis: FunctionAnalysis, block_id: int, include_self: bool = True) -> List[int]:
    """Blocks writing a state location that execute after ``block_id``, modifier suffixes included"""
    candidates = set(analysis.cfg.reachable_from(block_id))
    if include_self:
        candidates.add(block_id)
    writes = []
    for candidate in sorted(candidates):
        block = analysis.cfg.blocks[candidate]
        if block.role in ('entry', 'exit'):
            continue
        if analysis.state_writes(candidate):
            writes.append(candidate)
    return writes


def controlled_by_external_call(analysis: FunctionAnalysis, block_id: int) -> bool:
    """Some enclosing branch condition calls out or reads a value produced by an external call"""
    call_blocks = external_call_blocks(analysis)
    tainted = flows_from(analysis, call_blocks)
    for guard in analysis.cfg.guards_of(block_id):
        if guard in call_blocks or guard in tainted:
            return True
    return False


def timestamp_dependent(analysis: FunctionAnalysis, block_id: int) -> bool:
    readers = [b for b, events in analysis.dfg.events.items()
               if any(e.target == TIMESTAMP for e in events)]
    return block_id in flows_from(analysis, readers)


def is_if_revert(node: Node) -> bool:
    if not isinstance(node, IfStatement):
        return False
    body = node.true_body
    first = body.statements[0] if isinstance(body, Block) and body.statements else body
    return is_revert(first)
