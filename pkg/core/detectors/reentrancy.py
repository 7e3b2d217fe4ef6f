"""
Reentrancy: storage written after an external call.

Three strategies of decreasing recall: a lexical scan, CFG reachability of
live storage writes, and the same minus writes that only run depending on an
external call's result.
"""
import logging
from typing import List, Set

from core.analysis.cfg import header_nodes
from core.analysis.unit_analysis import CallSite, FunctionAnalysis, UnitAnalysis
from core.detectors.base import (
    AbstractDetector, analyzed_functions, call_site, controlled_by_external_call, storage_writes_after,
)
from core.solidity.ast_nodes import Assignment, UnaryOp, base_identifier, walk
from models.finding import DetectorVote, VulnerabilityClass

logger = logging.getLogger(__name__)


def candidate_functions(analysis: UnitAnalysis) -> List[FunctionAnalysis]:
    return [fa for fa in analyzed_functions(analysis)
            if not fa.function.is_constructor and not fa.guarded and fa.contract.kind != 'interface']


def live_state_vars(analysis: UnitAnalysis, contract_name: str) -> Set[str]:
    """State variables some function of the contract reads, plus public ones"""
    contract = analysis.contracts[contract_name]
    live = {v.name for v in contract.state_vars if v.visibility == 'public'}
    for function in contract.functions:
        summary = analysis.summary_of(function)
        if summary is not None:
            live |= summary.state_vars_read
    return live


def reentrant_writes(analysis: UnitAnalysis, fa: FunctionAnalysis, site: CallSite) -> List[int]:
    """Blocks writing a live storage location once ``site`` has executed"""
    live = live_state_vars(analysis, fa.contract.name)
    return [b for b in storage_writes_after(fa, site.block_id)
            if any(loc.name in live for loc in fa.state_writes(b))]


class SyntacticReentrancy(AbstractDetector):
    NAME = 'syntactic'
    VULN_CLASS = VulnerabilityClass.REENTRANCY
    HELP = 'External call lexically followed by an assignment to a state variable'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        votes = []
        for fa in candidate_functions(analysis):
            body_blocks = [b for b in fa.cfg.statement_blocks() if b.in_body]
            for site in fa.external_calls():
                later = [b for b in body_blocks if b.block_id > site.block_id]
                if any(self._assigns_state(fa, b) for b in later):
                    votes.append(self.vote(call_site(fa, site)))
        return votes

    @staticmethod
    def _assigns_state(fa: FunctionAnalysis, block) -> bool:
        for root in header_nodes(block):
            for node in walk(root):
                target = None
                if isinstance(node, Assignment):
                    target = node.left
                elif isinstance(node, UnaryOp) and node.operator in ('++', '--', 'delete'):
                    target = node.operand
                identifier = base_identifier(target) if target is not None else None
                if identifier is not None and fa.scope.is_state(fa.scope.resolve(identifier.name)):
                    return True
        return False


class DataflowReentrancy(AbstractDetector):
    NAME = 'dataflow'
    VULN_CLASS = VulnerabilityClass.REENTRANCY
    HELP = 'Live storage write reachable from an external call in the CFG'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        votes = []
        for fa in candidate_functions(analysis):
            for site in fa.external_calls():
                if reentrant_writes(analysis, fa, site):
                    votes.append(self.vote(call_site(fa, site)))
        return votes


class SemanticReentrancy(AbstractDetector):
    NAME = 'semantic'
    VULN_CLASS = VulnerabilityClass.REENTRANCY
    HELP = 'Reachable live storage write not controlled by an external call result'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        votes = []
        for fa in candidate_functions(analysis):
            for site in fa.external_calls():
                writes = [b for b in reentrant_writes(analysis, fa, site)
                          if not controlled_by_external_call(fa, b)]
                if writes:
                    votes.append(self.vote(call_site(fa, site)))
        return votes


DETECTORS = [SyntacticReentrancy, DataflowReentrancy, SemanticReentrancy]
