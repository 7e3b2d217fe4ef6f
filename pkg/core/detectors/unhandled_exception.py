"""
Unhandled exceptions: ``send`` and value-bearing ``call`` whose boolean
result never decides anything.
"""
import logging
from typing import List, Optional

from core.analysis.unit_analysis import CallSite, FunctionAnalysis, UnitAnalysis
from core.detectors.base import (
    AbstractDetector, analyzed_functions, call_site, check_expressions, flows_from, is_inside_condition,
)
from core.solidity.ast_nodes import (
    Assignment, Expression, ExpressionStatement, Identifier, TupleExpression, VarDecl, VarDeclStatement,
    walk,
)
from models.finding import DetectorVote, VulnerabilityClass

logger = logging.getLogger(__name__)


def _strip(expression: Optional[Expression]) -> Optional[Expression]:
    while isinstance(expression, TupleExpression) and len(expression.components) == 1 \
            and not expression.is_array:
        expression = expression.components[0]
    return expression


def transfer_sites(fa: FunctionAnalysis) -> List[CallSite]:
    """send / call-with-value sites, keeping the ordinals of all external calls"""
    return [s for s in fa.external_calls() if s.kind.returns_success_flag]


def is_bare_statement(fa: FunctionAnalysis, site: CallSite) -> bool:
    node = fa.cfg.blocks[site.block_id].node
    return isinstance(node, ExpressionStatement) and _strip(node.expression) is site.call


def captured_variable(fa: FunctionAnalysis, site: CallSite) -> Optional[VarDecl]:
    """Variable the call's success flag is stored into, if the statement does only that"""
    node = fa.cfg.blocks[site.block_id].node
    if isinstance(node, VarDeclStatement) and _strip(node.initial_value) is site.call:
        return node.declarations[0] if node.declarations else None
    if isinstance(node, ExpressionStatement) and isinstance(node.expression, Assignment):
        assignment = node.expression
        if assignment.operator == '=' and _strip(assignment.right) is site.call:
            target = assignment.left
            if isinstance(target, TupleExpression) and target.components:
                target = target.components[0]
            if isinstance(target, Identifier):
                return fa.scope.resolve(target.name)
    return None


def result_reaches_check(fa: FunctionAnalysis, site: CallSite) -> bool:
    reached = flows_from(fa, [site.block_id]) - {site.block_id}
    return any(check_expressions(fa.cfg.blocks[b]) for b in reached)


def result_tested_directly(fa: FunctionAnalysis, site: CallSite, decl: VarDecl) -> bool:
    for block_id in sorted(fa.cfg.reachable_from(site.block_id)):
        for condition in check_expressions(fa.cfg.blocks[block_id]):
            for node in walk(condition):
                if isinstance(node, Identifier) and fa.scope.resolve(node.name) is decl:
                    return True
    return False


def result_read_later(fa: FunctionAnalysis, site: CallSite) -> bool:
    decl = captured_variable(fa, site)
    if decl is None:
        return False
    return any(source == site.block_id and location.decl_id == decl.node_id
               for source, _, location in fa.dfg.edges())


class SyntacticUnhandledException(AbstractDetector):
    NAME = 'syntactic'
    VULN_CLASS = VulnerabilityClass.UNHANDLED_EXCEPTION
    HELP = 'Transfer used as a bare expression statement'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        return [self.vote(call_site(fa, site)) for fa in analyzed_functions(analysis)
                for site in transfer_sites(fa) if is_bare_statement(fa, site)]


class DataflowUnhandledException(AbstractDetector):
    NAME = 'dataflow'
    VULN_CLASS = VulnerabilityClass.UNHANDLED_EXCEPTION
    HELP = 'Transfer result never reaches a branch or require condition through def-use chains'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        votes = []
        for fa in analyzed_functions(analysis):
            for site in transfer_sites(fa):
                if is_inside_condition(fa, site.block_id, site.call):
                    continue
                if not result_reaches_check(fa, site):
                    votes.append(self.vote(call_site(fa, site)))
        return votes


class SemanticUnhandledException(AbstractDetector):
    NAME = 'semantic'
    VULN_CLASS = VulnerabilityClass.UNHANDLED_EXCEPTION
    HELP = 'Transfer outside any condition whose stored result is never tested'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        votes = []
        for fa in analyzed_functions(analysis):
            for site in transfer_sites(fa):
                if is_inside_condition(fa, site.block_id, site.call):
                    continue
                decl = captured_variable(fa, site)
                if decl is None or not result_tested_directly(fa, site, decl):
                    votes.append(self.vote(call_site(fa, site)))
        return votes


DETECTORS = [SyntacticUnhandledException, DataflowUnhandledException, SemanticUnhandledException]
