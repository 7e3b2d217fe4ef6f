"""
Missing input validation: public parameters that no check compares.

A parameter counts as validated when it is a direct operand of a comparison
in a require/assert argument or in an if-condition guarding a revert, in the
body or in a modifier it is passed to. Using it as a mapping index does not
count.
"""
import logging
from typing import List, Set

from core.analysis.unit_analysis import FunctionAnalysis, UnitAnalysis
from core.detectors.base import (
    COMPARISON_OPS, AbstractDetector, analyzed_functions, check_expressions, is_if_revert,
    parameter_site,
)
from core.solidity.ast_nodes import BinaryOp, Expression, Identifier, TupleExpression, UnaryOp, walk
from models.finding import DetectorVote, VulnerabilityClass

logger = logging.getLogger(__name__)


def _strip(expression: Expression) -> Expression:
    while isinstance(expression, TupleExpression) and len(expression.components) == 1:
        expression = expression.components[0]
    return expression


def compared_names(condition: Expression) -> Set[str]:
    """Identifiers that appear as direct operands of a comparison, or tested as a bare flag"""
    names = set()
    condition = _strip(condition)
    if isinstance(condition, Identifier):
        names.add(condition.name)
    elif isinstance(condition, UnaryOp) and condition.operator == '!' \
            and isinstance(_strip(condition.operand), Identifier):
        names.add(_strip(condition.operand).name)
    for node in walk(condition):
        if isinstance(node, BinaryOp) and node.operator in COMPARISON_OPS:
            for operand in (_strip(node.left), _strip(node.right)):
                if isinstance(operand, Identifier):
                    names.add(operand.name)
    return names


def validated_parameters(fa: FunctionAnalysis) -> Set[str]:
    validated = set()
    for block in fa.cfg.statement_blocks():
        if block.role == 'condition' and not is_if_revert(block.node):
            continue
        for condition in check_expressions(block):
            for name in compared_names(condition):
                if block.frame < 0:
                    validated.add(name)
                    continue
                # a modifier parameter stands for the argument it was bound to
                bound = block.bindings.get(name)
                bound = _strip(bound) if bound is not None else None
                if isinstance(bound, Identifier):
                    validated.add(bound.name)
    params = {p.name for p in fa.function.params}
    return validated & params


def unvalidated_parameters(fa: FunctionAnalysis) -> List[int]:
    validated = validated_parameters(fa)
    return [i for i, p in enumerate(fa.function.params) if p.name and p.name not in validated]


class InputValidationDetector(AbstractDetector):
    NAME = 'dataflow'
    VULN_CLASS = VulnerabilityClass.MISSING_INPUT_VALIDATION
    HELP = 'Public parameter never compared in a require/assert or a reverting branch'

    def _detect(self, analysis: UnitAnalysis) -> List[DetectorVote]:
        votes = []
        for fa in analyzed_functions(analysis):
            if not fa.function.is_entry or fa.function.is_constructor or fa.contract.kind == 'interface':
                continue
            for index in unvalidated_parameters(fa):
                param = fa.function.params[index]
                votes.append(self.vote(parameter_site(fa, index, param), note=param.name))
        return votes


DETECTORS = [InputValidationDetector]
