import logging
from typing import Optional

from core.analysis.unit_analysis import FunctionAnalysis, UnitAnalysis
from core.detectors.input_validation import validated_parameters
from core.errors import NotApplicable
from core.patcher.edits import require_statement
from core.solidity.ast_nodes import (
    BinaryOp, ElementaryType, Expression, ExpressionStatement, FunctionCall, Identifier, Literal,
    Statement, TypeExpression, is_address_type,
)
from models.finding import Finding
from models.patch import EditScript, InsertStatement, Position

logger = logging.getLogger(__name__)


def zero_address() -> FunctionCall:
    return FunctionCall(callee=TypeExpression(type_name=ElementaryType(name='address')),
                        arguments=[Literal(kind='number', value='0')])


def nonzero_check(name: str) -> ExpressionStatement:
    """``require(<name> != address(0));``"""
    return require_statement(BinaryOp(left=Identifier(name=name), operator='!=', right=zero_address()))


def checked_parameter(statement: Statement) -> Optional[str]:
    """Parameter name of a leading ``require(p != address(0))`` statement"""
    if not isinstance(statement, ExpressionStatement):
        return None
    call = statement.expression
    if not (isinstance(call, FunctionCall) and isinstance(call.callee, Identifier)
            and call.callee.name == 'require' and call.arguments):
        return None
    condition: Expression = call.arguments[0]
    if isinstance(condition, BinaryOp) and condition.operator == '!=' \
            and isinstance(condition.left, Identifier) and condition.right == zero_address():
        return condition.left.name
    return None


def insertion_point(fa: FunctionAnalysis, index: int) -> Position:
    """After the leading zero-address checks of earlier parameters, so checks stay in parameter order"""
    earlier = {p.name for p in fa.function.params[:index]}
    anchor = None
    for statement in fa.function.body.statements:
        name = checked_parameter(statement)
        if name is None or name not in earlier:
            break
        anchor = statement
    if anchor is None:
        return Position(fa.function.node_id, 'body-start')
    return Position(anchor.node_id, 'after')


def fix_missing_input_validation(finding: Finding, analysis: UnitAnalysis) -> EditScript:
    fa = analysis.function(finding.site.contract, finding.site.function)
    if fa is None or finding.site.ordinal >= len(fa.function.params):
        raise NotApplicable(f"{finding.id}: parameter no longer exists")
    param = fa.function.params[finding.site.ordinal]
    if not is_address_type(param.type_name):
        raise NotApplicable(f"{finding.id}: {param.name} is not an address")
    if param.name in validated_parameters(fa):
        raise NotApplicable(f"{finding.id}: {param.name} is already checked")
    script = EditScript(finding.id, 'validate')
    script.add(InsertStatement(insertion_point(fa, finding.site.ordinal), nonzero_check(param.name)))
    logger.debug(f"{finding.id}: checking {param.name} against the zero address")
    return script
