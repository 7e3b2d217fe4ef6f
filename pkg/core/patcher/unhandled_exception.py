"""
Require-wrapping for unchecked ``send`` and value-bearing ``call``.
"""
import logging

from core.analysis.unit_analysis import UnitAnalysis
from core.detectors.base import is_inside_condition
from core.detectors.post_process import site_call
from core.detectors.unhandled_exception import captured_variable, is_bare_statement
from core.errors import NotApplicable
from core.patcher.edits import fresh_copy, require_statement
from core.patcher.naming import fresh_name, names_in
from core.solidity.ast_nodes import (
    ElementaryType, Identifier, VarDecl, VarDeclStatement, pragma_version,
)
from core.solidity.calls import CallKind
from models.finding import Finding
from models.patch import EditScript, InsertStatement, Position, ReplaceExpr, WrapInRequire

logger = logging.getLogger(__name__)


def needs_tuple_capture(analysis: UnitAnalysis, kind: CallKind) -> bool:
    """From 0.5 a low-level call returns ``(bool, bytes)`` and cannot be required directly"""
    return kind is not CallKind.SEND and pragma_version(analysis.unit) >= (0, 5, 0)


def fix_unhandled_exception(finding: Finding, analysis: UnitAnalysis) -> EditScript:
    fa = analysis.function(finding.site.contract, finding.site.function)
    site = site_call(fa, finding.site.ordinal) if fa is not None else None
    if site is None:
        raise NotApplicable(f"{finding.id}: call site no longer exists")
    if is_inside_condition(fa, site.block_id, site.call):
        raise NotApplicable(f"{finding.id}: result is already checked")

    script = EditScript(finding.id, 'require')
    statement = fa.cfg.blocks[site.block_id].node

    if is_bare_statement(fa, site):
        if needs_tuple_capture(analysis, site.kind):
            flag = fresh_name('success', names_in(fa.contract))
            capture = VarDeclStatement(
                declarations=[VarDecl(name=flag, type_name=ElementaryType(name='bool')), None],
                initial_value=fresh_copy(site.call), tuple_form=True,
            )
            # the check is anchored on the call statement, so it goes in before the replace
            script.add(InsertStatement(Position(statement.node_id, 'after'),
                                       require_statement(Identifier(name=flag))))
            script.add(ReplaceExpr(statement.node_id, capture))
            script.notes.append(f"captured success flag as {flag}")
        else:
            script.add(WrapInRequire(statement.node_id))
        return script

    decl = captured_variable(fa, site)
    if decl is None:
        raise NotApplicable(f"{finding.id}: call result is consumed by a larger expression")
    script.add(InsertStatement(Position(statement.node_id, 'after'), require_statement(Identifier(name=decl.name))))
    script.notes.append(f"checked stored result {decl.name}")
    return script
