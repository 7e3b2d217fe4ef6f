"""
Applies edit scripts to a SourceUnit.

Edits address nodes by id, so a script built against one analysis can be
replayed on a deep copy of the same tree.
"""
import copy
import logging
from typing import List, Tuple

from core.errors import NotApplicable
from core.solidity.ast_nodes import (
    Assignment, Block, ContractDef, ElementaryType, Expression, ExpressionStatement, ForStatement,
    FunctionCall, FunctionDef, Identifier, Literal, Node, ReturnStatement, SourceUnit, Statement,
    UnaryOp, VarDecl, VarDeclStatement, find_node, parent_map, replace_child, walk,
)
from core.analysis.cfg import is_revert
from models.patch import (
    AddFunction, AddModifierGuard, AddStateVar, DeclareLocal, EditScript, InsertStatement,
    MoveStatement, Position, ReplaceExpr, WrapInRequire,
)

logger = logging.getLogger(__name__)


def fresh_copy(node: Node) -> Node:
    """Deep copy without node ids, ready for ``SourceUnit.adopt``"""
    duplicate = copy.deepcopy(node)
    for child in walk(duplicate):
        child.node_id = -1
    return duplicate


def require_call(argument: Expression) -> FunctionCall:
    return FunctionCall(callee=Identifier(name='require'), arguments=[argument])


def require_statement(argument: Expression) -> ExpressionStatement:
    return ExpressionStatement(expression=require_call(argument))


def assign_statement(name: str, value: Expression) -> ExpressionStatement:
    return ExpressionStatement(expression=Assignment(left=Identifier(name=name), operator='=', right=value))


def bool_literal(value: bool) -> Literal:
    return Literal(kind='bool', value='true' if value else 'false')


def ends_in_exit(block: Block) -> bool:
    if not block.statements:
        return False
    last = block.statements[-1]
    return isinstance(last, ReturnStatement) or is_revert(last)


class ScriptApplier:
    """Mutates ``unit`` in place, one edit at a time"""

    def __init__(self, unit: SourceUnit):
        self.unit = unit

    def apply(self, script: EditScript) -> SourceUnit:
        for edit in script.edits:
            handler = getattr(self, f"_apply_{edit.kind}", None)
            if handler is None:
                raise NotApplicable(f"no handler for edit {edit.kind}")
            logger.debug(f"{script.finding_id}: {edit.describe()}")
            handler(edit)
        return self.unit

    # -- lookup ----------------------------------------------------------

    def _node(self, node_id: int) -> Node:
        node = find_node(self.unit, node_id)
        if node is None:
            raise NotApplicable(f"node #{node_id} no longer exists")
        return node

    def _contract(self, name: str) -> ContractDef:
        contract = self.unit.contract(name)
        if contract is None:
            raise NotApplicable(f"contract {name} not found")
        return contract

    def _container(self, statement: Statement) -> Tuple[List[Statement], int]:
        """Statement list holding ``statement``; a lone branch or loop body gets wrapped in a block"""
        parent = parent_map(self.unit).get(statement.node_id)
        if isinstance(parent, Block):
            for index, item in enumerate(parent.statements):
                if item is statement:
                    return parent.statements, index
        if parent is None or isinstance(parent, (FunctionDef, ContractDef, SourceUnit)):
            raise NotApplicable(f"statement #{statement.node_id} is not inside a block")
        if isinstance(parent, ForStatement) and parent.init is statement:
            raise NotApplicable(f"statement #{statement.node_id} is a loop initializer")
        wrapper = self.unit.adopt(Block(statements=[statement]))
        replace_child(parent, statement, wrapper)
        return wrapper.statements, 0

    def _body(self, anchor: Node) -> Block:
        if isinstance(anchor, FunctionDef):
            if anchor.body is None:
                raise NotApplicable(f"function {anchor.display_name} has no body")
            return anchor.body
        if isinstance(anchor, Block):
            return anchor
        raise NotApplicable(f"node #{anchor.node_id} has no body")

    def _insert(self, position: Position, statement: Statement):
        anchor = self._node(position.anchor_id)
        if position.where == 'body-start':
            self._body(anchor).statements.insert(0, statement)
        elif position.where == 'body-end':
            self._body(anchor).statements.append(statement)
        elif position.where in ('before', 'after'):
            statements, index = self._container(anchor)
            statements.insert(index if position.where == 'before' else index + 1, statement)
        else:
            raise NotApplicable(f"unknown position {position.where}")

    def _detach(self, statement: Statement):
        statements, index = self._container(statement)
        del statements[index]

    # -- edits -----------------------------------------------------------

    def _apply_InsertStatement(self, edit: InsertStatement):
        self._insert(edit.position, self.unit.adopt(fresh_copy(edit.node)))

    def _apply_MoveStatement(self, edit: MoveStatement):
        statement = self._node(edit.statement_id)
        if edit.position.anchor_id == edit.statement_id:
            raise NotApplicable("statement cannot move relative to itself")
        self._detach(statement)
        self._insert(edit.position, statement)

    def _apply_WrapInRequire(self, edit: WrapInRequire):
        statement = self._node(edit.statement_id)
        if not isinstance(statement, ExpressionStatement):
            raise NotApplicable(f"#{edit.statement_id} is not an expression statement")
        statement.expression = self.unit.adopt(require_call(statement.expression))

    def _apply_ReplaceExpr(self, edit: ReplaceExpr):
        old = self._node(edit.expression_id)
        parent = parent_map(self.unit).get(old.node_id)
        if parent is None or not replace_child(parent, old, self.unit.adopt(fresh_copy(edit.node))):
            raise NotApplicable(f"#{edit.expression_id} has no replaceable parent")

    def _apply_DeclareLocal(self, edit: DeclareLocal):
        type_name = fresh_copy(edit.type_name) if edit.type_name is not None else ElementaryType(name='var')
        initializer = fresh_copy(edit.initializer) if edit.initializer is not None else None
        statement = VarDeclStatement(declarations=[VarDecl(name=edit.name, type_name=type_name)],
                                     initial_value=initializer)
        self._insert(edit.position, self.unit.adopt(statement))

    def _apply_AddStateVar(self, edit: AddStateVar):
        contract = self._contract(edit.contract)
        last = None
        for index, member in enumerate(contract.members):
            if isinstance(member, VarDecl):
                last = index
        contract.members.insert(0 if last is None else last + 1, self.unit.adopt(fresh_copy(edit.decl)))

    def _apply_AddFunction(self, edit: AddFunction):
        self._contract(edit.contract).members.append(self.unit.adopt(fresh_copy(edit.function)))

    def _apply_AddModifierGuard(self, edit: AddModifierGuard):
        function = self._node(edit.function_id)
        if not isinstance(function, FunctionDef) or function.body is None:
            raise NotApplicable(f"#{edit.function_id} is not a function with a body")
        body = function.body
        returns = [n for n in walk(body) if isinstance(n, ReturnStatement)]
        for statement in returns:
            statements, index = self._container(statement)
            statements.insert(index, self.unit.adopt(assign_statement(edit.lock_var, bool_literal(False))))
        if not ends_in_exit(body):
            body.statements.append(self.unit.adopt(assign_statement(edit.lock_var, bool_literal(False))))
        entry = [
            require_statement(UnaryOp(operator='!', operand=Identifier(name=edit.lock_var))),
            assign_statement(edit.lock_var, bool_literal(True)),
        ]
        body.statements[0:0] = [self.unit.adopt(s) for s in entry]


def apply_script(unit: SourceUnit, script: EditScript) -> SourceUnit:
    """Apply ``script`` to ``unit`` in place and return it"""
    if script.is_empty:
        return unit
    ScriptApplier(unit).apply(script)
    logger.info(f"Applied {len(script)} edit(s) for {script.finding_id} ({script.pattern})")
    return unit


def applied_copy(unit: SourceUnit, script: EditScript) -> SourceUnit:
    working = copy.deepcopy(unit)
    return apply_script(working, script)

