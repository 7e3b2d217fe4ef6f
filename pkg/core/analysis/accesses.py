"""
Access events: which abstract locations one statement creates, reads,
writes or deletes.
"""
import logging
from typing import Callable, Dict, List, Optional, Set

from core.analysis.locations import GLOBAL_MEMBERS, TIMESTAMP, AbstractLocation, AccessEvent, AccessMode
from core.analysis.pointers import PointsToMap
from core.solidity.ast_nodes import (
    Assignment, CallOptions, EmitStatement, Expression, ExpressionStatement, ForStatement,
    FunctionCall, FunctionDef, Identifier, IfStatement, IndexAccess, MemberAccess, Node,
    ReturnStatement, TupleExpression, UnaryOp, VarDecl, VarDeclStatement, WhileStatement,
    iter_children,
)
from core.solidity.calls import CallKind, TypeScope, internal_callee_name, resolve_call

logger = logging.getLogger(__name__)

# (reads, writes) of state variable names for an internal callee
CalleeEffects = Callable[[FunctionDef], Optional[tuple]]


class AccessCollector:
    """
    Collects access events for statements of one function or modifier.

    ``bindings`` maps modifier parameter names to the invocation's argument
    expressions; reads of a bound parameter are reads of the argument.
    """

    def __init__(self, scope: TypeScope, points_to: PointsToMap,
                 callee_effects: Optional[CalleeEffects] = None,
                 bindings: Optional[Dict[str, Expression]] = None,
                 binding_scope: Optional["AccessCollector"] = None):
        self.scope = scope
        self.points_to = points_to
        self.callee_effects = callee_effects
        self.bindings = bindings or {}
        self.binding_scope = binding_scope
        self._events: List[AccessEvent] = []
        self._statement_id = -1

    def header_events(self, node: Node, statement_id: int) -> List[AccessEvent]:
        """
        Events of the part of ``node`` that executes in its own CFG block:
        a condition for branches and loops, the whole statement otherwise.
        """
        self._events = []
        self._statement_id = statement_id
        if isinstance(node, VarDeclStatement):
            for decl in node.declarations:
                if decl is not None:
                    self._emit(self._self_location(decl), AccessMode.CREATE, strong=True)
            if node.initial_value is not None:
                self.read(node.initial_value)
        elif isinstance(node, ExpressionStatement):
            self.read(node.expression)
        elif isinstance(node, (IfStatement, WhileStatement)):
            self.read(node.condition)
        elif isinstance(node, ForStatement):
            if node.condition is not None:
                self.read(node.condition)
        elif isinstance(node, ReturnStatement):
            if node.expression is not None:
                self.read(node.expression)
        elif isinstance(node, EmitStatement):
            for argument in node.call.arguments:
                self.read(argument)
        elif isinstance(node, Expression):
            self.read(node)
        events, self._events = self._dedupe(self._events), []
        return events

    def collect(self, node: Node, statement_id: int = 0) -> List[AccessEvent]:
        """Every access anywhere under ``node``"""
        self._events = []
        self._statement_id = statement_id
        self.read(node)
        events, self._events = self._dedupe(self._events), []
        return events

    @staticmethod
    def _dedupe(events: List[AccessEvent]) -> List[AccessEvent]:
        seen: Set[AccessEvent] = set()
        unique = []
        for event in events:
            if event not in seen:
                seen.add(event)
                unique.append(event)
        return unique

    def _emit(self, target: AbstractLocation, mode: AccessMode, strong: bool = False):
        self._events.append(AccessEvent(self._statement_id, target, mode, strong))

    def _self_location(self, decl: VarDecl) -> AbstractLocation:
        if decl.node_id not in self.points_to.declarations:
            return AbstractLocation(decl.node_id, 'memory', decl.name)
        return self.points_to.self_location(decl)

    def _decl_locations(self, decl: VarDecl) -> Set[AbstractLocation]:
        if decl.node_id not in self.points_to.declarations:
            return {self._self_location(decl)}
        return self.points_to.locations(decl)

    def read(self, expression: Optional[Node]):
        if expression is None:
            return
        if isinstance(expression, Identifier):
            self._read_identifier(expression)
        elif isinstance(expression, MemberAccess):
            base = expression.expression
            if isinstance(base, Identifier) and (base.name, expression.member) in GLOBAL_MEMBERS \
                    and self.scope.resolve(base.name) is None:
                self._emit(GLOBAL_MEMBERS[(base.name, expression.member)], AccessMode.READ)
            else:
                self.read(base)
        elif isinstance(expression, Assignment):
            self._write(expression.left, also_read=expression.operator != '=')
            self.read(expression.right)
        elif isinstance(expression, UnaryOp):
            if expression.operator in ('++', '--'):
                self._write(expression.operand, also_read=True)
            elif expression.operator == 'delete':
                self._write(expression.operand, mode=AccessMode.DELETE)
            else:
                self.read(expression.operand)
        elif isinstance(expression, FunctionCall):
            self._read_call(expression)
        elif isinstance(expression, VarDeclStatement):
            for decl in expression.declarations:
                if decl is not None:
                    self._emit(self._self_location(decl), AccessMode.CREATE, strong=True)
            self.read(expression.initial_value)
        else:
            for child in iter_children(expression):
                self.read(child)

    def _bound_argument(self, name: str) -> Optional[Expression]:
        decl = self.scope.resolve(name)
        if name not in self.bindings or decl is None:
            return None
        if not any(param is decl for param in getattr(self.scope.owner, 'params', [])):
            return None
        return self.bindings[name]

    def _read_in_caller(self, expression: Expression):
        if self.binding_scope is not None:
            self._events.extend(self.binding_scope.collect(expression, self._statement_id))

    def _read_identifier(self, identifier: Identifier):
        bound = self._bound_argument(identifier.name)
        if bound is not None:
            self._read_in_caller(bound)
            return
        decl = self.scope.resolve(identifier.name)
        if decl is not None:
            for location in self._decl_locations(decl):
                self._emit(location, AccessMode.READ)
        elif identifier.name == 'now':
            self._emit(TIMESTAMP, AccessMode.READ)

    def _read_call(self, call: FunctionCall):
        callee = call.callee
        options = None
        if isinstance(callee, CallOptions):
            options = callee
            callee = callee.callee
        if isinstance(callee, MemberAccess):
            self.read(callee.expression)
        elif not isinstance(callee, Identifier):
            self.read(callee)
        if options is not None:
            for value in options.values:
                self.read(value)
        for argument in call.arguments:
            self.read(argument)

        if self.callee_effects is None or self.scope.contract is None:
            return
        name = internal_callee_name(call)
        if not name or resolve_call(call, self.scope).kind is not CallKind.INTERNAL:
            return
        for function in self.scope.contract.functions:
            if function.display_name != name or len(function.params) != len(call.arguments):
                continue
            effects = self.callee_effects(function)
            if effects is None:
                continue
            reads, writes = effects
            for var_name in sorted(reads):
                decl = self.scope.state_declarations.get(var_name)
                if decl is not None:
                    self._emit(self._self_location(decl), AccessMode.READ)
            for var_name in sorted(writes):
                decl = self.scope.state_declarations.get(var_name)
                if decl is not None:
                    self._emit(self._self_location(decl), AccessMode.WRITE)

    def _write(self, target: Expression, also_read: bool = False, mode: AccessMode = AccessMode.WRITE):
        if isinstance(target, TupleExpression):
            for component in target.components:
                if component is not None:
                    self._write(component, also_read, mode)
            return
        if isinstance(target, Identifier):
            decl = self.scope.resolve(target.name)
            if decl is None:
                return
            location = self._self_location(decl)
            if also_read:
                for read_location in self._decl_locations(decl):
                    self._emit(read_location, AccessMode.READ)
            self._emit(location, mode, strong=True)
            return
        if isinstance(target, (IndexAccess, MemberAccess)):
            if isinstance(target, IndexAccess):
                self.read(target.index)
            root = target
            while isinstance(root, (IndexAccess, MemberAccess)):
                if isinstance(root, IndexAccess) and root is not target:
                    self.read(root.index)
                root = root.base if isinstance(root, IndexAccess) else root.expression
            if isinstance(root, TupleExpression) and len(root.components) == 1:
                root = root.components[0]
            if isinstance(root, Identifier):
                decl = self.scope.resolve(root.name)
                if decl is None:
                    return
                locations = self._decl_locations(decl)
                if also_read:
                    for location in locations:
                        self._emit(location, AccessMode.READ)
                for location in locations:
                    self._emit(location, mode)
            else:
                self.read(root)
            return
        self.read(target)


def written_locations(events: List[AccessEvent]) -> Set[AbstractLocation]:
    return {e.target for e in events if e.mode.is_write}


def read_locations(events: List[AccessEvent]) -> Set[AbstractLocation]:
    return {e.target for e in events if e.mode is AccessMode.READ}
