"""
Flow- and context-insensitive points-to analysis with data locations.

Composite-typed variables only become references in two situations:
a storage composite assigned to a local storage variable, and a memory
composite assigned to another memory variable. Every other assignment
copies, so the target keeps its own location.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from core.analysis.locations import AbstractLocation
from core.solidity.ast_nodes import (
    Assignment, Conditional, ContractDef, Expression, FunctionCall, FunctionDef, Identifier,
    IndexAccess, MemberAccess, ModifierDef, ReturnStatement, SourceUnit, TupleExpression,
    VarDecl, VarDeclStatement, walk,
)
from core.solidity.calls import CallKind, TypeScope, internal_callee_name, resolve_call
from core.solidity.inheritance import merge_contract

logger = logging.getLogger(__name__)

Owner = Union[FunctionDef, ModifierDef]


@dataclass
class PointsToMap:
    points_to: Dict[int, Set[AbstractLocation]] = field(default_factory=dict)
    declarations: Dict[int, VarDecl] = field(default_factory=dict)
    locations_of: Dict[int, str] = field(default_factory=dict)
    state_ids: Set[int] = field(default_factory=set)
    references: Set[Tuple[int, int]] = field(default_factory=set)
    unresolved: List[str] = field(default_factory=list)

    def self_location(self, decl: VarDecl) -> AbstractLocation:
        return AbstractLocation(decl.node_id, self.locations_of.get(decl.node_id, 'memory'),
                                decl.name, decl.node_id in self.state_ids)

    def locations(self, decl: VarDecl) -> Set[AbstractLocation]:
        """Cells a use of ``decl`` touches; falls back to its own cell when nothing is known"""
        pts = self.points_to.get(decl.node_id)
        if pts:
            return set(pts)
        return {self.self_location(decl)}

    def is_reference(self, decl: VarDecl) -> bool:
        return any(loc.decl_id != decl.node_id for loc in self.points_to.get(decl.node_id, ()))

    def data_location(self, decl: VarDecl) -> str:
        return self.locations_of.get(decl.node_id, 'memory')


def effective_location(decl: VarDecl, scope: TypeScope, role: str, external: bool = False) -> str:
    """Data location a declaration lives in, applying the 0.4-style defaults"""
    if role == 'state':
        return 'storage'
    if decl.data_location != 'default':
        return decl.data_location
    composite = scope.is_composite(decl.type_name)
    if role == 'param':
        if composite and external:
            return 'calldata'
        return 'memory'
    if role == 'local' and composite:
        return 'storage'
    return 'memory'


class PointerAnalysis:
    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.result = PointsToMap()
        self.constraints: List[Tuple[VarDecl, VarDecl]] = []
        self.scopes: List[Tuple[TypeScope, Owner]] = []

    def run(self) -> PointsToMap:
        for contract in self.unit.contracts:
            for var in contract.state_vars:
                self._declare(var, 'storage', state=True)

        for contract in self.unit.contracts:
            merged = merge_contract(contract, self.unit)
            for member in contract.members:
                if isinstance(member, (FunctionDef, ModifierDef)) and member.body is not None:
                    scope = TypeScope(self.unit, merged, member)
                    self._declare_owner(member, scope)
                    self.scopes.append((scope, member))

        for scope, owner in self.scopes:
            self._collect_constraints(scope, owner)

        self._solve()
        for decl_id, pts in self.result.points_to.items():
            decl = self.result.declarations[decl_id]
            if not pts and self.result.locations_of[decl_id] == 'storage':
                self.result.unresolved.append(decl.name)
                logger.debug(f"Storage reference '{decl.name}' has no resolvable target")
        return self.result

    def _declare(self, decl: VarDecl, location: str, state: bool = False, reference: bool = False):
        self.result.declarations[decl.node_id] = decl
        self.result.locations_of[decl.node_id] = location
        if state:
            self.result.state_ids.add(decl.node_id)
        self.result.points_to[decl.node_id] = set() if reference else {self.result.self_location(decl)}

    def _declare_owner(self, owner: Owner, scope: TypeScope):
        external = isinstance(owner, FunctionDef) and owner.visibility == 'external'
        for param in owner.params:
            location = effective_location(param, scope, 'param', external)
            self._declare(param, location, reference=self._is_reference_slot(param, location, scope))
        for ret in getattr(owner, 'returns', []):
            location = effective_location(ret, scope, 'param')
            self._declare(ret, location, reference=self._is_reference_slot(ret, location, scope))
        for node in walk(owner.body):
            if isinstance(node, VarDeclStatement):
                for decl in node.declarations:
                    if decl is None:
                        continue
                    location = effective_location(decl, scope, 'local')
                    reference = (self._is_reference_slot(decl, location, scope)
                                 and node.initial_value is not None and not node.tuple_form)
                    self._declare(decl, location, reference=reference)

    @staticmethod
    def _is_reference_slot(decl: VarDecl, location: str, scope: TypeScope) -> bool:
        return location == 'storage' and scope.is_composite(decl.type_name)

    def _source_decls(self, expression: Optional[Expression], scope: TypeScope) -> List[VarDecl]:
        if isinstance(expression, Identifier):
            decl = scope.resolve(expression.name)
            return [decl] if decl is not None else []
        if isinstance(expression, (IndexAccess, MemberAccess)):
            base = expression.base if isinstance(expression, IndexAccess) else expression.expression
            return self._source_decls(base, scope)
        if isinstance(expression, TupleExpression) and len(expression.components) == 1:
            return self._source_decls(expression.components[0], scope)
        if isinstance(expression, Conditional):
            return (self._source_decls(expression.true_expression, scope)
                    + self._source_decls(expression.false_expression, scope))
        if isinstance(expression, FunctionCall) and scope.contract is not None:
            name = internal_callee_name(expression)
            if name and resolve_call(expression, scope).kind is CallKind.INTERNAL:
                function = scope.contract.function(name)
                if function is not None and len(function.returns) == 1:
                    return [function.returns[0]]
        return []

    def _reference_rule_holds(self, target: VarDecl, source: VarDecl, scope: TypeScope) -> bool:
        if not scope.is_composite(target.type_name):
            return False
        target_location = self.result.locations_of.get(target.node_id)
        source_location = self.result.locations_of.get(source.node_id)
        if target_location == 'storage' and target.node_id not in self.result.state_ids:
            return source_location == 'storage'
        if target_location == 'memory':
            return source_location == 'memory' and scope.is_composite(source.type_name)
        return False

    def _add(self, target: Optional[VarDecl], sources: Iterable[VarDecl], scope: TypeScope):
        if target is None or target.node_id not in self.result.declarations:
            return
        for source in sources:
            if source.node_id not in self.result.declarations:
                continue
            if self._reference_rule_holds(target, source, scope):
                self.constraints.append((target, source))
                self.result.references.add((target.node_id, source.node_id))

    def _collect_constraints(self, scope: TypeScope, owner: Owner):
        returns = list(getattr(owner, 'returns', []))
        for node in walk(owner.body):
            if isinstance(node, VarDeclStatement) and not node.tuple_form and node.initial_value is not None:
                decl = node.declarations[0]
                self._add(decl, self._source_decls(node.initial_value, scope), scope)
            elif isinstance(node, Assignment) and node.operator == '=' and isinstance(node.left, Identifier):
                target = scope.resolve(node.left.name)
                self._add(target, self._source_decls(node.right, scope), scope)
            elif isinstance(node, ReturnStatement) and len(returns) == 1 and node.expression is not None:
                self._add(returns[0], self._source_decls(node.expression, scope), scope)
            elif isinstance(node, FunctionCall) and scope.contract is not None:
                self._bind_call(node, scope)

    def _bind_call(self, call: FunctionCall, scope: TypeScope):
        name = internal_callee_name(call)
        if not name or resolve_call(call, scope).kind is not CallKind.INTERNAL:
            return
        for function in scope.contract.functions:
            if function.name != name or len(function.params) != len(call.arguments):
                continue
            callee_scope = TypeScope(self.unit, scope.contract, function)
            for param, argument in zip(function.params, call.arguments):
                sources = self._source_decls(argument, scope)
                self._add(param, sources, callee_scope)

    def _solve(self):
        changed = True
        rounds = 0
        while changed:
            changed = False
            rounds += 1
            for target, source in self.constraints:
                target_set = self.result.points_to[target.node_id]
                before = len(target_set)
                target_set |= self.result.points_to[source.node_id]
                if len(target_set) != before:
                    changed = True
        logger.debug(f"Points-to fixpoint after {rounds} round(s), {len(self.constraints)} constraint(s)")


def pointer_analysis(unit: SourceUnit) -> PointsToMap:
    """Least fixpoint of the reference constraints over every function and modifier in ``unit``"""
    return PointerAnalysis(unit).run()


def merged_contracts(unit: SourceUnit) -> Dict[str, ContractDef]:
    return {contract.name: merge_contract(contract, unit) for contract in unit.contracts}
