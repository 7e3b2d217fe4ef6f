"""
Call-site classification.

Purely syntactic plus whatever local type information a TypeScope can
recover from declarations. Unresolvable receivers fall back to an
external contract call flagged as low confidence.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Union

from core.solidity.ast_nodes import (
    ArrayType, CallOptions, ContractDef, ElementaryType, Expression, FunctionCall, FunctionDef,
    Identifier, IndexAccess, MappingType, MemberAccess, ModifierDef, NewExpression, Node,
    SourceUnit, TupleExpression, TypeExpression, TypeName, UserDefinedType, UsingFor, VarDecl,
    is_composite_type, walk,
)

logger = logging.getLogger(__name__)

BUILTIN_NAMESPACES = {'abi', 'msg', 'block', 'tx', 'string', 'bytes', 'type'}
INTERNAL_MEMBERS = {'push', 'pop', 'concat'}
TRANSFER_BUILTINS = {'selfdestruct', 'suicide'}

GLOBAL_TYPES = {
    ('msg', 'sender'): 'address',
    ('msg', 'value'): 'uint256',
    ('msg', 'data'): 'bytes',
    ('tx', 'origin'): 'address',
    ('tx', 'gasprice'): 'uint256',
    ('block', 'coinbase'): 'address',
    ('block', 'timestamp'): 'uint256',
    ('block', 'number'): 'uint256',
}


class CallKind(Enum):
    INTERNAL = 'internal'
    EXTERNAL_CONTRACT = 'external-contract'
    SEND = 'ether-transfer-send'
    TRANSFER = 'ether-transfer-transfer'
    CALL_VALUE = 'ether-transfer-call-value'
    DELEGATECALL = 'delegatecall'

    @property
    def is_ether_transfer(self) -> bool:
        return self in (CallKind.SEND, CallKind.TRANSFER, CallKind.CALL_VALUE)

    @property
    def is_external(self) -> bool:
        return self is not CallKind.INTERNAL

    @property
    def returns_success_flag(self) -> bool:
        return self in (CallKind.SEND, CallKind.CALL_VALUE)


@dataclass(frozen=True)
class CallClassification:
    kind: CallKind
    confident: bool = True


class TypeScope:
    """Declared types visible inside one function or modifier of a (merged) contract"""

    def __init__(self, unit: Optional[SourceUnit] = None, contract: Optional[ContractDef] = None,
                 function: Optional[Union[FunctionDef, ModifierDef]] = None):
        self.unit = unit
        self.contract = contract
        self.owner = function
        self.declarations: Dict[str, VarDecl] = {}
        self.state_declarations: Dict[str, VarDecl] = {}
        self.contract_kinds: Dict[str, str] = {}
        self.struct_fields: Dict[str, Dict[str, TypeName]] = {}
        self.library_functions: Dict[str, set] = {}

        if unit is not None:
            for declared in unit.contracts:
                self.contract_kinds[declared.name] = declared.kind
                if declared.kind == 'library':
                    self.library_functions[declared.name] = {f.name for f in declared.functions}
                for struct in declared.structs:
                    self.struct_fields[struct.name] = {m.name: m.type_name for m in struct.members}
                    self.struct_fields[f"{declared.name}.{struct.name}"] = self.struct_fields[struct.name]
        if contract is not None:
            for var in contract.state_vars:
                self.declarations[var.name] = var
                self.state_declarations[var.name] = var
            for struct in contract.structs:
                self.struct_fields[struct.name] = {m.name: m.type_name for m in struct.members}
        if function is not None:
            for param in list(function.params) + list(getattr(function, 'returns', [])):
                if param.name:
                    self.declarations[param.name] = param
            if function.body is not None:
                for node in walk(function.body):
                    if isinstance(node, VarDecl) and node.name:
                        self.declarations.setdefault(node.name, node)
                        if self.declarations[node.name] is self.state_declarations.get(node.name):
                            self.declarations[node.name] = node

    def resolve(self, name: str) -> Optional[VarDecl]:
        return self.declarations.get(name)

    def is_state(self, decl: Optional[VarDecl]) -> bool:
        return decl is not None and self.state_declarations.get(decl.name) is decl

    def is_composite(self, type_name: TypeName) -> bool:
        return is_composite_type(type_name) or self.is_struct_type(type_name)

    def attached_libraries(self) -> List[str]:
        if self.contract is None:
            return []
        return [m.library for m in self.contract.members if isinstance(m, UsingFor)]

    def is_contract_type(self, type_name: Optional[TypeName]) -> bool:
        return (isinstance(type_name, UserDefinedType)
                and self.contract_kinds.get(type_name.name) in ('contract', 'interface'))

    def is_struct_type(self, type_name: Optional[TypeName]) -> bool:
        return isinstance(type_name, UserDefinedType) and type_name.name in self.struct_fields

    def type_of(self, expression: Optional[Expression]) -> Optional[TypeName]:
        if isinstance(expression, Identifier):
            if expression.name == 'this' and self.contract is not None:
                return UserDefinedType(name=self.contract.name)
            if expression.name == 'now':
                return ElementaryType(name='uint256')
            decl = self.declarations.get(expression.name)
            return decl.type_name if decl is not None else None
        if isinstance(expression, TupleExpression) and len(expression.components) == 1:
            return self.type_of(expression.components[0])
        if isinstance(expression, MemberAccess):
            if isinstance(expression.expression, Identifier):
                key = (expression.expression.name, expression.member)
                if key in GLOBAL_TYPES and expression.expression.name not in self.declarations:
                    return ElementaryType(name=GLOBAL_TYPES[key])
            if expression.member == 'balance':
                return ElementaryType(name='uint256')
            if expression.member == 'length':
                return ElementaryType(name='uint256')
            base_type = self.type_of(expression.expression)
            if isinstance(base_type, UserDefinedType) and base_type.name in self.struct_fields:
                return self.struct_fields[base_type.name].get(expression.member)
            return None
        if isinstance(expression, IndexAccess):
            base_type = self.type_of(expression.base)
            if isinstance(base_type, MappingType):
                return base_type.value_type
            if isinstance(base_type, ArrayType):
                return base_type.base_type
            return None
        if isinstance(expression, FunctionCall):
            callee = expression.callee
            if isinstance(callee, TypeExpression):
                if isinstance(callee.type_name, ElementaryType) and callee.type_name.name == 'payable':
                    return ElementaryType(name='address payable')
                return callee.type_name
            if isinstance(callee, Identifier) and callee.name in self.contract_kinds:
                return UserDefinedType(name=callee.name)
            if isinstance(callee, NewExpression):
                return callee.type_name
            return None
        return None


def _receiver_kind(receiver: Expression, member: str, scope: TypeScope) -> CallClassification:
    if isinstance(receiver, Identifier):
        if receiver.name in ('this', 'super'):
            return CallClassification(CallKind.INTERNAL)
        if receiver.name in BUILTIN_NAMESPACES and receiver.name not in scope.declarations:
            return CallClassification(CallKind.INTERNAL)
        if receiver.name in scope.contract_kinds and receiver.name not in scope.declarations:
            # library call or explicit base-contract call
            return CallClassification(CallKind.INTERNAL)
    if member in INTERNAL_MEMBERS:
        return CallClassification(CallKind.INTERNAL)
    if any(member in scope.library_functions.get(lib, ()) for lib in scope.attached_libraries()):
        return CallClassification(CallKind.INTERNAL)

    receiver_type = scope.type_of(receiver)
    if receiver_type is None:
        return CallClassification(CallKind.EXTERNAL_CONTRACT, confident=False)
    if isinstance(receiver_type, (MappingType, ArrayType)):
        return CallClassification(CallKind.INTERNAL)
    if isinstance(receiver_type, ElementaryType):
        if receiver_type.name in ('address', 'address payable'):
            return CallClassification(CallKind.EXTERNAL_CONTRACT, confident=False)
        return CallClassification(CallKind.INTERNAL)
    if scope.is_contract_type(receiver_type):
        return CallClassification(CallKind.EXTERNAL_CONTRACT)
    if scope.is_struct_type(receiver_type):
        return CallClassification(CallKind.INTERNAL)
    return CallClassification(CallKind.EXTERNAL_CONTRACT, confident=False)


def resolve_call(call: FunctionCall, scope: Optional[TypeScope] = None) -> CallClassification:
    scope = scope or TypeScope()
    callee = call.callee
    options: Optional[CallOptions] = None
    if isinstance(callee, CallOptions):
        options = callee
        callee = callee.callee

    if isinstance(callee, MemberAccess):
        member = callee.member
        receiver = callee.expression
        receiver_type = scope.type_of(receiver)
        if member == 'send' and len(call.arguments) == 1:
            return CallClassification(CallKind.SEND)
        if member == 'transfer' and len(call.arguments) == 1 and not scope.is_contract_type(receiver_type):
            return CallClassification(CallKind.TRANSFER, confident=receiver_type is not None)
        if member == 'call':
            if options is not None and options.option('value') is not None:
                return CallClassification(CallKind.CALL_VALUE)
            return CallClassification(CallKind.EXTERNAL_CONTRACT)
        if member in ('delegatecall', 'callcode'):
            return CallClassification(CallKind.DELEGATECALL)
        if member == 'staticcall':
            return CallClassification(CallKind.EXTERNAL_CONTRACT)
        return _receiver_kind(receiver, member, scope)

    if isinstance(callee, (Identifier, TypeExpression)):
        return CallClassification(CallKind.INTERNAL)
    if isinstance(callee, NewExpression):
        if scope.is_contract_type(callee.type_name):
            return CallClassification(CallKind.EXTERNAL_CONTRACT)
        return CallClassification(CallKind.INTERNAL)
    return CallClassification(CallKind.EXTERNAL_CONTRACT, confident=False)


def classify_call(call: FunctionCall, scope: Optional[TypeScope] = None) -> CallKind:
    """Kind of a call expression: internal, external contract, ether transfer or delegatecall"""
    classification = resolve_call(call, scope)
    if not classification.confident:
        logger.debug(f"Low-confidence call classification: {classification.kind.value}")
    return classification.kind


def call_sites(node: Node) -> List[FunctionCall]:
    """All call expressions under ``node`` in pre-order"""
    return [n for n in walk(node) if isinstance(n, FunctionCall)]


def is_transfer_builtin(call: FunctionCall) -> bool:
    return isinstance(call.callee, Identifier) and call.callee.name in TRANSFER_BUILTINS


def internal_callee_name(call: FunctionCall) -> Optional[str]:
    """Name of the same-contract function an internal call targets, if it is one"""
    callee = call.callee
    if isinstance(callee, Identifier):
        return callee.name
    if (isinstance(callee, MemberAccess) and isinstance(callee.expression, Identifier)
            and callee.expression.name in ('this', 'super')):
        return callee.member
    return None
