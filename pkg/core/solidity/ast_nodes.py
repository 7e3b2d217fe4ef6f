"""
Typed syntax tree for the supported Solidity subset.

Every node carries a ``node_id`` and a ``span``; both are excluded from
dataclass equality so two trees compare structurally. Synthesized nodes get
ids from their SourceUnit and a span flagged ``synthetic``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from typing import Dict, Iterator, List, Optional, Tuple, Union


@dataclass
class Span:
    start: int = 0
    end: int = 0
    line: int = 0
    column: int = 0
    synthetic: bool = False


def synthetic_span() -> Span:
    return Span(synthetic=True)


@dataclass
class Node:
    node_id: int = field(default=-1, compare=False, repr=False, kw_only=True)
    span: Span = field(default_factory=synthetic_span, compare=False, repr=False, kw_only=True)


# ---------------------------------------------------------------------------
# Type names

@dataclass
class TypeName(Node):
    pass


@dataclass
class ElementaryType(TypeName):
    name: str


@dataclass
class UserDefinedType(TypeName):
    name: str


@dataclass
class MappingType(TypeName):
    key_type: TypeName
    value_type: TypeName


@dataclass
class ArrayType(TypeName):
    base_type: TypeName
    length: Optional["Expression"] = None


# ---------------------------------------------------------------------------
# Expressions

@dataclass
class Expression(Node):
    pass


@dataclass
class Identifier(Expression):
    name: str


@dataclass
class Literal(Expression):
    kind: str  # number | hex | string | bool
    value: str
    subdenomination: Optional[str] = None


@dataclass
class BinaryOp(Expression):
    left: Expression
    operator: str
    right: Expression


@dataclass
class UnaryOp(Expression):
    operator: str
    operand: Expression
    prefix: bool = True


@dataclass
class Assignment(Expression):
    left: Expression
    operator: str
    right: Expression


@dataclass
class Conditional(Expression):
    condition: Expression
    true_expression: Expression
    false_expression: Expression


@dataclass
class FunctionCall(Expression):
    callee: Expression
    arguments: List[Expression] = field(default_factory=list)
    names: List[str] = field(default_factory=list)


@dataclass
class CallOptions(Expression):
    """``x.call{value: v}`` or its legacy spelling ``x.call.value(v)``"""
    callee: Expression
    names: List[str] = field(default_factory=list)
    values: List[Expression] = field(default_factory=list)
    legacy: bool = False

    def option(self, name: str) -> Optional[Expression]:
        for option_name, value in zip(self.names, self.values):
            if option_name == name:
                return value
        return None


@dataclass
class MemberAccess(Expression):
    expression: Expression
    member: str


@dataclass
class IndexAccess(Expression):
    base: Expression
    index: Optional[Expression] = None


@dataclass
class TupleExpression(Expression):
    components: List[Optional[Expression]] = field(default_factory=list)
    is_array: bool = False


@dataclass
class NewExpression(Expression):
    type_name: TypeName


@dataclass
class TypeExpression(Expression):
    type_name: TypeName


# ---------------------------------------------------------------------------
# Declarations

@dataclass
class VarDecl(Node):
    name: str
    type_name: TypeName
    data_location: str = 'default'
    visibility: Optional[str] = None
    constant: bool = False
    immutable: bool = False
    indexed: bool = False
    initial_value: Optional[Expression] = None

    @property
    def is_composite(self) -> bool:
        return is_composite_type(self.type_name)


# ---------------------------------------------------------------------------
# Statements

@dataclass
class Statement(Node):
    pass


@dataclass
class Block(Statement):
    statements: List[Statement] = field(default_factory=list)


@dataclass
class VarDeclStatement(Statement):
    declarations: List[Optional[VarDecl]]
    initial_value: Optional[Expression] = None
    tuple_form: bool = False


@dataclass
class ExpressionStatement(Statement):
    expression: Expression


@dataclass
class IfStatement(Statement):
    condition: Expression
    true_body: Statement
    false_body: Optional[Statement] = None


@dataclass
class ForStatement(Statement):
    init: Optional[Statement]
    condition: Optional[Expression]
    update: Optional[Expression]
    body: Statement


@dataclass
class WhileStatement(Statement):
    condition: Expression
    body: Statement


@dataclass
class ReturnStatement(Statement):
    expression: Optional[Expression] = None


@dataclass
class EmitStatement(Statement):
    call: FunctionCall


@dataclass
class BreakStatement(Statement):
    pass


@dataclass
class ContinueStatement(Statement):
    pass


@dataclass
class PlaceholderStatement(Statement):
    pass


@dataclass
class ThrowStatement(Statement):
    pass


# ---------------------------------------------------------------------------
# Contract members

@dataclass
class StructDef(Node):
    name: str
    members: List[VarDecl] = field(default_factory=list)


@dataclass
class EnumDef(Node):
    name: str
    values: List[str] = field(default_factory=list)


@dataclass
class EventDef(Node):
    name: str
    params: List[VarDecl] = field(default_factory=list)
    anonymous: bool = False


@dataclass
class UsingFor(Node):
    library: str
    target: Optional[TypeName] = None


@dataclass
class ModifierDef(Node):
    name: str
    params: List[VarDecl] = field(default_factory=list)
    body: Optional[Block] = None
    has_parens: bool = False


@dataclass
class ModifierInvocation(Node):
    name: str
    arguments: Optional[List[Expression]] = None


@dataclass
class FunctionDef(Node):
    kind: str  # function | constructor | fallback | receive
    name: str
    params: List[VarDecl] = field(default_factory=list)
    returns: List[VarDecl] = field(default_factory=list)
    modifiers: List[ModifierInvocation] = field(default_factory=list)
    visibility: Optional[str] = None
    mutability: Optional[str] = None
    body: Optional[Block] = None
    virtual: bool = False
    override: bool = False
    legacy: bool = False

    @property
    def display_name(self) -> str:
        if self.kind == 'function':
            return self.name
        return self.kind

    @property
    def effective_visibility(self) -> str:
        return self.visibility or 'public'

    @property
    def is_entry(self) -> bool:
        return self.effective_visibility in ('public', 'external')

    @property
    def is_payable(self) -> bool:
        return self.mutability == 'payable'

    @property
    def is_constructor(self) -> bool:
        return self.kind == 'constructor'


ContractMember = Union[VarDecl, FunctionDef, ModifierDef, StructDef, EnumDef, EventDef, UsingFor]


@dataclass
class ContractDef(Node):
    name: str
    kind: str = 'contract'  # contract | library | interface
    bases: List[str] = field(default_factory=list)
    members: List[Node] = field(default_factory=list)
    abstract: bool = False

    @property
    def state_vars(self) -> List[VarDecl]:
        return [m for m in self.members if isinstance(m, VarDecl)]

    @property
    def functions(self) -> List[FunctionDef]:
        return [m for m in self.members if isinstance(m, FunctionDef)]

    @property
    def modifiers(self) -> List[ModifierDef]:
        return [m for m in self.members if isinstance(m, ModifierDef)]

    @property
    def structs(self) -> List[StructDef]:
        return [m for m in self.members if isinstance(m, StructDef)]

    @property
    def has_payable_entry(self) -> bool:
        return any(f.is_payable for f in self.functions)

    @property
    def constructor(self) -> Optional[FunctionDef]:
        for function in self.functions:
            if function.is_constructor:
                return function
        return None

    def function(self, name: str) -> Optional[FunctionDef]:
        for function in self.functions:
            if function.display_name == name:
                return function
        return None

    def modifier(self, name: str) -> Optional[ModifierDef]:
        for modifier in self.modifiers:
            if modifier.name == name:
                return modifier
        return None

    def state_var(self, name: str) -> Optional[VarDecl]:
        for var in self.state_vars:
            if var.name == name:
                return var
        return None


@dataclass
class SourceUnit(Node):
    pragmas: List[str] = field(default_factory=list)
    contracts: List[ContractDef] = field(default_factory=list)
    path: str = field(default='<memory>', compare=False)
    next_id: int = field(default=0, compare=False, repr=False)

    @property
    def pragma(self) -> str:
        """Version constraint of the ``solidity`` pragma, empty when absent"""
        for pragma in self.pragmas:
            if pragma.startswith('solidity'):
                return pragma[len('solidity'):].strip()
        return ''

    def contract(self, name: str) -> Optional[ContractDef]:
        for contract in self.contracts:
            if contract.name == name:
                return contract
        return None

    def fresh_id(self) -> int:
        node_id = self.next_id
        self.next_id += 1
        return node_id

    def adopt(self, node: Node) -> Node:
        """Give every id-less node under ``node`` a fresh id and a synthetic span"""
        for child in walk(node):
            if child.node_id < 0:
                child.node_id = self.fresh_id()
                child.span = synthetic_span()
        return node


# ---------------------------------------------------------------------------
# Traversal

def iter_children(node: Node) -> Iterator[Node]:
    for f in fields(node):
        if f.name in ('node_id', 'span'):
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal"""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(iter_children(current))))


def parent_map(root: Node) -> Dict[int, Node]:
    parents: Dict[int, Node] = {}
    for node in walk(root):
        for child in iter_children(node):
            parents[child.node_id] = node
    return parents


def find_node(root: Node, node_id: int) -> Optional[Node]:
    for node in walk(root):
        if node.node_id == node_id:
            return node
    return None


def replace_child(parent: Node, old: Node, new: Node) -> bool:
    """Swap ``old`` for ``new`` in whichever field of ``parent`` holds it"""
    for f in fields(parent):
        value = getattr(parent, f.name)
        if value is old:
            setattr(parent, f.name, new)
            return True
        if isinstance(value, list):
            for index, item in enumerate(value):
                if item is old:
                    value[index] = new
                    return True
    return False


# ---------------------------------------------------------------------------
# Type helpers

_ELEMENTARY = re.compile(
    r'^(address|bool|string|bytes|byte|var|uint\d*|int\d*|bytes\d+|fixed[\dx]*|ufixed[\dx]*)$'
)


def is_elementary_type_name(name: str) -> bool:
    return bool(_ELEMENTARY.match(name))


def is_composite_type(type_name: TypeName) -> bool:
    if isinstance(type_name, (MappingType, ArrayType)):
        return True
    if isinstance(type_name, ElementaryType):
        return type_name.name in ('string', 'bytes')
    # user-defined types are structs, enums or contracts; enums and contracts
    # are values, resolved by the caller when it knows the struct names
    return False


def is_address_type(type_name: TypeName) -> bool:
    return isinstance(type_name, ElementaryType) and type_name.name in ('address', 'address payable')


def base_identifier(expression: Optional[Expression]) -> Optional[Identifier]:
    """Root variable of an lvalue like ``a.b[c].d``"""
    current = expression
    while True:
        if isinstance(current, Identifier):
            return current
        if isinstance(current, MemberAccess):
            current = current.expression
        elif isinstance(current, IndexAccess):
            current = current.base
        elif isinstance(current, TupleExpression) and len(current.components) == 1:
            current = current.components[0]
        else:
            return None


_VERSION = re.compile(r'(\d+)\.(\d+)(?:\.(\d+))?')


def pragma_version(unit: SourceUnit) -> Tuple[int, int, int]:
    """Lowest compiler version admitted by the unit's pragma; 0.4.24 when there is none"""
    match = _VERSION.search(unit.pragma)
    if match is None:
        return (0, 4, 24)
    return (int(match.group(1)), int(match.group(2)), int(match.group(3) or 0))
