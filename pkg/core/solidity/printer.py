import logging
from typing import List, Optional

from core.errors import PrintError
from core.solidity.ast_nodes import (
    ArrayType, Assignment, BinaryOp, Block, CallOptions, Conditional, ContractDef,
    ElementaryType, EmitStatement, EnumDef, EventDef, Expression, ExpressionStatement,
    ForStatement, FunctionCall, FunctionDef, Identifier, IfStatement, IndexAccess, Literal,
    MappingType, MemberAccess, ModifierDef, ModifierInvocation, NewExpression, Node,
    ReturnStatement, SourceUnit, Statement, StructDef, TupleExpression, TypeExpression,
    TypeName, UnaryOp, UserDefinedType, UsingFor, VarDecl, VarDeclStatement, WhileStatement,
)
from core.solidity.parser import BINARY_LEVELS

logger = logging.getLogger(__name__)

INDENT = '    '

ASSIGNMENT_PRECEDENCE = 1
CONDITIONAL_PRECEDENCE = 2
BINARY_PRECEDENCE = {op: 3 + level for level, ops in enumerate(BINARY_LEVELS) for op in ops}
BINARY_PRECEDENCE['**'] = 3 + len(BINARY_LEVELS)
PREFIX_PRECEDENCE = BINARY_PRECEDENCE['**'] + 1
POSTFIX_PRECEDENCE = PREFIX_PRECEDENCE + 1
PRIMARY_PRECEDENCE = POSTFIX_PRECEDENCE + 1


def precedence(expression: Expression) -> int:
    if isinstance(expression, Assignment):
        return ASSIGNMENT_PRECEDENCE
    if isinstance(expression, Conditional):
        return CONDITIONAL_PRECEDENCE
    if isinstance(expression, BinaryOp):
        return BINARY_PRECEDENCE[expression.operator]
    if isinstance(expression, UnaryOp):
        return PREFIX_PRECEDENCE if expression.prefix else POSTFIX_PRECEDENCE
    if isinstance(expression, (FunctionCall, CallOptions, MemberAccess, IndexAccess)):
        return POSTFIX_PRECEDENCE
    return PRIMARY_PRECEDENCE


class SourcePrinter:
    """Canonical pre-order emitter; unknown node kinds raise PrintError"""

    def __init__(self):
        self.lines: List[str] = []
        self.depth = 0

    def emit(self, text: str):
        self.lines.append(f"{INDENT * self.depth}{text}" if text else '')

    # -- declarations ----------------------------------------------------

    def print_unit(self, unit: SourceUnit) -> str:
        for pragma in unit.pragmas:
            self.emit(f"pragma {pragma};")
        for index, contract in enumerate(unit.contracts):
            if index > 0 or unit.pragmas:
                self.emit('')
            self.print_contract(contract)
        return '\n'.join(self.lines) + '\n'

    def print_contract(self, contract: ContractDef):
        header = f"{'abstract ' if contract.abstract else ''}{contract.kind} {contract.name}"
        if contract.bases:
            header += f" is {', '.join(contract.bases)}"
        if not contract.members:
            self.emit(header + ' {}')
            return
        self.emit(header + ' {')
        self.depth += 1
        previous: Optional[Node] = None
        for member in contract.members:
            if previous is not None and (_has_body(member) or _has_body(previous)):
                self.emit('')
            self.print_member(member)
            previous = member
        self.depth -= 1
        self.emit('}')

    def print_member(self, member: Node):
        if isinstance(member, VarDecl):
            self.emit(self.state_variable(member))
        elif isinstance(member, FunctionDef):
            self.print_function(member)
        elif isinstance(member, ModifierDef):
            header = f"modifier {member.name}"
            if member.has_parens or member.params:
                header += f"({self.parameter_list(member.params)})"
            self.print_body(header, member.body)
        elif isinstance(member, StructDef):
            self.emit(f"struct {member.name} {{")
            self.depth += 1
            for field_decl in member.members:
                self.emit(f"{self.type_name(field_decl.type_name)} {field_decl.name};")
            self.depth -= 1
            self.emit('}')
        elif isinstance(member, EnumDef):
            self.emit(f"enum {member.name} {{ {', '.join(member.values)} }}")
        elif isinstance(member, EventDef):
            suffix = ' anonymous' if member.anonymous else ''
            self.emit(f"event {member.name}({self.parameter_list(member.params)}){suffix};")
        elif isinstance(member, UsingFor):
            target = self.type_name(member.target) if member.target is not None else '*'
            self.emit(f"using {member.library} for {target};")
        else:
            raise PrintError(f"no emission rule for contract member {type(member).__name__}")

    def state_variable(self, var: VarDecl) -> str:
        parts = [self.type_name(var.type_name)]
        if var.visibility:
            parts.append(var.visibility)
        if var.constant:
            parts.append('constant')
        if var.immutable:
            parts.append('immutable')
        parts.append(var.name)
        text = ' '.join(parts)
        if var.initial_value is not None:
            text += f" = {self.expression(var.initial_value)}"
        return text + ';'

    def print_function(self, function: FunctionDef):
        if function.kind == 'constructor' and function.legacy:
            head = f"function {function.name}"
        elif function.kind == 'fallback' and function.legacy:
            head = 'function'
        elif function.kind == 'function':
            head = f"function {function.name}"
        else:
            head = function.kind
        parts = [f"{head}({self.parameter_list(function.params)})"]
        if function.visibility:
            parts.append(function.visibility)
        if function.mutability:
            parts.append(function.mutability)
        if function.virtual:
            parts.append('virtual')
        if function.override:
            parts.append('override')
        parts.extend(self.modifier_invocation(m) for m in function.modifiers)
        if function.returns:
            parts.append(f"returns ({self.parameter_list(function.returns)})")
        self.print_body(' '.join(parts), function.body)

    def print_body(self, header: str, body: Optional[Block]):
        if body is None:
            self.emit(header + ';')
            return
        self.emit(header + ' {')
        self.print_block_contents(body)
        self.emit('}')

    def modifier_invocation(self, invocation: ModifierInvocation) -> str:
        if invocation.arguments is None:
            return invocation.name
        return f"{invocation.name}({self.arguments(invocation.arguments)})"

    def parameter_list(self, params: List[VarDecl]) -> str:
        return ', '.join(self.parameter(p) for p in params)

    def parameter(self, param: VarDecl) -> str:
        parts = [self.type_name(param.type_name)]
        if param.indexed:
            parts.append('indexed')
        if param.data_location != 'default':
            parts.append(param.data_location)
        if param.name:
            parts.append(param.name)
        return ' '.join(parts)

    def type_name(self, type_name: TypeName) -> str:
        if isinstance(type_name, (ElementaryType, UserDefinedType)):
            return type_name.name
        if isinstance(type_name, MappingType):
            return f"mapping({self.type_name(type_name.key_type)} => {self.type_name(type_name.value_type)})"
        if isinstance(type_name, ArrayType):
            length = self.expression(type_name.length) if type_name.length is not None else ''
            return f"{self.type_name(type_name.base_type)}[{length}]"
        raise PrintError(f"no emission rule for type {type(type_name).__name__}")

    # -- statements ------------------------------------------------------

    def print_block_contents(self, block: Block):
        self.depth += 1
        for statement in block.statements:
            self.print_statement(statement)
        self.depth -= 1

    def print_nested(self, header: str, body: Statement):
        """Print ``header`` followed by a body that may or may not be a block"""
        if isinstance(body, Block):
            self.emit(f"{header} {{")
            self.print_block_contents(body)
            self.emit('}')
        else:
            self.emit(header)
            self.depth += 1
            self.print_statement(body)
            self.depth -= 1

    def print_statement(self, statement: Statement):
        if isinstance(statement, Block):
            self.emit('{')
            self.print_block_contents(statement)
            self.emit('}')
        elif isinstance(statement, IfStatement):
            self.print_if(statement, 'if')
        elif isinstance(statement, ForStatement):
            init = self.simple_statement(statement.init) if statement.init is not None else ';'
            condition = f" {self.expression(statement.condition)}" if statement.condition is not None else ''
            update = f" {self.expression(statement.update)}" if statement.update is not None else ''
            self.print_nested(f"for ({init}{condition};{update})", statement.body)
        elif isinstance(statement, WhileStatement):
            self.print_nested(f"while ({self.expression(statement.condition)})", statement.body)
        else:
            self.emit(self.simple_statement(statement))

    def print_if(self, statement: IfStatement, keyword: str):
        header = f"{keyword} ({self.expression(statement.condition)})"
        false_body = statement.false_body
        if false_body is None:
            self.print_nested(header, statement.true_body)
            return
        if isinstance(statement.true_body, Block):
            self.emit(f"{header} {{")
            self.print_block_contents(statement.true_body)
            prefix = '} else'
        else:
            self.emit(header)
            self.depth += 1
            self.print_statement(statement.true_body)
            self.depth -= 1
            prefix = 'else'

        if isinstance(false_body, IfStatement):
            self.print_if_continuation(prefix, false_body)
        elif isinstance(false_body, Block):
            self.emit(f"{prefix} {{")
            self.print_block_contents(false_body)
            self.emit('}')
        else:
            self.emit(prefix)
            self.depth += 1
            self.print_statement(false_body)
            self.depth -= 1

    def print_if_continuation(self, prefix: str, statement: IfStatement):
        # "} else if (...)" keeps the chain flat
        marker = len(self.lines)
        self.print_if(statement, 'if')
        first = self.lines[marker]
        self.lines[marker] = f"{first[:len(first) - len(first.lstrip())]}{prefix} {first.lstrip()}"

    def simple_statement(self, statement: Statement) -> str:
        if isinstance(statement, ExpressionStatement):
            return self.expression(statement.expression) + ';'
        if isinstance(statement, VarDeclStatement):
            return self.variable_declaration(statement) + ';'
        if isinstance(statement, ReturnStatement):
            if statement.expression is None:
                return 'return;'
            return f"return {self.expression(statement.expression)};"
        if isinstance(statement, EmitStatement):
            return f"emit {self.expression(statement.call)};"
        name = type(statement).__name__
        if name == 'BreakStatement':
            return 'break;'
        if name == 'ContinueStatement':
            return 'continue;'
        if name == 'PlaceholderStatement':
            return '_;'
        if name == 'ThrowStatement':
            return 'throw;'
        raise PrintError(f"no emission rule for statement {name}")

    def variable_declaration(self, statement: VarDeclStatement) -> str:
        if statement.tuple_form:
            parts = [self.parameter(d) if d is not None else '' for d in statement.declarations]
            text = f"({', '.join(parts)})"
        else:
            text = self.parameter(statement.declarations[0])
        if statement.initial_value is not None:
            text += f" = {self.expression(statement.initial_value)}"
        return text

    # -- expressions -----------------------------------------------------

    def arguments(self, arguments: List[Expression]) -> str:
        return ', '.join(self.expression(a) for a in arguments)

    def operand(self, expression: Expression, minimum: int) -> str:
        text = self.expression(expression)
        if precedence(expression) < minimum:
            return f"({text})"
        return text

    def expression(self, expression: Optional[Expression]) -> str:
        if expression is None:
            raise PrintError("missing expression")
        if isinstance(expression, Identifier):
            return expression.name
        if isinstance(expression, Literal):
            if expression.subdenomination:
                return f"{expression.value} {expression.subdenomination}"
            return expression.value
        if isinstance(expression, BinaryOp):
            own = BINARY_PRECEDENCE[expression.operator]
            if expression.operator == '**':
                left = self.operand(expression.left, own + 1)
                right = self.operand(expression.right, own)
            else:
                left = self.operand(expression.left, own)
                right = self.operand(expression.right, own + 1)
            return f"{left} {expression.operator} {right}"
        if isinstance(expression, UnaryOp):
            if expression.prefix:
                operand = self.operand(expression.operand, PREFIX_PRECEDENCE)
                if expression.operator == 'delete':
                    return f"delete {operand}"
                if expression.operator in ('-', '+') and operand.startswith(expression.operator):
                    return f"{expression.operator} {operand}"
                return f"{expression.operator}{operand}"
            return f"{self.operand(expression.operand, POSTFIX_PRECEDENCE)}{expression.operator}"
        if isinstance(expression, Assignment):
            left = self.operand(expression.left, CONDITIONAL_PRECEDENCE)
            right = self.operand(expression.right, ASSIGNMENT_PRECEDENCE)
            return f"{left} {expression.operator} {right}"
        if isinstance(expression, Conditional):
            condition = self.operand(expression.condition, CONDITIONAL_PRECEDENCE + 1)
            true_text = self.operand(expression.true_expression, ASSIGNMENT_PRECEDENCE)
            false_text = self.operand(expression.false_expression, CONDITIONAL_PRECEDENCE)
            return f"{condition} ? {true_text} : {false_text}"
        if isinstance(expression, FunctionCall):
            callee = self.operand(expression.callee, POSTFIX_PRECEDENCE)
            if expression.names:
                pairs = ', '.join(f"{n}: {self.expression(v)}"
                                  for n, v in zip(expression.names, expression.arguments))
                return f"{callee}({{{pairs}}})"
            return f"{callee}({self.arguments(expression.arguments)})"
        if isinstance(expression, CallOptions):
            callee = self.operand(expression.callee, POSTFIX_PRECEDENCE)
            if expression.legacy:
                return callee + ''.join(f".{n}({self.expression(v)})"
                                        for n, v in zip(expression.names, expression.values))
            pairs = ', '.join(f"{n}: {self.expression(v)}" for n, v in zip(expression.names, expression.values))
            return f"{callee}{{{pairs}}}"
        if isinstance(expression, MemberAccess):
            return f"{self.operand(expression.expression, POSTFIX_PRECEDENCE)}.{expression.member}"
        if isinstance(expression, IndexAccess):
            index = self.expression(expression.index) if expression.index is not None else ''
            return f"{self.operand(expression.base, POSTFIX_PRECEDENCE)}[{index}]"
        if isinstance(expression, TupleExpression):
            parts = ', '.join(self.expression(c) if c is not None else '' for c in expression.components)
            if expression.is_array:
                return f"[{parts}]"
            return f"({parts})"
        if isinstance(expression, NewExpression):
            return f"new {self.type_name(expression.type_name)}"
        if isinstance(expression, TypeExpression):
            return self.type_name(expression.type_name)
        raise PrintError(f"no emission rule for expression {type(expression).__name__}")


def _has_body(member: Node) -> bool:
    return isinstance(member, (FunctionDef, ModifierDef, StructDef))


def print_unit(unit: SourceUnit) -> str:
    """Canonical source text of ``unit``"""
    return SourcePrinter().print_unit(unit)


def print_node(node: Node) -> str:
    """Text of a single statement, expression or member, used in reports and tests"""
    printer = SourcePrinter()
    if isinstance(node, Expression):
        return printer.expression(node)
    if isinstance(node, TypeName):
        return printer.type_name(node)
    if isinstance(node, Statement):
        printer.print_statement(node)
    elif isinstance(node, ContractDef):
        printer.print_contract(node)
    elif isinstance(node, SourceUnit):
        return printer.print_unit(node)
    else:
        printer.print_member(node)
    return '\n'.join(printer.lines)
