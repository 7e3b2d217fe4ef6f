"""
LALR grammar for the supported Solidity subset, built with ply.yacc.

Inside function bodies a declaration and an expression share their prefix
(``Foo[] memory x`` against ``foo[i] = x``), so a local declaration is read
as a postfix expression followed by a name and the expression is turned
back into a type. Tuple declarations ride on tuple expressions the same way
and are split off when the statement is a plain ``=`` assignment.
"""
import logging
import threading
from typing import Dict, Iterable, List, Optional

import ply.yacc as yacc

from core.errors import SoliditySyntaxError, UnsupportedConstruct
from core.solidity.ast_nodes import (
    ArrayType, Assignment, BinaryOp, Block, BreakStatement, CallOptions, Conditional,
    ContinueStatement, ContractDef, ElementaryType, EmitStatement, EnumDef, EventDef,
    Expression, ExpressionStatement, ForStatement, FunctionCall, FunctionDef, Identifier,
    IfStatement, IndexAccess, Literal, MappingType, MemberAccess, ModifierDef,
    ModifierInvocation, NewExpression, Node, PlaceholderStatement, ReturnStatement,
    SourceUnit, Span, Statement, StructDef, ThrowStatement, TupleExpression, TypeExpression,
    TypeName, UnaryOp, UserDefinedType, UsingFor, VarDecl, VarDeclStatement,
    WhileStatement, is_elementary_type_name,
)
from core.solidity.lexer import OPERATORS, SolidityLexer, column_of, new_lexer

logger = logging.getLogger(__name__)

VISIBILITIES = ('public', 'private', 'internal', 'external')
MUTABILITIES = ('payable', 'view', 'pure', 'constant')
LEGACY_CALL_MEMBERS = ('call', 'delegatecall', 'callcode')

# left-associative binary operators, loosest first; ``**`` binds tighter still
BINARY_LEVELS = (
    ('||',), ('&&',), ('==', '!='), ('<', '>', '<=', '>='), ('|',), ('^',), ('&',),
    ('<<', '>>'), ('+', '-'), ('*', '/', '%'),
)

UNSUPPORTED_STATEMENTS = {
    'assembly': 'inline assembly',
    'try': 'try/catch',
    'do': 'do-while loop',
    'unchecked': 'unchecked block',
}

TOKEN_TEXT = {name: text for text, name in OPERATORS.items()}
TOKEN_TEXT.update({
    'IDENT': 'identifier', 'NUMBER': 'number', 'STRING': 'string literal',
    'PRAGMA': 'pragma', 'SUBDENOMINATION': 'unit', '$end': 'end of input',
})


def describe_token(name: str) -> str:
    return TOKEN_TEXT.get(name, name.lower())


class SolidityGrammar:
    """
    Grammar actions plus the per-parse state they share.

    One instance owns one ply parser; ``parse`` resets the state, so an
    instance can be reused but not shared between threads.
    """

    tokens = SolidityLexer.tokens

    precedence = (
        ('nonassoc', 'LOWER_THAN_ELSE'),
        ('nonassoc', 'ELSE'),
        *(('left', *(OPERATORS[op] for op in level)) for level in BINARY_LEVELS),
        ('right', 'POW'),
    )

    def __init__(self):
        # the remaining shift/reduce conflicts (qualified and array types after
        # ``new``) resolve to shift, which is the intended reading
        self.parser = yacc.yacc(module=self, start='source_unit', debug=False,
                                write_tables=False, errorlog=yacc.NullLogger())
        self.source = ''
        self.path = '<memory>'
        self.lexer = None
        self.next_id = 0
        self.contract_name = ''
        self.declaration_tuples: Dict[int, TupleExpression] = {}

    def parse(self, source: str, path: str = '<memory>') -> SourceUnit:
        self.source, self.path = source, path
        self.next_id = 0
        self.contract_name = ''
        self.declaration_tuples = {}
        self.lexer = new_lexer()
        unit = self.parser.parse(source, lexer=self.lexer, tracking=True)
        if self.declaration_tuples:
            stray = min(self.declaration_tuples.values(), key=lambda t: t.span.start)
            raise SoliditySyntaxError("variable declaration inside an expression",
                                      stray.span.line, stray.span.column)
        unit.node_id = self.fresh_id()
        unit.span = Span(0, len(source), 1, 1)
        unit.next_id = self.next_id
        return unit

    # -- helpers ---------------------------------------------------------

    def fresh_id(self) -> int:
        node_id = self.next_id
        self.next_id += 1
        return node_id

    def finish(self, p, node: Node, first: int = 1, last: Optional[int] = None) -> Node:
        last = len(p) - 1 if last is None else last
        start = p.lexpos(first)
        end = p.lexspan(last)[1]
        node.span = Span(start, max(end, start), p.lineno(first), column_of(self.source, start))
        node.node_id = self.fresh_id()
        return node

    def relabel(self, node: Node, like: Node) -> Node:
        node.span = like.span
        node.node_id = self.fresh_id()
        return node

    def position(self, p, n: int):
        return p.lineno(n), column_of(self.source, p.lexpos(n))

    def unsupported(self, p, n: int, construct: str) -> UnsupportedConstruct:
        return UnsupportedConstruct(construct, *self.position(p, n))

    def error(self, p, n: int, message: str, expected: Iterable[str] = ()) -> SoliditySyntaxError:
        return SoliditySyntaxError(message, *self.position(p, n), expected)

    def as_type(self, expression: Expression, p, payable: bool = False) -> TypeName:
        """Re-read the expression in front of a declared name as its type"""
        if isinstance(expression, TypeExpression) and expression.type_name.name != 'payable':
            type_name = expression.type_name
            if not payable:
                return type_name
            if type_name.name != 'address':
                raise self.error(p, 2, "only 'address' can be payable", ['identifier'])
            span = expression.span
            node = ElementaryType(name='address payable')
            node.span = Span(span.start, p.lexspan(2)[1], span.line, span.column)
            node.node_id = self.fresh_id()
            return node
        if payable:
            raise self.error(p, 2, "only 'address' can be payable", ['identifier'])
        if isinstance(expression, Identifier):
            return self.relabel(UserDefinedType(name=expression.name), expression)
        if isinstance(expression, MemberAccess):
            base = self.as_type(expression.expression, p)
            if isinstance(base, UserDefinedType):
                return self.relabel(UserDefinedType(name=f"{base.name}.{expression.member}"), expression)
        if isinstance(expression, IndexAccess):
            base = self.as_type(expression.base, p)
            return self.relabel(ArrayType(base_type=base, length=expression.index), expression)
        span = expression.span
        raise SoliditySyntaxError("expected type name", span.line, span.column, ['type name'])

    def tuple_declaration(self, expression: Expression) -> Optional[VarDeclStatement]:
        """``(uint a, ) = f()`` arrives as an assignment to a tuple holding declarations"""
        if not (isinstance(expression, Assignment) and expression.operator == '='
                and isinstance(expression.left, TupleExpression)):
            return None
        target = expression.left
        if self.declaration_tuples.get(target.node_id) is not target:
            return None
        if not all(c is None or isinstance(c, VarDecl) for c in target.components):
            raise SoliditySyntaxError("tuple mixes declarations and expressions",
                                      target.span.line, target.span.column)
        del self.declaration_tuples[target.node_id]
        return VarDeclStatement(declarations=list(target.components), initial_value=expression.right,
                                tuple_form=True)

    def simple_statement(self, value: Node, placeholder: bool = True) -> Statement:
        if isinstance(value, VarDeclStatement):
            return value
        declaration = self.tuple_declaration(value)
        if declaration is not None:
            return declaration
        if placeholder and isinstance(value, Identifier) and value.name == '_':
            return PlaceholderStatement()
        return ExpressionStatement(expression=value)

    @staticmethod
    def normalize_call(callee: Expression, arguments: List[Expression], names: List[str]) -> Expression:
        """Fold ``x.call.value(v)`` into the same option node as ``x.call{value: v}``"""
        if (isinstance(callee, MemberAccess) and callee.member in ('value', 'gas')
                and len(arguments) == 1 and not names):
            target = callee.expression
            if isinstance(target, CallOptions) and target.legacy:
                return CallOptions(callee=target.callee, names=target.names + [callee.member],
                                   values=target.values + arguments, legacy=True)
            if isinstance(target, MemberAccess) and target.member in LEGACY_CALL_MEMBERS:
                return CallOptions(callee=target, names=[callee.member], values=list(arguments), legacy=True)
        return FunctionCall(callee=callee, arguments=arguments, names=names)

    # -- source unit -----------------------------------------------------

    def p_source_unit(self, p):
        '''source_unit : source_items'''
        pragmas = [item for item in p[1] if isinstance(item, str)]
        contracts = [item for item in p[1] if isinstance(item, ContractDef)]
        p[0] = SourceUnit(pragmas=pragmas, contracts=contracts, path=self.path)

    def p_source_items(self, p):
        '''source_items :
                        | source_items source_item'''
        if len(p) == 1:
            p[0] = []
        else:
            p[1].append(p[2])
            p[0] = p[1]

    def p_source_item(self, p):
        '''source_item : PRAGMA SEMI
                       | contract_definition'''
        p[0] = p[1]

    def p_source_item_import(self, p):
        '''source_item : IMPORT'''
        raise self.unsupported(p, 1, 'import directive')

    # -- contracts -------------------------------------------------------

    def p_contract_head(self, p):
        '''contract_head : contract_kind IDENT
                         | ABSTRACT contract_kind IDENT'''
        name = p[len(p) - 1]
        self.contract_name = name
        p[0] = (len(p) == 4, p[len(p) - 2], name)

    def p_contract_kind(self, p):
        '''contract_kind : CONTRACT
                         | LIBRARY
                         | INTERFACE'''
        p[0] = p[1]

    def p_contract_definition(self, p):
        '''contract_definition : contract_head LBRACE contract_members RBRACE
                               | contract_head IS qualified_name LBRACE contract_members RBRACE'''
        abstract, kind, name = p[1]
        bases = [p[3]] if len(p) == 7 else []
        contract = ContractDef(name=name, kind=kind, bases=bases, members=p[len(p) - 2], abstract=abstract)
        p[0] = self.finish(p, contract)

    def p_contract_definition_unsupported(self, p):
        '''contract_definition : contract_head IS qualified_name LPAREN
                               | contract_head IS qualified_name COMMA'''
        construct = 'base constructor arguments' if p[4] == '(' else 'multiple inheritance'
        raise self.unsupported(p, 4, construct)

    def p_qualified_name(self, p):
        '''qualified_name : IDENT
                          | qualified_name DOT IDENT'''
        p[0] = p[1] if len(p) == 2 else f"{p[1]}.{p[3]}"

    def p_contract_members(self, p):
        '''contract_members :
                            | contract_members contract_member'''
        if len(p) == 1:
            p[0] = []
        else:
            p[1].append(p[2])
            p[0] = p[1]

    def p_contract_member(self, p):
        '''contract_member : function_definition
                           | modifier_definition
                           | event_definition
                           | struct_definition
                           | enum_definition
                           | using_directive
                           | state_variable'''
        p[0] = p[1]

    def p_state_variable(self, p):
        '''state_variable : type_name state_attributes IDENT SEMI
                          | type_name state_attributes IDENT ASSIGN expression SEMI'''
        attributes = p[2]
        visibility = None
        for attribute in attributes:
            if attribute in VISIBILITIES:
                visibility = attribute
        initial_value = p[5] if len(p) == 7 else None
        p[0] = self.finish(p, VarDecl(name=p[3], type_name=p[1], data_location='storage',
                                      visibility=visibility, constant='constant' in attributes,
                                      immutable='immutable' in attributes, initial_value=initial_value))

    def p_state_attributes(self, p):
        '''state_attributes :
                            | state_attributes visibility
                            | state_attributes CONSTANT
                            | state_attributes IMMUTABLE
                            | state_attributes OVERRIDE'''
        if len(p) == 1:
            p[0] = []
        else:
            p[1].append(p[2])
            p[0] = p[1]

    def p_visibility(self, p):
        '''visibility : PUBLIC
                      | PRIVATE
                      | INTERNAL
                      | EXTERNAL'''
        p[0] = p[1]

    def p_mutability(self, p):
        '''mutability : PAYABLE
                      | VIEW
                      | PURE
                      | CONSTANT'''
        p[0] = p[1]

    def p_struct_definition(self, p):
        '''struct_definition : STRUCT IDENT LBRACE struct_members RBRACE'''
        p[0] = self.finish(p, StructDef(name=p[2], members=p[4]))

    def p_struct_members(self, p):
        '''struct_members :
                          | struct_members struct_member'''
        if len(p) == 1:
            p[0] = []
        else:
            p[1].append(p[2])
            p[0] = p[1]

    def p_struct_member(self, p):
        '''struct_member : type_name IDENT SEMI'''
        p[0] = self.finish(p, VarDecl(name=p[2], type_name=p[1]), last=2)

    def p_enum_definition(self, p):
        '''enum_definition : ENUM IDENT LBRACE RBRACE
                           | ENUM IDENT LBRACE enum_values RBRACE
                           | ENUM IDENT LBRACE enum_values COMMA RBRACE'''
        values = p[4] if len(p) > 5 else []
        p[0] = self.finish(p, EnumDef(name=p[2], values=values))

    def p_enum_values(self, p):
        '''enum_values : IDENT
                       | enum_values COMMA IDENT'''
        if len(p) == 2:
            p[0] = [p[1]]
        else:
            p[1].append(p[3])
            p[0] = p[1]

    def p_event_definition(self, p):
        '''event_definition : EVENT IDENT parameter_list SEMI
                            | EVENT IDENT parameter_list ANONYMOUS SEMI'''
        p[0] = self.finish(p, EventDef(name=p[2], params=p[3], anonymous=len(p) == 6))

    def p_using_directive(self, p):
        '''using_directive : USING qualified_name FOR TIMES SEMI
                           | USING qualified_name FOR type_name SEMI'''
        target = None if p[4] == '*' else p[4]
        p[0] = self.finish(p, UsingFor(library=p[2], target=target))

    # -- functions and modifiers -----------------------------------------

    def p_function_definition(self, p):
        '''function_definition : function_head parameter_list function_attributes function_body'''
        kind, name, legacy = p[1]
        params = p[2]
        if kind == 'function':
            names = [param.name for param in params if param.name]
            if len(names) != len(set(names)):
                raise self.error(p, 2, f"duplicate parameter name in function '{name}'")

        visibility = mutability = None
        virtual = override = False
        modifiers: List[ModifierInvocation] = []
        returns: List[VarDecl] = []
        for attribute in p[3]:
            if isinstance(attribute, ModifierInvocation):
                modifiers.append(attribute)
            elif isinstance(attribute, list):
                returns = attribute
            elif attribute in VISIBILITIES:
                visibility = attribute
            elif attribute in MUTABILITIES:
                mutability = attribute
            elif attribute == 'virtual':
                virtual = True
            elif attribute == 'override':
                override = True

        # calldata is reserved for external parameters
        for param in params:
            if param.data_location == 'calldata' and visibility != 'external':
                raise SoliditySyntaxError(
                    f"calldata parameter '{param.name}' outside an external function",
                    param.span.line, param.span.column)

        p[0] = self.finish(p, FunctionDef(
            kind=kind, name=name, params=params, returns=returns, modifiers=modifiers,
            visibility=visibility, mutability=mutability, body=p[4],
            virtual=virtual, override=override, legacy=legacy))

    def p_function_head(self, p):
        '''function_head : FUNCTION IDENT
                         | FUNCTION
                         | CONSTRUCTOR
                         | FALLBACK
                         | RECEIVE'''
        if p[1] != 'function':
            p[0] = (p[1], '', False)
        elif len(p) == 2:
            p[0] = ('fallback', '', True)
        elif p[2] == self.contract_name:
            p[0] = ('constructor', p[2], True)
        else:
            p[0] = ('function', p[2], False)

    def p_function_attributes(self, p):
        '''function_attributes :
                               | function_attributes function_attribute'''
        if len(p) == 1:
            p[0] = []
        else:
            p[1].append(p[2])
            p[0] = p[1]

    def p_function_attribute(self, p):
        '''function_attribute : visibility
                              | mutability
                              | VIRTUAL
                              | OVERRIDE
                              | modifier_invocation'''
        p[0] = p[1]

    def p_function_attribute_returns(self, p):
        '''function_attribute : RETURNS parameter_list'''
        p[0] = p[2]

    def p_function_attribute_override_list(self, p):
        '''function_attribute : OVERRIDE LPAREN'''
        raise self.unsupported(p, 2, 'override specifier list')

    def p_function_body(self, p):
        '''function_body : SEMI
                         | block'''
        p[0] = None if p[1] == ';' else p[1]

    def p_modifier_invocation(self, p):
        '''modifier_invocation : qualified_name
                               | qualified_name LPAREN RPAREN
                               | qualified_name LPAREN expression_list RPAREN'''
        arguments = None
        if len(p) == 4:
            arguments = []
        elif len(p) == 5:
            arguments = p[3]
        p[0] = self.finish(p, ModifierInvocation(name=p[1], arguments=arguments))

    def p_modifier_definition(self, p):
        '''modifier_definition : MODIFIER IDENT modifier_attributes function_body
                               | MODIFIER IDENT parameter_list modifier_attributes function_body'''
        has_parens = len(p) == 6
        params = p[3] if has_parens else []
        p[0] = self.finish(p, ModifierDef(name=p[2], params=params, body=p[len(p) - 1],
                                          has_parens=has_parens))

    def p_modifier_attributes(self, p):
        '''modifier_attributes :
                               | modifier_attributes VIRTUAL
                               | modifier_attributes OVERRIDE'''

    def p_parameter_list(self, p):
        '''parameter_list : LPAREN RPAREN
                          | LPAREN parameters RPAREN'''
        p[0] = p[2] if len(p) == 4 else []

    def p_parameters(self, p):
        '''parameters : parameter
                      | parameters COMMA parameter'''
        if len(p) == 2:
            p[0] = [p[1]]
        else:
            p[1].append(p[3])
            p[0] = p[1]

    def p_parameter(self, p):
        '''parameter : type_name
                     | type_name IDENT
                     | type_name data_location
                     | type_name data_location IDENT
                     | type_name INDEXED
                     | type_name INDEXED IDENT
                     | type_name INDEXED data_location
                     | type_name INDEXED data_location IDENT'''
        name, data_location, indexed = '', 'default', False
        for n in range(2, len(p)):
            kind = p.slice[n].type
            if kind == 'IDENT':
                name = p[n]
            elif kind == 'data_location':
                data_location = p[n]
            else:
                indexed = True
        p[0] = self.finish(p, VarDecl(name=name, type_name=p[1], data_location=data_location, indexed=indexed))

    def p_parameter_function_type(self, p):
        '''parameter : FUNCTION'''
        raise self.unsupported(p, 1, 'function type')

    def p_data_location(self, p):
        '''data_location : STORAGE
                         | MEMORY
                         | CALLDATA'''
        p[0] = p[1]

    # -- types -----------------------------------------------------------

    def p_type_name(self, p):
        '''type_name : user_type'''
        name = p[1]
        if '.' not in name and is_elementary_type_name(name):
            p[0] = self.finish(p, ElementaryType(name=name))
        else:
            p[0] = self.finish(p, UserDefinedType(name=name))

    def p_user_type(self, p):
        '''user_type : IDENT
                     | user_type DOT IDENT'''
        p[0] = p[1] if len(p) == 2 else f"{p[1]}.{p[3]}"

    def p_type_name_payable(self, p):
        '''type_name : IDENT PAYABLE'''
        if p[1] != 'address':
            raise self.error(p, 2, "only 'address' can be payable", ['identifier'])
        p[0] = self.finish(p, ElementaryType(name='address payable'))

    def p_type_name_var(self, p):
        '''type_name : VAR'''
        p[0] = self.finish(p, ElementaryType(name='var'))

    def p_type_name_mapping(self, p):
        '''type_name : mapping_type'''
        p[0] = p[1]

    def p_mapping_type(self, p):
        '''mapping_type : MAPPING LPAREN type_name ARROW type_name RPAREN'''
        p[0] = self.finish(p, MappingType(key_type=p[3], value_type=p[5]))

    def p_type_name_array(self, p):
        '''type_name : type_name LBRACKET RBRACKET
                     | type_name LBRACKET expression RBRACKET'''
        length = p[3] if len(p) == 5 else None
        p[0] = self.finish(p, ArrayType(base_type=p[1], length=length))

    # -- statements ------------------------------------------------------

    def p_block(self, p):
        '''block : LBRACE statements RBRACE'''
        p[0] = self.finish(p, Block(statements=p[2]))

    def p_statements(self, p):
        '''statements :
                      | statements statement'''
        if len(p) == 1:
            p[0] = []
        else:
            p[1].append(p[2])
            p[0] = p[1]

    def p_statement_block(self, p):
        '''statement : block'''
        p[0] = p[1]

    def p_statement_simple(self, p):
        '''statement : simple_statement SEMI'''
        p[0] = self.finish(p, self.simple_statement(p[1]))

    def p_statement_if(self, p):
        '''statement : IF LPAREN expression RPAREN statement %prec LOWER_THAN_ELSE
                     | IF LPAREN expression RPAREN statement ELSE statement'''
        false_body = p[7] if len(p) == 8 else None
        p[0] = self.finish(p, IfStatement(condition=p[3], true_body=p[5], false_body=false_body))

    def p_statement_while(self, p):
        '''statement : WHILE LPAREN expression RPAREN statement'''
        p[0] = self.finish(p, WhileStatement(condition=p[3], body=p[5]))

    def p_statement_for(self, p):
        '''statement : FOR LPAREN for_init for_condition for_update statement'''
        p[0] = self.finish(p, ForStatement(init=p[3], condition=p[4], update=p[5], body=p[6]))

    def p_for_init(self, p):
        '''for_init : SEMI
                    | simple_statement SEMI'''
        p[0] = None if len(p) == 2 else self.finish(p, self.simple_statement(p[1], placeholder=False))

    def p_for_condition(self, p):
        '''for_condition : SEMI
                         | expression SEMI'''
        p[0] = None if len(p) == 2 else p[1]

    def p_for_update(self, p):
        '''for_update : RPAREN
                      | expression RPAREN'''
        p[0] = None if len(p) == 2 else p[1]

    def p_statement_return(self, p):
        '''statement : RETURN SEMI
                     | RETURN expression SEMI'''
        expression = p[2] if len(p) == 4 else None
        p[0] = self.finish(p, ReturnStatement(expression=expression))

    def p_statement_emit(self, p):
        '''statement : EMIT expression SEMI'''
        if not isinstance(p[2], FunctionCall):
            raise self.error(p, 2, "expected event invocation after 'emit'", ['event call'])
        p[0] = self.finish(p, EmitStatement(call=p[2]))

    def p_statement_jump(self, p):
        '''statement : THROW SEMI
                     | BREAK SEMI
                     | CONTINUE SEMI'''
        node = {'throw': ThrowStatement, 'break': BreakStatement, 'continue': ContinueStatement}[p[1]]()
        p[0] = self.finish(p, node)

    def p_statement_unsupported(self, p):
        '''statement : ASSEMBLY
                     | TRY
                     | DO
                     | UNCHECKED'''
        raise self.unsupported(p, 1, UNSUPPORTED_STATEMENTS[p[1]])

    def p_simple_statement(self, p):
        '''simple_statement : expression
                            | variable_declaration'''
        p[0] = p[1]

    def p_variable_declaration(self, p):
        '''variable_declaration : local_declaration
                                | local_declaration ASSIGN expression'''
        value = p[3] if len(p) == 4 else None
        p[0] = VarDeclStatement(declarations=[p[1]], initial_value=value)

    def p_variable_declaration_var_tuple(self, p):
        '''variable_declaration : VAR LPAREN'''
        raise self.unsupported(p, 1, 'var tuple declaration')

    def p_local_declaration(self, p):
        '''local_declaration : postfix IDENT
                             | postfix data_location IDENT
                             | postfix PAYABLE IDENT
                             | postfix PAYABLE data_location IDENT'''
        payable = p.slice[2].type == 'PAYABLE'
        type_name = self.as_type(p[1], p, payable)
        data_location = 'default'
        for n in range(2, len(p) - 1):
            if p.slice[n].type == 'data_location':
                data_location = p[n]
        p[0] = self.finish(p, VarDecl(name=p[len(p) - 1], type_name=type_name, data_location=data_location))

    def p_local_declaration_mapping(self, p):
        '''local_declaration : mapping_type IDENT
                             | mapping_type data_location IDENT'''
        data_location = p[2] if len(p) == 4 else 'default'
        p[0] = self.finish(p, VarDecl(name=p[len(p) - 1], type_name=p[1], data_location=data_location))

    def p_local_declaration_var(self, p):
        '''local_declaration : VAR IDENT'''
        type_name = self.finish(p, ElementaryType(name='var'), last=1)
        p[0] = self.finish(p, VarDecl(name=p[2], type_name=type_name))

    # -- expressions -----------------------------------------------------

    def p_expression(self, p):
        '''expression : conditional
                      | conditional assignment_operator expression'''
        if len(p) == 2:
            p[0] = p[1]
        else:
            p[0] = self.finish(p, Assignment(left=p[1], operator=p[2], right=p[3]))

    def p_assignment_operator(self, p):
        '''assignment_operator : ASSIGN
                               | ADD_ASSIGN
                               | SUB_ASSIGN
                               | MUL_ASSIGN
                               | DIV_ASSIGN
                               | MOD_ASSIGN
                               | OR_ASSIGN
                               | AND_ASSIGN
                               | XOR_ASSIGN
                               | SHL_ASSIGN
                               | SHR_ASSIGN'''
        p[0] = p[1]

    def p_conditional(self, p):
        '''conditional : binary
                       | binary QUESTION expression COLON conditional'''
        if len(p) == 2:
            p[0] = p[1]
        else:
            p[0] = self.finish(p, Conditional(condition=p[1], true_expression=p[3], false_expression=p[5]))

    def p_binary(self, p):
        '''binary : binary OROR binary
                  | binary ANDAND binary
                  | binary EQ binary
                  | binary NE binary
                  | binary LT binary
                  | binary GT binary
                  | binary LE binary
                  | binary GE binary
                  | binary BITOR binary
                  | binary BITXOR binary
                  | binary BITAND binary
                  | binary SHL binary
                  | binary SHR binary
                  | binary PLUS binary
                  | binary MINUS binary
                  | binary TIMES binary
                  | binary DIVIDE binary
                  | binary MOD binary
                  | binary POW binary'''
        p[0] = self.finish(p, BinaryOp(left=p[1], operator=p[2], right=p[3]))

    def p_binary_unary(self, p):
        '''binary : unary'''
        p[0] = p[1]

    def p_unary(self, p):
        '''unary : BANG unary
                 | TILDE unary
                 | MINUS unary
                 | PLUS unary
                 | INC unary
                 | DEC unary
                 | DELETE unary'''
        p[0] = self.finish(p, UnaryOp(operator=p[1], operand=p[2], prefix=True))

    def p_unary_postfix(self, p):
        '''unary : postfix'''
        p[0] = p[1]

    def p_postfix_primary(self, p):
        '''postfix : primary'''
        p[0] = p[1]

    def p_postfix_member(self, p):
        '''postfix : postfix DOT IDENT
                   | postfix DOT SUBDENOMINATION'''
        p[0] = self.finish(p, MemberAccess(expression=p[1], member=p[3]))

    def p_postfix_index(self, p):
        '''postfix : postfix LBRACKET RBRACKET
                   | postfix LBRACKET expression RBRACKET'''
        index = p[3] if len(p) == 5 else None
        p[0] = self.finish(p, IndexAccess(base=p[1], index=index))

    def p_postfix_options(self, p):
        '''postfix : postfix LBRACE named_arguments RBRACE'''
        names, values = p[3]
        p[0] = self.finish(p, CallOptions(callee=p[1], names=names, values=values))

    def p_postfix_call(self, p):
        '''postfix : postfix LPAREN RPAREN
                   | postfix LPAREN expression_list RPAREN'''
        arguments = p[3] if len(p) == 5 else []
        p[0] = self.finish(p, self.normalize_call(p[1], arguments, []))

    def p_postfix_named_call(self, p):
        '''postfix : postfix LPAREN LBRACE RBRACE RPAREN
                   | postfix LPAREN LBRACE named_arguments RBRACE RPAREN'''
        names, arguments = p[4] if len(p) == 7 else ([], [])
        p[0] = self.finish(p, self.normalize_call(p[1], arguments, names))

    def p_postfix_increment(self, p):
        '''postfix : postfix INC
                   | postfix DEC'''
        p[0] = self.finish(p, UnaryOp(operator=p[2], operand=p[1], prefix=False))

    def p_expression_list(self, p):
        '''expression_list : expression
                           | expression_list COMMA expression'''
        if len(p) == 2:
            p[0] = [p[1]]
        else:
            p[1].append(p[3])
            p[0] = p[1]

    def p_named_arguments(self, p):
        '''named_arguments : IDENT COLON expression
                           | named_arguments COMMA IDENT COLON expression'''
        if len(p) == 4:
            p[0] = ([p[1]], [p[3]])
        else:
            names, values = p[1]
            names.append(p[3])
            values.append(p[5])
            p[0] = (names, values)

    def p_primary_identifier(self, p):
        '''primary : IDENT'''
        if is_elementary_type_name(p[1]):
            type_name = self.finish(p, ElementaryType(name=p[1]))
            p[0] = self.finish(p, TypeExpression(type_name=type_name))
        else:
            p[0] = self.finish(p, Identifier(name=p[1]))

    def p_primary_number(self, p):
        '''primary : NUMBER
                   | NUMBER SUBDENOMINATION'''
        kind = 'hex' if p[1].lower().startswith('0x') else 'number'
        subdenomination = p[2] if len(p) == 3 else None
        p[0] = self.finish(p, Literal(kind=kind, value=p[1], subdenomination=subdenomination))

    def p_primary_string(self, p):
        '''primary : STRING'''
        kind = 'hex' if p[1].startswith('hex') else 'string'
        p[0] = self.finish(p, Literal(kind=kind, value=p[1]))

    def p_primary_bool(self, p):
        '''primary : TRUE
                   | FALSE'''
        p[0] = self.finish(p, Literal(kind='bool', value=p[1]))

    def p_primary_tuple(self, p):
        '''primary : LPAREN tuple_items RPAREN'''
        components = [] if p[2] == [None] else p[2]
        node = self.finish(p, TupleExpression(components=components))
        if any(isinstance(c, VarDecl) for c in components):
            self.declaration_tuples[node.node_id] = node
        p[0] = node

    def p_tuple_items(self, p):
        '''tuple_items : tuple_item
                       | tuple_items COMMA tuple_item'''
        if len(p) == 2:
            p[0] = [p[1]]
        else:
            p[1].append(p[3])
            p[0] = p[1]

    def p_tuple_item(self, p):
        '''tuple_item :
                      | expression
                      | local_declaration'''
        p[0] = p[1] if len(p) == 2 else None

    def p_primary_array(self, p):
        '''primary : LBRACKET RBRACKET
                   | LBRACKET expression_list RBRACKET'''
        items = p[2] if len(p) == 4 else []
        p[0] = self.finish(p, TupleExpression(components=items, is_array=True))

    def p_primary_new(self, p):
        '''primary : NEW type_name'''
        p[0] = self.finish(p, NewExpression(type_name=p[2]))

    def p_primary_payable(self, p):
        '''primary : PAYABLE'''
        type_name = self.finish(p, ElementaryType(name='payable'))
        p[0] = self.finish(p, TypeExpression(type_name=type_name))

    def p_error(self, t):
        state = getattr(self.parser, 'state', None)
        actions = self.parser.action.get(state, {}) if state is not None else {}
        expected = [describe_token(name) for name in actions if name != 'error'] or ['valid token']
        if t is None:
            end = len(self.source)
            raise SoliditySyntaxError("unexpected end of input", self.source.count('\n', 0, end) + 1,
                                      column_of(self.source, end), expected)
        found = t.value if t.type != 'PRAGMA' else 'pragma'
        raise SoliditySyntaxError(f"unexpected '{found}'", t.lineno, column_of(self.source, t.lexpos), expected)


_local = threading.local()


def grammar() -> SolidityGrammar:
    """This thread's grammar; building the LALR tables is the expensive part"""
    current = getattr(_local, 'grammar', None)
    if current is None:
        current = _local.grammar = SolidityGrammar()
    return current


def parse(source: str, path: str = '<memory>') -> SourceUnit:
    """Parse Solidity source text into a SourceUnit"""
    unit = grammar().parse(source, path)
    logger.debug(f"Parsed {path}: {len(unit.contracts)} contract(s), {unit.next_id} nodes")
    return unit
