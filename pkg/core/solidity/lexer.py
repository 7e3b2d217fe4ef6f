"""
Solidity tokens on ply.lex.

Comments and whitespace are dropped and a ``pragma`` directive becomes one
token carrying its body up to the ``;``. Every token records ``endlexpos``,
the offset one past its last character; the parser's position tracking
picks it up to close node spans.
"""
import logging
import re
from typing import List

import ply.lex as lex
from ply.lex import TOKEN

from core.errors import SoliditySyntaxError

logger = logging.getLogger(__name__)

KEYWORDS = {
    'contract', 'interface', 'library', 'function', 'modifier', 'event', 'struct', 'enum',
    'mapping', 'storage', 'memory', 'calldata', 'public', 'private', 'internal', 'external',
    'view', 'pure', 'payable', 'constant', 'returns', 'return', 'if', 'else', 'for', 'while',
    'do', 'break', 'continue', 'new', 'delete', 'emit', 'throw', 'is', 'using', 'constructor',
    'receive', 'fallback', 'true', 'false', 'var', 'assembly', 'try', 'catch', 'import',
    'anonymous', 'indexed', 'virtual', 'override', 'abstract', 'unchecked', 'immutable',
}

SUBDENOMINATIONS = {
    'wei', 'gwei', 'szabo', 'finney', 'ether',
    'seconds', 'minutes', 'hours', 'days', 'weeks', 'years',
}

OPERATORS = {
    '>>=': 'SHR_ASSIGN', '<<=': 'SHL_ASSIGN',
    '++': 'INC', '--': 'DEC', '**': 'POW', '&&': 'ANDAND', '||': 'OROR',
    '==': 'EQ', '!=': 'NE', '<=': 'LE', '>=': 'GE', '<<': 'SHL', '>>': 'SHR',
    '+=': 'ADD_ASSIGN', '-=': 'SUB_ASSIGN', '*=': 'MUL_ASSIGN', '/=': 'DIV_ASSIGN',
    '%=': 'MOD_ASSIGN', '&=': 'AND_ASSIGN', '|=': 'OR_ASSIGN', '^=': 'XOR_ASSIGN', '=>': 'ARROW',
    '+': 'PLUS', '-': 'MINUS', '*': 'TIMES', '/': 'DIVIDE', '%': 'MOD',
    '&': 'BITAND', '|': 'BITOR', '^': 'BITXOR', '~': 'TILDE', '!': 'BANG',
    '<': 'LT', '>': 'GT', '=': 'ASSIGN', '?': 'QUESTION', ':': 'COLON',
    '(': 'LPAREN', ')': 'RPAREN', '{': 'LBRACE', '}': 'RBRACE', '[': 'LBRACKET', ']': 'RBRACKET',
    ';': 'SEMI', ',': 'COMMA', '.': 'DOT',
}

# longest first, the master regex takes the first alternative that matches
OPERATOR_PATTERN = '|'.join(re.escape(op) for op in sorted(OPERATORS, key=len, reverse=True))

STRING_PATTERN = r'(?:hex|unicode)?(?:"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\')'


def column_of(source: str, lexpos: int) -> int:
    """1-based column of the character at ``lexpos``"""
    return lexpos - source.rfind('\n', 0, lexpos)


class SolidityLexer:
    tokens = (['IDENT', 'NUMBER', 'STRING', 'PRAGMA', 'SUBDENOMINATION']
              + sorted(set(OPERATORS.values()))
              + sorted(k.upper() for k in KEYWORDS))

    t_ignore = ' \t\r\f'

    def __init__(self):
        self.lexer = None

    def build(self, **kwargs):
        self.lexer = lex.lex(module=self, **kwargs)
        return self.lexer

    @staticmethod
    def _error(t, message: str) -> SoliditySyntaxError:
        return SoliditySyntaxError(message, t.lexer.lineno, column_of(t.lexer.lexdata, t.lexpos))

    @staticmethod
    def _close(t):
        t.endlexpos = t.lexer.lexpos
        return t

    def t_PRAGMA(self, t):
        r'pragma\b[^;]*'
        if t.lexer.lexpos >= len(t.lexer.lexdata):
            raise self._error(t, "unterminated pragma directive")
        t.lexer.lineno += t.value.count('\n')
        t.value = t.value[len('pragma'):].strip()
        return self._close(t)

    def t_COMMENT(self, t):
        r'/\*(?:.|\n)*?\*/'
        t.lexer.lineno += t.value.count('\n')

    def t_UNTERMINATED_COMMENT(self, t):
        r'/\*'
        raise self._error(t, "unterminated block comment")

    def t_LINE_COMMENT(self, t):
        r'//[^\n]*'

    @TOKEN(STRING_PATTERN)
    def t_STRING(self, t):
        return self._close(t)

    def t_UNTERMINATED_STRING(self, t):
        r'(?:hex|unicode)?["\']'
        raise self._error(t, "unterminated string literal")

    def t_NUMBER(self, t):
        r'0[xX][0-9a-fA-F_]*|[0-9][0-9_]*(?:\.[0-9][0-9_]*)?(?:[eE]-?[0-9]+)?'
        return self._close(t)

    def t_IDENT(self, t):
        r'[A-Za-z_$][A-Za-z0-9_$]*'
        if t.value in KEYWORDS:
            t.type = t.value.upper()
        elif t.value in SUBDENOMINATIONS:
            t.type = 'SUBDENOMINATION'
        return self._close(t)

    @TOKEN(OPERATOR_PATTERN)
    def t_OPERATOR(self, t):
        t.type = OPERATORS[t.value]
        return self._close(t)

    def t_newline(self, t):
        r'\n+'
        t.lexer.lineno += len(t.value)

    def t_error(self, t):
        raise self._error(t, f"unexpected character {t.value[0]!r}")


_LEXER = SolidityLexer().build()


def new_lexer():
    """Independent lexer sharing the compiled master regex"""
    lexer = _LEXER.clone()
    lexer.lineno = 1
    return lexer


def tokenize(source: str) -> List[lex.LexToken]:
    lexer = new_lexer()
    lexer.input(source)
    return list(lexer)
