from core.solidity.ast_nodes import SourceUnit, walk
from core.solidity.calls import CallKind, TypeScope, classify_call
from core.solidity.parser import parse
from core.solidity.printer import print_node, print_unit

__all__ = [
    'SourceUnit', 'walk', 'CallKind', 'TypeScope', 'classify_call', 'parse', 'print_node', 'print_unit',
]
