from typing import Iterable, Set

from core.solidity.ast_nodes import (
    ContractDef, EnumDef, EventDef, FunctionDef, Identifier, ModifierDef, Node, StructDef, VarDecl,
    walk,
)


def names_in(*roots: Node) -> Set[str]:
    """Every declared or referenced name under ``roots``"""
    taken: Set[str] = set()
    for root in roots:
        for node in walk(root):
            if isinstance(node, Identifier):
                taken.add(node.name)
            elif isinstance(node, (VarDecl, ModifierDef, StructDef, EnumDef, EventDef, ContractDef)):
                taken.add(node.name)
            elif isinstance(node, FunctionDef):
                taken.add(node.name)
    return taken


def fresh_name(base: str, taken: Iterable[str]) -> str:
    """``base`` itself, or ``base_<n>`` for the first free n"""
    taken = set(taken)
    if base not in taken:
        return base
    counter = 1
    while f"{base}_{counter}" in taken:
        counter += 1
    return f"{base}_{counter}"
