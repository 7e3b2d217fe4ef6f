import logging
from typing import Dict, List

from core.errors import UnsupportedConstruct
from core.solidity.ast_nodes import (
    ContractDef, EnumDef, EventDef, FunctionDef, ModifierDef, Node, SourceUnit, StructDef,
    VarDecl,
)

logger = logging.getLogger(__name__)


def member_key(member: Node) -> str:
    if isinstance(member, FunctionDef):
        return f"function:{member.display_name}"
    if isinstance(member, (VarDecl, ModifierDef, StructDef, EnumDef, EventDef)):
        return f"{type(member).__name__}:{member.name}"
    return f"node:{member.node_id}"


def linearize(contract: ContractDef, unit: SourceUnit) -> List[ContractDef]:
    """Base-most first chain of ``contract`` and its ancestors"""
    chain: List[ContractDef] = []
    seen = set()
    current = contract
    while True:
        if current.name in seen:
            raise UnsupportedConstruct(f"cyclic inheritance through {current.name}",
                                       current.span.line, current.span.column)
        seen.add(current.name)
        chain.append(current)
        if not current.bases:
            break
        if len(current.bases) > 1:
            raise UnsupportedConstruct('multiple inheritance', current.span.line, current.span.column)
        base = unit.contract(current.bases[0])
        if base is None:
            raise UnsupportedConstruct(f"unresolved base contract {current.bases[0]}",
                                       current.span.line, current.span.column)
        current = base
    return list(reversed(chain))


def merge_contract(contract: ContractDef, unit: SourceUnit) -> ContractDef:
    """
    Flatten a single inheritance chain into one contract.

    Members are shared with the original tree, not copied, so edits made
    through the merged view land in the source unit. Derived members
    replace base members with the same name in the base's position.
    """
    if not contract.bases:
        return contract
    slots: Dict[str, int] = {}
    members: List[Node] = []
    for ancestor in linearize(contract, unit):
        for member in ancestor.members:
            key = member_key(member)
            if key in slots:
                members[slots[key]] = member
            else:
                slots[key] = len(members)
                members.append(member)
    merged = ContractDef(name=contract.name, kind=contract.kind, bases=list(contract.bases),
                         members=members, abstract=contract.abstract)
    merged.node_id = contract.node_id
    merged.span = contract.span
    logger.debug(f"Merged {contract.name} with {len(contract.bases)} base(s): {len(members)} members")
    return merged
