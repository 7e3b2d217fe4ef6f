"""
LockedEther fix: an owner-only withdraw function that sends the whole
balance to the caller, plus an owner variable when the contract has none.
"""
import logging
from typing import Optional

from core.analysis.unit_analysis import UnitAnalysis
from core.errors import NotApplicable
from core.patcher.edits import assign_statement, require_statement
from core.patcher.naming import fresh_name, names_in
from core.solidity.ast_nodes import (
    Assignment, BinaryOp, Block, ContractDef, ElementaryType, ExpressionStatement, FunctionCall,
    FunctionDef, Identifier, MemberAccess, SourceUnit, TypeExpression, VarDecl, is_address_type,
    pragma_version, walk,
)
from models.finding import Finding
from models.patch import AddFunction, AddStateVar, EditScript, InsertStatement, Position

logger = logging.getLogger(__name__)


def _msg_sender() -> MemberAccess:
    return MemberAccess(expression=Identifier(name='msg'), member='sender')


def _is_msg_sender(expression) -> bool:
    return (isinstance(expression, MemberAccess) and expression.member == 'sender'
            and isinstance(expression.expression, Identifier) and expression.expression.name == 'msg')


def _assigned_sender(constructor: Optional[FunctionDef]):
    """Names assigned ``msg.sender`` in a constructor body"""
    names = set()
    if constructor is None or constructor.body is None:
        return names
    for node in walk(constructor.body):
        if isinstance(node, Assignment) and node.operator == '=' and isinstance(node.left, Identifier) \
                and _is_msg_sender(node.right):
            names.add(node.left.name)
    return names


def find_owner(contract: ContractDef, declared: Optional[ContractDef] = None) -> Optional[str]:
    """
    The address state variable the constructor sets to ``msg.sender``, else
    one named like an owner. Private variables of a base contract are not
    visible to ``declared`` and do not count.
    """
    def visible(var: VarDecl) -> bool:
        if declared is None or var.visibility != 'private':
            return True
        return any(member is var for member in declared.members)

    candidates = [v for v in contract.state_vars if is_address_type(v.type_name) and not v.constant and visible(v)]
    assigned = _assigned_sender(contract.constructor)
    for var in candidates:
        if var.name in assigned:
            return var.name
    for var in candidates:
        if 'owner' in var.name.lower():
            return var.name
    return None


def _constructor(unit: SourceUnit, contract: ContractDef, body: Block) -> FunctionDef:
    version = pragma_version(unit)
    if version < (0, 4, 22):
        return FunctionDef(kind='constructor', name=contract.name, visibility='public', body=body, legacy=True)
    return FunctionDef(kind='constructor', name='', visibility='public' if version < (0, 7, 0) else None,
                       body=body)


def _payout_target(unit: SourceUnit):
    if pragma_version(unit) >= (0, 8, 0):
        return FunctionCall(callee=TypeExpression(type_name=ElementaryType(name='payable')),
                            arguments=[_msg_sender()])
    return _msg_sender()


def withdraw_function(unit: SourceUnit, name: str, owner: str) -> FunctionDef:
    """``function <name>() public { require(msg.sender == <owner>); msg.sender.transfer(address(this).balance); }``"""
    this_address = FunctionCall(callee=TypeExpression(type_name=ElementaryType(name='address')),
                                arguments=[Identifier(name='this')])
    transfer = FunctionCall(callee=MemberAccess(expression=_payout_target(unit), member='transfer'),
                            arguments=[MemberAccess(expression=this_address, member='balance')])
    body = Block(statements=[
        require_statement(BinaryOp(left=_msg_sender(), operator='==', right=Identifier(name=owner))),
        ExpressionStatement(expression=transfer),
    ])
    return FunctionDef(kind='function', name=name, visibility='public', body=body)


def fix_locked_ether(finding: Finding, analysis: UnitAnalysis) -> EditScript:
    unit = analysis.unit
    declared = unit.contract(finding.site.contract)
    merged = analysis.contracts.get(finding.site.contract)
    if declared is None or merged is None:
        raise NotApplicable(f"{finding.id}: contract no longer exists")

    script = EditScript(finding.id, 'withdraw')
    taken = names_in(unit)
    owner = find_owner(merged, declared)
    if owner is None:
        owner = fresh_name('owner', taken)
        taken.add(owner)
        script.add(AddStateVar(declared.name, VarDecl(name=owner, type_name=ElementaryType(name='address'),
                                                      visibility='private')))
        setter = assign_statement(owner, _msg_sender())
        constructor = declared.constructor
        if constructor is not None and constructor.body is not None:
            script.add(InsertStatement(Position(constructor.node_id, 'body-start'), setter))
        else:
            script.add(AddFunction(declared.name, _constructor(unit, declared, Block(statements=[setter]))))
        script.notes.append(f"added owner variable {owner}")
    else:
        script.notes.append(f"owner is {owner}")
    name = fresh_name('withdraw', taken)
    script.add(AddFunction(declared.name, withdraw_function(unit, name, owner)))
    return script
