from dataclasses import dataclass, field
from typing import Dict, List, Optional

from core.solidity.ast_nodes import Expression, FunctionDef, Node, Statement, TypeName, VarDecl


@dataclass
class Position:
    """Insertion point: before/after a statement, or at the start/end of a function body"""
    anchor_id: int
    where: str = 'before'  # before | after | body-start | body-end


@dataclass
class Edit:
    finding_id: str = field(default='', kw_only=True)

    @property
    def kind(self) -> str:
        return type(self).__name__

    def describe(self) -> str:
        return self.kind


@dataclass
class InsertStatement(Edit):
    position: Position
    node: Statement

    def describe(self) -> str:
        return f"insert {type(self.node).__name__} {self.position.where} #{self.position.anchor_id}"


@dataclass
class MoveStatement(Edit):
    statement_id: int
    position: Position

    def describe(self) -> str:
        return f"move #{self.statement_id} {self.position.where} #{self.position.anchor_id}"


@dataclass
class WrapInRequire(Edit):
    statement_id: int

    def describe(self) -> str:
        return f"wrap #{self.statement_id} in require"


@dataclass
class ReplaceExpr(Edit):
    """Swap the node with ``expression_id`` for ``node``; statements may be swapped too"""
    expression_id: int
    node: Node

    def describe(self) -> str:
        return f"replace expression #{self.expression_id}"


@dataclass
class DeclareLocal(Edit):
    position: Position
    name: str
    type_name: Optional[TypeName]
    initializer: Optional[Expression] = None

    def describe(self) -> str:
        return f"declare local {self.name} {self.position.where} #{self.position.anchor_id}"


@dataclass
class AddStateVar(Edit):
    contract: str
    decl: VarDecl

    def describe(self) -> str:
        return f"add state variable {self.decl.name} to {self.contract}"


@dataclass
class AddFunction(Edit):
    contract: str
    function: FunctionDef

    def describe(self) -> str:
        return f"add function {self.function.display_name} to {self.contract}"


@dataclass
class AddModifierGuard(Edit):
    function_id: int
    lock_var: str

    def describe(self) -> str:
        return f"guard #{self.function_id} with {self.lock_var}"


@dataclass
class EditScript:
    finding_id: str
    pattern: str  # require | reorder | lock | validate | withdraw
    edits: List[Edit] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, edit: Edit) -> Edit:
        edit.finding_id = self.finding_id
        self.edits.append(edit)
        return edit

    def __len__(self) -> int:
        return len(self.edits)

    @property
    def is_empty(self) -> bool:
        return not self.edits


@dataclass(frozen=True)
class GasEstimate:
    pattern: str
    delta_gas_units: int


@dataclass
class PatchOutcome:
    finding_id: str
    contract: str = ''
    pattern: str = ''
    edits: int = 0
    gas: int = 0
    status: str = 'applied'  # applied | failed | skipped | resolved
    reason: Optional[str] = None

    def to_dict(self) -> Dict:
        data = {
            'finding': self.finding_id,
            'pattern': self.pattern,
            'edits': self.edits,
            'gas_estimate': self.gas,
            'status': self.status,
        }
        if self.reason:
            data['reason'] = self.reason
        return data
