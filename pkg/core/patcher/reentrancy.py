"""
Reentrancy fixes.

The preferred fix hoists every storage write that follows an external call
above it, so the function finishes its effects before interacting. Reads the
call makes of a location a hoisted write clobbers are saved in a temporary
first. When a dependence cannot be removed that way the function gets a
contract-level lock instead.

Dependences in a plan are oriented as in the hoisted order: ``from_stmt`` is
the moved statement, ``to_stmt`` the statement it now precedes.
"""
import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from core.analysis.accesses import AccessCollector
from core.analysis.dependences import Dependence, DependenceKind
from core.analysis.locations import AbstractLocation, AccessMode
from core.analysis.summaries import callee_effects
from core.analysis.unit_analysis import CallSite, FunctionAnalysis, UnitAnalysis
from core.detectors.post_process import site_call
from core.errors import NotApplicable, PlanBlocked
from core.patcher.edits import fresh_copy
from core.patcher.naming import fresh_name, names_in
from core.solidity.ast_nodes import (
    Assignment, Block, BreakStatement, CallOptions, ContinueStatement, ElementaryType, Expression,
    ForStatement, FunctionCall, Identifier, IndexAccess, MemberAccess, Node, ReturnStatement, Statement,
    TypeName, UnaryOp, VarDecl, WhileStatement, base_identifier, find_node, iter_children, parent_map,
    pragma_version, replace_child, walk,
)
from core.solidity.calls import is_transfer_builtin, resolve_call
from core.solidity.printer import print_node
from models.finding import Finding
from models.patch import (
    AddModifierGuard, AddStateVar, DeclareLocal, EditScript, MoveStatement, Position, ReplaceExpr,
)

logger = logging.getLogger(__name__)

INTRODUCE_TEMP = 'introduce-temp'
MOVE_PAIR = 'move-pair'
MOVE_SINGLE = 'move-single'
BLOCKED = 'blocked'

AccessSets = Tuple[Set[AbstractLocation], Set[AbstractLocation]]


@dataclass
class Snapshot:
    """A temporary holding the pre-move value of one read expression of the call statement"""
    name: str
    expression: Expression
    type_name: Optional[TypeName]  # None declares with ``var``
    occurrences: List[int] = field(default_factory=list)


@dataclass
class ReorderPlan:
    function_id: str
    call: CallSite
    call_statement: Statement
    writes: List[Statement] = field(default_factory=list)
    moved: List[Statement] = field(default_factory=list)
    actions: Dict[Dependence, str] = field(default_factory=dict)
    snapshots: List[Snapshot] = field(default_factory=list)
    reasons: List[str] = field(default_factory=list)

    @property
    def blocked(self) -> bool:
        return bool(self.reasons) or BLOCKED in self.actions.values()

    def block(self, reason: str):
        if reason not in self.reasons:
            self.reasons.append(reason)

    def actions_of(self, action: str) -> List[Dependence]:
        return sorted((d for d, a in self.actions.items() if a == action), key=Dependence.sort_key)

    def to_dict(self) -> Dict:
        return {
            'function': self.function_id,
            'call': self.call.ordinal,
            'writes': len(self.writes),
            'moved': len(self.moved),
            'temporaries': [s.name for s in self.snapshots],
            'actions': {str(d): a for d, a in sorted(self.actions.items(), key=lambda i: i[0].sort_key())},
            'blocked': self.reasons,
        }


def _is_callee(node: Node, parent: Optional[Node]) -> bool:
    return isinstance(parent, (FunctionCall, CallOptions)) and parent.callee is node


def _is_written(node: Node, parent: Optional[Node]) -> bool:
    if isinstance(parent, Assignment) and parent.left is node:
        return True
    return isinstance(parent, UnaryOp) and parent.operand is node and parent.operator in ('++', '--', 'delete')


def read_paths(root: Node) -> List[Expression]:
    """
    Outermost variable access expressions read under ``root``; the receiver
    of a method call counts, the method member itself does not.
    """
    parents = parent_map(root)
    paths = []
    for node in walk(root):
        if not isinstance(node, (Identifier, IndexAccess, MemberAccess)):
            continue
        parent = parents.get(node.node_id)
        if isinstance(parent, IndexAccess) and parent.base is node:
            continue
        if isinstance(parent, MemberAccess) and parent.expression is node \
                and not _is_callee(parent, parents.get(parent.node_id)):
            continue
        if _is_callee(node, parent) or _is_written(node, parent):
            continue
        paths.append(node)
    return paths


def _escapes(statement: Statement) -> bool:
    """True when moving ``statement`` would move a return, or a break/continue out of its loop"""
    def visit(node: Node, in_loop: bool) -> bool:
        if isinstance(node, ReturnStatement):
            return True
        if isinstance(node, (BreakStatement, ContinueStatement)) and not in_loop:
            return True
        nested = in_loop or isinstance(node, (ForStatement, WhileStatement))
        return any(visit(child, nested) for child in iter_children(node))
    return visit(statement, False)


class ReorderPlanner:
    def __init__(self, analysis: UnitAnalysis, fa: FunctionAnalysis, site: CallSite):
        self.analysis = analysis
        self.fa = fa
        self.site = site
        self.collector = AccessCollector(fa.scope, analysis.points_to,
                                         callee_effects(analysis.summaries, analysis.function_ids))
        self.plan = ReorderPlan(fa.function_id, site, fa.cfg.blocks[site.block_id].node)

    def accesses(self, node: Node) -> AccessSets:
        reads, writes = set(), set()
        for event in self.collector.collect(node):
            (reads if event.mode is AccessMode.READ else writes).add(event.target)
        return reads, writes

    def representative(self, statement: Statement) -> int:
        block_id = self.fa.cfg.block_of(statement.node_id)
        return block_id if block_id is not None else statement.node_id

    def dependences(self, first: Statement, second: Statement) -> List[Dependence]:
        """Dependences from ``first`` to ``second`` as if ``first`` ran first"""
        first_reads, first_writes = self.accesses(first)
        second_reads, second_writes = self.accesses(second)
        a, b = self.representative(first), self.representative(second)
        found = []
        for kind, locations in ((DependenceKind.RAW, first_writes & second_reads),
                                (DependenceKind.WAR, first_reads & second_writes),
                                (DependenceKind.WAW, first_writes & second_writes),
                                (DependenceKind.RAR, first_reads & second_reads)):
            found.extend(Dependence(a, b, kind, loc) for loc in sorted(locations, key=lambda l: l.decl_id))
        return found

    def run(self) -> ReorderPlan:
        plan = self.plan
        call_statement = plan.call_statement
        parent = parent_map(self.fa.function.body).get(call_statement.node_id)
        if not isinstance(parent, Block):
            plan.block('call statement is not directly inside a block')
            return plan
        if self.site.block_id in self.fa.cfg.reachable_from(self.site.block_id):
            plan.block('call is inside a loop')
            return plan
        if self.fa.state_writes(self.site.block_id):
            plan.block('call statement itself writes storage')
            return plan

        index = next(i for i, s in enumerate(parent.statements) if s is call_statement)
        region = parent.statements[index + 1:]
        owner_of: Dict[int, int] = {}
        for position, statement in enumerate(region):
            for node in walk(statement):
                owner_of[node.node_id] = position

        for block_id in sorted(self.fa.cfg.reachable_from(self.site.block_id)):
            block = self.fa.cfg.blocks[block_id]
            if block.node is None or not self.fa.state_writes(block_id):
                continue
            if not block.in_body or block.node.node_id not in owner_of:
                plan.block(f"storage write at statement {block_id} is outside the call's block")
        if plan.blocked:
            return plan

        written = [i for i, s in enumerate(region) if any(loc.state for loc in self.accesses(s)[1])]
        plan.writes = [region[i] for i in written]
        moved = self._close(region, set(written))
        plan.moved = [region[i] for i in sorted(moved)]
        for statement in plan.moved:
            self._check_movable(statement)
        if not plan.blocked:
            self._against_call(call_statement)
        logger.debug(f"Reorder plan for {self.fa.function_id}#{self.site.ordinal}: "
                     f"{len(plan.moved)} moved, {len(plan.snapshots)} temporaries, blocked={plan.reasons}")
        return plan

    def _close(self, region: List[Statement], moved: Set[int]) -> Set[int]:
        """Pull along every statement that has to stay ahead of a moved one"""
        changed = True
        while changed:
            changed = False
            for later in sorted(moved):
                for earlier in range(later):
                    if earlier in moved:
                        continue
                    for dependence in self.dependences(region[later], region[earlier]):
                        if dependence.kind is DependenceKind.RAR:
                            self.plan.actions.setdefault(dependence, MOVE_SINGLE)
                            continue
                        self.plan.actions[dependence] = MOVE_PAIR
                        if earlier not in moved:
                            moved.add(earlier)
                            changed = True
        return moved

    def _check_movable(self, statement: Statement):
        if _escapes(statement):
            self.plan.block(f"statement {self.representative(statement)} leaves the function or loop")
        for node in walk(statement):
            if isinstance(node, FunctionCall) and (resolve_call(node, self.fa.scope).kind.is_external
                                                   or is_transfer_builtin(node)):
                self.plan.block(f"statement {self.representative(statement)} makes another external call")
                return

    def _against_call(self, call_statement: Statement):
        saved: Set[AbstractLocation] = set()
        for statement in self.plan.moved:
            for dependence in self.dependences(statement, call_statement):
                if dependence.kind is DependenceKind.RAW:
                    self.plan.actions[dependence] = INTRODUCE_TEMP
                    saved.add(dependence.location)
                elif dependence.kind is DependenceKind.RAR:
                    self.plan.actions.setdefault(dependence, MOVE_SINGLE)
                else:
                    self.plan.actions[dependence] = BLOCKED
                    self.plan.block(f"{dependence.kind.value} on {dependence.location} between a write "
                                    f"and the call")
        if saved and not self.plan.blocked:
            self._snapshot(call_statement, saved)

    def _snapshot(self, call_statement: Statement, saved: Set[AbstractLocation]):
        fa = self.fa
        legacy = pragma_version(self.analysis.unit) < (0, 5, 0)
        taken = names_in(self.analysis.unit)
        by_text: Dict[str, Snapshot] = {}
        chosen: List[Expression] = []
        for path in read_paths(call_statement):
            base = base_identifier(path)
            decl = fa.scope.resolve(base.name) if base is not None else None
            if decl is None or not (self.analysis.points_to.locations(decl) & saved):
                continue
            if any(path is not other and any(n is path for n in walk(other)) for other in chosen):
                continue
            chosen.append(path)

        for path in chosen:
            text = print_node(path)
            if text in by_text:
                by_text[text].occurrences.append(path.node_id)
                continue
            type_name = fa.scope.type_of(path)
            if type_name is None:
                self.plan.block(f"cannot infer the type of {text} for a temporary")
                return
            if fa.scope.is_composite(type_name) or (isinstance(type_name, ElementaryType)
                                                    and type_name.name == 'var'):
                self.plan.block(f"saving {text} would copy a mapping or array")
                return
            name = fresh_name(f"{base_identifier(path).name}_temp", taken)
            taken.add(name)
            snapshot = Snapshot(name, path, None if legacy else type_name, [path.node_id])
            by_text[text] = snapshot
            self.plan.snapshots.append(snapshot)

        if not self._covered(call_statement, saved):
            self.plan.block('the call reads moved state through an internal call')

    def _covered(self, call_statement: Statement, saved: Set[AbstractLocation]) -> bool:
        """The call statement, with temporaries in place, no longer reads any saved location"""
        rewritten = copy.deepcopy(call_statement)
        for snapshot in self.plan.snapshots:
            for occurrence in snapshot.occurrences:
                old = find_node(rewritten, occurrence)
                parent = parent_map(rewritten).get(occurrence)
                if old is None or parent is None:
                    return False
                replace_child(parent, old, Identifier(name=snapshot.name))
        reads, _ = self.accesses(rewritten)
        return not (reads & saved)


def _call_site(finding: Finding, analysis: UnitAnalysis) -> Tuple[FunctionAnalysis, CallSite]:
    fa = analysis.function(finding.site.contract, finding.site.function)
    site = site_call(fa, finding.site.ordinal) if fa is not None else None
    if site is None:
        raise NotApplicable(f"{finding.id}: call site no longer exists")
    return fa, site


def plan_reorder(finding: Finding, analysis: UnitAnalysis) -> ReorderPlan:
    fa, site = _call_site(finding, analysis)
    return ReorderPlanner(analysis, fa, site).run()


def apply_reorder(plan: ReorderPlan, finding_id: str = '') -> EditScript:
    """Temporaries first, then the moved statements in source order, all right above the call"""
    if plan.blocked:
        raise PlanBlocked('; '.join(plan.reasons) or 'blocked dependence')
    script = EditScript(finding_id, 'reorder')
    anchor = plan.call_statement.node_id
    for snapshot in plan.snapshots:
        script.add(DeclareLocal(Position(anchor, 'before'), snapshot.name, snapshot.type_name,
                                fresh_copy(snapshot.expression)))
    for statement in plan.moved:
        script.add(MoveStatement(statement.node_id, Position(anchor, 'before')))
    for snapshot in plan.snapshots:
        for occurrence in snapshot.occurrences:
            script.add(ReplaceExpr(occurrence, Identifier(name=snapshot.name)))
    script.notes.append(f"moved {len(plan.moved)} statement(s) ahead of the call")
    script.notes.extend(f"temporary {s.name}" for s in plan.snapshots)
    return script


def apply_lock(finding: Finding, analysis: UnitAnalysis, name: str = 'locked') -> EditScript:
    fa = analysis.function(finding.site.contract, finding.site.function)
    if fa is None:
        raise NotApplicable(f"{finding.id}: function no longer exists")
    lock = fresh_name(name, names_in(analysis.unit))
    script = EditScript(finding.id, 'lock')
    script.add(AddStateVar(finding.site.contract,
                           VarDecl(name=lock, type_name=ElementaryType(name='bool'), visibility='private')))
    script.add(AddModifierGuard(fa.function.node_id, lock))
    script.notes.append(f"lock {lock}")
    return script
