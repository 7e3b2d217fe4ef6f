"""
Modifier-aware control-flow graphs, one statement per block.

Applied modifiers are inlined around the body in invocation order: the
statements before a modifier's placeholder run first, the statements after
it run once the inner frames finish. A ``return`` leaves the current frame
and resumes the enclosing modifier's suffix.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

import networkx as nx

from core.errors import MissingModifier, UnsupportedConstruct
from core.solidity.ast_nodes import (
    Block, BreakStatement, ContinueStatement, ContractDef, Expression, ExpressionStatement,
    ForStatement, FunctionCall, FunctionDef, Identifier, IfStatement, ModifierDef, Node,
    PlaceholderStatement, ReturnStatement, SourceUnit, Statement, ThrowStatement, WhileStatement,
    walk,
)

logger = logging.getLogger(__name__)

Owner = Union[FunctionDef, ModifierDef]
Pending = List[Tuple[int, str]]

ENTRY = 0
EXIT = 1

EDGE_KINDS = ('seq', 'true', 'false', 'loop-back')


@dataclass
class CfgBlock:
    block_id: int
    node: Optional[Node] = None
    role: str = 'statement'  # entry | exit | statement | condition | update
    owner: Optional[Owner] = None
    bindings: Dict[str, Expression] = field(default_factory=dict)
    guard: Optional[int] = None
    frame: int = -1  # index of the modifier invocation, -1 for the function body

    @property
    def statement_id(self) -> int:
        return self.block_id

    @property
    def in_body(self) -> bool:
        return self.frame < 0 and self.role in ('statement', 'condition', 'update')


@dataclass
class Cfg:
    function_id: str
    function: FunctionDef
    contract: ContractDef
    graph: nx.MultiDiGraph
    blocks: Dict[int, CfgBlock]
    entry: int = ENTRY
    exit: int = EXIT

    def successors(self, block_id: int) -> List[int]:
        return sorted(set(self.graph.successors(block_id)))

    def predecessors(self, block_id: int) -> List[int]:
        return sorted(set(self.graph.predecessors(block_id)))

    def edges(self) -> List[Tuple[int, int, str]]:
        return sorted((u, v, k) for u, v, k in self.graph.edges(keys=True))

    def statement_blocks(self) -> List[CfgBlock]:
        return [self.blocks[b] for b in sorted(self.blocks) if self.blocks[b].role != 'entry'
                and self.blocks[b].role != 'exit']

    def reachable_from(self, block_id: int) -> Set[int]:
        """Blocks reachable through at least one edge"""
        reached = set()
        for successor in self.graph.successors(block_id):
            reached.add(successor)
            reached |= nx.descendants(self.graph, successor)
        return reached

    def reaches(self, source: int, target: int) -> bool:
        return target in self.reachable_from(source)

    def block_of(self, node_id: int) -> Optional[int]:
        for block in self.statement_blocks():
            if block.node is not None and block.node.node_id == node_id:
                return block.block_id
        return None

    def enclosing_block(self, node_id: int) -> Optional[int]:
        """Block whose statement contains the node with ``node_id``"""
        direct = self.block_of(node_id)
        if direct is not None:
            return direct
        for block in self.statement_blocks():
            if block.node is None:
                continue
            for child in header_nodes(block):
                if any(n.node_id == node_id for n in walk(child)):
                    return block.block_id
        return None

    def guards_of(self, block_id: int) -> List[int]:
        """Enclosing condition blocks, innermost first"""
        chain = []
        current = self.blocks[block_id].guard
        while current is not None:
            chain.append(current)
            current = self.blocks[current].guard
        return chain


def header_nodes(block: CfgBlock) -> List[Node]:
    """Sub-trees that execute inside ``block`` itself"""
    node = block.node
    if node is None:
        return []
    if isinstance(node, (IfStatement, WhileStatement)):
        return [node.condition]
    if isinstance(node, ForStatement):
        return [node.condition] if node.condition is not None else []
    return [node]


def is_revert(statement: Node) -> bool:
    if isinstance(statement, ThrowStatement):
        return True
    return (isinstance(statement, ExpressionStatement) and isinstance(statement.expression, FunctionCall)
            and isinstance(statement.expression.callee, Identifier)
            and statement.expression.callee.name == 'revert')


@dataclass
class _Frame:
    index: int
    owner: Owner
    bindings: Dict[str, Expression]
    position: int = 0
    returns: Pending = field(default_factory=list)


@dataclass
class _Loop:
    continue_target: int
    breaks: Pending = field(default_factory=list)
    continues: Pending = field(default_factory=list)


class CfgBuilder:
    def __init__(self, function: FunctionDef, contract: ContractDef, unit: Optional[SourceUnit] = None):
        self.function = function
        self.contract = contract
        self.unit = unit
        self.graph = nx.MultiDiGraph()
        self.blocks: Dict[int, CfgBlock] = {}
        self.frames: List[_Frame] = []
        self.loops: List[_Loop] = []
        self.guards: List[int] = []
        self.current: Optional[_Frame] = None

    def build(self) -> Cfg:
        if self.function.body is None:
            raise ValueError(f"Function {self.function.display_name} has no body")
        self._new_block(None, 'entry')
        self._new_block(None, 'exit')
        self.frames = self._resolve_frames()
        exits = self._build_frame(0, [(ENTRY, 'seq')])
        self._connect(exits, EXIT)
        cfg = Cfg(f"{self.contract.name}.{self.function.display_name}", self.function, self.contract,
                  self.graph, self.blocks)
        logger.debug(f"CFG for {cfg.function_id}: {len(self.blocks)} blocks, {self.graph.number_of_edges()} edges")
        return cfg

    def _resolve_frames(self) -> List[_Frame]:
        frames = []
        base_names = set(self.contract.bases)
        if self.unit is not None:
            base_names |= {c.name for c in self.unit.contracts}
        for index, invocation in enumerate(self.function.modifiers):
            modifier = self.contract.modifier(invocation.name)
            if modifier is None:
                if invocation.name in base_names:
                    continue
                raise MissingModifier(invocation.name, self.function.display_name)
            if modifier.body is None:
                continue
            placeholders = sum(1 for n in walk(modifier.body) if isinstance(n, PlaceholderStatement))
            if placeholders > 1:
                raise UnsupportedConstruct(f"modifier '{modifier.name}' with several placeholders")
            arguments = invocation.arguments or []
            bindings = {p.name: a for p, a in zip(modifier.params, arguments)}
            frames.append(_Frame(index, modifier, bindings, len(frames)))
        return frames

    def _build_frame(self, position: int, preds: Pending) -> Pending:
        outer = self.current
        if position < len(self.frames):
            frame = self.frames[position]
            body = frame.owner.body
        else:
            frame = _Frame(-1, self.function, {}, len(self.frames))
            body = self.function.body
        self.current = frame
        exits = self._statement(body, preds)
        exits = exits + frame.returns
        self.current = outer
        return exits

    def _new_block(self, node: Optional[Node], role: str) -> int:
        block_id = len(self.blocks)
        frame = self.current
        self.blocks[block_id] = CfgBlock(
            block_id, node, role,
            owner=frame.owner if frame else None,
            bindings=dict(frame.bindings) if frame else {},
            guard=self.guards[-1] if self.guards else None,
            frame=frame.index if frame else -1,
        )
        self.graph.add_node(block_id)
        return block_id

    def _connect(self, preds: Pending, target: int):
        for source, kind in preds:
            self.graph.add_edge(source, target, key=kind)

    def _simple(self, node: Node, preds: Pending, role: str = 'statement') -> int:
        block_id = self._new_block(node, role)
        self._connect(preds, block_id)
        return block_id

    def _statement(self, statement: Statement, preds: Pending) -> Pending:
        if isinstance(statement, Block):
            for child in statement.statements:
                preds = self._statement(child, preds)
            return preds
        if isinstance(statement, PlaceholderStatement):
            if self.current.position >= len(self.frames):
                return preds
            return self._build_frame(self.current.position + 1, preds)
        if isinstance(statement, IfStatement):
            return self._if(statement, preds)
        if isinstance(statement, WhileStatement):
            return self._while(statement, preds)
        if isinstance(statement, ForStatement):
            return self._for(statement, preds)
        if isinstance(statement, ReturnStatement):
            block_id = self._simple(statement, preds)
            self.current.returns.append((block_id, 'seq'))
            return []
        if is_revert(statement):
            block_id = self._simple(statement, preds)
            self.graph.add_edge(block_id, EXIT, key='seq')
            return []
        if isinstance(statement, BreakStatement):
            block_id = self._simple(statement, preds)
            if self.loops:
                self.loops[-1].breaks.append((block_id, 'seq'))
            return []
        if isinstance(statement, ContinueStatement):
            block_id = self._simple(statement, preds)
            if self.loops:
                self.loops[-1].continues.append((block_id, 'loop-back'))
            return []
        return [(self._simple(statement, preds), 'seq')]

    def _guarded(self, condition: int, body: Optional[Statement], preds: Pending) -> Pending:
        self.guards.append(condition)
        try:
            return self._statement(body, preds) if body is not None else preds
        finally:
            self.guards.pop()

    def _if(self, statement: IfStatement, preds: Pending) -> Pending:
        condition = self._simple(statement, preds, 'condition')
        exits = self._guarded(condition, statement.true_body, [(condition, 'true')])
        if statement.false_body is not None:
            exits = exits + self._guarded(condition, statement.false_body, [(condition, 'false')])
        else:
            exits = exits + [(condition, 'false')]
        return exits

    def _while(self, statement: WhileStatement, preds: Pending) -> Pending:
        condition = self._simple(statement, preds, 'condition')
        loop = _Loop(condition)
        self.loops.append(loop)
        body_exits = self._guarded(condition, statement.body, [(condition, 'true')])
        self.loops.pop()
        self._connect([(b, 'loop-back') for b, _ in body_exits] + loop.continues, condition)
        return [(condition, 'false')] + loop.breaks

    def _for(self, statement: ForStatement, preds: Pending) -> Pending:
        if statement.init is not None:
            preds = self._statement(statement.init, preds)
        condition = self._simple(statement, preds, 'condition')
        loop = _Loop(condition)
        self.loops.append(loop)
        body_exits = self._guarded(condition, statement.body, [(condition, 'true')])
        self.loops.pop()
        tail = [(b, 'seq') for b, _ in body_exits] + [(b, 'seq') for b, _ in loop.continues]
        if statement.update is not None:
            self.guards.append(condition)
            update = self._simple(statement.update, tail, 'update')
            self.guards.pop()
            self.graph.add_edge(update, condition, key='loop-back')
        else:
            self._connect([(b, 'loop-back') for b, _ in tail], condition)
        exits = loop.breaks
        if statement.condition is not None:
            exits = [(condition, 'false')] + exits
        return exits


def build_cfg(function: FunctionDef, contract: ContractDef, unit: Optional[SourceUnit] = None) -> Cfg:
    """CFG of ``function`` with the modifiers it applies, resolved in the merged ``contract``"""
    return CfgBuilder(function, contract, unit).build()


def statements_in(owner: Owner) -> List[Statement]:
    """Statements that get their own block: everything except blocks and placeholders"""
    if owner.body is None:
        return []
    return [n for n in walk(owner.body)
            if isinstance(n, Statement) and not isinstance(n, (Block, PlaceholderStatement))]
