import random

import pytest

from conftest import analyze_source
from core.analysis.cfg import ENTRY, EXIT, build_cfg
from core.analysis.dependences import DependenceKind, classify_dependences, dependences_between
from core.analysis.graph_dump import cfg_to_text, dfg_to_text, write_dumps
from core.errors import MissingModifier
from core.solidity.ast_nodes import Identifier, IfStatement, VarDecl, VarDeclStatement, walk

VARIABLES = ['a', 'b', 'c', 'd']


def _statement_blocks(fa):
    """Block id of each top-level body statement, in order"""
    return [fa.cfg.block_of(s.node_id) for s in fa.function.body.statements]


def random_function(rng: random.Random):
    """Straight-line body over up to four state variables, with its read and write sets"""
    names = VARIABLES[:rng.randint(1, 4)]
    lines, accesses = [], []
    for _ in range(rng.randint(1, 10)):
        target = rng.choice(names)
        form = rng.randrange(4)
        if form == 0:
            lines.append(f"{target} = {rng.randint(0, 9)};")
            accesses.append((set(), {target}))
        elif form == 1:
            source = rng.choice(names)
            lines.append(f"{target} = {source};")
            accesses.append(({source}, {target}))
        elif form == 2:
            left, right = rng.choice(names), rng.choice(names)
            lines.append(f"{target} = {left} + {right};")
            accesses.append(({left, right}, {target}))
        else:
            source = rng.choice(names)
            lines.append(f"{target} += {source};")
            accesses.append(({target, source}, {target}))
    body = '\n'.join(f"        {line}" for line in lines)
    state = '\n'.join(f"    uint {name};" for name in names)
    source = f"pragma solidity ^0.4.24;\ncontract G {{\n{state}\n    function f() public {{\n{body}\n    }}\n}}\n"
    return source, accesses


def oracle(accesses):
    found = set()
    for i, (first_reads, first_writes) in enumerate(accesses):
        for j in range(i + 1, len(accesses)):
            second_reads, second_writes = accesses[j]
            found |= {(i, j, 'RAW', v) for v in first_writes & second_reads}
            found |= {(i, j, 'WAR', v) for v in first_reads & second_writes}
            found |= {(i, j, 'WAW', v) for v in first_writes & second_writes}
    return found


def test_dependences_match_read_write_oracle_on_random_functions():
    rng = random.Random(20180601)
    for _ in range(500):
        source, accesses = random_function(rng)
        _, analysis = analyze_source(source)
        fa = analysis.function('G', 'f')
        index = {block: i for i, block in enumerate(_statement_blocks(fa))}
        found = {(index[d.from_stmt], index[d.to_stmt], d.kind.value, d.location.name)
                 for d in classify_dependences(fa.dfg)}
        assert found == oracle(accesses), source


def test_window_adds_read_after_read(corpus):
    _, analysis = corpus('victim.sol')
    fa = analysis.function('Victim', 'refund')
    check, call, write = _statement_blocks(fa)
    without = classify_dependences(fa.dfg)
    windowed = classify_dependences(fa.dfg, window=[check, call, write])
    assert not any(d.kind is DependenceKind.RAR for d in without)
    assert any(d.kind is DependenceKind.RAR and d.location.name == 'userBalances'
               for d in dependences_between(windowed, check, call))
    # the write after the call clobbers what the call read
    assert {d.kind for d in dependences_between(without, call, write)} == {DependenceKind.WAR}


def test_cfg_shape_for_straight_line_function(corpus):
    _, analysis = corpus('victim.sol')
    cfg = analysis.function('Victim', 'refund').cfg
    blocks = _statement_blocks(analysis.function('Victim', 'refund'))
    assert cfg.successors(ENTRY) == [blocks[0]]
    assert cfg.successors(blocks[-1]) == [EXIT]
    assert cfg.reaches(blocks[0], blocks[2])
    assert not cfg.reaches(blocks[2], blocks[0])
    assert cfg.blocks[blocks[1]].node is analysis.function('Victim', 'refund').function.body.statements[1]


def test_cfg_guards_follow_branch_nesting(corpus):
    _, analysis = corpus('branch_call_lock.sol')
    fa = analysis.function('Bank', 'withdrawAll')
    statements = fa.function.body.statements
    branch = next(s for s in statements if isinstance(s, IfStatement))
    condition = fa.cfg.block_of(branch.node_id)
    call = fa.cfg.block_of(branch.true_body.statements[0].node_id)
    write = fa.cfg.block_of(statements[2].node_id)
    assert fa.cfg.guards_of(call) == [condition]
    assert fa.cfg.guards_of(write) == []
    assert fa.cfg.reaches(call, write)
    assert fa.cfg.reaches(condition, write)


def test_storage_pointer_points_to_mapping(corpus):
    unit, analysis = corpus('vesting.sol')
    fa = analysis.function('TokenVesting', 'addVestingSchedule')
    pointer = next(n for n in walk(fa.function.body) if isinstance(n, VarDecl) and n.name == 'vestingSchedule')
    schedules = unit.contract('TokenVesting').state_var('vestingSchedules')
    assert analysis.points_to.self_location(schedules) in analysis.points_to.locations(pointer)
    assert analysis.points_to.is_reference(pointer)
    # writes through the pointer are storage writes
    write = fa.cfg.block_of(fa.function.body.statements[2].node_id)
    assert {loc.name for loc in fa.state_writes(write)} == {'vestingSchedules'}


def test_method_summaries(corpus):
    _, analysis = corpus('victim.sol')
    refund = analysis.summaries['Victim.refund']
    deposit = analysis.summaries['Victim.deposit']
    assert refund.state_vars_written == {'userBalances'}
    assert 'userBalances' in refund.state_vars_read
    assert refund.makes_external_call and refund.makes_ether_transfer
    assert not deposit.makes_external_call
    assert deposit.to_dict()['writes'] == ['userBalances']


def test_summaries_propagate_through_internal_calls():
    source = """pragma solidity ^0.4.24;
contract C {
    uint total;
    function bump() internal { total += 1; }
    function entry() public { bump(); }
}
"""
    _, analysis = analyze_source(source)
    assert analysis.summaries['C.entry'].state_vars_written == {'total'}
    assert 'C.bump' in analysis.summaries['C.entry'].callees


def test_def_use_links_local_to_call(corpus):
    _, analysis = corpus('timestamp_write.sol')
    fa = analysis.function('Faucet', 'claim')
    declaration, call, _ = _statement_blocks(fa)
    assert call in fa.dfg.uses_of(declaration)
    assert declaration in fa.dfg.definitions_of(call)


def test_reentrancy_guard_is_recognized():
    source = """pragma solidity ^0.4.24;
contract Guarded {
    bool private locked;
    mapping(address => uint) public balances;
    function withdraw() public {
        require(!locked);
        locked = true;
        require(msg.sender.call.value(balances[msg.sender])());
        balances[msg.sender] = 0;
        locked = false;
    }
}
"""
    _, analysis = analyze_source(source)
    assert analysis.function('Guarded', 'withdraw').guarded


def test_graph_dumps(corpus, tmp_path):
    _, analysis = corpus('victim.sol')
    fa = analysis.function('Victim', 'refund')
    text = cfg_to_text(fa.cfg)
    assert text.startswith('// cfg Victim.refund')
    assert f"{ENTRY} -> " in text
    assert dfg_to_text(fa.dfg).startswith('// dfg Victim.refund')
    written = write_dumps(fa.cfg, fa.dfg, tmp_path, 'victim')
    assert [p.name for p in written] == ['victim.Victim.refund.cfg.txt', 'victim.Victim.refund.dfg.txt']
    assert all(p.exists() for p in written)


@pytest.mark.parametrize('name', ['victim.sol', 'vesting.sol', 'mixed.sol'])
def test_every_body_gets_an_analysis(corpus, name):
    unit, analysis = corpus(name)
    expected = {f"{c.name}.{f.display_name}" for c in unit.contracts for f in c.functions if f.body is not None}
    assert set(analysis.functions) == expected
    assert not analysis.errors
    declarations = [n for n in walk(unit) if isinstance(n, VarDeclStatement)]
    for declaration in declarations:
        assert declaration.declarations


MODIFIED = """pragma solidity ^0.4.24;
contract Gate {
    address owner;
    uint count;
    modifier onlyBy(address who) {
        require(msg.sender == who);
        _;
        count += 1;
    }
    function poke() public onlyBy(owner) {
        count = 5;
    }
}
"""


def test_cfg_inlines_modifier_around_body():
    unit, analysis = analyze_source(MODIFIED)
    fa = analysis.function('Gate', 'poke')
    modifier = unit.contract('Gate').modifier('onlyBy')
    check, _, bump = modifier.body.statements
    prefix = fa.cfg.block_of(check.node_id)
    body = fa.cfg.block_of(fa.function.body.statements[0].node_id)
    suffix = fa.cfg.block_of(bump.node_id)
    assert fa.cfg.successors(ENTRY) == [prefix]
    assert fa.cfg.successors(prefix) == [body]
    assert fa.cfg.successors(body) == [suffix]
    assert fa.cfg.successors(suffix) == [EXIT]
    assert fa.cfg.blocks[prefix].frame == 0 and not fa.cfg.blocks[prefix].in_body
    assert fa.cfg.blocks[body].in_body
    argument = fa.cfg.blocks[prefix].bindings['who']
    assert isinstance(argument, Identifier) and argument.name == 'owner'


def test_unknown_modifier_drops_the_function():
    source = MODIFIED.replace('onlyBy(owner)', 'onlyAdmin')
    unit, analysis = analyze_source(source)
    contract = unit.contract('Gate')
    with pytest.raises(MissingModifier) as info:
        build_cfg(contract.function('poke'), contract, unit)
    assert info.value.modifier == 'onlyAdmin'
    assert analysis.function('Gate', 'poke') is None
    assert [type(e) for e in analysis.errors] == [MissingModifier]


def _local(fa, name):
    return next(n for n in walk(fa.function.body) if isinstance(n, VarDecl) and n.name == name)


def test_memory_arrays_alias_but_copies_do_not():
    source = """pragma solidity ^0.4.24;
contract Buffers {
    uint[] stored;
    function f(uint x) public {
        uint[] memory a = new uint[](3);
        uint[] memory b = a;
        uint y = x;
        uint[] memory m = stored;
        b[0] = y + m[0];
    }
}
"""
    unit, analysis = analyze_source(source)
    fa = analysis.function('Buffers', 'f')
    points_to = analysis.points_to
    a, b, y, m = (_local(fa, name) for name in 'abym')
    assert points_to.is_reference(b)
    assert points_to.self_location(a) in points_to.locations(b)
    assert not points_to.is_reference(y)
    # a memory copy of a storage array is a fresh value
    assert not points_to.is_reference(m)
    assert not any(loc.state for loc in points_to.locations(m))
    assert points_to.self_location(unit.contract('Buffers').state_var('stored')) not in points_to.locations(m)


def def_use_oracle(accesses):
    """(i, j, v) when j reads the value of ``v`` that i wrote last"""
    found = set()
    for i, (_, writes) in enumerate(accesses):
        for v in writes:
            for j in range(i + 1, len(accesses)):
                if v in accesses[j][0]:
                    found.add((i, j, v))
                if v in accesses[j][1]:
                    break
    return found


def test_def_use_edges_match_last_write_oracle_on_random_functions():
    rng = random.Random(20180602)
    for _ in range(500):
        source, accesses = random_function(rng)
        _, analysis = analyze_source(source)
        fa = analysis.function('G', 'f')
        index = {block: i for i, block in enumerate(_statement_blocks(fa))}
        found = {(index[u], index[v], loc.name) for u, v, loc in fa.dfg.edges() if u in index and v in index}
        assert found == def_use_oracle(accesses), source
