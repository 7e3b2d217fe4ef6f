import pytest

from conftest import corpus_files, load_source, parse_fixture
from core.errors import SoliditySyntaxError, UnsupportedConstruct
from core.solidity.ast_nodes import (
    CallOptions, ContractDef, FunctionCall, Identifier, MemberAccess, VarDeclStatement, pragma_version, walk,
)
from core.solidity.calls import CallKind, TypeScope, classify_call
from core.solidity.inheritance import merge_contract
from core.solidity.lexer import tokenize
from core.solidity.parser import parse
from core.solidity.printer import print_node, print_unit


@pytest.mark.parametrize('name', corpus_files())
def test_parse_print_parse_is_structurally_equal(name):
    unit = parse_fixture(name)
    printed = print_unit(unit)
    again = parse(printed, unit.path)
    assert again == unit
    # canonical printing is a fixpoint
    assert print_unit(again) == printed


def test_parse_reports_position_of_syntax_errors():
    with pytest.raises(SoliditySyntaxError) as error:
        parse("pragma solidity ^0.4.24;\ncontract A {\n    uint x\n}\n")
    assert error.value.line == 4
    assert error.value.expected


def test_tokens_carry_offsets_and_skip_comments():
    source = "pragma solidity ^0.4.24;\n/* note\n */ uint x = 1 ether; // tail\n"
    tokens = tokenize(source)
    assert [t.type for t in tokens] == ['PRAGMA', 'SEMI', 'IDENT', 'IDENT', 'ASSIGN', 'NUMBER',
                                        'SUBDENOMINATION', 'SEMI']
    assert tokens[0].value == 'solidity ^0.4.24'
    uint = tokens[2]
    assert (uint.lineno, source[uint.lexpos:uint.endlexpos]) == (3, 'uint')
    assert tokens[-2].endlexpos == source.index('ether') + len('ether')


def test_unterminated_string_is_a_syntax_error():
    with pytest.raises(SoliditySyntaxError) as error:
        parse('contract A {\n    string s = "open;\n}\n')
    assert (error.value.line, error.value.column) == (2, 16)


@pytest.mark.parametrize('source, construct', [
    ("contract A { function f() public { assembly { } } }", 'assembly'),
    ("import './B.sol';\ncontract A {}", 'import'),
    ("contract A {} contract B {} contract C is A, B {}", 'inheritance'),
])
def test_unsupported_constructs_are_rejected(source, construct):
    with pytest.raises(UnsupportedConstruct) as error:
        parse(source)
    assert construct in error.value.construct


def test_legacy_and_modern_value_calls_share_a_node():
    legacy = parse("contract A { function f() public { msg.sender.call.value(1)(); } }")
    modern = parse("pragma solidity ^0.7.0;\ncontract A { function f() public { "
                   'msg.sender.call{value: 1}(""); } }')
    legacy_options = [n for n in walk(legacy) if isinstance(n, CallOptions)]
    modern_options = [n for n in walk(modern) if isinstance(n, CallOptions)]
    assert len(legacy_options) == 1 and len(modern_options) == 1
    assert legacy_options[0].legacy and not modern_options[0].legacy
    assert print_node(legacy_options[0]) == 'msg.sender.call.value(1)'
    assert print_node(modern_options[0]) == 'msg.sender.call{value: 1}'


def test_pragma_version_is_lowest_admitted():
    assert pragma_version(parse("pragma solidity ^0.4.24;\ncontract A {}")) == (0, 4, 24)
    assert pragma_version(parse("pragma solidity >=0.5.0 <0.7.0;\ncontract A {}")) == (0, 5, 0)
    assert pragma_version(parse("contract A {}")) == (0, 4, 24)


def test_tuple_declaration_round_trips():
    source = ("pragma solidity ^0.5.0;\ncontract A {\n    function f(address a) public {\n"
              "        (bool success, ) = a.call.value(1)(\"\");\n        require(success);\n    }\n}\n")
    unit = parse(source)
    declarations = [n for n in walk(unit) if isinstance(n, VarDeclStatement)]
    assert declarations[0].tuple_form
    assert declarations[0].declarations[1] is None
    assert parse(print_unit(unit)) == unit


def test_call_as_modifier_argument_round_trips():
    source = """pragma solidity ^0.4.24;
contract A {
    address admin;
    modifier onlyBy(address who) { require(msg.sender == who); _; }
    modifier logged { _; }
    function owner() public view returns (address) { return admin; }
    function reset() public logged onlyBy(owner()) { admin = address(0); }
}
"""
    unit = parse(source)
    printed = print_unit(unit)
    assert 'logged onlyBy(owner())' in printed
    again = parse(printed)
    assert again == unit
    [_, invocation] = again.contract('A').function('reset').modifiers
    assert isinstance(invocation.arguments[0], FunctionCall)


def _calls(unit, function):
    contract = unit.contracts[-1]
    scope = TypeScope(unit, merge_contract(contract, unit), contract.function(function))
    return [(print_node(c), classify_call(c, scope))
            for c in walk(contract.function(function).body) if isinstance(c, FunctionCall)]


def test_call_classification_on_victim():
    unit = parse_fixture('victim.sol')
    kinds = dict(_calls(unit, 'refund'))
    assert kinds['msg.sender.call.value(userBalances[msg.sender])()'] is CallKind.CALL_VALUE
    assert kinds['require(userBalances[msg.sender] > 0)'] is CallKind.INTERNAL


def test_call_classification_on_vesting():
    unit = parse_fixture('vesting.sol')
    kinds = dict(_calls(unit, 'addVestingSchedule'))
    assert kinds['token.balanceOf(this)'] is CallKind.EXTERNAL_CONTRACT
    assert kinds['safeAdd(totalUnreleasedTokens, _totalAmount)'] is CallKind.INTERNAL


def test_send_and_transfer_are_ether_transfers():
    unit = parse("contract A { address p; function f() public { p.send(1); p.transfer(2); } }")
    kinds = [k for _, k in _calls(unit, 'f')]
    assert kinds == [CallKind.SEND, CallKind.TRANSFER]
    assert all(k.is_ether_transfer for k in kinds)
    assert kinds[0].returns_success_flag and not kinds[1].returns_success_flag


def test_merge_contract_shares_members_with_bases():
    unit = parse_fixture('vesting.sol')
    vesting = unit.contract('TokenVesting')
    merged = merge_contract(vesting, unit)
    assert isinstance(merged, ContractDef)
    safe_add = merged.function('safeAdd')
    assert safe_add is unit.contract('SafeMath').function('safeAdd')
    assert merged.function('addVestingSchedule') is vesting.function('addVestingSchedule')
    assert merged.node_id == vesting.node_id


def test_node_ids_are_unique_and_adopt_fills_missing_ones():
    unit = parse(load_source('victim.sol'))
    ids = [n.node_id for n in walk(unit)]
    assert len(ids) == len(set(ids))
    assert min(ids) >= 0
    before = unit.next_id
    added = unit.adopt(MemberAccess(expression=Identifier(name='msg'), member='value'))
    assert added.node_id >= before and added.expression.node_id >= before
    assert unit.next_id == before + 2
