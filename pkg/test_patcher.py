from conftest import analyze_source
from core.detectors import detect_findings
from core.errors import NotApplicable, PlanBlocked
from core.patcher import (
    applied_copy, apply_lock, apply_reorder, changed_lines, estimate_cost, fix_locked_ether,
    fix_missing_input_validation, fix_unhandled_exception, plan_reorder, unified_diff,
)
from core.patcher.generator import build_script
from core.patcher.naming import fresh_name
from core.solidity.printer import print_unit
from models.finding import VulnerabilityClass
from models.patch import AddFunction, AddStateVar, EditScript, WrapInRequire

import pytest


def flat(text: str) -> str:
    return ' '.join(text.split())


def findings_of(analysis, vuln_class):
    return [f for f in detect_findings(analysis) if f.vuln_class is vuln_class]


def patched_text(unit, script) -> str:
    return flat(print_unit(applied_copy(unit, script)))


def test_unchecked_send_is_wrapped(corpus):
    unit, analysis = corpus('unchecked_send.sol')
    [finding] = findings_of(analysis, VulnerabilityClass.UNHANDLED_EXCEPTION)
    script = fix_unhandled_exception(finding, analysis)
    assert script.pattern == 'require'
    assert [type(e) for e in script.edits] == [WrapInRequire]
    assert 'owed[msg.sender] = 0; require(msg.sender.send(amount)); }' in patched_text(unit, script)


def test_low_level_call_is_captured_from_0_5():
    source = """pragma solidity ^0.5.0;
contract Payout {
    mapping(address => uint) public owed;
    function deposit() public payable { owed[msg.sender] += msg.value; }
    function pay() public {
        uint amount = owed[msg.sender];
        owed[msg.sender] = 0;
        msg.sender.call.value(amount)("");
    }
}
"""
    unit, analysis = analyze_source(source)
    [finding] = findings_of(analysis, VulnerabilityClass.UNHANDLED_EXCEPTION)
    script = fix_unhandled_exception(finding, analysis)
    assert script.notes == ['captured success flag as success']
    assert '(bool success, ) = msg.sender.call.value(amount)(""); require(success);' in patched_text(unit, script)


def test_stored_result_gets_a_check():
    source = """pragma solidity ^0.4.24;
contract Payout {
    mapping(address => uint) public owed;
    function deposit() public payable { owed[msg.sender] += msg.value; }
    function pay() public {
        uint amount = owed[msg.sender];
        owed[msg.sender] = 0;
        bool sent = msg.sender.send(amount);
    }
}
"""
    unit, analysis = analyze_source(source)
    [finding] = findings_of(analysis, VulnerabilityClass.UNHANDLED_EXCEPTION)
    script = fix_unhandled_exception(finding, analysis)
    assert 'bool sent = msg.sender.send(amount); require(sent); }' in patched_text(unit, script)


def test_victim_reorder_snapshots_the_balance(corpus):
    unit, analysis = corpus('victim.sol')
    [finding] = detect_findings(analysis)
    plan = plan_reorder(finding, analysis)
    assert not plan.blocked
    assert [s.name for s in plan.snapshots] == ['userBalances_temp']
    script = apply_reorder(plan, finding.id)
    assert estimate_cost(script).delta_gas_units == 5
    assert ('require(userBalances[msg.sender] > 0); '
            'var userBalances_temp = userBalances[msg.sender]; '
            'userBalances[msg.sender] = 0; '
            'require(msg.sender.call.value(userBalances_temp)()); }') in patched_text(unit, script)


def test_vesting_reorder_moves_every_write(corpus):
    unit, analysis = corpus('vesting.sol')
    [finding] = detect_findings(analysis)
    plan = plan_reorder(finding, analysis)
    assert not plan.blocked
    assert len(plan.moved) == 7
    assert [s.name for s in plan.snapshots] == ['totalUnreleasedTokens_temp']
    text = patched_text(unit, apply_reorder(plan, finding.id))
    ordered = [
        'VestingSchedule storage vestingSchedule = vestingSchedules[_beneficiary];',
        'var totalUnreleasedTokens_temp = totalUnreleasedTokens;',
        'vestingSchedule.totalAmount = _totalAmount;',
        'totalUnreleasedTokens = safeAdd(totalUnreleasedTokens, _totalAmount);',
        'vestingSchedule.amountReleased = 0;',
        'require(token.balanceOf(this) >= safeAdd(totalUnreleasedTokens_temp, _totalAmount));',
    ]
    positions = [text.index(fragment) for fragment in ordered]
    assert positions == sorted(positions)


def test_branch_call_falls_back_to_lock(corpus):
    unit, analysis = corpus('branch_call_lock.sol')
    [finding] = detect_findings(analysis)
    plan = plan_reorder(finding, analysis)
    assert plan.blocked
    with pytest.raises(PlanBlocked):
        apply_reorder(plan)
    script, reason = build_script(finding, analysis)
    assert script.pattern == 'lock'
    assert reason.startswith('reorder blocked')
    assert estimate_cost(script).delta_gas_units == 25000
    text = patched_text(unit, script)
    assert 'bool private locked;' in text
    assert 'function withdrawAll() public { require(!locked); locked = true;' in text
    assert 'withdrawals += 1; locked = false; }' in text


def test_forced_lock_releases_before_returns():
    source = """pragma solidity ^0.4.24;
contract Bank {
    mapping(address => uint) public credit;
    function withdraw() public returns (bool) {
        require(msg.sender.call.value(credit[msg.sender])());
        credit[msg.sender] = 0;
        return true;
    }
}
"""
    unit, analysis = analyze_source(source)
    [finding] = findings_of(analysis, VulnerabilityClass.REENTRANCY)
    script, reason = build_script(finding, analysis, force_lock=True)
    assert reason == 'lock forced by configuration'
    text = patched_text(unit, script)
    assert 'credit[msg.sender] = 0; locked = false; return true; }' in text


def test_lock_name_avoids_collisions():
    assert fresh_name('locked', {'locked'}) != 'locked'
    source = """pragma solidity ^0.4.24;
contract Bank {
    uint locked;
    mapping(address => uint) public credit;
    function withdraw() public {
        uint amount = credit[msg.sender];
        if (amount > 0) {
            require(msg.sender.call.value(amount)());
        }
        credit[msg.sender] = 0;
        locked += 1;
    }
}
"""
    _, analysis = analyze_source(source)
    [finding] = findings_of(analysis, VulnerabilityClass.REENTRANCY)
    script = apply_lock(finding, analysis)
    assert script.notes[0] != 'lock locked'


def test_address_parameter_gets_nonzero_check(corpus):
    unit, analysis = corpus('weth_transfer_from.sol')
    src, dst = findings_of(analysis, VulnerabilityClass.MISSING_INPUT_VALIDATION)
    script = fix_missing_input_validation(src, analysis)
    assert script.pattern == 'validate'
    assert estimate_cost(script).delta_gas_units == 30
    assert ('returns (bool) { require(src != address(0)); require(balanceOf[src] >= wad);'
            in patched_text(unit, script))


def test_non_address_parameter_is_not_patched(corpus):
    _, analysis = corpus('non_address_param.sol')
    [finding] = detect_findings(analysis)
    with pytest.raises(NotApplicable):
        fix_missing_input_validation(finding, analysis)


def test_locked_ether_adds_owner_and_withdraw(corpus):
    unit, analysis = corpus('locked_no_owner.sol')
    [finding] = detect_findings(analysis)
    script = fix_locked_ether(finding, analysis)
    assert [type(e) for e in script.edits] == [AddStateVar, AddFunction, AddFunction]
    text = patched_text(unit, script)
    assert 'uint public deposits; address private owner;' in text
    assert 'constructor() public { owner = msg.sender; }' in text
    assert ('function withdraw() public { require(msg.sender == owner); '
            'msg.sender.transfer(address(this).balance); }') in text


def test_locked_ether_reuses_existing_owner(corpus):
    unit, analysis = corpus('locked_with_owner.sol')
    [finding] = detect_findings(analysis)
    script = fix_locked_ether(finding, analysis)
    assert [type(e) for e in script.edits] == [AddFunction]
    assert script.notes == ['owner is owner']
    text = patched_text(unit, script)
    assert text.count('constructor()') == 1
    assert 'require(msg.sender == owner); msg.sender.transfer(address(this).balance);' in text


def test_empty_script_costs_nothing():
    assert estimate_cost(EditScript('none', 'lock')).delta_gas_units == 0


def test_diff_counts_changed_lines():
    diff = unified_diff('a\nb\nc\n', 'a\nB\nc\nd\n')
    assert diff.startswith('--- original\n+++ patched\n')
    assert changed_lines(diff) == 3
    assert changed_lines(unified_diff('same\n', 'same\n')) == 0


def test_constructor_assigned_owner_wins_over_name():
    source = """pragma solidity ^0.4.24;
contract Escrow {
    address public pendingOwner;
    address public admin;
    uint public held;
    constructor() public { admin = msg.sender; }
    function deposit() public payable { held += msg.value; }
    function nominate(address next) public {
        require(next != address(0));
        require(msg.sender == admin);
        pendingOwner = next;
    }
}
"""
    unit, analysis = analyze_source(source)
    [finding] = findings_of(analysis, VulnerabilityClass.LOCKED_ETHER)
    script = fix_locked_ether(finding, analysis)
    assert script.notes == ['owner is admin']
    assert 'require(msg.sender == admin); msg.sender.transfer(address(this).balance);' in patched_text(unit, script)


def test_modifier_suffix_write_falls_back_to_lock(corpus):
    unit, analysis = corpus('modifier_suffix.sol')
    [finding] = findings_of(analysis, VulnerabilityClass.REENTRANCY)
    assert plan_reorder(finding, analysis).blocked
    script, reason = build_script(finding, analysis)
    assert script.pattern == 'lock'
    assert reason.startswith('reorder blocked: storage write at statement')
    text = patched_text(unit, script)
    assert 'function drip() public counted { require(!locked); locked = true;' in text
