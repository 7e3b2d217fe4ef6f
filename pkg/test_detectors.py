from collections import Counter

import pytest

from conftest import analyze_source, corpus_files
from core.detectors import (
    ALL_DETECTORS, detect_findings, detect_locked_ether, detect_reentrancy, ensemble, run_detectors,
)
from core.detectors.base import AbstractDetector
from core.detectors.reentrancy import DataflowReentrancy, SemanticReentrancy, SyntacticReentrancy
from models.finding import DetectorVote, Site, UnfixableReason, VulnerabilityClass


@pytest.mark.parametrize('name', corpus_files())
def test_corpus_findings_per_class(corpus, expected, name):
    _, analysis = corpus(name)
    findings = detect_findings(analysis)
    counts = Counter(f.vuln_class.value for f in findings)
    assert dict(counts) == expected[name]['findings']
    reasons = {f.reason.value for f in findings if not f.fixable}
    unfixable = expected[name].get('unfixable')
    assert reasons == ({unfixable} if unfixable else set())


def test_victim_finding_identity(corpus):
    _, analysis = corpus('victim.sol')
    [finding] = detect_findings(analysis)
    assert finding.id == 'Reentrancy@Victim.refund#0'
    assert finding.votes == ['dataflow', 'semantic', 'syntactic']
    assert finding.site.line == 12
    assert finding.to_dict()['fixable'] is True


def test_two_sends_get_distinct_ordinals(corpus):
    _, analysis = corpus('two_sends.sol')
    ids = [f.id for f in detect_findings(analysis)]
    assert ids == ['UnhandledException@Splitter.split#0', 'UnhandledException@Splitter.split#1']


def test_weth_flags_source_and_destination_only(corpus):
    _, analysis = corpus('weth_transfer_from.sol')
    findings = detect_findings(analysis)
    assert [f.site.description for f in findings] == ['src', 'dst']
    assert all(f.fixable for f in findings)


def test_controlled_write_needs_two_votes(corpus):
    _, analysis = corpus('controlled_write.sol')
    votes = detect_reentrancy(analysis)
    assert sorted(v.detector for v in votes) == ['dataflow', 'syntactic']
    assert detect_findings(analysis, {VulnerabilityClass.REENTRANCY: 3}) == []


def test_enabled_detectors_restrict_voting(corpus):
    _, analysis = corpus('victim.sol')
    only_dataflow = detect_findings(analysis, {VulnerabilityClass.REENTRANCY: 1}, enabled=[DataflowReentrancy])
    assert [f.votes for f in only_dataflow] == [['dataflow']]
    assert detect_findings(analysis, enabled=[DataflowReentrancy]) == []


def test_registry_covers_every_class():
    by_class = Counter(cls.VULN_CLASS for cls in ALL_DETECTORS)
    assert by_class == {
        VulnerabilityClass.REENTRANCY: 3,
        VulnerabilityClass.UNHANDLED_EXCEPTION: 3,
        VulnerabilityClass.LOCKED_ETHER: 3,
        VulnerabilityClass.MISSING_INPUT_VALIDATION: 1,
    }
    assert {cls.NAME for cls in (SyntacticReentrancy, DataflowReentrancy, SemanticReentrancy)} == {
        'syntactic', 'dataflow', 'semantic'}


def test_ensemble_counts_each_detector_once():
    site = Site('A', 'f', 0, 7, 3, 40, 60, 'x.send(1)')
    other = Site('A', 'f', 1, 9, 4, 70, 90, 'y.send(1)')
    votes = [
        DetectorVote('syntactic', VulnerabilityClass.UNHANDLED_EXCEPTION, site),
        DetectorVote('syntactic', VulnerabilityClass.UNHANDLED_EXCEPTION, site),
        DetectorVote('syntactic', VulnerabilityClass.UNHANDLED_EXCEPTION, other),
        DetectorVote('semantic', VulnerabilityClass.UNHANDLED_EXCEPTION, other),
    ]
    findings = ensemble(votes, file='a.sol')
    assert [f.id for f in findings] == ['UnhandledException@A.f#1']
    assert findings[0].votes == ['semantic', 'syntactic']
    relaxed = ensemble(votes, {VulnerabilityClass.UNHANDLED_EXCEPTION: 1})
    assert [f.site.ordinal for f in relaxed] == [0, 1]


def test_guarded_function_is_not_reentrant():
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
    assert detect_reentrancy(analysis) == []


def test_input_validation_skips_constructors_and_internal_functions():
    source = """pragma solidity ^0.4.24;
contract Registry {
    address public admin;
    mapping(address => bool) public members;
    constructor(address first) public { admin = first; }
    function add(address who) internal { members[who] = true; }
    function join(address who) public {
        require(who != address(0));
        add(who);
    }
}
"""
    _, analysis = analyze_source(source)
    assert detect_findings(analysis) == []


def test_reverting_branch_counts_as_validation():
    source = """pragma solidity ^0.4.24;
contract Registry {
    address public admin;
    function setAdmin(address next) public {
        if (next == address(0)) revert();
        admin = next;
    }
}
"""
    _, analysis = analyze_source(source)
    assert detect_findings(analysis) == []


def test_handled_send_is_reported_but_unfixable(corpus):
    _, analysis = corpus('handled_send.sol')
    [finding] = detect_findings(analysis)
    assert not finding.fixable
    assert finding.reason is UnfixableReason.RETURN_VALUE_HANDLED
    assert finding.to_dict()['reason'] == 'return-value-handled'


def test_locked_ether_is_reported_per_contract(corpus):
    _, analysis = corpus('mixed.sol')
    locked = [f for f in detect_findings(analysis) if f.vuln_class is VulnerabilityClass.LOCKED_ETHER]
    assert [f.id for f in locked] == ['LockedEther@Vault#0']
    assert locked[0].scope == 'contract'


def test_failing_detector_votes_nothing(corpus):
    class Broken(AbstractDetector):
        NAME = 'syntactic'
        VULN_CLASS = VulnerabilityClass.REENTRANCY

        def _detect(self, analysis):
            raise RuntimeError('boom')

    _, analysis = corpus('victim.sol')
    assert Broken().detect(analysis) == []


def test_write_in_modifier_suffix_is_reentrant(corpus):
    _, analysis = corpus('modifier_suffix.sol')
    [finding] = detect_findings(analysis)
    assert finding.id == 'Reentrancy@Faucet.drip#0'
    # the lexical scan only sees the body
    assert finding.votes == ['dataflow', 'semantic']
    assert finding.fixable


def test_parameter_checked_in_modifier_argument_is_validated():
    source = """pragma solidity ^0.4.24;
contract Registry {
    address public admin;
    modifier nonZero(address a) {
        require(a != address(0));
        _;
    }
    function setAdmin(address next) public nonZero(next) {
        admin = next;
    }
}
"""
    _, analysis = analyze_source(source)
    assert detect_findings(analysis) == []


def test_delegatecall_is_not_a_way_out_for_ether():
    source = """pragma solidity ^0.4.24;
contract Proxy {
    address public lib;
    function() public payable {
        require(lib.delegatecall(msg.data));
    }
}
"""
    _, analysis = analyze_source(source)
    votes = detect_locked_ether(analysis)
    assert all(v.site.contract == 'Proxy' for v in votes)
    # the lexical scan accepts the call token, the summaries do not
    assert sorted(v.detector for v in votes) == ['dataflow', 'semantic']
    [finding] = [f for f in detect_findings(analysis) if f.vuln_class is VulnerabilityClass.LOCKED_ETHER]
    assert finding.id == 'LockedEther@Proxy#0'


def test_votes_follow_detector_order(corpus):
    _, analysis = corpus('victim.sol')
    votes = run_detectors(analysis, [SemanticReentrancy(), SyntacticReentrancy(), DataflowReentrancy()])
    assert list(dict.fromkeys(v.detector for v in votes)) == ['semantic', 'syntactic', 'dataflow']
