from core.detectors import detect_findings
from core.patcher import generate_patches
from core.solidity.printer import print_unit
from core.verifier import Verifier, contract_report, verify
from models.finding import VulnerabilityClass


def _fixed(corpus, name):
    unit, analysis = corpus(name)
    findings = detect_findings(analysis)
    return unit, findings, generate_patches(findings, unit, analysis)


def test_reordered_victim_passes(corpus):
    unit, findings, result = _fixed(corpus, 'victim.sol')
    report = verify(unit, result.unit, findings)
    assert report.passed
    assert report.eliminated == ['Reentrancy@Victim.refund#0']
    assert report.residual == [] and report.introduced == []
    assert report.statuses == {'Reentrancy@Victim.refund#0': 'eliminated'}


def test_unchanged_source_fails(corpus):
    unit, analysis = corpus('victim.sol')
    report = verify(unit, unit)
    assert report.verdict == 'fail'
    assert [f.id for f in report.residual] == ['Reentrancy@Victim.refund#0']
    assert report.eliminated == []


def test_partial_patch_leaves_the_other_send(corpus):
    unit, analysis = corpus('two_sends.sol')
    findings = detect_findings(analysis)
    text = print_unit(unit).replace('partner.send(half);', 'require(partner.send(half));')
    report = verify(unit, text, findings)
    assert report.verdict == 'fail'
    assert report.eliminated == ['UnhandledException@Splitter.split#1']
    assert [f.site.ordinal for f in report.residual] == [0]


def test_unparseable_patch_fails_with_reason(corpus):
    unit, analysis = corpus('unchecked_send.sol')
    findings = detect_findings(analysis)
    report = verify(unit, 'contract Payout {', findings)
    assert report.verdict == 'fail'
    assert report.reason.startswith('parse-failure')
    assert report.statuses == {f.id: 'residual' for f in findings}
    assert report.to_dict()['reason'] == report.reason


def test_introduced_findings_fail_verification(corpus):
    unit, analysis = corpus('clean.sol')
    text = print_unit(unit).replace('count += 1;', 'count += 1;\n        msg.sender.send(1);')
    report = verify(unit, text)
    assert report.verdict == 'fail'
    assert report.introduced == ['UnhandledException@Counter.increment#0']
    assert report.statuses['UnhandledException@Counter.increment#0'] == 'introduced'


def test_unfixable_residue_still_passes(corpus):
    unit, findings, result = _fixed(corpus, 'handled_send.sol')
    report = verify(unit, result.unit, findings)
    assert report.passed
    assert [f.reason.value for f in report.residual] == ['return-value-handled']


def test_contract_slices_have_their_own_verdicts(corpus):
    unit, findings, result = _fixed(corpus, 'mixed.sol')
    verifier = Verifier()
    report = verifier.verify(unit, result.unit, findings)
    wallet = contract_report(report, 'Wallet')
    vault = contract_report(report, 'Vault')
    assert wallet.passed and vault.passed
    assert len(wallet.eliminated) == 3
    assert vault.eliminated == ['LockedEther@Vault#0']


def test_thresholds_apply_to_both_versions(corpus):
    unit, findings, result = _fixed(corpus, 'victim.sol')
    strict = Verifier({VulnerabilityClass.REENTRANCY: 4})
    report = strict.verify(unit, result.unit)
    assert report.original == [] and report.passed
