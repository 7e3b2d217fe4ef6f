import pytest

from conftest import analyze_source, corpus_files
from core.analysis.dependences import classify_dependences
from core.detectors import detect_findings
from core.detectors.base import storage_writes_after
from core.patcher import changed_lines, generate_patches, unified_diff
from core.patcher.generator import next_finding
from core.solidity.printer import print_node, print_unit
from core.utils.cache_manager import AnalysisCache


def _patch(corpus, name, config=None):
    unit, analysis = corpus(name)
    findings = detect_findings(analysis)
    return unit, findings, generate_patches(findings, unit, analysis, config=config)


def _patchable(expected):
    return [name for name in corpus_files() if expected[name]['patterns']]


def _unfixable(expected):
    return [name for name in corpus_files() if 'unfixable' in expected[name]]


def test_patterns_per_fixture(corpus, expected):
    for name in corpus_files():
        _, _, result = _patch(corpus, name)
        assert sorted(s.pattern for s in result.applied) == expected[name]['patterns'], name


def test_mixed_file_gets_one_script_per_class(corpus):
    _, findings, result = _patch(corpus, 'mixed.sol')
    assert len(result.scripts) == 4
    # class order, whatever the source order
    assert [s.pattern for s in result.scripts] == ['require', 'reorder', 'validate', 'withdraw']
    assert [o.status for o in result.outcomes] == ['applied'] * 4
    assert [o.finding_id for o in result.outcomes] == [f.id for f in findings]
    assert result.findings == []


def test_patching_is_idempotent(corpus, expected):
    for name in _patchable(expected):
        _, _, result = _patch(corpus, name)
        text = print_unit(result.unit)
        unit, analysis = analyze_source(text, name)
        findings = detect_findings(analysis)
        assert not any(f.fixable for f in findings), name
        again = generate_patches(findings, unit, analysis)
        assert again.scripts == [], name
        assert print_unit(again.unit) == text, name


def test_unfixable_findings_leave_source_untouched(corpus, expected):
    for name in _unfixable(expected):
        unit, _, result = _patch(corpus, name)
        assert result.scripts == [], name
        assert print_unit(result.unit) == print_unit(unit), name
        assert [(o.status, o.reason) for o in result.outcomes] == [('skipped', expected[name]['unfixable'])]


def _labelled_dependences(fa, skip):
    labels = {fa.cfg.block_of(s.node_id): ' '.join(print_node(s).split()) for s in fa.function.body.statements}
    found = set()
    for d in classify_dependences(fa.dfg):
        first, second = labels.get(d.from_stmt), labels.get(d.to_stmt)
        if first is None or second is None or first in skip or second in skip:
            continue
        found.add((first, second, d.kind.value, d.location.name))
    return found


@pytest.mark.parametrize('name, contract, function', [
    ('victim.sol', 'Victim', 'refund'),
    ('vesting.sol', 'TokenVesting', 'addVestingSchedule'),
])
def test_reorder_preserves_other_dependences(corpus, name, contract, function):
    _, analysis = corpus(name)
    _, _, result = _patch(corpus, name)
    before = analysis.function(contract, function)
    after = result.analysis.function(contract, function)
    call_before = ' '.join(print_node(before.cfg.blocks[before.external_calls()[0].block_id].node).split())
    call_after = ' '.join(print_node(after.cfg.blocks[after.external_calls()[0].block_id].node).split())
    temporaries = {' '.join(print_node(s).split()) for s in after.function.body.statements
                   if print_node(s).startswith('var ')}
    skip = {call_before, call_after} | temporaries
    assert temporaries
    assert _labelled_dependences(before, skip) == _labelled_dependences(after, skip)


@pytest.mark.parametrize('name, contract, function', [
    ('victim.sol', 'Victim', 'refund'),
    ('vesting.sol', 'TokenVesting', 'addVestingSchedule'),
    ('mixed.sol', 'Wallet', 'withdraw'),
])
def test_no_storage_write_follows_the_call(corpus, name, contract, function):
    _, _, result = _patch(corpus, name)
    fa = result.analysis.function(contract, function)
    site = fa.external_calls()[0]
    assert storage_writes_after(fa, site.block_id, include_self=False) == []


def test_patch_footprint_stays_small(corpus, expected):
    sizes = []
    for name in _patchable(expected):
        unit, _, result = _patch(corpus, name)
        sizes.append(changed_lines(unified_diff(print_unit(unit), print_unit(result.unit))))
    assert all(size > 0 for size in sizes)
    assert sum(sizes) / len(sizes) < 20


def test_send_fixes_are_bottom_up(corpus):
    _, findings, result = _patch(corpus, 'two_sends.sol')
    assert [s.finding_id for s in result.scripts] == [findings[1].id, findings[0].id]
    assert 'require(msg.sender.send(half)); require(partner.send(half));' in ' '.join(
        print_unit(result.unit).split())


def test_next_finding_follows_class_order(corpus):
    _, analysis = corpus('mixed.sol')
    findings = detect_findings(analysis)
    attempted = set()
    order = []
    while (finding := next_finding(findings, attempted)) is not None:
        attempted.add(finding.match_key)
        order.append(finding.vuln_class.value)
    assert order == ['UnhandledException', 'Reentrancy', 'MissingInputValidation', 'LockedEther']


def test_forced_lock_outcome(corpus, quiet_config):
    _, _, result = _patch(corpus, 'victim.sol', config=quiet_config(reentrancy='force-lock'))
    [outcome] = result.outcomes
    assert (outcome.pattern, outcome.gas, outcome.reason) == ('lock', 25000, 'lock forced by configuration')


def test_reorder_outcome_reports_gas(corpus):
    _, _, result = _patch(corpus, 'victim.sol')
    [outcome] = result.outcomes
    assert outcome.to_dict() == {
        'finding': 'Reentrancy@Victim.refund#0', 'pattern': 'reorder', 'edits': 3,
        'gas_estimate': 5, 'status': 'applied',
    }


def test_lock_fallback_is_explained(corpus):
    _, _, result = _patch(corpus, 'branch_call_lock.sol')
    [outcome] = result.outcomes
    assert outcome.pattern == 'lock'
    assert outcome.reason.startswith('reorder blocked: storage write at statement')


def test_generator_reuses_cached_analyses(corpus):
    unit, analysis = corpus('two_sends.sol')
    cache = AnalysisCache()
    generate_patches(detect_findings(analysis), unit, analysis, cache=cache)
    assert cache.misses == 2
    assert len(cache) == 2
