import json
import re
from pathlib import Path

from core.pipeline import render, report_document, to_json, to_text
from core.pipeline.runner import PipelineRunner, collect_inputs, exit_code, fixed_path, process_file
from core.utils.cache_manager import AnalysisCache
from main import main


def _run(quiet_config, **overrides):
    return PipelineRunner(quiet_config(**overrides)).run()


def test_fix_run_over_the_corpus(workspace, quiet_config, expected):
    code, results = _run(quiet_config, inputs=(str(workspace),))
    assert code == 1
    by_name = {Path(r.path).name: r for r in results}
    assert set(by_name) == set(expected)
    for name, result in by_name.items():
        assert result.error is None, name
        assert exit_code([result]) == expected[name]['exit'], name
        assert result.verdict == expected[name]['verdict'], name


def test_fix_writes_patched_file_and_diff(workspace, quiet_config):
    victim = workspace / 'victim.sol'
    code, [result] = _run(quiet_config, inputs=(str(victim),))
    assert code == 0
    patched = workspace / 'victim.fixed.sol'
    assert result.patched_path == str(patched)
    assert 'userBalances_temp' in patched.read_text(encoding='utf-8')
    diff = (workspace / 'victim.fixed.sol.diff').read_text(encoding='utf-8')
    assert diff.startswith('--- victim.sol\n+++ victim.fixed.sol\n')
    assert result.changed_lines > 0
    [contract] = result.contracts
    assert contract.changed_lines == result.changed_lines


def test_out_dir_receives_outputs(workspace, quiet_config, tmp_path):
    out = tmp_path / 'out'
    _run(quiet_config, inputs=(str(workspace / 'unchecked_send.sol'),), out_dir=str(out))
    assert (out / 'unchecked_send.fixed.sol').exists()
    assert fixed_path(workspace / 'a.sol', str(out)) == out / 'a.fixed.sol'


def test_fixed_outputs_are_not_inputs(workspace, quiet_config):
    _run(quiet_config, inputs=(str(workspace),))
    names = [p.name for p in collect_inputs([str(workspace)])]
    assert not any(name.endswith('.fixed.sol') for name in names)


def test_detect_only_on_clean_contract(workspace, quiet_config):
    code, results = _run(quiet_config, inputs=(str(workspace / 'clean.sol'),), mode='detect-only')
    assert code == 0
    document = report_document(results)
    [contract] = document['contracts']
    assert contract['findings'] == [] and contract['patches'] == []
    assert 'verification' not in contract
    assert not (workspace / 'clean.fixed.sol').exists()


def test_detect_only_with_findings_is_residual(workspace, quiet_config):
    code, _ = _run(quiet_config, inputs=(str(workspace / 'victim.sol'),), mode='detect-only')
    assert code == 1


def test_missing_and_broken_inputs(workspace, quiet_config):
    broken = workspace / 'broken.sol'
    broken.write_text('contract Broken {\n    uint x\n}\n', encoding='utf-8')
    unsupported = workspace / 'asm.sol'
    unsupported.write_text('contract A { function f() public { assembly { } } }\n', encoding='utf-8')
    inputs = (str(workspace / 'missing.sol'), str(broken), str(unsupported), str(workspace / 'victim.sol'))
    code, results = _run(quiet_config, inputs=inputs)
    assert code == 2
    assert [r.error_kind for r in results] == ['io', 'syntax', 'unsupported', None]
    assert results[3].verdict == 'pass'
    document = report_document(results)
    assert [e['kind'] for e in document['errors']] == ['unsupported', 'syntax', 'io']


def test_json_report_is_deterministic(workspace, quiet_config):
    _, first = _run(quiet_config, inputs=(str(workspace),))
    _, second = _run(quiet_config, inputs=(str(workspace),), jobs=4)
    one, two = report_document(first), report_document(second)
    one.pop('timings')
    two.pop('timings')
    assert json.dumps(one, sort_keys=True) == json.dumps(two, sort_keys=True)


def test_empty_run_reports_no_contracts(quiet_config):
    code, results = _run(quiet_config)
    assert code == 0
    assert json.loads(to_json(results)) == {'contracts': []}
    assert render(results) == to_json(results)


def test_text_report_subtotals_add_up(workspace, quiet_config, expected):
    _, results = _run(quiet_config, inputs=(str(workspace),), mode='detect-only')
    text = to_text(results)
    section = text.split('Findings by class:\n', 1)[1]
    counts = dict(re.findall(r'^\s+(\w+)\s+(\d+)$', section, re.MULTILINE))
    total = int(counts.pop('Total'))
    assert sum(int(v) for v in counts.values()) == total
    assert total == sum(sum(e['findings'].values()) for e in expected.values())
    assert int(counts['Reentrancy']) == sum(e['findings'].get('Reentrancy', 0) for e in expected.values())


def test_graph_dumps_are_written(workspace, quiet_config, tmp_path):
    out = tmp_path / 'graphs'
    _run(quiet_config, inputs=(str(workspace / 'victim.sol'),), mode='detect-only', dump_graphs=True,
         out_dir=str(out))
    assert (out / 'victim.Victim.refund.cfg.txt').exists()
    assert (out / 'victim.Victim.deposit.dfg.txt').exists()


def test_process_single_file(workspace):
    result = process_file(str(workspace / 'two_sends.sol'))
    assert result.verdict == 'pass'
    [contract] = result.contracts
    assert [p.pattern for p in contract.patches] == ['require', 'require']


def test_main_fix_then_verify(workspace, capsys):
    victim = str(workspace / 'victim.sol')
    assert main([victim, '--audit-log', 'off']) == 0
    document = json.loads(capsys.readouterr().out)
    assert [c['contract'] for c in document['contracts']] == ['Victim']
    assert document['contracts'][0]['verification']['verdict'] == 'pass'

    patched = str(workspace / 'victim.fixed.sol')
    assert main([victim, '--mode', 'verify-only', '--patched', patched, '--audit-log', 'off']) == 0
    verified = json.loads(capsys.readouterr().out)
    assert verified['contracts'][0]['verification']['eliminated'] == ['Reentrancy@Victim.refund#0']
    assert verified['contracts'][0]['patches'] == []


def test_main_verify_only_against_the_original_fails(workspace, capsys):
    victim = str(workspace / 'victim.sol')
    assert main([victim, '--mode', 'verify-only', '--patched', victim, '--audit-log', 'off']) == 1
    document = json.loads(capsys.readouterr().out)
    assert document['contracts'][0]['verification']['verdict'] == 'fail'


def test_main_rejects_bad_configuration(workspace, capsys):
    victim = str(workspace / 'victim.sol')
    assert main([victim, '--jobs', '0', '--audit-log', 'off']) == 2
    assert main([victim, '--mode', 'verify-only', '--audit-log', 'off']) == 2
    assert main([victim, '--threshold-reentrancy', '0', '--audit-log', 'off']) == 2
    assert capsys.readouterr().out == ''


def test_main_text_format_and_thresholds(workspace, capsys):
    victim = str(workspace / 'victim.sol')
    code = main([victim, '--format', 'text', '--threshold-reentrancy', '4', '--audit-log', 'off'])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith('file')
    assert re.search(r'^\s+Total\s+0$', out, re.MULTILINE)


def test_undecodable_file_is_an_input_error(workspace, quiet_config):
    (workspace / 'garbage.sol').write_bytes(b'\xff\xfe contract')
    code, results = _run(quiet_config, inputs=(str(workspace),), mode='detect-only')
    assert code == 2
    by_name = {Path(r.path).name: r for r in results}
    assert by_name['garbage.sol'].error_kind == 'io'
    assert by_name['victim.sol'].error is None
    assert len(by_name['victim.sol'].contracts) == 1


def test_undecodable_patched_file_in_verify_only(workspace, quiet_config):
    patched = workspace / 'victim.patched'
    patched.write_bytes(b'\xff\xfe')
    code, [result] = _run(quiet_config, inputs=(str(workspace / 'victim.sol'),), mode='verify-only',
                          patched=(str(patched),))
    assert code == 2
    assert result.error_kind == 'io'


def test_unresolved_modifier_is_reported(workspace, capsys):
    victim = workspace / 'victim.sol'
    victim.write_text(victim.read_text(encoding='utf-8').replace(
        'function refund() public {', 'function refund() public onlyHuman {'), encoding='utf-8')
    assert main([str(victim), '--mode', 'detect-only', '--audit-log', 'off']) == 2
    document = json.loads(capsys.readouterr().out)
    [error] = document['errors']
    assert error['kind'] == 'unresolved'
    assert 'onlyHuman' in error['message']


def test_runner_shares_its_cache(workspace, quiet_config):
    cache = AnalysisCache()
    runner = PipelineRunner(quiet_config(inputs=(str(workspace / 'victim.sol'),)), cache=cache)
    code, _ = runner.run()
    assert code == 0
    # original and patched text are analyzed once each; verification reuses the patched analysis
    assert cache.misses == 2
    assert cache.hits >= 1
