import json

from core.utils.audit_logger import AuditLogger
from core.utils.config import FixConfig
from models.patch import PatchOutcome
from models.verification import VerificationReport


def _entries(path):
    return [json.loads(line) for line in path.read_text(encoding='utf-8').splitlines()]


def test_events_are_json_lines(tmp_path):
    target = tmp_path / 'audit' / 'run.log'
    audit = AuditLogger(str(target))
    audit.log_parsed('a.sol', 2)
    audit.log_patch('a.sol', PatchOutcome('Reentrancy@A.f#0', 'A', 'reorder', 3, 5))
    audit.log_verdict('a.sol', VerificationReport(eliminated=['Reentrancy@A.f#0'], verdict='pass'))
    entries = _entries(target)
    assert [e['action'] for e in entries] == ['file_parsed', 'script_applied', 'verification']
    assert entries[1]['details']['gas_estimate'] == 5
    assert entries[2]['details']['eliminated'] == ['Reentrancy@A.f#0']
    assert all(e['success'] for e in entries)


def test_failures_are_warnings(tmp_path):
    target = tmp_path / 'run.log'
    audit = AuditLogger(str(target))
    audit.log_patch('a.sol', PatchOutcome('Reentrancy@A.f#0', 'A', status='failed', reason='internal error: x'))
    audit.log_parsed('b.sol', 0, success=False, error='unexpected token')
    failed, unparsed = _entries(target)
    assert (failed['severity'], failed['success']) == ('warning', False)
    assert (unparsed['severity'], unparsed['details']['error']) == ('error', 'unexpected token')


def test_off_disables_auditing(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    audit = AuditLogger('off')
    assert audit.log_event('file_parsed', 'a.sol') is None
    assert not (tmp_path / 'logs').exists()


def test_environment_selects_the_target(tmp_path, monkeypatch):
    target = tmp_path / 'env.log'
    monkeypatch.setenv('SOLMEND_AUDIT_LOG', str(target))
    FixConfig.refresh()
    try:
        assert AuditLogger().log_event('file_parsed', 'a.sol') is not None
    finally:
        monkeypatch.undo()
        FixConfig.refresh()
    assert target.exists()


def test_unwritable_target_is_swallowed(tmp_path):
    audit = AuditLogger(str(tmp_path))
    assert audit.log_event('file_parsed', 'a.sol') is not None
