import json
import os
import uuid
import logging
import threading
from datetime import datetime
from typing import Any, Dict, Optional

from core.utils.config import FixConfig

logger = logging.getLogger(__name__)

DISABLED = ('off', 'none', 'false', '0')


class AuditLogger:
    """
    Append-only JSON-lines audit trail of pipeline events.

    One object per event (file parsed, findings detected, script applied or
    failed, verification verdict). Writes go through a single lock; failures
    are logged and swallowed so auditing never breaks a run.
    """

    def __init__(self, target: Optional[str] = None):
        target = target if target is not None else FixConfig.AUDIT_LOG
        self.enabled = not (target and target.lower() in DISABLED)
        self.target = target
        self._lock = threading.Lock()
        if self.enabled:
            self._ensure_log_directory()

    @property
    def log_file(self) -> str:
        if self.target:
            return self.target
        log_dir = os.path.join(os.getcwd(), 'logs', 'audit')
        return os.path.join(log_dir, f"{datetime.now().strftime('%Y-%m-%d')}_audit.log")

    def _ensure_log_directory(self):
        try:
            directory = os.path.dirname(self.log_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
        except Exception as e:
            logger.error(f"Error creating audit log directory: {str(e)}")

    def log_event(self, action: str, resource: Optional[str] = None, details: Optional[Dict[str, Any]] = None,
                  severity: str = 'info', success: bool = True) -> Optional[str]:
        """Record one event; returns its id, or None when auditing is off"""
        if not self.enabled:
            return None
        if severity not in ('info', 'warning', 'error', 'critical'):
            severity = 'info'
        log_entry = {
            'id': str(uuid.uuid4()),
            'timestamp': datetime.now().isoformat(),
            'action': action,
            'resource': resource,
            'details': details or {},
            'severity': severity,
            'success': success,
        }
        self._save_to_file(log_entry)
        return log_entry['id']

    def _save_to_file(self, log_entry: Dict[str, Any]):
        try:
            with self._lock:
                with open(self.log_file, 'a', encoding='utf-8') as f:
                    json.dump(log_entry, f, sort_keys=True)
                    f.write('\n')
        except Exception as e:
            logger.error(f"Error saving audit entry: {str(e)}")

    def log_parsed(self, path: str, contracts: int, success: bool = True, error: Optional[str] = None):
        details = {'contracts': contracts}
        if error:
            details['error'] = error
        return self.log_event('file_parsed', path, details, 'info' if success else 'error', success)

    def log_findings(self, path: str, findings: list):
        return self.log_event('findings_detected', path, {
            'count': len(findings),
            'findings': [f.id for f in findings],
            'unfixable': [f.id for f in findings if not f.fixable],
        })

    def log_patch(self, path: str, outcome) -> Optional[str]:
        """``outcome`` is a PatchOutcome"""
        success = outcome.status != 'failed'
        return self.log_event(f"script_{outcome.status}", path, outcome.to_dict(),
                              'info' if success else 'warning', success)

    def log_verdict(self, path: str, report) -> Optional[str]:
        return self.log_event('verification', path, {
            'verdict': report.verdict,
            'eliminated': list(report.eliminated),
            'introduced': list(report.introduced),
        }, 'info' if report.passed else 'warning', report.passed)
