from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from models.finding import Finding
from models.patch import PatchOutcome
from models.verification import VerificationReport

MODES = ('detect-only', 'fix', 'verify-only')
REENTRANCY_STRATEGIES = ('prefer-reorder', 'force-lock')
REPORT_FORMATS = ('json', 'text')


@dataclass(frozen=True)
class RunConfig:
    inputs: Tuple[str, ...] = ()
    mode: str = 'fix'
    reentrancy: str = 'prefer-reorder'
    thresholds: Tuple[Tuple[str, int], ...] = ()
    out_dir: Optional[str] = None
    report_format: str = 'json'
    dump_graphs: bool = False
    jobs: int = 1
    patched: Tuple[str, ...] = ()
    audit_log: Optional[str] = None

    @property
    def force_lock(self) -> bool:
        return self.reentrancy == 'force-lock'

    def threshold_map(self) -> Dict[str, int]:
        return dict(self.thresholds)


@dataclass
class ContractResult:
    contract: str
    file: str
    findings: List[Finding] = field(default_factory=list)
    patches: List[PatchOutcome] = field(default_factory=list)
    verification: Optional[VerificationReport] = None
    changed_lines: Optional[int] = None

    @property
    def fixed(self) -> int:
        return sum(1 for p in self.patches if p.status == 'applied')

    @property
    def failed(self) -> int:
        return sum(1 for p in self.patches if p.status == 'failed')

    def to_dict(self) -> Dict:
        data = {
            'contract': self.contract,
            'file': self.file,
            'findings': [f.to_dict() for f in self.findings],
            'patches': [p.to_dict() for p in self.patches],
        }
        if self.changed_lines is not None:
            data['changed_lines'] = self.changed_lines
        if self.verification is not None:
            data['verification'] = self.verification.to_dict()
        return data


@dataclass
class FileResult:
    path: str
    contracts: List[ContractResult] = field(default_factory=list)
    error: Optional[str] = None
    error_kind: Optional[str] = None  # syntax | unsupported | unresolved | io | internal
    patched_path: Optional[str] = None
    diff_path: Optional[str] = None
    changed_lines: int = 0
    timings: Dict[str, float] = field(default_factory=dict)
    verdict: Optional[str] = None

    @property
    def residual(self) -> bool:
        """True when something was found and not fixed and verified"""
        for contract in self.contracts:
            if contract.verification is not None:
                if contract.verification.residual:
                    return True
            elif contract.findings:
                return True
        return self.verdict == 'fail'
