from dataclasses import dataclass, field
from typing import Dict, List, Optional

from models.finding import Finding


@dataclass
class VerificationReport:
    original: List[Finding] = field(default_factory=list)
    residual: List[Finding] = field(default_factory=list)
    eliminated: List[str] = field(default_factory=list)
    introduced: List[str] = field(default_factory=list)
    verdict: str = 'fail'  # pass | fail
    statuses: Dict[str, str] = field(default_factory=dict)
    reason: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.verdict == 'pass'

    def to_dict(self) -> Dict:
        data = {
            'verdict': self.verdict,
            'eliminated': sorted(self.eliminated),
            'introduced': sorted(self.introduced),
            'residual': [f.to_dict() for f in self.residual],
            'statuses': dict(sorted(self.statuses.items())),
        }
        if self.reason:
            data['reason'] = self.reason
        return data
