from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple


class VulnerabilityClass(Enum):
    REENTRANCY = "Reentrancy"
    MISSING_INPUT_VALIDATION = "MissingInputValidation"
    LOCKED_ETHER = "LockedEther"
    UNHANDLED_EXCEPTION = "UnhandledException"

    @property
    def scope(self) -> str:
        return {
            VulnerabilityClass.UNHANDLED_EXCEPTION: 'statement',
            VulnerabilityClass.REENTRANCY: 'function',
            VulnerabilityClass.MISSING_INPUT_VALIDATION: 'function',
            VulnerabilityClass.LOCKED_ETHER: 'contract',
        }[self]

    @property
    def patch_order(self) -> int:
        return PATCH_ORDER.index(self)

    @classmethod
    def parse(cls, value: str) -> "VulnerabilityClass":
        for member in cls:
            if value in (member.value, member.name, member.name.lower(), member.value.lower()):
                return member
        raise ValueError(f"Unknown vulnerability class: {value}")


# order in which fix patterns are applied
PATCH_ORDER = [
    VulnerabilityClass.UNHANDLED_EXCEPTION,
    VulnerabilityClass.REENTRANCY,
    VulnerabilityClass.MISSING_INPUT_VALIDATION,
    VulnerabilityClass.LOCKED_ETHER,
]

DEFAULT_THRESHOLDS = {
    VulnerabilityClass.REENTRANCY: 2,
    VulnerabilityClass.MISSING_INPUT_VALIDATION: 1,
    VulnerabilityClass.LOCKED_ETHER: 2,
    VulnerabilityClass.UNHANDLED_EXCEPTION: 2,
}


class UnfixableReason(Enum):
    EXTERNAL_CALL_CONTROLS_WRITE = "external-call-controls-write"
    TIMESTAMP_DEPENDENT_WRITE = "timestamp-dependent-write"
    NON_ADDRESS_PARAMETER = "non-address-parameter"
    LIBRARY_CONTRACT = "library-contract"
    RETURN_VALUE_HANDLED = "return-value-handled"


@dataclass(frozen=True)
class Site:
    """
    Where a finding lives. ``ordinal`` numbers call sites (or parameters)
    within the function so a site can be recognized after edits move it.
    """
    contract: str
    function: str = ''
    ordinal: int = 0
    node_id: int = -1
    line: int = 0
    start: int = 0
    end: int = 0
    description: str = ''

    @property
    def key(self) -> Tuple[str, str, int]:
        return (self.contract, self.function, self.ordinal)


@dataclass(frozen=True)
class DetectorVote:
    detector: str
    vuln_class: VulnerabilityClass
    site: Site
    note: str = ''

    @property
    def group_key(self):
        return (self.vuln_class, self.site.key)


@dataclass
class Finding:
    vuln_class: VulnerabilityClass
    site: Site
    votes: List[str] = field(default_factory=list)
    fixable: bool = True
    reason: Optional[UnfixableReason] = None
    file: str = ''

    @property
    def scope(self) -> str:
        return self.vuln_class.scope

    @property
    def id(self) -> str:
        if self.site.function:
            return f"{self.vuln_class.value}@{self.site.contract}.{self.site.function}#{self.site.ordinal}"
        return f"{self.vuln_class.value}@{self.site.contract}#{self.site.ordinal}"

    @property
    def match_key(self) -> Tuple[str, str, str, int]:
        return (self.vuln_class.value, self.site.contract, self.site.function, self.site.ordinal)

    def mark_unfixable(self, reason: UnfixableReason):
        self.fixable = False
        self.reason = reason

    def to_dict(self) -> Dict:
        data = {
            'id': self.id,
            'class': self.vuln_class.value,
            'file': self.file,
            'contract': self.site.contract,
            'function': self.site.function,
            'line': self.site.line,
            'span': [self.site.start, self.site.end],
            'site': self.site.description,
            'votes': sorted(self.votes),
            'fixable': self.fixable,
        }
        if self.reason is not None:
            data['reason'] = self.reason.value
        return data
