"""
Re-detection on the patched unit.

Findings are matched across versions by class, contract, function and
ordinal, never by byte offsets, so canonical printing and inserted lines do
not change identity. The patched unit goes through the same detectors,
thresholds and fixability filters as the original.
"""
import logging
from typing import Dict, List, Optional, Union

from core.analysis.unit_analysis import UnitAnalysis
from core.detectors import detect_findings
from core.errors import SoliditySyntaxError, UnsupportedConstruct
from core.solidity.ast_nodes import SourceUnit
from core.solidity.printer import print_unit
from core.utils.cache_manager import AnalysisCache
from models.finding import Finding, VulnerabilityClass
from models.verification import VerificationReport

logger = logging.getLogger(__name__)


def _verdict(originals: List[Finding], eliminated: set, introduced: set) -> str:
    fixable = {f.id for f in originals if f.fixable}
    return 'pass' if fixable <= eliminated and not introduced else 'fail'


class Verifier:
    def __init__(self, thresholds: Optional[Dict[VulnerabilityClass, int]] = None,
                 cache: Optional[AnalysisCache] = None):
        self.thresholds = thresholds
        self.cache = cache if cache is not None else AnalysisCache()

    def findings_for(self, text: str, path: str) -> List[Finding]:
        _, analysis = self.cache.analyze_text(text, path)
        return self.detect(analysis, path)

    def detect(self, analysis: UnitAnalysis, path: str = '') -> List[Finding]:
        return detect_findings(analysis, self.thresholds, file=path or analysis.unit.path)

    def verify(self, original: SourceUnit, patched: Union[SourceUnit, str],
               original_findings: Optional[List[Finding]] = None) -> VerificationReport:
        path = original.path
        if original_findings is None:
            original_findings = self.findings_for(print_unit(original), path)
        report = VerificationReport(original=list(original_findings))

        text = print_unit(patched) if isinstance(patched, SourceUnit) else patched
        try:
            current = self.findings_for(text, path)
        except (SoliditySyntaxError, UnsupportedConstruct) as e:
            logger.error(f"Error verifying {path}: {str(e)}")
            report.residual = list(original_findings)
            report.statuses = {f.id: 'residual' for f in original_findings}
            report.reason = f"parse-failure: {str(e)}"
            return report

        before = {f.match_key for f in original_findings}
        after = {f.match_key: f for f in current}
        eliminated = {f.id for f in original_findings if f.match_key not in after}
        introduced = [f for f in current if f.match_key not in before]

        report.eliminated = sorted(eliminated)
        report.introduced = sorted(f.id for f in introduced)
        report.residual = [after[f.match_key] for f in original_findings if f.id not in eliminated] + introduced
        for finding in original_findings:
            report.statuses[finding.id] = 'eliminated' if finding.id in eliminated else 'residual'
        for finding in introduced:
            report.statuses[finding.id] = 'introduced'
        report.verdict = _verdict(original_findings, eliminated, set(report.introduced))
        logger.info(f"Verified {path}: {report.verdict}, {len(eliminated)} eliminated, "
                    f"{len(introduced)} introduced")
        return report


def verify(original: SourceUnit, patched: Union[SourceUnit, str], original_findings: Optional[List[Finding]] = None,
           thresholds: Optional[Dict[VulnerabilityClass, int]] = None,
           cache: Optional[AnalysisCache] = None) -> VerificationReport:
    return Verifier(thresholds, cache).verify(original, patched, original_findings)


def contract_report(report: VerificationReport, contract: str) -> VerificationReport:
    """The part of ``report`` concerning one contract, with its own verdict"""
    originals = [f for f in report.original if f.site.contract == contract]
    residual = [f for f in report.residual if f.site.contract == contract]
    ids = {f.id for f in originals} | {f.id for f in residual}
    eliminated = {i for i in report.eliminated if i in ids}
    introduced = {i for i in report.introduced if i in ids}
    sliced = VerificationReport(
        original=originals,
        residual=residual,
        eliminated=sorted(eliminated),
        introduced=sorted(introduced),
        statuses={k: v for k, v in report.statuses.items() if k in ids},
        reason=report.reason,
    )
    sliced.verdict = 'fail' if report.reason else _verdict(originals, eliminated, introduced)
    return sliced
