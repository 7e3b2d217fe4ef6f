"""
Fixability filters applied after voting.

A finding stays fixable unless its site matches one of the patterns the fix
templates cannot handle; the first matching reason wins.
"""
import logging
from typing import List, Optional

from core.analysis.unit_analysis import CallSite, FunctionAnalysis, UnitAnalysis
from core.detectors.base import controlled_by_external_call, timestamp_dependent
from core.detectors.reentrancy import reentrant_writes
from core.detectors.unhandled_exception import result_read_later
from core.solidity.ast_nodes import is_address_type
from models.finding import Finding, UnfixableReason, VulnerabilityClass

logger = logging.getLogger(__name__)


def site_call(fa: FunctionAnalysis, ordinal: int) -> Optional[CallSite]:
    for site in fa.external_calls():
        if site.ordinal == ordinal:
            return site
    return None


def _reentrancy_reason(analysis: UnitAnalysis, finding: Finding) -> Optional[UnfixableReason]:
    fa = analysis.function(finding.site.contract, finding.site.function)
    site = site_call(fa, finding.site.ordinal) if fa else None
    if site is None:
        return None
    writes = reentrant_writes(analysis, fa, site)
    if any(controlled_by_external_call(fa, w) for w in writes):
        return UnfixableReason.EXTERNAL_CALL_CONTROLS_WRITE
    if any(timestamp_dependent(fa, w) for w in writes):
        return UnfixableReason.TIMESTAMP_DEPENDENT_WRITE
    return None


def _input_validation_reason(analysis: UnitAnalysis, finding: Finding) -> Optional[UnfixableReason]:
    fa = analysis.function(finding.site.contract, finding.site.function)
    if fa is None or finding.site.ordinal >= len(fa.function.params):
        return None
    if not is_address_type(fa.function.params[finding.site.ordinal].type_name):
        return UnfixableReason.NON_ADDRESS_PARAMETER
    return None


def _locked_ether_reason(analysis: UnitAnalysis, finding: Finding) -> Optional[UnfixableReason]:
    contract = analysis.contracts.get(finding.site.contract)
    if contract is None:
        return None
    if contract.kind == 'library' or not contract.has_payable_entry:
        return UnfixableReason.LIBRARY_CONTRACT
    return None


def _unhandled_exception_reason(analysis: UnitAnalysis, finding: Finding) -> Optional[UnfixableReason]:
    fa = analysis.function(finding.site.contract, finding.site.function)
    site = site_call(fa, finding.site.ordinal) if fa else None
    if site is not None and result_read_later(fa, site):
        return UnfixableReason.RETURN_VALUE_HANDLED
    return None


REASONS = {
    VulnerabilityClass.REENTRANCY: _reentrancy_reason,
    VulnerabilityClass.MISSING_INPUT_VALIDATION: _input_validation_reason,
    VulnerabilityClass.LOCKED_ETHER: _locked_ether_reason,
    VulnerabilityClass.UNHANDLED_EXCEPTION: _unhandled_exception_reason,
}


def post_process(findings: List[Finding], analysis: UnitAnalysis) -> List[Finding]:
    """Annotate fixability in place and return the same list"""
    for finding in findings:
        try:
            reason = REASONS[finding.vuln_class](analysis, finding)
        except Exception as e:
            logger.error(f"Error post-processing {finding.id}: {str(e)}")
            reason = None
        if reason is not None:
            finding.mark_unfixable(reason)
            logger.info(f"{finding.id} marked unfixable: {reason.value}")
    return findings
