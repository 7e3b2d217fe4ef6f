"""
Detector registry and the detect -> vote -> filter entry points.
"""
import logging
from typing import Dict, Iterable, List, Optional, Type

from core.analysis.unit_analysis import UnitAnalysis
from core.detectors import input_validation, locked_ether, reentrancy, unhandled_exception
from core.detectors.base import AbstractDetector
from core.detectors.ensemble import ensemble
from core.detectors.post_process import post_process
from models.finding import DetectorVote, Finding, VulnerabilityClass

logger = logging.getLogger(__name__)

ALL_DETECTORS: List[Type[AbstractDetector]] = (
    reentrancy.DETECTORS + input_validation.DETECTORS + locked_ether.DETECTORS + unhandled_exception.DETECTORS
)


def detectors_for(vuln_class: VulnerabilityClass,
                  enabled: Optional[Iterable[Type[AbstractDetector]]] = None) -> List[AbstractDetector]:
    pool = ALL_DETECTORS if enabled is None else list(enabled)
    return [cls() for cls in pool if cls.VULN_CLASS is vuln_class]


def run_detectors(analysis: UnitAnalysis, detectors: List[AbstractDetector]) -> List[DetectorVote]:
    return [vote for detector in detectors for vote in detector.detect(analysis)]


def detect_reentrancy(analysis: UnitAnalysis, enabled=None) -> List[DetectorVote]:
    return run_detectors(analysis, detectors_for(VulnerabilityClass.REENTRANCY, enabled))


def detect_missing_input_validation(analysis: UnitAnalysis, enabled=None) -> List[DetectorVote]:
    return run_detectors(analysis, detectors_for(VulnerabilityClass.MISSING_INPUT_VALIDATION, enabled))


def detect_locked_ether(analysis: UnitAnalysis, enabled=None) -> List[DetectorVote]:
    return run_detectors(analysis, detectors_for(VulnerabilityClass.LOCKED_ETHER, enabled))


def detect_unhandled_exception(analysis: UnitAnalysis, enabled=None) -> List[DetectorVote]:
    return run_detectors(analysis, detectors_for(VulnerabilityClass.UNHANDLED_EXCEPTION, enabled))


def detect_findings(analysis: UnitAnalysis, thresholds: Optional[Dict[VulnerabilityClass, int]] = None,
                    enabled: Optional[Iterable[Type[AbstractDetector]]] = None, file: str = '') -> List[Finding]:
    """All votes, majority voting, then fixability annotation"""
    enabled = list(enabled) if enabled is not None else None
    votes = (detect_unhandled_exception(analysis, enabled) + detect_reentrancy(analysis, enabled)
             + detect_missing_input_validation(analysis, enabled) + detect_locked_ether(analysis, enabled))
    findings = post_process(ensemble(votes, thresholds, file or analysis.unit.path), analysis)
    logger.info(f"{len(findings)} finding(s) from {len(votes)} vote(s) in {analysis.unit.path}")
    return findings


__all__ = [
    'ALL_DETECTORS', 'detect_findings', 'detect_reentrancy', 'detect_missing_input_validation',
    'detect_locked_ether', 'detect_unhandled_exception', 'ensemble', 'post_process',
]
