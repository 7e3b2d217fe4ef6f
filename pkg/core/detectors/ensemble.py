"""Majority voting over detector strategies"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Optional

from models.finding import DEFAULT_THRESHOLDS, DetectorVote, Finding, VulnerabilityClass

logger = logging.getLogger(__name__)


def ensemble(votes: Iterable[DetectorVote], thresholds: Optional[Dict[VulnerabilityClass, int]] = None,
             file: str = '') -> List[Finding]:
    """
    Group votes by (class, site) and keep the groups that reach their class
    threshold. Each detector counts once per group.
    """
    limits = dict(DEFAULT_THRESHOLDS)
    limits.update(thresholds or {})

    grouped: Dict[tuple, Dict[str, DetectorVote]] = defaultdict(dict)
    for vote in votes:
        grouped[vote.group_key].setdefault(vote.detector, vote)

    findings = []
    for (vuln_class, _), by_detector in grouped.items():
        if len(by_detector) < limits[vuln_class]:
            logger.debug(f"Dropping {vuln_class.value} candidate with votes {sorted(by_detector)}")
            continue
        site = next(iter(by_detector.values())).site
        findings.append(Finding(vuln_class, site, sorted(by_detector), file=file))
    findings.sort(key=lambda f: (f.file, f.site.start, f.site.line, f.vuln_class.value, f.site.key))
    return findings
