"""
Patch generation: one fix script per fixable finding, class by class.

Every script is built against an analysis of the current version and applied
to a copy of it. The copy is printed and parsed again before it becomes the
current version, so positions are always fresh and each kept step parses.
"""
import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from core.analysis.unit_analysis import UnitAnalysis, analyze_unit
from core.detectors import detect_findings
from core.errors import NotApplicable, ParseFailure, SolmendError, SoliditySyntaxError, UnsupportedConstruct
from core.patcher.edits import apply_script
from core.patcher.gas import estimate_cost
from core.patcher.input_validation import fix_missing_input_validation
from core.patcher.locked_ether import fix_locked_ether
from core.patcher.reentrancy import apply_lock, apply_reorder, plan_reorder
from core.patcher.unhandled_exception import fix_unhandled_exception
from core.solidity.ast_nodes import SourceUnit
from core.solidity.printer import print_unit
from core.utils.cache_manager import AnalysisCache
from models.finding import Finding, VulnerabilityClass
from models.patch import EditScript, PatchOutcome
from models.run import RunConfig

logger = logging.getLogger(__name__)

MAX_STEPS = 200


@dataclass
class PatchSet:
    unit: SourceUnit
    analysis: UnitAnalysis
    scripts: List[EditScript] = field(default_factory=list)
    outcomes: List[PatchOutcome] = field(default_factory=list)
    findings: List[Finding] = field(default_factory=list)  # detected on the final version

    @property
    def applied(self) -> List[EditScript]:
        return [s for s in self.scripts if not s.is_empty]


def class_thresholds(config: Optional[RunConfig]) -> Optional[Dict[VulnerabilityClass, int]]:
    if config is None or not config.thresholds:
        return None
    return {VulnerabilityClass.parse(name): value for name, value in config.threshold_map().items()}


def next_finding(findings: Iterable[Finding], attempted: Set[Tuple]) -> Optional[Finding]:
    """First fixable finding in class order; bottom-up within a class"""
    candidates = [f for f in findings if f.fixable and f.match_key not in attempted]
    if not candidates:
        return None
    return min(candidates, key=lambda f: (f.vuln_class.patch_order, -f.site.start, f.site.key))


def build_script(finding: Finding, analysis: UnitAnalysis, force_lock: bool = False) -> Tuple[EditScript, str]:
    """Script for ``finding`` plus the reason a fallback pattern was chosen, if one was"""
    if finding.vuln_class is VulnerabilityClass.UNHANDLED_EXCEPTION:
        return fix_unhandled_exception(finding, analysis), ''
    if finding.vuln_class is VulnerabilityClass.MISSING_INPUT_VALIDATION:
        return fix_missing_input_validation(finding, analysis), ''
    if finding.vuln_class is VulnerabilityClass.LOCKED_ETHER:
        return fix_locked_ether(finding, analysis), ''
    if force_lock:
        return apply_lock(finding, analysis), 'lock forced by configuration'
    plan = plan_reorder(finding, analysis)
    if plan.blocked:
        reason = f"reorder blocked: {'; '.join(plan.reasons)}"
        logger.info(f"{finding.id}: {reason}, falling back to lock")
        return apply_lock(finding, analysis), reason
    return apply_reorder(plan, finding.id), ''


class PatchGenerator:
    def __init__(self, config: Optional[RunConfig] = None, cache: Optional[AnalysisCache] = None):
        self.config = config
        self.cache = cache if cache is not None else AnalysisCache()
        self.thresholds = class_thresholds(config)
        self.force_lock = config.force_lock if config is not None else False

    def _reanalyze(self, unit: SourceUnit) -> Tuple[SourceUnit, UnitAnalysis]:
        text = print_unit(unit)
        try:
            return self.cache.analyze_text(text, unit.path)
        except (SoliditySyntaxError, UnsupportedConstruct) as e:
            raise ParseFailure(f"patched source does not parse: {str(e)}")

    def generate(self, findings: List[Finding], unit: SourceUnit,
                 analysis: Optional[UnitAnalysis] = None) -> PatchSet:
        path = unit.path
        current_unit, current = unit, analysis or analyze_unit(unit)
        current_findings = list(findings)
        outcomes: Dict[str, PatchOutcome] = {}
        result = PatchSet(unit, current)

        for finding in findings:
            if not finding.fixable:
                outcomes[finding.id] = PatchOutcome(finding.id, finding.site.contract, status='skipped',
                                                    reason=finding.reason.value if finding.reason else None)

        attempted: Set[Tuple] = set()
        for _ in range(MAX_STEPS):
            finding = next_finding(current_findings, attempted)
            if finding is None:
                break
            attempted.add(finding.match_key)
            outcome = PatchOutcome(finding.id, finding.site.contract)
            outcomes[finding.id] = outcome
            try:
                script, fallback = build_script(finding, current, self.force_lock)
                working = apply_script(copy.deepcopy(current_unit), script)
                current_unit, current = self._reanalyze(working)
            except NotApplicable as e:
                outcome.status, outcome.reason = 'skipped', str(e)
                logger.info(f"Skipping {finding.id}: {str(e)}")
                continue
            except SolmendError as e:
                outcome.status, outcome.reason = 'failed', str(e)
                logger.error(f"Error patching {finding.id}: {str(e)}")
                continue
            except Exception as e:
                outcome.status, outcome.reason = 'failed', f"internal error: {str(e)}"
                logger.error(f"Error patching {finding.id}: {str(e)}")
                continue

            gas = estimate_cost(script)
            outcome.pattern, outcome.edits, outcome.gas = script.pattern, len(script), gas.delta_gas_units
            outcome.reason = fallback or None
            result.scripts.append(script)
            current_findings = detect_findings(current, self.thresholds, file=path)

        remaining = {f.match_key for f in current_findings}
        for finding in findings:
            if finding.id not in outcomes:
                status = 'resolved' if finding.match_key not in remaining else 'skipped'
                outcomes[finding.id] = PatchOutcome(finding.id, finding.site.contract, status=status)

        result.unit, result.analysis, result.findings = current_unit, current, current_findings
        order = {f.id: i for i, f in enumerate(findings)}
        result.outcomes = sorted(outcomes.values(), key=lambda o: (order.get(o.finding_id, len(order)), o.finding_id))
        logger.info(f"{len(result.scripts)} script(s) applied to {path}")
        return result


def generate_patches(findings: List[Finding], unit: SourceUnit, analysis: Optional[UnitAnalysis] = None,
                     config: Optional[RunConfig] = None, cache: Optional[AnalysisCache] = None) -> PatchSet:
    """Patched unit and the scripts that produced it, in application order"""
    return PatchGenerator(config, cache).generate(findings, unit, analysis)
