"""
Batch driver: parse, analyze, detect, then patch and verify, per file.

Files are processed on a thread pool and gathered in input order, so the
report does not depend on scheduling. A failure in one file is recorded on
its FileResult and never reaches the others.
"""
import asyncio
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional, Tuple

from core.analysis.graph_dump import write_dumps
from core.analysis.unit_analysis import UnitAnalysis
from core.detectors import detect_findings
from core.errors import MissingModifier, SoliditySyntaxError, UnsupportedConstruct
from core.patcher.diff import changed_lines, unified_diff
from core.patcher.generator import class_thresholds, generate_patches
from core.solidity.ast_nodes import SourceUnit
from core.solidity.printer import print_node, print_unit
from core.utils.audit_logger import AuditLogger
from core.utils.cache_manager import AnalysisCache
from core.verifier import contract_report, verify
from models.finding import Finding
from models.patch import PatchOutcome
from models.run import ContractResult, FileResult, RunConfig
from models.verification import VerificationReport

logger = logging.getLogger(__name__)

FIXED_SUFFIX = '.fixed.sol'

EXIT_OK = 0
EXIT_RESIDUAL = 1
EXIT_INPUT_ERROR = 2


def collect_inputs(inputs: List[str]) -> List[Path]:
    """Files as given; directories expand to their ``.sol`` files, skipping earlier outputs"""
    paths: List[Path] = []
    for name in inputs:
        path = Path(name)
        if path.is_dir():
            paths.extend(p for p in sorted(path.rglob('*.sol')) if not p.name.endswith(FIXED_SUFFIX))
        else:
            paths.append(path)
    return paths


def fixed_path(path: Path, out_dir: Optional[str] = None) -> Path:
    name = path.name[:-4] if path.name.endswith('.sol') else path.name
    directory = Path(out_dir) if out_dir else path.parent
    return directory / f"{name}{FIXED_SUFFIX}"


def error_kind(error: Exception) -> str:
    if isinstance(error, MissingModifier):
        return 'unresolved'
    if isinstance(error, UnsupportedConstruct):
        return 'unsupported'
    return 'internal'


def exit_code(results: List[FileResult]) -> int:
    if any(r.error for r in results):
        return EXIT_INPUT_ERROR
    if any(r.residual for r in results):
        return EXIT_RESIDUAL
    return EXIT_OK


class PipelineRunner:
    def __init__(self, config: RunConfig, audit_logger: Optional[AuditLogger] = None,
                 cache: Optional[AnalysisCache] = None):
        self.config = config
        self.audit_logger = audit_logger or AuditLogger(config.audit_log)
        self.cache = cache if cache is not None else AnalysisCache()
        self.thresholds = class_thresholds(config)

    @contextmanager
    def _timed(self, result: FileResult, phase: str):
        started = time.perf_counter()
        try:
            yield
        finally:
            result.timings[phase] = round((time.perf_counter() - started) * 1000, 3)

    def _detect(self, analysis: UnitAnalysis, path: str) -> List[Finding]:
        return detect_findings(analysis, self.thresholds, file=path)

    def _dump_graphs(self, analysis: UnitAnalysis, path: Path) -> None:
        out_dir = Path(self.config.out_dir) if self.config.out_dir else path.parent
        stem = path.name[:-4] if path.name.endswith('.sol') else path.name
        for fa in analysis.functions.values():
            try:
                write_dumps(fa.cfg, fa.dfg, out_dir, stem)
            except OSError as e:
                logger.error(f"Error writing graphs for {fa.function_id}: {str(e)}")

    def _contracts(self, unit: SourceUnit, findings: List[Finding], outcomes: List[PatchOutcome],
                   report: Optional[VerificationReport], patched: Optional[SourceUnit]) -> List[ContractResult]:
        results = []
        patched_contracts = {c.name: c for c in patched.contracts} if patched is not None else {}
        for contract in unit.contracts:
            result = ContractResult(
                contract=contract.name,
                file=unit.path,
                findings=[f for f in findings if f.site.contract == contract.name],
                patches=[o for o in outcomes if o.contract == contract.name],
            )
            if report is not None:
                result.verification = contract_report(report, contract.name)
            if contract.name in patched_contracts:
                diff = unified_diff(print_node(contract), print_node(patched_contracts[contract.name]))
                result.changed_lines = changed_lines(diff)
            results.append(result)
        return results

    def _fail(self, result: FileResult, kind: str, error: Exception) -> FileResult:
        result.error, result.error_kind = str(error), kind
        logger.error(f"Error processing {result.path}: {str(error)}")
        self.audit_logger.log_parsed(result.path, 0, success=False, error=str(error))
        return result

    def process_file(self, path: Path, patched_input: Optional[Path] = None) -> FileResult:
        result = FileResult(str(path))
        try:
            text = path.read_text(encoding='utf-8')
        except (OSError, UnicodeDecodeError) as e:
            return self._fail(result, 'io', e)

        try:
            with self._timed(result, 'parse'):
                unit, analysis = self.cache.analyze_text(text, str(path))
        except SoliditySyntaxError as e:
            return self._fail(result, 'syntax', e)
        except UnsupportedConstruct as e:
            return self._fail(result, 'unsupported', e)
        except Exception as e:
            return self._fail(result, 'internal', e)
        if analysis.errors:
            return self._fail(result, error_kind(analysis.errors[0]), analysis.errors[0])
        self.audit_logger.log_parsed(result.path, len(unit.contracts))

        try:
            return self._process_unit(result, path, unit, analysis, patched_input)
        except Exception as e:
            return self._fail(result, 'internal', e)

    def _process_unit(self, result: FileResult, path: Path, unit: SourceUnit, analysis: UnitAnalysis,
                      patched_input: Optional[Path]) -> FileResult:
        if self.config.dump_graphs:
            self._dump_graphs(analysis, path)

        with self._timed(result, 'detection'):
            findings = self._detect(analysis, result.path)
        self.audit_logger.log_findings(result.path, findings)

        outcomes: List[PatchOutcome] = []
        report: Optional[VerificationReport] = None
        patched_unit: Optional[SourceUnit] = None

        if self.config.mode == 'fix':
            with self._timed(result, 'patch'):
                patch_set = generate_patches(findings, unit, analysis, self.config, self.cache)
            outcomes, patched_unit = patch_set.outcomes, patch_set.unit
            for outcome in outcomes:
                self.audit_logger.log_patch(result.path, outcome)
            self._write_outputs(result, path, unit, patched_unit)
            with self._timed(result, 'validation'):
                report = verify(unit, patched_unit, findings, self.thresholds, self.cache)
        elif self.config.mode == 'verify-only' and patched_input is not None:
            try:
                patched_text = patched_input.read_text(encoding='utf-8')
            except (OSError, UnicodeDecodeError) as e:
                return self._fail(result, 'io', e)
            with self._timed(result, 'validation'):
                report = verify(unit, patched_text, findings, self.thresholds, self.cache)

        if report is not None:
            result.verdict = report.verdict
            self.audit_logger.log_verdict(result.path, report)
        result.contracts = self._contracts(unit, findings, outcomes, report, patched_unit)
        for contract in result.contracts:
            logger.info(f"{contract.file} {contract.contract}: {len(contract.findings)} finding(s), "
                        f"{contract.fixed} fixed, {contract.failed} failed, {result.timings}")
        return result

    def _write_outputs(self, result: FileResult, path: Path, unit: SourceUnit, patched: SourceUnit) -> None:
        target = fixed_path(path, self.config.out_dir)
        before, after = print_unit(unit), print_unit(patched)
        diff = unified_diff(before, after, path.name, target.name)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(after, encoding='utf-8')
            diff_path = target.with_name(target.name + '.diff')
            diff_path.write_text(diff, encoding='utf-8')
        except OSError as e:
            logger.error(f"Error writing patched output for {path}: {str(e)}")
            return
        result.patched_path, result.diff_path = str(target), str(diff_path)
        result.changed_lines = changed_lines(diff)

    def jobs(self) -> List[Tuple[Path, Optional[Path]]]:
        paths = collect_inputs(list(self.config.inputs))
        if self.config.mode != 'verify-only':
            return [(p, None) for p in paths]
        # verify-only pairs explicit files positionally
        return [(Path(o), Path(p)) for o, p in zip(self.config.inputs, self.config.patched)]

    async def run_async(self) -> List[FileResult]:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.config.jobs) as executor:
            tasks = [loop.run_in_executor(executor, self.process_file, path, patched)
                     for path, patched in self.jobs()]
            return list(await asyncio.gather(*tasks))

    def run(self) -> Tuple[int, List[FileResult]]:
        results = asyncio.run(self.run_async())
        code = exit_code(results)
        logger.info(f"Processed {len(results)} file(s), exit code {code}")
        return code, results


def run(config: RunConfig, audit_logger: Optional[AuditLogger] = None) -> Tuple[int, List[FileResult]]:
    return PipelineRunner(config, audit_logger).run()


def process_file(path: str, config: Optional[RunConfig] = None) -> FileResult:
    """One file through the pipeline, outside a batch"""
    config = config or RunConfig(inputs=(path,), audit_log='off')
    return PipelineRunner(config).process_file(Path(path))


