import json
import logging
from collections import Counter
from typing import Dict, List

from models.finding import VulnerabilityClass
from models.run import FileResult

logger = logging.getLogger(__name__)

PHASES = ('parse', 'detection', 'patch', 'validation')


def report_document(results: List[FileResult]) -> Dict:
    """
    The JSON report as a dict. Only ``timings`` varies between identical
    runs; ``errors`` and ``timings`` are present only when non-empty.
    """
    contracts = [c.to_dict() for r in results for c in r.contracts]
    contracts.sort(key=lambda c: (c['file'], c['contract']))
    document: Dict = {'contracts': contracts}

    errors = [{'file': r.path, 'kind': r.error_kind, 'message': r.error} for r in results if r.error]
    if errors:
        document['errors'] = sorted(errors, key=lambda e: e['file'])

    timings = {r.path: dict(r.timings) for r in results if r.timings}
    if timings:
        document['timings'] = timings
    return document


def to_json(results: List[FileResult]) -> str:
    return json.dumps(report_document(results), indent=2, sort_keys=True) + '\n'


def class_totals(results: List[FileResult]) -> Counter:
    counts: Counter = Counter()
    for result in results:
        for contract in result.contracts:
            counts.update(f.vuln_class.value for f in contract.findings)
    return counts


def to_text(results: List[FileResult]) -> str:
    """Summary table per contract, then per-class subtotals"""
    header = f"{'file':<32} {'contract':<20} {'findings':>8} {'fixed':>6} {'failed':>6} {'verdict':>8}  " \
             + ' '.join(f"{p + '_ms':>14}" for p in PHASES)
    lines = [header, '-' * len(header)]
    for result in sorted(results, key=lambda r: r.path):
        timing = ' '.join(f"{result.timings.get(p, 0.0):>14.1f}" for p in PHASES)
        for contract in sorted(result.contracts, key=lambda c: c.contract):
            verdict = contract.verification.verdict if contract.verification is not None else '-'
            lines.append(f"{result.path:<32} {contract.contract:<20} {len(contract.findings):>8} "
                         f"{contract.fixed:>6} {contract.failed:>6} {verdict:>8}  {timing}")
        if result.error:
            lines.append(f"{result.path:<32} error ({result.error_kind}): {result.error}")

    counts = class_totals(results)
    lines.append('')
    lines.append('Findings by class:')
    for vuln_class in VulnerabilityClass:
        lines.append(f"  {vuln_class.value:<24} {counts.get(vuln_class.value, 0):>6}")
    lines.append(f"  {'Total':<24} {sum(counts.values()):>6}")
    return '\n'.join(lines) + '\n'


def render(results: List[FileResult], report_format: str = 'json') -> str:
    if report_format == 'text':
        return to_text(results)
    return to_json(results)
