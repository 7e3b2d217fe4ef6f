import sys
import logging
import argparse
from typing import List, Optional

from core.pipeline.report import render
from core.pipeline.runner import EXIT_INPUT_ERROR, PipelineRunner
from core.utils.audit_logger import AuditLogger
from core.utils.cache_manager import AnalysisCache
from core.utils.config import FixConfig
from models.finding import VulnerabilityClass
from models.run import MODES, REPORT_FORMATS

logger = logging.getLogger(__name__)


def threshold_flag(vuln_class: VulnerabilityClass) -> str:
    return '--threshold-' + vuln_class.name.lower().replace('_', '-')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser('solmend', description='Detect, patch and verify Solidity vulnerabilities')
    parser.add_argument('inputs', metavar='PATH', nargs='*', help='.sol files or directories')
    parser.add_argument('--mode', choices=MODES, default=None, help='pipeline mode (default: fix)')
    parser.add_argument('--reentrancy', choices=['reorder', 'lock', 'prefer-reorder', 'force-lock'], default=None,
                        help='reentrancy fix strategy (default: reorder, lock when blocked)')
    parser.add_argument('--out', metavar='DIR', default=None, help='output directory (default: next to inputs)')
    parser.add_argument('--format', choices=REPORT_FORMATS, default=None, help='report format (default: json)')
    parser.add_argument('--dump-graphs', action='store_true', default=None, help='write CFG/DFG text dumps')
    parser.add_argument('--jobs', metavar='NUM', type=int, default=None, help='files processed in parallel')
    parser.add_argument('--patched', metavar='PATH', action='append', default=None,
                        help='patched counterpart of each input (verify-only, repeatable)')
    parser.add_argument('--audit-log', metavar='PATH|off', default=None, help='audit log file, or off')
    parser.add_argument('--log-level', metavar='LEVEL', default=None, help='logging level (default: INFO)')
    for vuln_class in VulnerabilityClass:
        parser.add_argument(threshold_flag(vuln_class), metavar='VOTES', type=int, default=None,
                            dest=f"threshold_{vuln_class.name.lower()}",
                            help=f"detector votes needed for {vuln_class.value}")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(args.log_level or FixConfig.LOG_LEVEL or 'INFO').upper(),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', stream=sys.stderr)

    thresholds = {c.value: getattr(args, f"threshold_{c.name.lower()}") for c in VulnerabilityClass}
    try:
        config = FixConfig.build_run_config(
            inputs=args.inputs,
            mode=args.mode,
            reentrancy=args.reentrancy,
            thresholds=thresholds,
            out_dir=args.out,
            report_format=args.format,
            dump_graphs=args.dump_graphs,
            jobs=args.jobs,
            patched=args.patched,
            audit_log=args.audit_log,
        )
        FixConfig.validate_run_config(config)
    except ValueError as e:
        logger.error(f"Error in configuration: {str(e)}")
        return EXIT_INPUT_ERROR

    runner = PipelineRunner(config, AuditLogger(config.audit_log), AnalysisCache(FixConfig.CACHE_ENTRIES))
    code, results = runner.run()
    sys.stdout.write(render(results, config.report_format))
    return code


if __name__ == '__main__':
    sys.exit(main())
