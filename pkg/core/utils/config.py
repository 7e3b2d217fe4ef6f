import os
import logging
from typing import Dict, List, Optional

from dotenv import load_dotenv

from models.finding import DEFAULT_THRESHOLDS, VulnerabilityClass
from models.run import MODES, REENTRANCY_STRATEGIES, REPORT_FORMATS, RunConfig

load_dotenv()
logger = logging.getLogger(__name__)

PREFIX = 'SOLMEND_'

# short spellings accepted by --reentrancy and SOLMEND_REENTRANCY
STRATEGY_ALIASES = {'reorder': 'prefer-reorder', 'lock': 'force-lock'}


def _env(key: str, default: Optional[str] = None) -> Optional[str]:
    return os.getenv(PREFIX + key, default)


def _env_int(key: str, default: int) -> int:
    raw = _env(key)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.error(f"Error reading {PREFIX}{key}: not an integer ({raw})")
        return default


def _env_thresholds() -> Dict[str, int]:
    thresholds = {}
    for vuln_class in VulnerabilityClass:
        raw = _env(f"THRESHOLD_{vuln_class.name}")
        if raw is None:
            continue
        try:
            thresholds[vuln_class.value] = int(raw)
        except ValueError:
            logger.error(f"Error reading {PREFIX}THRESHOLD_{vuln_class.name}: not an integer ({raw})")
    return thresholds


class FixConfig:
    # Run Configuration
    MODE = _env('MODE', 'fix')
    REENTRANCY = _env('REENTRANCY', 'prefer-reorder')
    JOBS = _env_int('JOBS', 1)
    OUT = _env('OUT')
    FORMAT = _env('FORMAT', 'json')
    DUMP_GRAPHS = (_env('DUMP_GRAPHS', 'False') or '').lower() == 'true'
    THRESHOLDS = _env_thresholds()

    # Logging Configuration
    LOG_LEVEL = _env('LOG_LEVEL', 'INFO')
    AUDIT_LOG = _env('AUDIT_LOG')

    # Cache Configuration
    CACHE_ENTRIES = 64

    @classmethod
    def refresh(cls) -> None:
        """Re-read every key from the environment"""
        cls.MODE = _env('MODE', 'fix')
        cls.REENTRANCY = _env('REENTRANCY', 'prefer-reorder')
        cls.JOBS = _env_int('JOBS', 1)
        cls.OUT = _env('OUT')
        cls.FORMAT = _env('FORMAT', 'json')
        cls.DUMP_GRAPHS = (_env('DUMP_GRAPHS', 'False') or '').lower() == 'true'
        cls.THRESHOLDS = _env_thresholds()
        cls.LOG_LEVEL = _env('LOG_LEVEL', 'INFO')
        cls.AUDIT_LOG = _env('AUDIT_LOG')

    @classmethod
    def default_thresholds(cls) -> Dict[str, int]:
        thresholds = {c.value: n for c, n in DEFAULT_THRESHOLDS.items()}
        thresholds.update(cls.THRESHOLDS)
        return thresholds

    @classmethod
    def build_run_config(cls, **overrides) -> RunConfig:
        """
        Merge explicit overrides (CLI flags) over environment values.
        Overrides that are None are ignored; ``thresholds`` may be a partial
        mapping keyed by any spelling ``VulnerabilityClass.parse`` accepts.
        """
        thresholds = cls.default_thresholds()
        for name, value in (overrides.pop('thresholds', None) or {}).items():
            if value is not None:
                thresholds[VulnerabilityClass.parse(name).value] = value

        reentrancy = overrides.get('reentrancy') or cls.REENTRANCY
        settings = {
            'inputs': tuple(overrides.get('inputs') or ()),
            'mode': overrides.get('mode') or cls.MODE,
            'reentrancy': STRATEGY_ALIASES.get(reentrancy, reentrancy),
            'thresholds': tuple(sorted(thresholds.items())),
            'out_dir': overrides.get('out_dir') or cls.OUT,
            'report_format': overrides.get('report_format') or cls.FORMAT,
            'dump_graphs': overrides['dump_graphs'] if overrides.get('dump_graphs') is not None else cls.DUMP_GRAPHS,
            'jobs': overrides['jobs'] if overrides.get('jobs') is not None else cls.JOBS,
            'patched': tuple(overrides.get('patched') or ()),
            'audit_log': overrides.get('audit_log') or cls.AUDIT_LOG,
        }
        return RunConfig(**settings)

    @classmethod
    def validate_run_config(cls, config: RunConfig) -> None:
        problems: List[str] = []
        if config.mode not in MODES:
            problems.append(f"unknown mode '{config.mode}'")
        if config.reentrancy not in REENTRANCY_STRATEGIES:
            problems.append(f"unknown reentrancy strategy '{config.reentrancy}'")
        if config.report_format not in REPORT_FORMATS:
            problems.append(f"unknown report format '{config.report_format}'")
        if config.jobs < 1:
            problems.append(f"jobs must be at least 1, got {config.jobs}")
        for name, value in config.thresholds:
            if value < 1:
                problems.append(f"threshold for {name} must be at least 1, got {value}")
        if config.mode == 'verify-only':
            if not config.patched:
                problems.append("verify-only mode needs --patched inputs")
            elif len(config.patched) != len(config.inputs):
                problems.append(f"verify-only mode needs one patched file per input "
                                f"({len(config.inputs)} inputs, {len(config.patched)} patched)")
        if problems:
            raise ValueError(f"Invalid run configuration: {problems}")


def get_run_config(**overrides) -> RunConfig:
    config = FixConfig.build_run_config(**overrides)
    FixConfig.validate_run_config(config)
    return config
