import pytest

from core.utils.config import FixConfig, get_run_config
from models.finding import VulnerabilityClass
from models.run import RunConfig


@pytest.fixture
def environment(monkeypatch):
    """Apply SOLMEND_ variables and re-read FixConfig; restored afterwards"""
    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(f"SOLMEND_{key}", value)
        FixConfig.refresh()
    yield apply
    monkeypatch.undo()
    FixConfig.refresh()


def test_defaults(environment):
    environment()
    config = FixConfig.build_run_config(inputs=['a.sol'])
    assert config.mode == 'fix'
    assert config.reentrancy == 'prefer-reorder'
    assert config.inputs == ('a.sol',)
    assert config.threshold_map() == {
        'LockedEther': 2, 'MissingInputValidation': 1, 'Reentrancy': 2, 'UnhandledException': 2,
    }


def test_overrides_win_over_environment(environment):
    environment(MODE='detect-only', JOBS='3', FORMAT='text')
    config = FixConfig.build_run_config(mode='fix', jobs=None, report_format=None)
    assert (config.mode, config.jobs, config.report_format) == ('fix', 3, 'text')


def test_non_integer_jobs_falls_back_to_one(environment):
    environment(JOBS='many')
    assert FixConfig.JOBS == 1
    assert FixConfig.build_run_config().jobs == 1


def test_thresholds_from_environment_and_flags(environment):
    environment(THRESHOLD_REENTRANCY='3', THRESHOLD_LOCKED_ETHER='oops')
    config = FixConfig.build_run_config(thresholds={'unhandled_exception': 1, 'LockedEther': None})
    thresholds = config.threshold_map()
    assert thresholds['Reentrancy'] == 3
    assert thresholds['LockedEther'] == 2
    assert thresholds['UnhandledException'] == 1


def test_strategy_aliases(environment):
    environment(REENTRANCY='lock')
    assert FixConfig.build_run_config().force_lock
    assert FixConfig.build_run_config(reentrancy='reorder').reentrancy == 'prefer-reorder'


def test_dump_graphs_flag(environment):
    environment(DUMP_GRAPHS='true')
    assert FixConfig.build_run_config().dump_graphs
    assert not FixConfig.build_run_config(dump_graphs=False).dump_graphs


@pytest.mark.parametrize('config, problem', [
    (RunConfig(mode='repair'), "unknown mode 'repair'"),
    (RunConfig(reentrancy='swap'), "unknown reentrancy strategy 'swap'"),
    (RunConfig(report_format='xml'), "unknown report format 'xml'"),
    (RunConfig(jobs=0), 'jobs must be at least 1'),
    (RunConfig(thresholds=(('Reentrancy', 0),)), 'threshold for Reentrancy must be at least 1'),
    (RunConfig(mode='verify-only', inputs=('a.sol',)), 'needs --patched inputs'),
    (RunConfig(mode='verify-only', inputs=('a.sol', 'b.sol'), patched=('c.sol',)), 'one patched file per input'),
])
def test_validation_problems(config, problem):
    with pytest.raises(ValueError) as error:
        FixConfig.validate_run_config(config)
    assert problem in str(error.value)


def test_unknown_threshold_class_is_rejected(environment):
    environment()
    with pytest.raises(ValueError):
        get_run_config(thresholds={'overflow': 1})


def test_get_run_config_validates(environment):
    environment(MODE='verify-only')
    with pytest.raises(ValueError):
        get_run_config(inputs=['a.sol'])
    assert get_run_config(inputs=['a.sol'], patched=['a.fixed.sol']).mode == 'verify-only'


def test_class_names_parse_in_any_spelling():
    assert VulnerabilityClass.parse('missing_input_validation') is VulnerabilityClass.MISSING_INPUT_VALIDATION
    assert VulnerabilityClass.parse('LockedEther') is VulnerabilityClass.LOCKED_ETHER
