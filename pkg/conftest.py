import json
import logging
from pathlib import Path

import pytest

from core.analysis.unit_analysis import analyze_unit
from core.solidity.parser import parse
from models.run import RunConfig

CORPUS_DIR = Path(__file__).parent / 'data' / 'corpus'

logging.getLogger('core').setLevel(logging.WARNING)


def corpus_files():
    return sorted(p.name for p in CORPUS_DIR.glob('*.sol'))


def load_source(name: str) -> str:
    return (CORPUS_DIR / name).read_text(encoding='utf-8')


def parse_fixture(name: str):
    return parse(load_source(name), str(CORPUS_DIR / name))


def analyze_source(text: str, path: str = '<memory>'):
    unit = parse(text, path)
    return unit, analyze_unit(unit)


@pytest.fixture
def corpus():
    """Name -> (unit, analysis) loader for the seeded fixtures"""
    def load(name: str):
        unit = parse_fixture(name)
        return unit, analyze_unit(unit)
    return load


@pytest.fixture(scope='session')
def expected():
    with open(CORPUS_DIR / 'expected.json', encoding='utf-8') as f:
        return json.load(f)


@pytest.fixture
def quiet_config():
    def build(**overrides):
        settings = {'audit_log': 'off'}
        settings.update(overrides)
        return RunConfig(**settings)
    return build


@pytest.fixture
def workspace(tmp_path):
    """A scratch copy of the corpus, so runs can write ``.fixed.sol`` files"""
    target = tmp_path / 'corpus'
    target.mkdir()
    for source in CORPUS_DIR.glob('*.sol'):
        (target / source.name).write_text(source.read_text(encoding='utf-8'), encoding='utf-8')
    return target
