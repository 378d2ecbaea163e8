import json
import sys
from pathlib import Path

import pytest

from casimir_phases import sodium_like

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


@pytest.fixture(scope="session")
def sodium():
    return sodium_like()


@pytest.fixture
def config_doc():
    def load(name):
        return json.loads((CONFIGS / name).read_text())
    return load


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    lines = module.summary_lines() if module else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
