import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import bear_bn, misconception_mn  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def misconception():
    return misconception_mn()


@pytest.fixture
def bear():
    return bear_bn()


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
