from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("poseval", deadline=None, max_examples=60)
settings.load_profile("poseval")

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def fixture_manifest() -> Path:
    return FIXTURES / "manifest.jsonl"


@pytest.fixture
def annotations_file() -> Path:
    return FIXTURES / "annotations.tsv"
