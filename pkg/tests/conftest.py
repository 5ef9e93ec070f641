import importlib.resources
from pathlib import Path

import pytest

from refrank.domains import parse_psl

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def psl_rules():
    text = (importlib.resources.files("refrank") / "data" / "psl_subset.dat").read_text(
        encoding="utf-8")
    return parse_psl(text)


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
