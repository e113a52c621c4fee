from pathlib import Path

import pytest

from goalrec import parse_kb, parse_model

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def load_model(name: str):
    return parse_model(fixture_text(name))


def load_kb(name: str):
    return parse_kb(fixture_text(name))


@pytest.fixture
def figure2():
    return load_model("figure2.gm")


@pytest.fixture
def healthcare():
    return load_model("healthcare.gm"), load_kb("healthcare.kb")


@pytest.fixture
def healthcare_changed():
    return load_model("healthcare_changed.gm"), load_kb("healthcare_changed.kb")
