import pytest

from helpers import FIXTURES


@pytest.fixture
def table1_text():
    return (FIXTURES / "glossary_table1.txt").read_text("utf-8")


@pytest.fixture
def table1_path():
    return FIXTURES / "glossary_table1.txt"
