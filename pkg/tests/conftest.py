import json
from pathlib import Path

import pytest

from mdlseries.characters import alternating_sequence, character_sequence, make_character

GOLDEN = json.loads((Path(__file__).parent / "golden" / "golden.json").read_text())


@pytest.fixture(scope="session")
def golden():
    return GOLDEN


@pytest.fixture(scope="session")
def chi4():
    return character_sequence(make_character(4, [1]))


@pytest.fixture(scope="session")
def chi3():
    return character_sequence(make_character(3, [1]))


@pytest.fixture(scope="session")
def alt():
    return alternating_sequence()
