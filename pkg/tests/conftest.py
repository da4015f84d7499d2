import pytest

from orbitcode import trivial_oracle, translation_oracle


@pytest.fixture
def trivial():
    return trivial_oracle()


@pytest.fixture
def translation():
    return translation_oracle()
