import pytest

from padiclog.groups import LevelGroup, parse_seed

SEEDS = ("cyclic:3", "elem-abelian:9", "cyclic:9", "heisenberg:3")


@pytest.fixture(scope="session")
def heis0():
    return LevelGroup(parse_seed("heisenberg:3"), 0)


@pytest.fixture(scope="session")
def heis1():
    return LevelGroup(parse_seed("heisenberg:3"), 1)


@pytest.fixture(scope="session")
def cyc9_1():
    return LevelGroup(parse_seed("cyclic:9"), 1)
