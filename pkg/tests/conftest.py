import pytest

from src.cuckooinference.core_model import Instance


@pytest.fixture()
def full_collision() -> Instance:
    """Three items on one slot per table: only two of them fit."""
    return Instance.from_slots(1, [0, 0, 0], [0, 0, 0])


@pytest.fixture()
def double_collision() -> Instance:
    """Two items sharing their slot in both tables, placeable crosswise."""
    return Instance.from_slots(2, [0, 0], [1, 1])


@pytest.fixture()
def self_duplicate() -> Instance:
    """One item whose table 0 vector repeats slot 3."""
    return Instance.from_slots(4, [(3, 3)], [(0, 1)])


@pytest.fixture()
def chain() -> Instance:
    """Items 0 and 1 collide in table 0, items 1 and 2 in table 1."""
    return Instance.from_slots(4, [0, 0, 1], [2, 3, 3])


@pytest.fixture()
def forced_detour() -> Instance:
    """Feasible, yet every bad path from a_0^0 runs through both nodes of item 1:
    a_0^0 only reaches a_1^1 and a_0^1 is only entered from a_1^0."""
    return Instance.from_slots(4, [0, 0, 1, 1], [3, 0, 0, 0])
