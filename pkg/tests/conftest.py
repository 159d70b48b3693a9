import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from secsig.core import Knowledge, ScenarioSpec, UtilityMode
from secsig.instances import figure1_instance


@pytest.fixture
def fig1():
    return figure1_instance()


def scenario(knowledge="basic", disclosure=False, sender="cardinal", receiver="cardinal"):
    return ScenarioSpec(
        knowledge=Knowledge(knowledge),
        disclosure=disclosure,
        sender_mode=UtilityMode(sender),
        receiver_mode=UtilityMode(receiver),
    )


@pytest.fixture
def make_scenario():
    return scenario
