"""Shared fixtures: the two bundled example networks and small builders."""

from pathlib import Path

import pytest

from blendnet.network_core.network_model import Edge, Network, Node
from blendnet.utilities.network_io import load_network
from blendnet.utilities.settings import GAS_FILE_ENV

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
SINGLE_CYCLE_FILE = DATA_DIR / "single_cycle.json"
DIAMOND_FILE = DATA_DIR / "diamond.json"


@pytest.fixture(autouse=True)
def _no_gas_file(monkeypatch):
    monkeypatch.delenv(GAS_FILE_ENV, raising=False)


@pytest.fixture
def single_cycle():
    return load_network(SINGLE_CYCLE_FILE)


@pytest.fixture
def diamond():
    return load_network(DIAMOND_FILE)


def make_network(nodes, edges, friction=1e-6):
    """Network from (id, load, zeta, anchor) and (id, foot, head, length)."""
    return Network(
        [Node(*n) for n in nodes],
        [Edge(*e, diameter=1.0, friction=friction) for e in edges],
    )
