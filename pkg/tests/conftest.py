import numpy as np
import pytest

from distdetect import Digraph, ObserverNetwork, Plant

RING_A = np.array(
    [
        [0.3775, 0, 0, 0, 0, 0],
        [0.2959, 0.3510, 0, 0, 0, 0],
        [1.4751, 0.6232, 1.0078, 0, 0, 0],
        [0.2340, 0, 0, 0.5596, 0, 0],
        [0, 0, 0, 0.4437, 1.1878, -0.0215],
        [0, 0, 0, 0, 2.2023, 1.0039],
    ]
)

I6 = np.eye(6)


def d(*idx):
    """Canonical basis vectors d_k (1-based) as columns."""
    return I6[:, [k - 1 for k in idx]]


def ring_C(i):
    """Node i measures coordinates i and i+1 (node 6: 6 and 1)."""
    return I6[[i - 1, i % 6]]


def ring_network(H):
    return ObserverNetwork(Plant(RING_A), tuple(ring_C(i) for i in range(1, 7)), H, Digraph.ring(6))


Z2, E2 = np.zeros((2, 2)), np.eye(2)
SLAM_A = np.zeros((6, 6))
SLAM_C1 = np.block([[-E2, Z2, E2], [E2, Z2, Z2]])
SLAM_C2 = np.block([[Z2, -E2, E2], [Z2, E2, Z2]])
SLAM_H1 = np.hstack([Z2, E2, Z2])
SLAM_H2 = np.hstack([E2, Z2, Z2])
SLAM_GRAPH = Digraph(2, frozenset({(1, 2), (2, 1)}))


def slam_network(shared=False):
    comms = SLAM_H1 + SLAM_H2 if shared else (SLAM_H1, SLAM_H2)
    return ObserverNetwork(Plant(SLAM_A), (SLAM_C1, SLAM_C2), comms, SLAM_GRAPH)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: [int(x) if x.isdigit() else x for x in k.split(".")]):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
