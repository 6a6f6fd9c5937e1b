"""System descriptions shipped with the tool.

``slam2``
    Two robots and a static landmark in the plane; each robot measures its
    own position and its offset to the landmark and shares one position
    estimate with the other robot.
``ring_h_identity`` / ``ring_h_rows35`` / ``ring_h_rows25``
    A 6-state plant watched by six filters on the directed ring
    1 -> 2 -> ... -> 6 -> 1. Node ``i`` measures coordinates ``i`` and
    ``i + 1`` (node 6 measures 6 and 1). The three variants share the full
    estimate, coordinates 3 and 5, or coordinates 2 and 5.
"""

import copy

RING_A = [
    [0.3775, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2959, 0.3510, 0.0, 0.0, 0.0, 0.0],
    [1.4751, 0.6232, 1.0078, 0.0, 0.0, 0.0],
    [0.2340, 0.0, 0.0, 0.5596, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.4437, 1.1878, -0.0215],
    [0.0, 0.0, 0.0, 0.0, 2.2023, 1.0039],
]


def _unit_rows(n, coords):
    """Rows selecting the given 1-based coordinates."""
    return [[1.0 if k == c else 0.0 for k in range(1, n + 1)] for c in coords]


def _ring(name, H, description):
    return {
        "name": name,
        "description": description,
        "n": 6,
        "N": 6,
        "A": RING_A,
        "C": [_unit_rows(6, [i, i % 6 + 1]) for i in range(1, 7)],
        "H": H,
        "edges": [[i, i % 6 + 1] for i in range(1, 7)],
    }


def _slam():
    I2, Z2 = [[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]]
    negI2 = [[-1.0, 0.0], [0.0, -1.0]]

    def row_blocks(*blocks):
        return [sum((b[r] for b in blocks), []) for r in range(2)]

    C1 = row_blocks(negI2, Z2, I2) + row_blocks(I2, Z2, Z2)
    C2 = row_blocks(Z2, negI2, I2) + row_blocks(Z2, I2, Z2)
    H1 = row_blocks(Z2, I2, Z2)
    H2 = row_blocks(I2, Z2, Z2)
    B2 = [[1.0 if r == c else 0.0 for c in range(4)] for r in range(6)]
    return {
        "name": "slam2",
        "description": "two-robot planar SLAM; state (robot 1, robot 2, landmark)",
        "n": 6,
        "N": 2,
        "A": [[0.0] * 6 for _ in range(6)],
        "B2": B2,
        "C": [C1, C2],
        "H": [H1, H2],
        "edges": [[1, 2], [2, 1]],
    }


_BUNDLED = {
    "slam2": _slam(),
    "ring_h_identity": _ring(
        "ring_h_identity", _unit_rows(6, range(1, 7)), "directed 6-ring, full estimate shared"
    ),
    "ring_h_rows35": _ring(
        "ring_h_rows35", _unit_rows(6, [3, 5]), "directed 6-ring, coordinates 3 and 5 shared"
    ),
    "ring_h_rows25": _ring(
        "ring_h_rows25", _unit_rows(6, [2, 5]), "directed 6-ring, coordinates 2 and 5 shared"
    ),
}

NAMES = tuple(_BUNDLED)


def get(name):
    """A fresh copy of the named description (raises KeyError if unknown)."""
    return copy.deepcopy(_BUNDLED[name])
