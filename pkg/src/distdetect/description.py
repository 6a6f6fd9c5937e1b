"""Parsing of JSON system descriptions into :class:`ObserverNetwork` objects."""

from __future__ import annotations

import json
import os

import jsonschema
import numpy as np

from .digraph import Digraph
from .errors import InputError
from .lti import MeasurementChannel, Plant
from .network import ObserverNetwork, Tolerances
from .synthesis import GainSet

ENV_TOLERANCES = {
    "rank_tol": "DISTDETECT_RANK_TOL",
    "eps_stab": "DISTDETECT_EPS_STAB",
    "margin": "DISTDETECT_MARGIN",
}

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_MATRIX_LIST = {"type": "array", "items": _MATRIX}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n", "N", "A", "C", "H", "edges"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "A": _MATRIX,
        "B2": _MATRIX,
        "C": _MATRIX_LIST,
        "H": {"anyOf": [_MATRIX, _MATRIX_LIST]},
        "edges": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
        "gains": {
            "type": "object",
            "additionalProperties": False,
            "required": ["L", "K"],
            "properties": {"L": _MATRIX_LIST, "K": _MATRIX_LIST},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "minimum": 0} for k in ENV_TOLERANCES},
        },
    },
}


def _matrix(rows, name, cols=None, nrows=None):
    if len(rows) == 0:
        if cols is None:
            raise InputError(f"{name} is empty")
        M = np.zeros((0, cols))
    else:
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise InputError(f"{name} has rows of unequal length {sorted(widths)}")
        M = np.array(rows, dtype=float)
    if cols is not None and M.shape[1] != cols:
        raise InputError(f"{name} has {M.shape[1]} columns, expected {cols}")
    if nrows is not None and M.shape[0] != nrows:
        raise InputError(f"{name} has {M.shape[0]} rows, expected {nrows}")
    return M


def _is_matrix_list(H):
    return all(isinstance(x, list) and (not x or isinstance(x[0], list)) for x in H) and any(
        isinstance(x, list) and x and isinstance(x[0], list) for x in H
    )


def parse(doc):
    """Validate a description dict; return ``(network, gains or None, tolerances dict)``."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {exc.message}") from None
    n, N = doc["n"], doc["N"]
    A = _matrix(doc["A"], "A", n, n)
    B2 = _matrix(doc["B2"], "B2", nrows=n) if "B2" in doc else None
    if len(doc["C"]) != N:
        raise InputError(f"C lists {len(doc['C'])} matrices for N = {N}")
    channels = tuple(MeasurementChannel(_matrix(C, f"C_{k}", n)) for k, C in enumerate(doc["C"], 1))
    H = doc["H"]
    if _is_matrix_list(H):
        if len(H) != N:
            raise InputError(f"H lists {len(H)} matrices for N = {N}")
        comms = tuple(_matrix(h, f"H_{k}", n) for k, h in enumerate(H, 1))
    else:
        comms = _matrix(H, "H", n)
    for e in doc["edges"]:
        if len(e) == 3:
            raise InputError(f"edge {e} carries a weight; only unweighted edges are supported")
        if len(e) != 2:
            raise InputError(f"edge {e} must be a [from, to] pair")
    graph = Digraph(N, frozenset(tuple(e) for e in doc["edges"]))
    net = ObserverNetwork(Plant(A, B2), channels, comms, graph)
    gains = None
    if "gains" in doc:
        g = doc["gains"]
        if len(g["L"]) != N or len(g["K"]) != N:
            raise InputError("gains must list one L and one K per node")
        gains = GainSet(
            tuple(_matrix(L, f"L_{k}", nrows=n) if L else np.zeros((n, 0)) for k, L in enumerate(g["L"], 1)),
            tuple(_matrix(K, f"K_{k}", nrows=n) if K else np.zeros((n, 0)) for k, K in enumerate(g["K"], 1)),
        )
    return net, gains, dict(doc.get("tolerances", {}))


def load(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    return parse(doc)


def resolve_tolerances(from_file=None, overrides=None, environ=None):
    """Defaults < file < environment < command line."""
    environ = os.environ if environ is None else environ
    values = {}
    values.update(from_file or {})
    for key, var in ENV_TOLERANCES.items():
        if var in environ:
            try:
                values[key] = float(environ[var])
            except ValueError:
                raise InputError(f"{var} is not a number") from None
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return Tolerances(**values)
