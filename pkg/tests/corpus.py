"""Seeded random observer networks for the property sweeps.

Three families are mixed so that nontrivial undetectable subspaces and
failing conditions actually occur:

* ``gaussian``   dense Gaussian A, low-rank Gaussian C_i and H;
* ``coordinate`` sparse triangular A with unstable diagonal, C_i and H
  picking coordinates (the structure of the ring example);
* ``shared``     C_i built to annihilate a common direction, so condition
  (i) tends to fail.
"""

from __future__ import annotations

import numpy as np

from distdetect import Digraph, ObserverNetwork, Plant

SEED = 20240611
SIZE = 240


def random_weakly_connected(rng, N, extra_p=0.25):
    """Random orientation of a random tree plus extra random edges."""
    edges = set()
    order = rng.permutation(N) + 1
    for k in range(1, N):
        a, b = int(order[k]), int(order[rng.integers(0, k)])
        edges.add((a, b) if rng.random() < 0.5 else (b, a))
    for j in range(1, N + 1):
        for i in range(1, N + 1):
            if i != j and rng.random() < extra_p:
                edges.add((j, i))
    return Digraph(N, frozenset(edges))


def random_digraph(rng, N, p=0.3):
    """Any digraph, possibly disconnected."""
    return Digraph(N, frozenset((j, i) for j in range(1, N + 1) for i in range(1, N + 1) if i != j and rng.random() < p))


def _low_rank(rng, rows, n, rank):
    if rank == 0 or rows == 0:
        return np.zeros((rows, n))
    return rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, n))


def _gaussian(rng, n, N):
    A = rng.standard_normal((n, n))
    Cs = []
    for _ in range(N):
        rank = int(rng.integers(0, n + 1))
        Cs.append(_low_rank(rng, max(rank, 1), n, rank))
    h_rank = int(rng.integers(0, n + 1))
    H = _low_rank(rng, max(h_rank, 1), n, h_rank)
    return A, Cs, H


def _selector(n, coords):
    S = np.zeros((len(coords), n))
    for r, c in enumerate(coords):
        S[r, c] = 1.0
    return S


def _coordinate(rng, n, N):
    A = np.tril(rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.4), -1)
    A += np.diag(rng.uniform(-0.5, 1.5, n))
    Cs = []
    for _ in range(N):
        k = int(rng.integers(0, n))
        Cs.append(_selector(n, sorted(rng.choice(n, size=k, replace=False))) if k else np.zeros((1, n)))
    k = int(rng.integers(0, n + 1))
    H = _selector(n, sorted(rng.choice(n, size=k, replace=False))) if k else np.zeros((1, n))
    return A, Cs, H


def _shared(rng, n, N):
    A = rng.standard_normal((n, n)) + rng.uniform(0.5, 1.5) * np.eye(n)
    v = rng.standard_normal(n)
    P = np.eye(n) - np.outer(v, v) / (v @ v)
    Cs = []
    for _ in range(N):
        rank = int(rng.integers(1, n)) if n > 1 else 1
        C = _low_rank(rng, rank, n, rank) @ P
        Cs.append(C)
    h_rank = int(rng.integers(0, n + 1))
    H = _low_rank(rng, max(h_rank, 1), n, h_rank)
    return A, Cs, H


FAMILIES = {"gaussian": _gaussian, "coordinate": _coordinate, "shared": _shared}


def instance(rng, family=None):
    family = family or rng.choice(list(FAMILIES))
    n = int(rng.integers(1, 6))
    N = int(rng.integers(1, 6))
    A, Cs, H = FAMILIES[family](rng, n, N)
    g = random_weakly_connected(rng, N, extra_p=float(rng.choice([0.0, 0.15, 0.35])))
    return ObserverNetwork(Plant(A), tuple(Cs), H, g)


def corpus(size=SIZE, seed=SEED):
    rng = np.random.default_rng(seed)
    return [instance(rng) for _ in range(size)]
