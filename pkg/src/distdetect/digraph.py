"""Communication digraphs: Laplacian, reaches and the Laplacian kernel basis.

Vertices are labelled ``1..N``. An edge ``(j, i)`` points from ``j`` to
``i``: node ``i`` receives information from node ``j``. Reach structure is
computed combinatorially; spectra are only used for cross-checks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, InputError

ZERO_EIG_TOL = 1e-8


@dataclass(frozen=True)
class Digraph:
    """Unweighted directed graph without self-loops on vertices ``1..N``."""

    n_vertices: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if int(self.n_vertices) != self.n_vertices or self.n_vertices < 1:
            raise InputError("a graph needs at least one vertex")
        edges = set()
        for e in self.edges:
            if len(e) != 2:
                raise InputError(f"edge {e!r} is not a pair")
            j, i = (int(x) for x in e)
            if (j, i) != tuple(e):
                raise InputError(f"edge {e!r} has non-integer endpoints")
            if not (1 <= j <= self.n_vertices and 1 <= i <= self.n_vertices):
                raise InputError(f"edge {e!r} references a vertex outside 1..{self.n_vertices}")
            if i == j:
                raise InputError(f"self-loop at vertex {i}")
            edges.add((j, i))
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def ring(cls, n):
        """Directed ring 1 -> 2 -> ... -> n -> 1."""
        if n == 1:
            return cls(1)
        return cls(n, frozenset((k, k % n + 1) for k in range(1, n + 1)))

    @property
    def vertices(self):
        return range(1, self.n_vertices + 1)

    def in_neighbours(self, i):
        return sorted(j for (j, k) in self.edges if k == i)

    def out_neighbours(self, j):
        return sorted(i for (k, i) in self.edges if k == j)

    def in_degrees(self):
        p = np.zeros(self.n_vertices, dtype=int)
        for _, i in self.edges:
            p[i - 1] += 1
        return p

    def adjacency(self):
        """``a[i, j] = 1`` iff ``(j, i)`` is an edge (0-based indices)."""
        a = np.zeros((self.n_vertices, self.n_vertices))
        for j, i in self.edges:
            a[i - 1, j - 1] = 1.0
        return a

    def reachable_from(self, j):
        """Vertex set of the reachable subgraph R(j), including j."""
        succ = {v: [] for v in self.vertices}
        for a, b in self.edges:
            succ[a].append(b)
        seen = {j}
        queue = deque([j])
        while queue:
            v = queue.popleft()
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return frozenset(seen)

    def subgraph(self, vertices):
        """Induced subgraph relabelled to ``1..len(vertices)`` in sorted order."""
        vertices = sorted(vertices)
        index = {v: k + 1 for k, v in enumerate(vertices)}
        edges = {(index[j], index[i]) for (j, i) in self.edges if j in index and i in index}
        return Digraph(len(vertices), frozenset(edges))


def laplacian(g):
    """``diag(in-degrees) - adjacency``; every row sums to zero."""
    return np.diag(g.in_degrees().astype(float)) - g.adjacency()


def weak_components(g):
    """Weakly connected components as sorted vertex tuples, ordered by min vertex."""
    parent = {v: v for v in g.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for j, i in g.edges:
        rj, ri = find(j), find(i)
        if rj != ri:
            parent[max(rj, ri)] = min(rj, ri)
    groups = {}
    for v in g.vertices:
        groups.setdefault(find(v), []).append(v)
    return sorted((tuple(vs) for vs in groups.values()), key=lambda c: c[0])


@dataclass(frozen=True)
class Reach:
    vertices: tuple
    exclusive: tuple
    common: tuple


@dataclass(frozen=True)
class ReachDecomposition:
    """Reaches of a digraph with the matching Laplacian kernel basis.

    ``permutation`` lists 0-based vertex indices with the exclusive parts
    first (reach by reach) and the union of common parts last, which puts
    the Laplacian in its block lower-triangular form. ``kernel_basis`` holds
    one length-N vector per reach, in original vertex order.
    """

    reaches: tuple
    permutation: np.ndarray
    kernel_basis: tuple
    components: tuple
    block_sizes: tuple

    @property
    def k(self):
        return len(self.reaches)

    @property
    def decoupled(self):
        return len(self.components) > 1

    @property
    def common_vertices(self):
        return tuple(sorted(set().union(*(r.common for r in self.reaches))))


def _maximal_reaches(g):
    closures = {j: g.reachable_from(j) for j in g.vertices}
    distinct = set(closures.values())
    return [R for R in distinct if not any(R < other for other in distinct)]


def reaches(g):
    """Reach decomposition of ``g`` with kernel basis vectors of its Laplacian.

    Exclusive parts are the vertices that lie in exactly one reach. On the
    common vertices the kernel vector of reach ``s`` is ``-R^{-1} F_s 1``
    where ``R`` is the Laplacian block on the common vertices and ``F_s``
    the block coupling them to the exclusive part of reach ``s``.
    """
    if g.n_vertices < 1:
        raise InputError("empty graph")
    raw = _maximal_reaches(g)
    exclusive = []
    for R in raw:
        others = set().union(*(S for S in raw if S is not R))
        exclusive.append(tuple(sorted(R - others)))
    order = sorted(range(len(raw)), key=lambda s: exclusive[s][0])
    reach_list = []
    for s in order:
        R = tuple(sorted(raw[s]))
        P = exclusive[s]
        reach_list.append(Reach(R, P, tuple(v for v in R if v not in P)))

    N = g.n_vertices
    L = laplacian(g)
    common = sorted(set().union(*(r.common for r in reach_list)))
    perm = [v - 1 for r in reach_list for v in r.exclusive] + [v - 1 for v in common]
    if sorted(perm) != list(range(N)):
        raise ConsistencyError("exclusive and common parts do not partition the vertices")
    q = [v - 1 for v in common]
    basis = []
    if q:
        R_block = L[np.ix_(q, q)]
    for r in reach_list:
        b = np.zeros(N)
        p = [v - 1 for v in r.exclusive]
        b[p] = 1.0
        if q:
            F_s = L[np.ix_(q, p)]
            b[q] = -np.linalg.solve(R_block, F_s @ np.ones(len(p)))
        b.setflags(write=False)
        basis.append(b)
    perm = np.array(perm, dtype=int)
    perm.setflags(write=False)
    sizes = tuple(len(r.exclusive) for r in reach_list) + (len(common),)
    return ReachDecomposition(
        tuple(reach_list), perm, tuple(basis), tuple(weak_components(g)), sizes
    )


def permuted_laplacian(g, decomposition=None):
    """Laplacian with rows and columns ordered by ``decomposition.permutation``."""
    decomposition = decomposition or reaches(g)
    P = decomposition.permutation
    return laplacian(g)[np.ix_(P, P)]


def zero_eigenvalue_multiplicity(g, tol=ZERO_EIG_TOL):
    ev = np.linalg.eigvals(laplacian(g))
    return int(np.sum(np.abs(ev) <= tol))


def has_spanning_tree(g, check=True):
    """True iff some vertex reaches every other vertex.

    With ``check`` the combinatorial answer is compared against the
    multiplicity of the Laplacian's zero eigenvalue.
    """
    one = len(_maximal_reaches(g)) == 1
    if check:
        mult = zero_eigenvalue_multiplicity(g)
        if one != (mult == 1):
            raise ConsistencyError(
                "reach count and Laplacian zero-eigenvalue multiplicity disagree",
                multiplicity=mult,
            )
    return one


def root_vertices(g):
    """Vertices from which every vertex is reachable (empty without a spanning tree)."""
    everything = frozenset(g.vertices)
    return tuple(j for j in g.vertices if g.reachable_from(j) == everything)
