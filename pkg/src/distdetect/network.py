"""Detectability of a plant observed by a network of consensus-coupled filters.

Node ``i`` runs

    xhat_i' = A xhat_i + L_i (y_i - C_i xhat_i) + K_i sum_{j in V_i} H_i (xhat_j - xhat_i)

and the stacked estimation error is governed by ``Abar = I_N (x) A``,
``Cbar = diag(C_i)`` and ``Hbar`` (``Hbar_ii = p_i H_i``, ``Hbar_ij = -a_ij H_i``).
The network can be made convergent by output injection iff the pair
``([Cbar; Hbar], Abar)`` is detectable; this module evaluates that property
through the geometric characterisations and through a PBH oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import digraph as dg
from .errors import ConsistencyError, InputError
from .lti import (
    MeasurementChannel,
    Plant,
    distinct_eigenvalues,
    observability_matrix,
    pbh_rank_deficient,
    undetectable_subspace,
    unobservable_subspace,
)
from .subspaces import (
    DEFAULT_EPS_STAB,
    DEFAULT_RANK_TOL,
    Subspace,
    antistable_modal_subspace,
    contains,
    direct_product,
    intersect,
    intersect_all,
    kernel,
    kron_subspace,
    numerical_rank,
    subspace_sum,
)


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = DEFAULT_RANK_TOL
    eps_stab: float = DEFAULT_EPS_STAB
    margin: float = 1e-6

    def __post_init__(self):
        for name in ("rank_tol", "eps_stab", "margin"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InputError(f"tolerance {name} must be a nonnegative number")


@dataclass(frozen=True)
class ObserverNetwork:
    """Plant, per-node measurement channels, communication matrices and graph.

    ``comms`` is either one matrix ``H`` shared by every node or a sequence
    of per-node matrices ``H_i``.
    """

    plant: Plant
    channels: tuple
    comms: object
    graph: dg.Digraph

    def __post_init__(self):
        channels = tuple(
            ch if isinstance(ch, MeasurementChannel) else MeasurementChannel(ch)
            for ch in self.channels
        )
        object.__setattr__(self, "channels", channels)
        n, N = self.plant.n, self.graph.n_vertices
        if len(channels) != N:
            raise InputError(f"{len(channels)} measurement channels for {N} graph vertices")
        for k, ch in enumerate(channels, 1):
            if ch.C.shape[1] != n:
                raise InputError(f"C_{k} has {ch.C.shape[1]} columns, expected {n}")
        if isinstance(self.comms, (list, tuple)):
            Hs = tuple(_comm_matrix(H, n, f"H_{k}") for k, H in enumerate(self.comms, 1))
            if len(Hs) != N:
                raise InputError(f"{len(Hs)} communication matrices for {N} vertices")
            object.__setattr__(self, "comms", Hs)
        else:
            object.__setattr__(self, "comms", _comm_matrix(self.comms, n, "H"))

    @property
    def n(self):
        return self.plant.n

    @property
    def N(self):
        return self.graph.n_vertices

    @property
    def A(self):
        return self.plant.A

    @property
    def shared_h(self):
        return not isinstance(self.comms, tuple)

    @property
    def H(self):
        if not self.shared_h:
            raise InputError("network uses per-node communication matrices")
        return self.comms

    def H_of(self, i):
        """Communication matrix of node ``i`` (1-based)."""
        return self.comms if self.shared_h else self.comms[i - 1]

    def C_of(self, i):
        return self.channels[i - 1].C

    def restrict(self, vertices):
        """Sub-network on a vertex subset (used for weakly connected components)."""
        vertices = sorted(vertices)
        comms = self.comms if self.shared_h else tuple(self.comms[v - 1] for v in vertices)
        return ObserverNetwork(
            self.plant,
            tuple(self.channels[v - 1] for v in vertices),
            comms,
            self.graph.subgraph(vertices),
        )


def _comm_matrix(H, n, name):
    H = np.asarray(H, dtype=float)
    if H.size == 0:
        H = np.zeros((0, n))
    if H.ndim == 1:
        H = H.reshape(1, -1)
    if H.ndim != 2 or H.shape[1] != n or not np.all(np.isfinite(H)):
        raise InputError(f"{name} must be a finite matrix with {n} columns")
    H.setflags(write=False)
    return H


@dataclass(frozen=True)
class AugmentedPair:
    Abar: np.ndarray
    Cbar: np.ndarray
    Hbar: np.ndarray

    @property
    def output(self):
        """Stacked output matrix ``[Cbar; Hbar]``."""
        return np.vstack([self.Cbar, self.Hbar])


def augment(net):
    """Build ``(Abar, Cbar, Hbar)`` block by block."""
    n, N = net.n, net.N
    Abar = np.kron(np.eye(N), net.A)
    Cbar = scipy.linalg.block_diag(*(net.C_of(i) for i in net.graph.vertices))
    Cbar = Cbar.reshape(-1, n * N)
    p = net.graph.in_degrees()
    adj = net.graph.adjacency()
    rows = []
    for i in net.graph.vertices:
        Hi = net.H_of(i)
        row = np.zeros((Hi.shape[0], n * N))
        for j in net.graph.vertices:
            coeff = p[i - 1] if j == i else -adj[i - 1, j - 1]
            if coeff:
                row[:, (j - 1) * n : j * n] = coeff * Hi
        rows.append(row)
    Hbar = np.vstack(rows) if rows else np.zeros((0, n * N))
    if net.shared_h:
        expected = np.kron(dg.laplacian(net.graph), net.H)
        if not np.array_equal(Hbar, expected):
            raise ConsistencyError("Hbar differs from kron(L, H)")
    return AugmentedPair(Abar, Cbar, Hbar)


def undetectable_subspaces(net, tol=Tolerances()):
    """Per-node undetectable subspaces of ``(C_i, A)``."""
    return [
        undetectable_subspace(net.C_of(i), net.A, tol.rank_tol, tol.eps_stab)
        for i in net.graph.vertices
    ]


def _direct_big_unobservable(net, pair, tol):
    # Abar has the minimal polynomial of A, so n powers suffice.
    return kernel(observability_matrix(pair.Hbar, pair.Abar, powers=net.n), tol.rank_tol)


def big_unobservable_subspace(net, tol=Tolerances(), pair=None):
    """Unobservable subspace of ``(Hbar, Abar)``.

    With a shared ``H`` it is assembled as ``ker(L) (x) R^n + (O_H)^N`` and
    checked against the direct kernel of ``L (x) O_H``; a mismatch raises
    :class:`ConsistencyError`. Per-node communication matrices only have the
    direct route.
    """
    pair = pair or augment(net)
    direct = _direct_big_unobservable(net, pair, tol)
    if not net.shared_h:
        return direct
    formula = lemma3_subspace(net, tol)
    kron_route = kernel(np.kron(dg.laplacian(net.graph), observability_matrix(net.H, net.A)), tol.rank_tol)
    if not (formula.equals(kron_route) and formula.equals(direct)):
        raise ConsistencyError(
            "unobservable subspace of (Hbar, Abar): structured and direct routes disagree",
            formula_dim=formula.dim,
            kron_dim=kron_route.dim,
            direct_dim=direct.dim,
        )
    return formula


def lemma3_subspace(net, tol=Tolerances()):
    """``ker(L) (x) R^n + (O_H)^N`` assembled from its two summands."""
    n, N = net.n, net.N
    ker_L = kernel(dg.laplacian(net.graph), tol.rank_tol)
    O_H = unobservable_subspace(net.H, net.A, tol.rank_tol)
    consensus = kron_subspace(ker_L.basis, Subspace.full(n, tol.rank_tol))
    local = direct_product([O_H] * N)
    return subspace_sum(consensus, local, tol.rank_tol)


def lemma3_dimension(net, tol=Tolerances()):
    """Predicted ``n d_L + (N - d_L) d_O`` together with ``d_L`` and ``d_O``."""
    d_L = kernel(dg.laplacian(net.graph), tol.rank_tol).dim
    d_O = unobservable_subspace(net.H, net.A, tol.rank_tol).dim
    return net.n * d_L + (net.N - d_L) * d_O, d_L, d_O


def antistable_kernel_augmented(net, tol=Tolerances(), pair=None):
    """``(ker alpha+(A))^N``, cross-checked against a direct split of ``Abar``."""
    pair = pair or augment(net)
    block = antistable_modal_subspace(net.A, tol.eps_stab, tol.rank_tol)
    blockwise = direct_product([block] * net.N)
    direct = antistable_modal_subspace(pair.Abar, tol.eps_stab, tol.rank_tol)
    if not blockwise.equals(direct):
        raise ConsistencyError(
            "antistable subspace of Abar is not the N-fold product",
            blockwise_dim=blockwise.dim,
            direct_dim=direct.dim,
        )
    return blockwise


@dataclass(frozen=True)
class Lemma1Result:
    holds: bool
    witness: np.ndarray | None
    intersection_dim: int


def lemma1_check(net, tol=Tolerances(), pair=None, big_O=None, C_spaces=None):
    """Detectable iff ``Obar`` meets ``C_1 x ... x C_N`` only at zero.

    Works for shared and per-node communication matrices. When the
    intersection is nontrivial a unit-norm witness is returned.
    """
    pair = pair or augment(net)
    big_O = big_O if big_O is not None else big_unobservable_subspace(net, tol, pair)
    C_spaces = C_spaces if C_spaces is not None else undetectable_subspaces(net, tol)
    meet = intersect(big_O, direct_product(C_spaces), tol.rank_tol)
    if meet.is_zero:
        return Lemma1Result(True, None, 0)
    w = meet.basis[:, 0].copy()
    w /= np.linalg.norm(w)
    return Lemma1Result(False, w, meet.dim)


def witness_valid(net, w, tol=Tolerances(), big_O=None, C_spaces=None):
    """Check ``w in Obar``, each block ``w_i in C_i`` and ``||w|| = 1``."""
    big_O = big_O if big_O is not None else big_unobservable_subspace(net, tol)
    C_spaces = C_spaces if C_spaces is not None else undetectable_subspaces(net, tol)
    n = net.n
    blocks_ok = all(contains(C, w[k * n : (k + 1) * n]) for k, C in enumerate(C_spaces))
    return bool(contains(big_O, w) and blocks_ok and abs(np.linalg.norm(w) - 1.0) <= 1e-12)


@dataclass(frozen=True)
class Theorem1Result:
    i: bool
    ii: bool
    iii: bool
    rank_OH: int
    max_dim_C: int
    ii_per_node: tuple
    advisory: bool = False


def theorem1_necessary(net, tol=Tolerances(), C_spaces=None):
    """Necessary conditions (i)-(iii).

    With per-node ``H_i``, (ii) and (iii) are evaluated with each node's own
    matrix and the result is marked advisory.
    """
    C_spaces = C_spaces if C_spaces is not None else undetectable_subspaces(net, tol)
    cond_i = intersect_all(C_spaces, tol.rank_tol).is_zero
    per_node = []
    ranks = []
    for i, C in zip(net.graph.vertices, C_spaces):
        H = net.H_of(i)
        O_H = unobservable_subspace(H, net.A, tol.rank_tol)
        per_node.append(intersect(O_H, C, tol.rank_tol).is_zero)
        ranks.append(numerical_rank(observability_matrix(H, net.A), tol.rank_tol) if H.shape[0] else 0)
    max_dim = max(C.dim for C in C_spaces)
    if net.shared_h:
        cond_iii = ranks[0] >= max_dim
        rank_OH = ranks[0]
    else:
        cond_iii = all(r >= C.dim for r, C in zip(ranks, C_spaces))
        rank_OH = min(ranks)
    return Theorem1Result(
        cond_i, all(per_node), cond_iii, rank_OH, max_dim, tuple(per_node), not net.shared_h
    )


@dataclass(frozen=True)
class Theorem2Result:
    applicable: bool
    verdict: bool | None
    h_observable: bool
    corollary1_applicable: bool
    corollary1_verdict: bool | None
    roots: tuple
    corollary2_roots: tuple
    corollary2_verdict: bool | None


def theorem2_sufficient(net, tol=Tolerances(), thm1=None, C_spaces=None):
    """Spanning-tree sufficiency and its two corollaries.

    ``verdict`` is ``thm1.i and thm1.ii`` when the graph has a spanning tree.
    Corollary 1 adds observability of ``(H, A)``; Corollary 2 asks for a root
    node whose own pair is detectable together with (ii). A ``True`` sub-verdict
    means that route certifies detectability; ``None`` means it does not apply.
    """
    C_spaces = C_spaces if C_spaces is not None else undetectable_subspaces(net, tol)
    thm1 = thm1 or theorem1_necessary(net, tol, C_spaces)
    tree = dg.has_spanning_tree(net.graph)
    h_obs = net.shared_h and unobservable_subspace(net.H, net.A, tol.rank_tol).is_zero
    roots = dg.root_vertices(net.graph)
    good_roots = tuple(r for r in roots if C_spaces[r - 1].is_zero)
    verdict = (thm1.i and thm1.ii) if tree else None
    cor1_app = bool(tree and h_obs)
    cor1 = thm1.i if cor1_app else None
    cor2 = True if (tree and good_roots and thm1.ii and net.shared_h) else None
    return Theorem2Result(tree, verdict, bool(h_obs), cor1_app, cor1, roots, good_roots, cor2)


@dataclass(frozen=True)
class ReachReport:
    reach_id: int
    vertices: tuple
    exclusive: tuple
    common: tuple
    cap_dim: int
    cap_condition: bool
    per_node_ii: tuple


@dataclass(frozen=True)
class ReachConditions:
    reaches: tuple
    h_observable: bool
    theorem3_holds: bool
    theorem4_verdict: bool | None


def reach_conditions(net, tol=Tolerances(), C_spaces=None, decomposition=None):
    """Per-reach conditions (i) and (ii).

    ``theorem4_verdict`` is only filled in when ``(H, A)`` is observable.
    """
    C_spaces = C_spaces if C_spaces is not None else undetectable_subspaces(net, tol)
    decomposition = decomposition or dg.reaches(net.graph)
    reports = []
    for s, reach in enumerate(decomposition.reaches, 1):
        cap = intersect_all([C_spaces[v - 1] for v in reach.vertices], tol.rank_tol)
        ii = []
        for v in reach.vertices:
            O_H = unobservable_subspace(net.H_of(v), net.A, tol.rank_tol)
            ii.append(intersect(O_H, C_spaces[v - 1], tol.rank_tol).is_zero)
        reports.append(
            ReachReport(s, reach.vertices, reach.exclusive, reach.common, cap.dim, cap.is_zero, tuple(ii))
        )
    h_obs = net.shared_h and unobservable_subspace(net.H, net.A, tol.rank_tol).is_zero
    all_caps = all(r.cap_condition for r in reports)
    thm3 = all_caps and all(all(r.per_node_ii) for r in reports)
    return ReachConditions(tuple(reports), bool(h_obs), thm3, all_caps if h_obs else None)


def oracle_detectable(net, tol=Tolerances(), pair=None):
    """PBH test on the augmented pair at the distinct eigenvalues of ``A``."""
    pair = pair or augment(net)
    G = pair.output
    for lam in distinct_eigenvalues(net.A):
        if lam.real < -tol.eps_stab:
            continue
        if pbh_rank_deficient(G, pair.Abar, lam, tol.rank_tol):
            return False
    return True


@dataclass(frozen=True)
class ConsistencyFlag:
    """Outcome of one cross-check.

    ``authoritative`` checks encode implications that are proven to hold;
    a failure of one of them is an internal-consistency failure. The other
    checks compare the oracle against sufficiency statements that have known
    counterexamples and are reported for information only.
    """

    name: str
    holds: bool
    authoritative: bool = True


@dataclass(frozen=True)
class DetectabilityReport:
    oracle_detectable: bool
    lemma1_holds: bool
    lemma1_intersection_dim: int
    thm1: Theorem1Result
    spanning_tree: bool
    thm2: Theorem2Result
    reach: ReachConditions
    witness: np.ndarray | None
    consistency: tuple
    n: int
    N: int
    shared_h: bool
    node_undetectable_dims: tuple
    node_detectable: tuple
    big_unobservable_dim: int
    lemma3_predicted_dim: int | None
    antistable_dim: int
    components: tuple = ()
    component_reports: tuple = field(default_factory=tuple)

    @property
    def detectable(self):
        return self.oracle_detectable

    @property
    def consistent(self):
        return all(f.holds for f in self.consistency if f.authoritative)

    def to_dict(self):
        """Flat, JSON-ready view with a fixed key order."""
        d = {
            "detectable": bool(self.oracle_detectable),
            "consistent": bool(self.consistent),
            "oracle_detectable": bool(self.oracle_detectable),
            "lemma1_holds": bool(self.lemma1_holds),
            "lemma1_intersection_dim": int(self.lemma1_intersection_dim),
            "n": int(self.n),
            "N": int(self.N),
            "shared_h": bool(self.shared_h),
            "thm1": {
                "i": bool(self.thm1.i),
                "ii": bool(self.thm1.ii),
                "iii": bool(self.thm1.iii),
                "rank_OH": int(self.thm1.rank_OH),
                "max_dim_C": int(self.thm1.max_dim_C),
                "ii_per_node": [bool(x) for x in self.thm1.ii_per_node],
                "advisory": bool(self.thm1.advisory),
            },
            "spanning_tree": bool(self.spanning_tree),
            "thm2_applicable": bool(self.thm2.applicable),
            "thm2_verdict": self.thm2.verdict,
            "corollary1_applicable": bool(self.thm2.corollary1_applicable),
            "corollary1_verdict": self.thm2.corollary1_verdict,
            "corollary2_roots": [int(r) for r in self.thm2.corollary2_roots],
            "corollary2_verdict": self.thm2.corollary2_verdict,
            "h_observable": bool(self.reach.h_observable),
            "per_reach": [
                {
                    "reach_id": r.reach_id,
                    "vertices": [int(v) for v in r.vertices],
                    "exclusive": [int(v) for v in r.exclusive],
                    "common": [int(v) for v in r.common],
                    "cap_dim": int(r.cap_dim),
                    "cap_condition": bool(r.cap_condition),
                    "per_node_ii": [bool(x) for x in r.per_node_ii],
                }
                for r in self.reach.reaches
            ],
            "theorem3_holds": bool(self.reach.theorem3_holds),
            "theorem4_verdict": self.reach.theorem4_verdict,
            "node_undetectable_dims": [int(x) for x in self.node_undetectable_dims],
            "node_detectable": [bool(x) for x in self.node_detectable],
            "big_unobservable_dim": int(self.big_unobservable_dim),
            "lemma3_predicted_dim": self.lemma3_predicted_dim,
            "antistable_dim": int(self.antistable_dim),
            "witness": None if self.witness is None else [float(x) for x in self.witness],
            "consistency": [
                {"name": f.name, "holds": bool(f.holds), "authoritative": bool(f.authoritative)}
                for f in self.consistency
            ],
            "components": [[int(v) for v in c] for c in self.components],
        }
        if self.component_reports:
            d["component_reports"] = [r.to_dict() for r in self.component_reports]
        return d


def _analyze_connected(net, tol):
    pair = augment(net)
    C_spaces = undetectable_subspaces(net, tol)
    flags = []
    try:
        big_O = big_unobservable_subspace(net, tol, pair)
        structured_ok = True
    except ConsistencyError:
        big_O = _direct_big_unobservable(net, pair, tol)
        structured_ok = False
    if net.shared_h:
        flags.append(ConsistencyFlag("lemma3_structure", structured_ok))
        predicted, _, _ = lemma3_dimension(net, tol)
        flags.append(ConsistencyFlag("lemma3_dimension", big_O.dim == predicted))
    else:
        predicted = None
    try:
        anti = antistable_kernel_augmented(net, tol, pair)
        flags.append(ConsistencyFlag("lemma2_structure", True))
    except ConsistencyError:
        anti = antistable_modal_subspace(pair.Abar, tol.eps_stab, tol.rank_tol)
        flags.append(ConsistencyFlag("lemma2_structure", False))

    lem1 = lemma1_check(net, tol, pair, big_O, C_spaces)
    oracle = oracle_detectable(net, tol, pair)
    thm1 = theorem1_necessary(net, tol, C_spaces)
    thm2 = theorem2_sufficient(net, tol, thm1, C_spaces)
    rc = reach_conditions(net, tol, C_spaces)

    flags.append(ConsistencyFlag("lemma1_matches_oracle", lem1.holds == oracle))
    if lem1.witness is not None:
        flags.append(ConsistencyFlag("witness_valid", witness_valid(net, lem1.witness, tol, big_O, C_spaces)))
    shared = net.shared_h
    if oracle:
        flags.append(ConsistencyFlag("theorem1_necessity", thm1.i and thm1.ii and thm1.iii, shared))
        flags.append(ConsistencyFlag("theorem3_necessity", rc.theorem3_holds, shared))
    if thm2.corollary1_verdict:
        flags.append(ConsistencyFlag("corollary1_sufficiency", oracle))
    if thm2.corollary2_verdict:
        flags.append(ConsistencyFlag("corollary2_sufficiency", oracle))
    if shared and thm2.verdict:
        flags.append(ConsistencyFlag("theorem2_sufficiency", oracle, authoritative=False))
    if rc.theorem4_verdict:
        single = len(rc.reaches) == 1
        flags.append(ConsistencyFlag("theorem4_sufficiency", oracle, authoritative=single))

    return DetectabilityReport(
        oracle_detectable=oracle,
        lemma1_holds=lem1.holds,
        lemma1_intersection_dim=lem1.intersection_dim,
        thm1=thm1,
        spanning_tree=thm2.applicable,
        thm2=thm2,
        reach=rc,
        witness=lem1.witness,
        consistency=tuple(flags),
        n=net.n,
        N=net.N,
        shared_h=shared,
        node_undetectable_dims=tuple(C.dim for C in C_spaces),
        node_detectable=tuple(C.is_zero for C in C_spaces),
        big_unobservable_dim=big_O.dim,
        lemma3_predicted_dim=predicted,
        antistable_dim=anti.dim,
        components=tuple(dg.weak_components(net.graph)),
    )


def analyze(net, tol=Tolerances()):
    """Evaluate every criterion, the oracle and their cross-checks.

    A disconnected graph is split into weakly connected components, each
    analysed as its own network; the top-level report then covers the whole
    graph and lists the component reports. Every check is computed even when
    an earlier one already settles the verdict.
    """
    report = _analyze_connected(net, tol)
    comps = dg.weak_components(net.graph)
    if len(comps) == 1:
        return report
    subs = tuple(_analyze_connected(net.restrict(c), tol) for c in comps)
    flags = report.consistency + (
        ConsistencyFlag(
            "components_match_whole",
            all(r.oracle_detectable for r in subs) == report.oracle_detectable,
        ),
    )
    return DetectabilityReport(**{**report.__dict__, "consistency": flags, "component_reports": subs})
