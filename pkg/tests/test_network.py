import json

import numpy as np
import pytest
import scipy.linalg

from distdetect import Digraph, ObserverNetwork, Plant
from distdetect.digraph import laplacian, reaches
from distdetect.errors import InputError
from distdetect.lti import pbh_detectable
from distdetect.network import (
    Tolerances,
    analyze,
    antistable_kernel_augmented,
    augment,
    big_unobservable_subspace,
    lemma1_check,
    lemma3_dimension,
    oracle_detectable,
    reach_conditions,
    theorem1_necessary,
    theorem2_sufficient,
    undetectable_subspaces,
    witness_valid,
)
from distdetect.subspaces import Subspace

from conftest import RING_A, SLAM_H1, SLAM_H2, ring_network, slam_network

H_ROWS35 = np.eye(6)[[2, 4]]
H_ROWS25 = np.eye(6)[[1, 4]]


def test_augment_single_node_has_zero_communication():
    C = np.array([[1.0, 0.0]])
    net = ObserverNetwork(Plant(np.eye(2)), (C,), np.eye(2), Digraph(1))
    pair = augment(net)
    assert np.array_equal(pair.Abar, np.eye(2))
    assert np.array_equal(pair.Cbar, C)
    assert not np.any(pair.Hbar)
    assert oracle_detectable(net) == pbh_detectable(C, np.eye(2))


def test_augment_slam_per_node():
    pair = augment(slam_network())
    expected = np.block([[SLAM_H1, -SLAM_H1], [-SLAM_H2, SLAM_H2]])
    assert np.array_equal(pair.Hbar, expected)
    assert pair.Abar.shape == (12, 12) and not np.any(pair.Abar)


def test_augment_ring_shared_is_kronecker():
    H = np.arange(12.0).reshape(2, 6)
    net = ring_network(H)
    assert np.array_equal(augment(net).Hbar, np.kron(laplacian(net.graph), H))


def test_network_validation():
    with pytest.raises(InputError):
        ObserverNetwork(Plant(np.eye(2)), (np.eye(2),), np.eye(2), Digraph(2))
    with pytest.raises(InputError):
        ObserverNetwork(Plant(np.eye(2)), (np.eye(3),), np.eye(2), Digraph(1))
    with pytest.raises(InputError):
        ObserverNetwork(Plant(np.eye(2)), (np.eye(2), np.eye(2)), (np.eye(2),), Digraph(2))


def test_big_unobservable_with_observable_H_is_consensus_space():
    O = big_unobservable_subspace(ring_network(np.eye(6)))
    assert O.dim == 6
    assert O.equals(Subspace.span(np.kron(np.ones((6, 1)), np.eye(6))))


def test_big_unobservable_zero_H_is_everything():
    assert big_unobservable_subspace(ring_network(np.zeros((1, 6)))).dim == 36


@pytest.mark.parametrize("H", [np.eye(6), H_ROWS35, H_ROWS25, np.zeros((1, 6))])
def test_lemma3_dimension_ring(H):
    net = ring_network(H)
    predicted, d_L, d_O = lemma3_dimension(net)
    assert d_L == 1
    assert big_unobservable_subspace(net).dim == predicted == 6 * d_L + 5 * d_O


def test_antistable_augmented_examples():
    assert antistable_kernel_augmented(slam_network()).dim == 12
    assert antistable_kernel_augmented(ring_network(np.eye(6))).dim == 36
    stable = ObserverNetwork(Plant(-np.eye(3)), (np.eye(3),) * 4, np.eye(3), Digraph.ring(4))
    assert antistable_kernel_augmented(stable).is_zero


def test_lemma1_ring_examples():
    assert lemma1_check(ring_network(np.eye(6))).holds
    assert lemma1_check(ring_network(H_ROWS35)).holds
    res = lemma1_check(ring_network(H_ROWS25))
    assert not res.holds
    assert witness_valid(ring_network(H_ROWS25), res.witness)
    assert abs(np.linalg.norm(res.witness) - 1) < 1e-12


def test_lemma1_slam_matches_oracle():
    net = slam_network()
    assert lemma1_check(net).holds
    pair = augment(net)
    assert pbh_detectable(pair.output, pair.Abar)


def test_theorem1_ring():
    net = ring_network(np.eye(6))
    t = theorem1_necessary(net)
    assert t.i and t.ii and t.iii
    assert t.rank_OH == 6
    assert undetectable_subspaces(net)[1].dim == 3
    # node 1 only sees coordinates 1 and 2, so its undetectable subspace is 4-dimensional
    assert t.max_dim_C == 4


def test_theorem1_all_detectable_nodes():
    net = ObserverNetwork(Plant(np.eye(2)), (np.eye(2), np.eye(2)), np.zeros((1, 2)), Digraph(2, frozenset({(1, 2)})))
    t = theorem1_necessary(net)
    assert t.i and t.ii and t.iii and t.max_dim_C == 0 and t.rank_OH == 0


def test_theorem1_rows25_fails_ii_at_node_with_d3():
    t = theorem1_necessary(ring_network(H_ROWS25))
    assert t.i and not t.ii
    # O_H = span{d3}; nodes whose view misses coordinate 3 and its consequences
    C_spaces = undetectable_subspaces(ring_network(H_ROWS25))
    d3 = np.eye(6)[:, 2]
    assert t.ii_per_node == tuple(not C.contains(d3) for C in C_spaces)
    assert t.ii_per_node[0] is False and t.ii_per_node[1] is True


def test_theorem2_ring():
    r = theorem2_sufficient(ring_network(np.eye(6)))
    assert r.applicable and r.verdict and r.corollary1_applicable and r.corollary1_verdict
    r35 = theorem2_sufficient(ring_network(H_ROWS35))
    assert r35.verdict and r35.corollary1_verdict
    assert r35.corollary2_verdict is None  # no node is detectable on its own


def test_theorem2_not_applicable_without_tree():
    net = ObserverNetwork(Plant(np.eye(2)), (np.eye(2),) * 3, np.eye(2), Digraph(3, frozenset({(1, 2), (3, 2)})))
    r = theorem2_sufficient(net)
    assert not r.applicable and r.verdict is None


def test_corollary2_root_detectable():
    A = np.diag([1.0, 2.0])
    g = Digraph(3, frozenset({(1, 2), (2, 3)}))
    net = ObserverNetwork(Plant(A), (np.eye(2), np.zeros((1, 2)), np.zeros((1, 2))), np.array([[1.0, 1.0]]), g)
    r = theorem2_sufficient(net)
    assert r.roots == (1,) and r.corollary2_roots == (1,)
    assert r.corollary2_verdict is True
    assert oracle_detectable(net)


def _two_reach_net(Cs, H=np.eye(2), A=np.diag([1.0, 2.0])):
    return ObserverNetwork(Plant(A), tuple(Cs), H, Digraph(3, frozenset({(1, 2), (3, 2)})))


def test_reach_conditions_two_reaches_detectable():
    # nodes 1 and 3 are detectable on their own; node 2 sees nothing
    net = _two_reach_net([np.eye(2), np.zeros((1, 2)), np.array([[1.0, 1.0]])])
    rc = reach_conditions(net)
    assert len(rc.reaches) == 2 and all(r.cap_condition for r in rc.reaches)
    assert rc.theorem4_verdict is True
    assert oracle_detectable(net)


def test_reach_conditions_shared_undetectable_direction():
    # every node is blind to v = e1, so C_i = span{e1} at all three nodes
    C = np.array([[0.0, 1.0]])
    net = _two_reach_net([C, C, C])
    rc = reach_conditions(net)
    assert [r.cap_dim for r in rc.reaches] == [1, 1]
    assert not any(r.cap_condition for r in rc.reaches)
    assert not oracle_detectable(net)
    # witness from the necessity argument: b^1 ⊗ v
    b1 = reaches(net.graph).kernel_basis[0]
    w = np.kron(b1, [1.0, 0.0])
    w /= np.linalg.norm(w)
    assert witness_valid(net, w)


def test_reach_conditions_single_reach_reduces_to_corollary1():
    net = ring_network(np.eye(6))
    rc = reach_conditions(net)
    t2 = theorem2_sufficient(net)
    assert len(rc.reaches) == 1
    assert rc.theorem4_verdict == t2.corollary1_verdict


def test_oracle_ring():
    assert oracle_detectable(ring_network(np.eye(6)))
    assert not oracle_detectable(ring_network(H_ROWS25))


def test_analyze_ring_identity_all_green():
    rep = analyze(ring_network(np.eye(6)))
    assert rep.detectable and rep.consistent and rep.witness is None
    assert rep.thm2.corollary1_verdict
    assert all(f.holds for f in rep.consistency)


def test_analyze_ring_rows25():
    rep = analyze(ring_network(H_ROWS25))
    assert not rep.detectable and rep.consistent
    assert not rep.thm1.ii and rep.thm1.i
    assert rep.witness is not None


def test_analyze_slam_per_node():
    rep = analyze(slam_network())
    assert rep.detectable and rep.consistent
    assert rep.node_detectable == (False, False)
    assert rep.thm1.advisory
    assert rep.lemma3_predicted_dim is None


def test_analyze_slam_shared_sum_H_is_not_detectable():
    # H = H1 + H2 only sees the sum of the two robot positions: node 1 wrong
    # about robot 2 by v and node 2 wrong about robot 1 by v is invisible.
    net = slam_network(shared=True)
    rep = analyze(net)
    assert not rep.detectable and rep.consistent and not rep.thm1.advisory
    assert rep.thm1.i and rep.thm1.ii and rep.spanning_tree
    flag = {f.name: f for f in rep.consistency}["theorem2_sufficiency"]
    assert not flag.holds and not flag.authoritative
    w = np.array([0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0]) / np.sqrt(2)
    assert not np.any(augment(net).output @ w)
    assert witness_valid(net, w)


def test_slam_stacked_positions_is_detectable():
    net = ObserverNetwork(Plant(np.zeros((6, 6))), slam_network().channels, np.vstack([SLAM_H1, SLAM_H2]), slam_network().graph)
    assert analyze(net).detectable


def test_analyze_disconnected_graph():
    A = np.diag([1.0, -1.0])
    g = Digraph(4, frozenset({(1, 2), (3, 4)}))
    C_blind = np.array([[0.0, 1.0]])
    net = ObserverNetwork(Plant(A), (np.eye(2), C_blind, C_blind, C_blind), np.eye(2), g)
    rep = analyze(net)
    assert len(rep.component_reports) == 2
    assert rep.component_reports[0].detectable and not rep.component_reports[1].detectable
    assert not rep.detectable and rep.consistent


def test_report_json_is_deterministic():
    a = json.dumps(analyze(ring_network(H_ROWS25)).to_dict())
    b = json.dumps(analyze(ring_network(H_ROWS25)).to_dict())
    assert a == b


def test_tolerances_validation():
    with pytest.raises(InputError):
        Tolerances(rank_tol=-1.0)


def test_stacked_Cbar_is_block_diagonal():
    net = ring_network(np.eye(6))
    assert np.array_equal(augment(net).Cbar, scipy.linalg.block_diag(*(net.C_of(i) for i in range(1, 7))))
    assert RING_A.shape == (6, 6)
