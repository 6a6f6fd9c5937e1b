"""Detectability analysis for networks of consensus-coupled state observers."""

from .digraph import Digraph, has_spanning_tree, laplacian, reaches
from .errors import ConsistencyError, DetectError, InputError, NumericalError, PreconditionError
from .lti import (
    MeasurementChannel,
    Plant,
    observability_matrix,
    pbh_detectable,
    pbh_observable,
    undetectable_subspace,
    unobservable_subspace,
)
from .network import (
    AugmentedPair,
    DetectabilityReport,
    ObserverNetwork,
    Tolerances,
    analyze,
    augment,
    lemma1_check,
    oracle_detectable,
)
from .subspaces import Subspace, antistable_modal_subspace, contains, intersect, kernel, subspace_sum
from .synthesis import GainSet, certify_stabilizable, closed_loop_matrix, simulate_error_dynamics

__all__ = [
    "AugmentedPair",
    "ConsistencyError",
    "DetectError",
    "DetectabilityReport",
    "Digraph",
    "GainSet",
    "InputError",
    "MeasurementChannel",
    "NumericalError",
    "ObserverNetwork",
    "Plant",
    "PreconditionError",
    "Subspace",
    "Tolerances",
    "analyze",
    "antistable_modal_subspace",
    "augment",
    "certify_stabilizable",
    "closed_loop_matrix",
    "contains",
    "has_spanning_tree",
    "intersect",
    "kernel",
    "laplacian",
    "lemma1_check",
    "observability_matrix",
    "oracle_detectable",
    "pbh_detectable",
    "pbh_observable",
    "reaches",
    "simulate_error_dynamics",
    "subspace_sum",
    "undetectable_subspace",
    "unobservable_subspace",
]
