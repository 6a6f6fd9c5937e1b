"""Single-pair analysis of ``(C, A)``: observability and detectability.

Two independent routes are provided. The geometric route builds the
unobservable and undetectable subspaces; the PBH route checks
``rank [A - lambda I; C] = n`` eigenvalue by eigenvalue. Agreement between
them is what the test-suite leans on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError
from .subspaces import (
    DEFAULT_EPS_STAB,
    DEFAULT_RANK_TOL,
    _as_matrix,
    antistable_modal_subspace,
    intersect,
    kernel,
    rank_cut,
)

EIG_CLUSTER_GAP = 1e-7


@dataclass(frozen=True)
class Plant:
    """State matrix ``A`` with an optional disturbance input matrix ``B2``."""

    A: np.ndarray
    B2: np.ndarray | None = None

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        if A.shape[0] != A.shape[1]:
            raise InputError(f"A must be square, got {A.shape}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        if self.B2 is not None:
            B2 = _as_matrix(self.B2, "B2")
            if B2.shape[0] != A.shape[0]:
                raise InputError("B2 row count must equal the state dimension")
            B2.setflags(write=False)
            object.__setattr__(self, "B2", B2)

    @property
    def n(self):
        return self.A.shape[0]


@dataclass(frozen=True)
class MeasurementChannel:
    """``y = C x + D xi + Dbar xi_i``; only ``C`` matters for detectability."""

    C: np.ndarray
    D: np.ndarray | None = None
    Dbar: np.ndarray | None = None

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.ndim == 1:
            C = C.reshape(1, -1) if C.size else C.reshape(0, 0)
        C = _as_matrix(C, "C")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)
        for name in ("D", "Dbar"):
            M = getattr(self, name)
            if M is not None:
                M = _as_matrix(M, name)
                if M.shape[0] != C.shape[0]:
                    raise InputError(f"{name} row count must match C")
                object.__setattr__(self, name, M)


def _check_pair(C, A):
    A = _as_matrix(A, "A")
    n = A.shape[0]
    if A.shape != (n, n):
        raise InputError(f"A must be square, got {A.shape}")
    C = np.asarray(C, dtype=float)
    if C.size == 0:
        C = np.zeros((0, n))
    C = _as_matrix(C, "C")
    if C.shape[1] != n:
        raise InputError(f"C has {C.shape[1]} columns, A is {n}x{n}")
    return C, A


def observability_matrix(C, A, powers=None):
    """Stack ``C, CA, ..., CA^(k-1)`` with ``k = powers or n``."""
    C, A = _check_pair(C, A)
    k = A.shape[0] if powers is None else powers
    blocks = [C]
    for _ in range(1, k):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def unobservable_subspace(C, A, tol=DEFAULT_RANK_TOL):
    C, A = _check_pair(C, A)
    return kernel(observability_matrix(C, A), tol)


def undetectable_subspace(C, A, tol=DEFAULT_RANK_TOL, eps_stab=DEFAULT_EPS_STAB):
    """Unobservable subspace intersected with the antistable modal subspace."""
    C, A = _check_pair(C, A)
    return intersect(
        unobservable_subspace(C, A, tol),
        antistable_modal_subspace(A, eps_stab, tol),
        tol,
    )


def distinct_eigenvalues(A, gap=EIG_CLUSTER_GAP):
    """Eigenvalues of ``A`` clustered so members of a cluster are within ``gap``."""
    try:
        ev = scipy.linalg.eigvals(np.asarray(A, dtype=float))
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("eigenvalue computation failed") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalError("eigenvalue computation returned non-finite values")
    clusters = []
    for lam in sorted(ev, key=lambda z: (z.real, z.imag)):
        for cl in clusters:
            if abs(lam - cl[0]) <= gap:
                cl.append(lam)
                break
        else:
            clusters.append([lam])
    return np.array([np.mean(cl) for cl in clusters])


def pbh_rank_deficient(C, A, lam, tol=DEFAULT_RANK_TOL):
    """True iff ``[A - lam I; C]`` loses column rank."""
    n = A.shape[0]
    M = np.vstack([A - lam * np.eye(n), C.astype(complex)])
    s = scipy.linalg.svdvals(M)
    return rank_cut(s, M.shape, tol) < n


def pbh_failures(C, A, eps_stab=None, tol=DEFAULT_RANK_TOL):
    """Distinct eigenvalues at which the PBH test fails.

    With ``eps_stab`` set only eigenvalues with ``Re >= -eps_stab`` are
    tested (detectability); otherwise all are (observability).
    """
    C, A = _check_pair(C, A)
    out = []
    for lam in distinct_eigenvalues(A):
        if eps_stab is not None and lam.real < -eps_stab:
            continue
        if pbh_rank_deficient(C, A, lam, tol):
            out.append(lam)
    return out


def pbh_observable(C, A, tol=DEFAULT_RANK_TOL):
    return not pbh_failures(C, A, None, tol)


def pbh_detectable(C, A, tol=DEFAULT_RANK_TOL, eps_stab=DEFAULT_EPS_STAB):
    return not pbh_failures(C, A, eps_stab, tol)
