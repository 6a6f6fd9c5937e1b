"""Rank-revealing subspace algebra on orthonormal bases.

Every :class:`Subspace` stores an orthonormal basis, so set operations
reduce to SVDs of stacked bases. Numerical rank uses the cut

    sigma < tol * sigma_max * max(m, n)

throughout, with ``tol`` defaulting to :data:`DEFAULT_RANK_TOL`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError

DEFAULT_RANK_TOL = 1e-9
DEFAULT_EPS_STAB = 1e-9

_ORTHO_TOL = 1e-12


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def rank_cut(sigma, shape, tol=DEFAULT_RANK_TOL):
    """Number of singular values above the scale-aware threshold."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > tol * sigma[0] * max(shape)))


def numerical_rank(M, tol=DEFAULT_RANK_TOL):
    M = _as_matrix(M)
    if M.size == 0:
        return 0
    return rank_cut(scipy.linalg.svdvals(M), M.shape, tol)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n held as an n x d orthonormal basis.

    The zero subspace has ``d == 0``. Instances are immutable; the basis
    array is marked read-only.
    """

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_RANK_TOL
    _projector: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise InputError("ambient dimension must be positive")
        B = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        if B.shape[1] > self.ambient_dim:
            raise InputError("more basis vectors than the ambient dimension")
        if B.shape[1] and not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=_ORTHO_TOL, rtol=0):
            raise InputError("basis columns are not orthonormal")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors, ambient_dim=None, tol=DEFAULT_RANK_TOL):
        """Subspace spanned by the columns of ``vectors``."""
        V = np.asarray(vectors, dtype=float)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        n = V.shape[0] if ambient_dim is None else ambient_dim
        V = V.reshape(n, -1)
        return cls(n, orth(V, tol), tol)

    @classmethod
    def zero(cls, n, tol=DEFAULT_RANK_TOL):
        return cls(n, np.zeros((n, 0)), tol)

    @classmethod
    def full(cls, n, tol=DEFAULT_RANK_TOL):
        return cls(n, np.eye(n), tol)

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def is_zero(self):
        return self.dim == 0

    @property
    def projector(self):
        if self._projector is None:
            P = self.basis @ self.basis.T
            P.setflags(write=False)
            object.__setattr__(self, "_projector", P)
        return self._projector

    def contains(self, v):
        return contains(self, v)

    def contains_subspace(self, other):
        return all(contains(self, col) for col in other.basis.T)

    def equals(self, other):
        """Mutual containment with equal dimension."""
        return (
            self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and self.contains_subspace(other)
            and other.contains_subspace(self)
        )

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def orth(M, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis for the column space of ``M`` (n x r)."""
    M = np.asarray(M, dtype=float)
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = scipy.linalg.svd(M, full_matrices=False)
    r = rank_cut(s, M.shape, tol)
    return U[:, :r]


def kernel(M, tol=DEFAULT_RANK_TOL):
    """Numerical null space of ``M`` as a :class:`Subspace`.

    Singular values below ``tol * sigma_max * max(m, n)`` count as zero.
    A zero matrix (or one with no rows) has the whole space as kernel.
    """
    M = _as_matrix(M)
    m, n = M.shape
    if m == 0:
        return Subspace.full(n, tol)
    _, s, Vt = scipy.linalg.svd(M, full_matrices=True)
    r = rank_cut(s, M.shape, tol)
    return Subspace(n, Vt[r:].T, tol)


def image(M, tol=DEFAULT_RANK_TOL):
    M = _as_matrix(M)
    return Subspace(M.shape[0], orth(M, tol), tol)


def _check_same_ambient(U, V):
    if U.ambient_dim != V.ambient_dim:
        raise InputError(
            f"ambient dimensions differ: {U.ambient_dim} vs {V.ambient_dim}"
        )


def intersect(U, V, tol=None):
    """Intersection via the null space of ``[U | -V]``."""
    _check_same_ambient(U, V)
    tol = max(U.tol, V.tol) if tol is None else tol
    n = U.ambient_dim
    if U.dim == 0 or V.dim == 0:
        return Subspace.zero(n, tol)
    K = kernel(np.hstack([U.basis, -V.basis]), tol)
    if K.dim == 0:
        return Subspace.zero(n, tol)
    W = U.basis @ K.basis[: U.dim]
    return Subspace(n, orth(W, tol), tol)


def intersect_all(subspaces, tol=None):
    subspaces = list(subspaces)
    if not subspaces:
        raise InputError("need at least one subspace")
    out = subspaces[0]
    for S in subspaces[1:]:
        if out.is_zero:
            break
        out = intersect(out, S, tol)
    return out


def subspace_sum(U, V, tol=None):
    _check_same_ambient(U, V)
    tol = max(U.tol, V.tol) if tol is None else tol
    return Subspace(U.ambient_dim, orth(np.hstack([U.basis, V.basis]), tol), tol)


def contains(U, v):
    """True iff ``||v - P_U v|| <= tol * max(1, ||v||)``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != U.ambient_dim:
        raise InputError(f"vector length {v.shape[0]} != ambient dimension {U.ambient_dim}")
    resid = v - U.basis @ (U.basis.T @ v)
    return bool(np.linalg.norm(resid) <= U.tol * max(1.0, np.linalg.norm(v)))


def direct_product(subspaces):
    """Cartesian product S_1 x ... x S_N as a subspace of R^(n_1+...+n_N).

    The basis is block diagonal; zero-dimensional factors add no columns.
    """
    subspaces = list(subspaces)
    if not subspaces:
        raise InputError("need at least one factor")
    tol = max(S.tol for S in subspaces)
    total = sum(S.ambient_dim for S in subspaces)
    blocks = [S.basis for S in subspaces]
    basis = scipy.linalg.block_diag(*blocks) if blocks else np.zeros((total, 0))
    return Subspace(total, basis.reshape(total, -1), tol)


def kron_subspace(M_basis, S):
    """Subspace spanned by ``kron(b, z)`` for b in cols of M_basis, z in S."""
    return Subspace.span(np.kron(M_basis, S.basis), M_basis.shape[0] * S.ambient_dim, S.tol)


@dataclass(frozen=True)
class ModalSplit:
    """Complementary invariant subspaces of a square matrix."""

    antistable: Subspace
    stable: Subspace
    eigenvalues: np.ndarray


def _ordered_schur(F, select, eps_stab):
    try:
        T, Z, sdim = scipy.linalg.schur(F, output="real", sort=select)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(
            "ordered Schur reordering failed",
            condition=_separation_estimate(F, eps_stab),
        ) from exc
    return T, Z, sdim


def _separation_estimate(F, eps_stab):
    """Rough conditioning proxy: distance of the spectrum to the split line."""
    ev = np.linalg.eigvals(F)
    gap = np.min(np.abs(ev.real + eps_stab)) if ev.size else np.inf
    return float(np.inf if gap == 0 else 1.0 / gap)


def modal_split(F, eps_stab=DEFAULT_EPS_STAB, tol=DEFAULT_RANK_TOL):
    """Antistable (Re >= -eps_stab) and stable invariant subspaces of ``F``.

    Both come from real Schur forms reordered so the wanted cluster leads;
    the leading Schur vectors then span the invariant subspace. F-invariance
    of each result is verified before returning.
    """
    F = _as_matrix(F, "F")
    n, m = F.shape
    if n != m:
        raise InputError("F must be square")
    _, Z_plus, k_plus = _ordered_schur(F, lambda re, im: re >= -eps_stab, eps_stab)
    _, Z_minus, k_minus = _ordered_schur(F, lambda re, im: re < -eps_stab, eps_stab)
    eig = np.linalg.eigvals(F)
    if k_plus + k_minus != n:
        raise NumericalError(
            "modal split does not cover the space",
            antistable=k_plus,
            stable=k_minus,
            condition=_separation_estimate(F, eps_stab),
        )
    plus = Subspace(n, Z_plus[:, :k_plus], tol)
    minus = Subspace(n, Z_minus[:, :k_minus], tol)
    scale = max(1.0, np.linalg.norm(F, 2))
    for S, label in ((plus, "antistable"), (minus, "stable")):
        if S.dim == 0:
            continue
        B = S.basis
        drift = np.linalg.norm(F @ B - B @ (B.T @ F @ B), 2)
        if drift > 1e-8 * scale:
            raise NumericalError(
                f"{label} Schur subspace is not invariant",
                residual=float(drift),
                condition=_separation_estimate(F, eps_stab),
            )
    return ModalSplit(plus, minus, eig)


def antistable_modal_subspace(F, eps_stab=DEFAULT_EPS_STAB, tol=DEFAULT_RANK_TOL):
    """Invariant subspace of eigenvalues in the closed right half-plane."""
    return modal_split(F, eps_stab, tol).antistable
