"""Stabilising output injection and simulation of the networked error dynamics."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError, PreconditionError
from .lti import pbh_detectable
from .network import augment

OVERFLOW_NORM = 1e150


def spectral_abscissa(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(M).real))


@dataclass(frozen=True)
class Certificate:
    gain: np.ndarray
    spectral_abscissa: float
    closed_loop: np.ndarray


def certify_stabilizable(pair, margin=1e-6, rank_tol=1e-9, eps_stab=1e-9):
    """Dense gain ``G`` with ``Abar - G [Cbar; Hbar]`` Hurwitz.

    The gain is the steady-state Kalman-Bucy gain with unit weights, i.e. the
    dual of an LQR design on ``(Abar', [Cbar; Hbar]')``. It ignores the
    block structure of the node filters.
    """
    A = pair.Abar
    G = pair.output
    if not pbh_detectable(G, A, rank_tol, eps_stab):
        raise PreconditionError("augmented pair is not detectable; no stabilising injection exists")
    n = A.shape[0]
    if G.shape[0] == 0 or not np.any(G):
        gain = np.zeros((n, G.shape[0]))
    else:
        try:
            P = scipy.linalg.solve_continuous_are(A.T, G.T, np.eye(n), np.eye(G.shape[0]))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError("Riccati solve failed") from exc
        gain = P @ G.T
    closed = A - gain @ G
    abscissa = spectral_abscissa(closed)
    if not abscissa <= -margin:
        raise NumericalError(
            f"certificate misses the stability margin (abscissa {abscissa:.3e})",
            spectral_abscissa=abscissa,
        )
    return Certificate(gain, abscissa, closed)


@dataclass(frozen=True)
class GainSet:
    """Per-node measurement gains ``L_i`` and consensus gains ``K_i``."""

    L: tuple
    K: tuple

    def __post_init__(self):
        if len(self.L) != len(self.K):
            raise InputError("L and K must have one entry per node")
        object.__setattr__(self, "L", tuple(np.atleast_2d(np.asarray(x, dtype=float)) for x in self.L))
        object.__setattr__(self, "K", tuple(np.atleast_2d(np.asarray(x, dtype=float)) for x in self.K))

    @classmethod
    def zeros(cls, net):
        L = [np.zeros((net.n, net.C_of(i).shape[0])) for i in net.graph.vertices]
        K = [np.zeros((net.n, net.H_of(i).shape[0])) for i in net.graph.vertices]
        return cls(tuple(L), tuple(K))


def _check_gains(net, gains):
    if len(gains.L) != net.N:
        raise InputError(f"{len(gains.L)} gain pairs for {net.N} nodes")
    for i in net.graph.vertices:
        L, K = gains.L[i - 1], gains.K[i - 1]
        C, H = net.C_of(i), net.H_of(i)
        if C.shape[0] == 0 and L.size == 0:
            L = np.zeros((net.n, 0))
        if H.shape[0] == 0 and K.size == 0:
            K = np.zeros((net.n, 0))
        if L.shape != (net.n, C.shape[0]):
            raise InputError(f"L_{i} has shape {L.shape}, expected {(net.n, C.shape[0])}")
        if K.shape != (net.n, H.shape[0]):
            raise InputError(f"K_{i} has shape {K.shape}, expected {(net.n, H.shape[0])}")
        yield i, L, K, C, H


def closed_loop_matrix(net, gains, pair=None):
    """Block matrix of the error dynamics for per-node gains.

    Diagonal blocks are ``A - L_i C_i - p_i K_i H_i`` and off-diagonal blocks
    ``a_ij K_i H_i``. The result is compared with
    ``Abar - diag(L) Cbar - diag(K) Hbar``.
    """
    n, N = net.n, net.N
    p = net.graph.in_degrees()
    adj = net.graph.adjacency()
    M = np.zeros((n * N, n * N))
    Ls, Ks = [], []
    for i, L, K, C, H in _check_gains(net, gains):
        Ls.append(L)
        Ks.append(K)
        KH = K @ H
        r = slice((i - 1) * n, i * n)
        M[r, r] = net.A - L @ C - p[i - 1] * KH
        for j in net.graph.in_neighbours(i):
            M[r, (j - 1) * n : j * n] = adj[i - 1, j - 1] * KH
    pair = pair or augment(net)
    stacked = (
        pair.Abar
        - scipy.linalg.block_diag(*Ls).reshape(n * N, -1) @ pair.Cbar
        - scipy.linalg.block_diag(*Ks).reshape(n * N, -1) @ pair.Hbar
    )
    if not np.allclose(M, stacked, atol=1e-12, rtol=0):
        raise NumericalError("block-wise and stacked closed-loop matrices differ")
    return M


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    errors: np.ndarray
    norms: np.ndarray
    n: int
    N: int

    def node_error(self, i):
        """Samples of ``e_i`` (1-based node index)."""
        return self.errors[:, (i - 1) * self.n : i * self.n]

    @property
    def norm_ratio(self):
        return float(self.norms[-1] / self.norms[0]) if self.norms[0] > 0 else float("nan")

    def to_csv(self, path):
        header = ["t"] + [f"e_{i}_{k}" for i in range(1, self.N + 1) for k in range(1, self.n + 1)] + ["norm"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t, e, nrm in zip(self.times, self.errors, self.norms):
                w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in e] + [f"{nrm:.17g}"])


class SimulationDivergence(NumericalError):
    pass


def default_step(M):
    rho = float(np.max(np.abs(np.linalg.eigvals(M)))) if np.size(M) else 0.0
    return 1e-3 / max(1.0, rho)


def rk4_propagator(M, dt):
    """One classical RK4 step for ``e' = M e`` written as a matrix."""
    h = dt * np.asarray(M, dtype=float)
    I = np.eye(h.shape[0])
    h2 = h @ h
    return I + h + h2 / 2 + h2 @ h / 6 + h2 @ h2 / 24


def simulate_linear(M, e0, T, dt=None, record_every=1, n=None, N=1):
    """Fixed-step RK4 integration of ``e' = M e`` from ``e0`` over ``[0, T]``.

    Samples are kept every ``record_every`` steps and the final state is
    always kept. For a linear system one RK4 step is the fixed matrix
    ``Phi``, so the gap between samples is bridged with ``Phi**record_every``.
    The last step is shortened to land exactly on ``T``.
    """
    M = np.asarray(M, dtype=float)
    e = np.asarray(e0, dtype=float).ravel().copy()
    if M.shape != (e.size, e.size):
        raise InputError(f"initial error of length {e.size} does not match M {M.shape}")
    if not np.all(np.isfinite(e)):
        raise InputError("initial error must be finite")
    dt = default_step(M) if dt is None else float(dt)
    if not dt > 0 or not T >= dt:
        raise InputError("need dt > 0 and T >= dt")
    record_every = max(1, int(record_every))
    steps = int(np.ceil(T / dt - 1e-9))
    last = T - (steps - 1) * dt
    Phi = rk4_propagator(M, dt)
    Phi_last = Phi if abs(last - dt) <= 1e-12 * dt else rk4_propagator(M, last)
    record_every = min(record_every, steps)
    jump = np.linalg.matrix_power(Phi, record_every)
    times, samples = [0.0], [e.copy()]
    k = 0
    while k < steps:
        if k + record_every < steps:
            e = jump @ e
            k += record_every
        else:
            e = Phi_last @ (np.linalg.matrix_power(Phi, steps - 1 - k) @ e)
            k = steps
        nrm = np.linalg.norm(e)
        if not np.isfinite(nrm) or nrm > OVERFLOW_NORM:
            raise SimulationDivergence(f"error norm overflowed by step {k}", step=k, time=min(k * dt, T))
        times.append(T if k == steps else k * dt)
        samples.append(e.copy())
    errors = np.array(samples)
    n = e.size // N if n is None else n
    return Trajectory(np.array(times), errors, np.linalg.norm(errors, axis=1), n, N)


def simulate_error_dynamics(net, gains, e0, T, dt=None, record_every=1):
    M = closed_loop_matrix(net, gains)
    return simulate_linear(M, e0, T, dt, record_every, net.n, net.N)


def horizon_for(abscissa, target=-10.0):
    """Horizon ``T`` with ``abscissa * T = target`` for a stable abscissa."""
    if not abscissa < 0:
        raise PreconditionError("closed loop is not stable")
    return target / abscissa


def settling_horizon(M, ratio=1e-3, target=-10.0):
    """Horizon after which ``||e(T)|| <= ratio * ||e(0)||`` is guaranteed.

    Uses ``||exp(M t)|| <= kappa * exp(a t)`` with ``kappa`` the eigenvector
    condition number; never shorter than ``horizon_for(a, target)``.
    """
    a = spectral_abscissa(M)
    base = horizon_for(a, target)
    kappa = transient_bound(M)
    if not np.isfinite(kappa):
        return base
    return max(base, np.log(kappa / ratio) / -a)


def transient_bound(M):
    """Eigenvector condition number of ``M``; bounds ``||exp(Mt)|| / exp(a t)``."""
    _, V = np.linalg.eig(M)
    return float(np.linalg.cond(V))


__all__ = [
    "Certificate",
    "GainSet",
    "SimulationDivergence",
    "Trajectory",
    "certify_stabilizable",
    "closed_loop_matrix",
    "default_step",
    "horizon_for",
    "settling_horizon",
    "simulate_error_dynamics",
    "simulate_linear",
    "spectral_abscissa",
    "transient_bound",
]
