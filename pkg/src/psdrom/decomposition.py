"""Snapshot ensembles, POD and cotangent-lift bases, projection errors."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .symplectic import SymplecticBasis


@dataclass(frozen=True, eq=False)
class SnapshotEnsemble:
    """Column-stacked snapshots ``x(t_i) = (q(t_i); p(t_i))``.

    Attributes:
        states: 2n x N array, one state per column.
        times: N strictly increasing sample times.
        forces: optional n x N array of ``f_H(x(t_i))``.
    """

    states: np.ndarray
    times: np.ndarray
    forces: np.ndarray | None = None

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if states.ndim != 2 or states.shape[0] % 2 or states.shape[0] == 0:
            raise ValueError(f"states must be 2n x N with n >= 1, got shape {states.shape}")
        if states.shape[1] == 0:
            raise ValueError("snapshot ensemble is empty")
        times = np.array(self.times, dtype=float).reshape(-1)
        if times.shape[0] != states.shape[1]:
            raise ValueError(f"{times.shape[0]} sample times for {states.shape[1]} snapshots")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        forces = self.forces
        if forces is not None:
            forces = np.array(forces, dtype=float)
            if forces.ndim == 1:
                forces = forces[:, None]
            if forces.shape != (states.shape[0] // 2, states.shape[1]):
                raise ValueError(
                    f"force block must be {states.shape[0] // 2} x {states.shape[1]}, got {forces.shape}"
                )
            forces.setflags(write=False)
        states.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "forces", forces)

    @property
    def half_dim(self) -> int:
        return self.states.shape[0] // 2

    @property
    def count(self) -> int:
        return self.states.shape[1]

    @property
    def q(self) -> np.ndarray:
        return self.states[: self.half_dim]

    @property
    def p(self) -> np.ndarray:
        return self.states[self.half_dim :]

    @classmethod
    def from_trajectory(cls, times, states, stride: int = 1, force=None) -> "SnapshotEnsemble":
        """Sample every ``stride``-th row of a (steps+1) x 2n state history.

        ``force`` is an optional callable ``x -> f_H(x)`` evaluated per snapshot.
        """
        times = np.asarray(times)[::stride]
        X = np.asarray(states)[::stride].T
        F = None
        if force is not None:
            F = np.column_stack([force(x) for x in X.T])
        return cls(X, times, F)

    def to_csv(self, path) -> None:
        """Write ``t,q_1..q_n,p_1..p_n[,f_1..f_n]``, one snapshot per row."""
        n = self.half_dim
        header = ["t"] + [f"q_{i}" for i in range(1, n + 1)] + [f"p_{i}" for i in range(1, n + 1)]
        if self.forces is not None:
            header += [f"f_{i}" for i in range(1, n + 1)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for j in range(self.count):
                row = [self.times[j], *self.states[:, j]]
                if self.forces is not None:
                    row += list(self.forces[:, j])
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "SnapshotEnsemble":
        with open(Path(path), newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        header, body = rows[0], np.array(rows[1:], dtype=float)
        n = sum(1 for h in header if h.startswith("q_"))
        if header[0] != "t" or n == 0 or len(header) not in (1 + 2 * n, 1 + 3 * n):
            raise ValueError(f"unrecognized snapshot header: {header[:4]}...")
        forces = body[:, 1 + 2 * n :].T if len(header) == 1 + 3 * n else None
        return cls(body[:, 1 : 1 + 2 * n].T, body[:, 0], forces)


@dataclass(frozen=True)
class SingularSpectrum:
    """Nonincreasing singular values of a snapshot matrix."""

    values: np.ndarray
    source: str

    def tail(self, k: int) -> float:
        """``sqrt(sum_{i>k} values_i^2)``: truncation error after ``k`` modes."""
        return float(np.sqrt(np.sum(self.values[k:] ** 2)))


def build_state_matrix(ens: SnapshotEnsemble) -> np.ndarray:
    """``M_x = [x(t_1), ..., x(t_N)]``, shape 2n x N."""
    return np.array(ens.states)


def build_extended_matrix(ens: SnapshotEnsemble) -> np.ndarray:
    """``M_qp = [q(t_1)..q(t_N), p(t_1)..p(t_N)]``, shape n x 2N."""
    return np.hstack([ens.q, ens.p])


def build_energy_matrix(ens: SnapshotEnsemble, weight: float = 1.0) -> np.ndarray:
    """``M_qpf = [q.., p.., weight * f_H..]``, shape n x 3N."""
    if ens.forces is None:
        raise ValueError("ensemble carries no force snapshots")
    return np.hstack([ens.q, ens.p, weight * ens.forces])


def _fix_signs(U: np.ndarray) -> np.ndarray:
    # first entry above round-off made nonnegative, column by column
    U = U.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max(initial=0.0))
        if big.size and col[big[0]] < 0:
            U[:, j] = -col
    return U


def pod_basis(M: np.ndarray, k: int, source: str = "pod_state") -> tuple[np.ndarray, SingularSpectrum]:
    """Leading ``k`` left singular vectors of ``M`` and its full singular spectrum."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("snapshot matrix must be 2-D")
    if not 1 <= k <= min(M.shape):
        raise ValueError(f"k={k} outside 1..{min(M.shape)} for a {M.shape} matrix")
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return _fix_signs(U[:, :k]), SingularSpectrum(s, source)


def cotangent_lift(ens: SnapshotEnsemble, k: int) -> SymplecticBasis:
    """Cotangent-lift PSD basis ``diag(phi, phi)`` from the extended snapshot matrix."""
    M = build_extended_matrix(ens)
    if not 1 <= k <= min(M.shape):
        raise ValueError(f"k={k} outside 1..{min(M.shape)}")
    if not np.any(M):
        raise ValueError("extended snapshot matrix is identically zero")
    phi, _ = pod_basis(M, k, source="cotangent")
    return SymplecticBasis.cotangent(phi)


def cotangent_lift_energy(
    ens: SnapshotEnsemble, k: int, weight: float = 1.0
) -> SymplecticBasis:
    """Cotangent lift fitted to q, p and the force snapshots together.

    ``weight`` scales the force columns before the SVD.
    """
    M = build_energy_matrix(ens, weight)
    if not 1 <= k <= min(M.shape):
        raise ValueError(f"k={k} outside 1..{min(M.shape)}")
    if not np.any(M):
        raise ValueError("energy snapshot matrix is identically zero")
    phi, _ = pod_basis(M, k, source="cotangent_energy")
    return SymplecticBasis.cotangent(phi)


def spectrum(M: np.ndarray, source: str) -> SingularSpectrum:
    """Singular values of a snapshot matrix, largest first."""
    return SingularSpectrum(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False), source)


def projection_error(M: np.ndarray, A: SymplecticBasis) -> float:
    """``||M - A A+ M||_F``."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.shape[0] != 2 * A.full_half_dim:
        raise ValueError(f"matrix has {M.shape[0]} rows, basis expects {2 * A.full_half_dim}")
    return float(np.linalg.norm(M - A.matrix @ (A.inverse @ M)))


@dataclass(frozen=True)
class ErrorOrdering:
    """Projection errors bracketing POD by the cotangent lift.

    ``e_pod_2k`` truncates the state-matrix spectrum after 2k values;
    ``e_pod_k_alt`` after k values (the indexing used in some derivations of
    the lower bound). The chain checked is
    ``e_cot_4k / 2 <= e_pod_2k <= e_cot_2k``.

    The upper bound always holds (POD is optimal among rank-2k projections)
    and so does ``e_cot_4k / 2 <= e_pod_k_alt``. The lower bound against
    ``e_pod_2k`` can fail once 2k approaches ``min(n, N)``, where POD becomes
    nearly exact but the lift does not.
    """

    k: int
    e_cot_2k: float
    e_cot_4k: float
    e_pod_2k: float
    e_pod_k_alt: float
    slack: float = 1e-10

    @property
    def lower_holds(self) -> bool:
        return 0.5 * self.e_cot_4k <= self.e_pod_2k + self.slack

    @property
    def upper_holds(self) -> bool:
        return self.e_pod_2k <= self.e_cot_2k + self.slack

    @property
    def lower_holds_alt(self) -> bool:
        return 0.5 * self.e_cot_4k <= self.e_pod_k_alt + self.slack

    @property
    def holds(self) -> bool:
        return self.lower_holds and self.upper_holds


def error_ordering_report(ens: SnapshotEnsemble, k: int, slack: float = 1e-10) -> ErrorOrdering:
    """Compare POD and cotangent-lift truncation errors on one ensemble."""
    n, N = ens.half_dim, ens.count
    if k < 1 or 2 * k > min(2 * n, N) or 2 * k > min(n, 2 * N):
        raise ValueError(f"k={k} infeasible for n={n}, N={N}")
    cot = spectrum(build_extended_matrix(ens), "cotangent")
    pod = spectrum(build_state_matrix(ens), "pod_state")
    return ErrorOrdering(k, cot.tail(k), cot.tail(2 * k), pod.tail(2 * k), pod.tail(k), slack)
