"""Eigenvalue stability diagnostics for reduced linear operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .decomposition import SnapshotEnsemble, build_state_matrix, cotangent_lift, pod_basis
from .integrator import integrate
from .reduction import reduce_pod_galerkin, reduce_structure_preserving
from .wave import WaveParams, assemble_wave_model, initial_condition


@dataclass(frozen=True)
class StabilityReport:
    """Most unstable eigenpair of a reduced operator.

    ``a_star`` is ``|xi*^T z0|``, the size of the initial state's coefficient
    along the leading eigenvector; growth conclusions need it nonzero.
    """

    k: int
    beta: float
    lambda_star: complex
    xi_star: np.ndarray
    a_star: float
    spectrum: np.ndarray

    @property
    def stable(self) -> bool:
        return self.lambda_star.real < 0

    @property
    def excited(self) -> bool:
        return self.a_star > 1e-14


def reduced_spectrum(op: np.ndarray) -> np.ndarray:
    """All eigenvalues of a square real matrix."""
    op = np.asarray(op, dtype=float)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got {op.shape}")
    if not np.all(np.isfinite(op)):
        raise ValueError("operator has non-finite entries")
    return sla.eigvals(op)


def _normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    lead = v[nz[0]]
    return v * (abs(lead) / lead)


def leading_mode(op: np.ndarray, z0: np.ndarray, k: int, beta: float) -> StabilityReport:
    w, V = sla.eig(np.asarray(op, dtype=float))
    i = int(np.argmax(w.real))
    xi = _normalize(V[:, i])
    a = float(abs(xi @ z0))
    return StabilityReport(k, beta, complex(w[i]), xi, a, w)


def wave_snapshots(p: WaveParams) -> SnapshotEnsemble:
    """Full-model snapshots every ``snapshot_interval`` over ``[0, T]``, forces included."""
    model = assemble_wave_model(p)
    traj, _ = integrate(model, initial_condition(p), p.dt, p.T)
    return SnapshotEnsemble.from_trajectory(traj.times, traj.states, p.snapshot_stride, model.force)


def table2_cell(p: WaveParams, beta: float, k: int, snapshots: SnapshotEnsemble | None = None) -> StabilityReport:
    """Leading eigenvalue of the POD-Galerkin operator ``Phi^T (K + L) Phi`` with ``k`` modes."""
    p = p.with_(beta=beta)
    if snapshots is None:
        snapshots = wave_snapshots(p)
    M = build_state_matrix(snapshots)
    if not np.any(M):
        raise ValueError("snapshot matrix is identically zero")
    phi, _ = pod_basis(M, k)
    red = reduce_pod_galerkin(assemble_wave_model(p), phi)
    return leading_mode(red.operator, red.reduce_state(initial_condition(p)), k, beta)


def psd_stability(p: WaveParams, k: int, snapshots: SnapshotEnsemble | None = None) -> StabilityReport:
    """Leading eigenvalue of ``A+ (K + L) A`` for the cotangent-lift basis with ``k`` modes."""
    if snapshots is None:
        snapshots = wave_snapshots(p)
    A = cotangent_lift(snapshots, k)
    red = reduce_structure_preserving(assemble_wave_model(p), A)
    return leading_mode(red.operator, red.reduce_state(initial_condition(p)), k, p.beta)
