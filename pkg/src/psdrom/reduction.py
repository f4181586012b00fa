"""Forced Hamiltonian models and their reduced counterparts.

A full model evolves ``x' = J grad H(x) + (0; f_H(x))``. Reduction by a
symplectic basis ``A`` with ``A_qp = 0`` yields a model of the same form in
``z = A+ x``; POD-Galerkin reduction yields a plain linear ODE.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .symplectic import DEFAULT_TOL, SymplecticBasis, is_symplectic, poisson_matrix

Vector = np.ndarray


@dataclass(frozen=True, eq=False)
class LinearForm:
    """Matrices of a linear model: ``K y = J grad H(y)``, ``L y = (0; f_H(y))``, ``H = y^T S y / 2``."""

    K: np.ndarray
    L: np.ndarray
    hessian: np.ndarray

    @property
    def operator(self) -> np.ndarray:
        return self.K + self.L


@dataclass(frozen=True, eq=False)
class ForcedHamiltonianModel:
    """Evaluator bundle for ``x' = J_2n grad H(x) + (0; f_H(x))``.

    ``energy_scale`` converts ``H`` to the reported energy. It lets a model
    whose Poisson structure is ``J / s`` be written canonically with ``H / s``
    while energies are still reported in the original units.
    """

    half_dim: int
    hamiltonian: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]
    force: Callable[[Vector], Vector]
    linear: LinearForm | None = None
    energy_scale: float = 1.0
    tag: str = "full"

    @classmethod
    def from_linear(
        cls, K, L, hessian, energy_scale: float = 1.0, tag: str = "full", check: bool = True
    ) -> "ForcedHamiltonianModel":
        """Build evaluators from matrices, checking ``K = J S`` and that ``L`` is vertical."""
        K, L, S = (np.array(m, dtype=float) for m in (K, L, hessian))
        for m in (K, L, S):
            m.setflags(write=False)
        d = S.shape[0]
        if d % 2 or K.shape != (d, d) or L.shape != (d, d):
            raise ValueError("K, L and the Hessian must be square with even, equal size")
        n = d // 2
        if check:
            scale = max(1.0, float(np.abs(K).max()))
            if np.abs(K - poisson_matrix(n) @ S).max() > 1e-10 * scale:
                raise ValueError("K does not equal J times the Hessian of H")
            if np.any(L[:n]):
                raise ValueError("L must have a zero q-row block (vertical force)")
        Lf = L[n:]
        return cls(
            half_dim=n,
            hamiltonian=lambda x: 0.5 * float(x @ (S @ x)),
            gradient=lambda x: S @ x,
            force=lambda x: Lf @ x,
            linear=LinearForm(K, L, S),
            energy_scale=energy_scale,
            tag=tag,
        )

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    @property
    def operator(self) -> np.ndarray | None:
        return None if self.linear is None else self.linear.operator

    def hamiltonian_field(self, x: Vector) -> Vector:
        g = self.gradient(x)
        n = self.half_dim
        return np.concatenate([g[n:], -g[:n]])

    def force_field(self, x: Vector) -> Vector:
        return np.concatenate([np.zeros(self.half_dim), self.force(x)])

    def vector_field(self, x: Vector) -> Vector:
        return self.hamiltonian_field(x) + self.force_field(x)

    def energy(self, x: Vector) -> float:
        return self.energy_scale * self.hamiltonian(x)


@dataclass(frozen=True, eq=False)
class ReducedModel:
    """Reduced dynamics in ``z`` together with the maps to and from ``x``.

    Attributes:
        provenance: ``structure_preserving``, ``variational`` or ``pod_galerkin``.
        lift: ``x = lift @ z`` (``A`` or ``Phi``).
        project: ``z = project @ x`` (``A+`` or ``Phi^T``).
        full: the model that was reduced.
        dynamics: the reduced forced Hamiltonian model, when one exists.
        basis: the symplectic basis, when one was used.
        operator: reduced linear operator for linear full models.
    """

    provenance: str
    lift: np.ndarray
    project: np.ndarray
    full: ForcedHamiltonianModel
    field_fn: Callable[[Vector], Vector] = field(repr=False)
    dynamics: ForcedHamiltonianModel | None = None
    basis: SymplecticBasis | None = None
    operator: np.ndarray | None = None
    hamiltonian_operator: np.ndarray | None = None
    dissipative_operator: np.ndarray | None = None
    structure_preserving: bool = False

    @property
    def dim(self) -> int:
        return self.lift.shape[1]

    @property
    def tag(self) -> str:
        return f"{self.provenance}[{self.dim}]"

    def vector_field(self, z: Vector) -> Vector:
        return self.field_fn(z)

    def energy(self, z: Vector) -> float:
        """Full-model energy of the lifted state ``H(Az)``.

        Symplectic reductions evaluate it as ``H~(z)`` in reduced coordinates,
        which is the same number without the full-size work.
        """
        if self.dynamics is not None:
            return self.dynamics.energy(z)
        return self.full.energy(self.lift @ z)

    def reduce_state(self, x: Vector) -> Vector:
        return self.project @ x

    def reconstruct(self, z) -> np.ndarray:
        """Lift one state or a (steps x dim) history back to full coordinates."""
        z = np.asarray(z)
        return self.lift @ z if z.ndim == 1 else z @ self.lift.T


def _check_basis(model: ForcedHamiltonianModel, A: SymplecticBasis):
    if A.full_half_dim != model.half_dim:
        raise ValueError(f"basis acts on n={A.full_half_dim}, model has n={model.half_dim}")


def reduce_structure_preserving(model: ForcedHamiltonianModel, A: SymplecticBasis) -> ReducedModel:
    """Reduce by the symplectic projection ``z = A+ x``.

    The reduced model has ``H~(z) = H(Az)``, gradient ``A^T grad H(Az)`` and force
    ``A_qq^T f_H(Az)``; linear models also get ``K~ = A+ K A`` and ``L~ = A+ L A``.
    """
    if not isinstance(A, SymplecticBasis):
        raise TypeError("structure-preserving reduction needs a SymplecticBasis")
    _check_basis(model, A)
    Am, Ap, qq = A.matrix, A.inverse, A.qq
    k = A.reduced_half_dim

    if model.linear is not None:
        lin = model.linear
        Kr = Ap @ lin.K @ Am
        Lr = Ap @ lin.L @ Am
        Sr = Am.T @ lin.hessian @ Am
        dyn = ForcedHamiltonianModel.from_linear(
            Kr, Lr, 0.5 * (Sr + Sr.T), model.energy_scale, tag=f"psd[{2 * k}]", check=False
        )
        op = Kr + Lr
        return ReducedModel(
            "structure_preserving", Am, Ap, model, lambda z: op @ z, dyn, A, op, Kr, Lr, True
        )

    dyn = ForcedHamiltonianModel(
        half_dim=k,
        hamiltonian=lambda z: model.hamiltonian(Am @ z),
        gradient=lambda z: Am.T @ model.gradient(Am @ z),
        force=lambda z: qq.T @ model.force(Am @ z),
        energy_scale=model.energy_scale,
        tag=f"psd[{2 * k}]",
    )
    return ReducedModel("structure_preserving", Am, Ap, model, dyn.vector_field, dyn, A, structure_preserving=True)


def variational_matrix(A: np.ndarray) -> np.ndarray:
    """Block matrix ``M`` of the variational reduction, assembled from the blocks of ``A``."""
    A = np.asarray(A, dtype=float)
    n, k = A.shape[0] // 2, A.shape[1] // 2
    qq, qp, pq, pp = A[:n, :k], A[:n, k:], A[n:, :k], A[n:, k:]
    return np.block(
        [
            [pq.T @ qq - qq.T @ pq, pq.T @ qp - qq.T @ pp],
            [pp.T @ qq - qp.T @ pq, pp.T @ qp - qp.T @ pp],
        ]
    )


class SingularReductionError(np.linalg.LinAlgError):
    def __init__(self, cond: float):
        super().__init__(f"variational matrix is singular (condition number {cond:.3e})")
        self.cond = cond


def reduce_variational(model: ForcedHamiltonianModel, A: np.ndarray, tol: float = DEFAULT_TOL) -> ReducedModel:
    """Reduce by substituting ``x = Az`` into d'Alembert's principle.

    Valid for any ``A`` whose variational matrix ``M`` is invertible. The result
    is flagged ``structure_preserving`` only when ``A`` is symplectic with
    ``A_qp = 0``.
    """
    if isinstance(A, SymplecticBasis):
        A = A.matrix
    A = np.asarray(A, dtype=float)
    n2, k2 = A.shape
    if n2 != model.dim or k2 % 2 or k2 > n2:
        raise ValueError(f"basis shape {A.shape} incompatible with model dimension {model.dim}")
    n, k = n2 // 2, k2 // 2
    M = variational_matrix(A)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularReductionError(cond)
    Minv = np.linalg.inv(M)
    force_rows = np.vstack([A[:n, :k].T, A[:n, k:].T])  # [A_qq^T; A_qp^T]

    scale = max(1.0, float(np.linalg.norm(A)))
    symplectic = is_symplectic(A, tol * scale)[0]
    vertical = np.linalg.norm(A[:n, k:]) <= tol * scale
    sp = bool(symplectic and vertical)
    if sp:
        project = poisson_matrix(k).T @ A.T @ poisson_matrix(n)
    else:
        project = np.linalg.pinv(A)

    if model.linear is not None:
        lin = model.linear
        op = Minv @ (A.T @ lin.hessian @ A - force_rows @ lin.L[n:] @ A)
        return ReducedModel("variational", A, project, model, lambda z: op @ z, operator=op, structure_preserving=sp)

    def field_fn(z):
        x = A @ z
        return Minv @ (A.T @ model.gradient(x) - force_rows @ model.force(x))

    dyn = None
    if sp:
        qq = A[:n, :k]
        dyn = ForcedHamiltonianModel(
            half_dim=k,
            hamiltonian=lambda z: model.hamiltonian(A @ z),
            gradient=lambda z: A.T @ model.gradient(A @ z),
            force=lambda z: qq.T @ model.force(A @ z),
            energy_scale=model.energy_scale,
            tag=f"variational[{k2}]",
        )
    return ReducedModel("variational", A, project, model, field_fn, dyn, structure_preserving=sp)


def reduce_pod_galerkin(model: ForcedHamiltonianModel, phi: np.ndarray, tol: float = 1e-10) -> ReducedModel:
    """Galerkin projection ``z' = Phi^T (K + L) Phi z`` onto an orthonormal basis."""
    if model.linear is None:
        raise ValueError("POD-Galerkin reduction is implemented for linear models only")
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != model.dim:
        raise ValueError(f"basis shape {phi.shape} incompatible with model dimension {model.dim}")
    err = np.linalg.norm(phi.T @ phi - np.eye(phi.shape[1]))
    if err > tol:
        raise ValueError(f"basis columns are not orthonormal (residual {err:.3e})")
    Kr = phi.T @ model.linear.K @ phi
    Lr = phi.T @ model.linear.L @ phi
    op = Kr + Lr
    return ReducedModel(
        "pod_galerkin", phi, phi.T, model, lambda z: op @ z, operator=op,
        hamiltonian_operator=Kr, dissipative_operator=Lr,
    )


def energy_rate(model: ForcedHamiltonianModel, x: Vector) -> float:
    """Energy rate ``dH . X_F = <f_H, grad_p H>`` at ``x`` (in reported energy units)."""
    g = model.gradient(x)
    return model.energy_scale * float(model.force(x) @ g[model.half_dim :])


def energy_rate_symplectic(model: ForcedHamiltonianModel, x: Vector) -> float:
    """The same rate written as ``Omega(X_H, X_F)``."""
    XH = model.hamiltonian_field(x)
    XF = model.force_field(x)
    n = model.half_dim
    return model.energy_scale * float(XH[:n] @ XF[n:] - XH[n:] @ XF[:n])


@dataclass(frozen=True)
class RatePreservation:
    """Energy-rate comparison between a full state ``Az`` and its reduced state ``z``.

    ``conditions`` holds residual norms of the five invariance conditions under
    the projector ``P = A A+``: (a) ``P X_F = X_F``, (b) ``P X_H = X_H``,
    (c) ``P X_H = X``, (d) p-part of (a), (e) q-part of (b).
    """

    full_rate: float
    reduced_rate: float
    bound: float
    conditions: dict[str, float]
    slack: float = 1e-10

    @property
    def discrepancy(self) -> float:
        return abs(self.full_rate - self.reduced_rate)

    @property
    def within_bound(self) -> bool:
        return self.discrepancy <= self.bound + self.slack


def energy_rate_preservation_report(
    model: ForcedHamiltonianModel, A: SymplecticBasis, z: Vector, reduced: ReducedModel | None = None
) -> RatePreservation:
    """Compare full and reduced energy rates and evaluate the a-priori bound

    ``|rate(Az) - rate~(z)| <= ||X_H(Az)|| * ||f_H(Az) - A_pp A_qq^T f_H(Az)||``.
    """
    if reduced is None:
        reduced = reduce_structure_preserving(model, A)
    if reduced.dynamics is None:
        raise ValueError("reduced model carries no Hamiltonian structure")
    z = np.asarray(z, dtype=float)
    x = A.matrix @ z
    n = model.half_dim
    XH = model.hamiltonian_field(x)
    XF = model.force_field(x)
    f = XF[n:]
    P = A.matrix @ A.inverse
    PXH, PXF = P @ XH, P @ XF
    bound = model.energy_scale * float(np.linalg.norm(XH) * np.linalg.norm(f - A.pp @ (A.qq.T @ f)))
    conditions = {
        "a": float(np.linalg.norm(PXF - XF)),
        "b": float(np.linalg.norm(PXH - XH)),
        "c": float(np.linalg.norm(PXH - (XH + XF))),
        "d": float(np.linalg.norm(PXF[n:] - XF[n:])),
        "e": float(np.linalg.norm(PXH[:n] - XH[:n])),
    }
    return RatePreservation(energy_rate(model, x), energy_rate(reduced.dynamics, z), bound, conditions)
