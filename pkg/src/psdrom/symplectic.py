"""Symplectic linear algebra on canonical phase space ``x = (q, p)``.

A reduced basis ``A`` (2n x 2k) is written in blocks::

    A = [[A_qq, A_qp],
         [A_pq, A_pp]]

Structure-preserving reduction needs ``A_qp = 0``, so :class:`SymplecticBasis`
stores only the three remaining blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_TOL = 1e-10


class SymplecticityError(ValueError):
    """Raised when a matrix fails a symplecticity check."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def poisson_matrix(n: int) -> np.ndarray:
    """Return the canonical Poisson matrix ``[[0, I_n], [-I_n, 0]]``."""
    if int(n) != n or n < 1:
        raise ValueError(f"half dimension must be a positive integer, got {n!r}")
    n = int(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def _half_dims(A: np.ndarray) -> tuple[int, int]:
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    rows, cols = A.shape
    if rows % 2 or cols % 2:
        raise ValueError(f"row and column counts must be even, got {A.shape}")
    if cols > rows:
        raise ValueError(f"basis has more columns than rows: {A.shape}")
    return rows // 2, cols // 2


def symplecticity_residual(A: np.ndarray) -> float:
    """Frobenius norm of ``A^T J_2n A - J_2k``."""
    A = np.asarray(A, dtype=float)
    n, k = _half_dims(A)
    return float(np.linalg.norm(A.T @ poisson_matrix(n) @ A - poisson_matrix(k)))


def is_symplectic(A: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Test ``A^T J_2n A = J_2k`` in the Frobenius norm.

    Returns:
        ``(ok, residual)``; the residual is reported whether or not the test passes.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    res = symplecticity_residual(A)
    return res <= tol, res


@dataclass(frozen=True, eq=False)
class SymplecticBasis:
    """A 2n x 2k symplectic basis with vanishing ``A_qp`` block.

    The constructor validates ``A^T J A = J`` against ``tol * max(1, ||A||_F)``
    and raises :class:`SymplecticityError` otherwise.
    """

    qq: np.ndarray
    pq: np.ndarray
    pp: np.ndarray
    kind: str = "general"
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        blocks = []
        for name in ("qq", "pq", "pp"):
            b = np.array(getattr(self, name), dtype=float)
            b.setflags(write=False)
            blocks.append(b)
            object.__setattr__(self, name, b)
        shapes = {b.shape for b in blocks}
        if len(shapes) != 1 or blocks[0].ndim != 2:
            raise ValueError(f"blocks must share one n x k shape, got {[b.shape for b in blocks]}")
        n, k = blocks[0].shape
        if k > n or k < 1:
            raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
        if self.kind not in ("cotangent_lift", "general"):
            raise ValueError(f"unknown construction kind {self.kind!r}")
        scale = max(1.0, float(np.linalg.norm(self.matrix)))
        ok, res = is_symplectic(self.matrix, self.tol * scale)
        if not ok:
            raise SymplecticityError("basis is not symplectic", res)

    @classmethod
    def cotangent(cls, phi: np.ndarray, tol: float = DEFAULT_TOL) -> "SymplecticBasis":
        """Build ``diag(phi, phi)``; symplectic iff ``phi`` has orthonormal columns."""
        phi = np.asarray(phi, dtype=float)
        return cls(phi, np.zeros_like(phi), phi, kind="cotangent_lift", tol=tol)

    @classmethod
    def from_matrix(cls, A: np.ndarray, tol: float = DEFAULT_TOL) -> "SymplecticBasis":
        A = np.asarray(A, dtype=float)
        n, k = _half_dims(A)
        qp = A[:n, k:]
        if np.linalg.norm(qp) > tol * max(1.0, float(np.linalg.norm(A))):
            raise ValueError("A_qp block must vanish for a structure-preserving basis")
        return cls(A[:n, :k], A[n:, :k], A[n:, k:], tol=tol)

    @property
    def full_half_dim(self) -> int:
        return self.qq.shape[0]

    @property
    def reduced_half_dim(self) -> int:
        return self.qq.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        n, k = self.qq.shape
        A = np.zeros((2 * n, 2 * k))
        A[:n, :k] = self.qq
        A[n:, :k] = self.pq
        A[n:, k:] = self.pp
        A.setflags(write=False)
        return A

    @cached_property
    def inverse(self) -> np.ndarray:
        """Symplectic inverse ``A+ = J_2k^T A^T J_2n`` in closed block form."""
        n, k = self.qq.shape
        Ap = np.zeros((2 * k, 2 * n))
        Ap[:k, :n] = self.pp.T
        Ap[k:, :n] = -self.pq.T
        Ap[k:, n:] = self.qq.T
        Ap.setflags(write=False)
        return Ap

    def block_residuals(self) -> dict[str, float]:
        """Residuals of the block criterion: ``A_qq^T A_pq`` symmetric, ``A_qq^T A_pp = I``."""
        s = self.qq.T @ self.pq
        return {
            "symmetry": float(np.linalg.norm(s - s.T)),
            "identity": float(np.linalg.norm(self.qq.T @ self.pp - np.eye(self.reduced_half_dim))),
        }


def _as_basis(A, tol: float) -> SymplecticBasis:
    if isinstance(A, SymplecticBasis):
        return A
    return SymplecticBasis.from_matrix(A, tol=tol)


def symplectic_inverse(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``A+ = J_2k^T A^T J_2n`` for a symplectic basis.

    ``A`` may be a :class:`SymplecticBasis` or a dense matrix with ``A_qp = 0``;
    dense input is validated first.
    """
    return np.array(_as_basis(A, tol).inverse)


def projector(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return the symplectic projector ``A A+`` (idempotent, keeps vertical vectors vertical)."""
    basis = _as_basis(A, tol)
    return basis.matrix @ basis.inverse


def omega(u: np.ndarray, v: np.ndarray) -> float:
    """Canonical symplectic form ``u^T J v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.shape[0] // 2
    return float(u[:n] @ v[n:] - u[n:] @ v[:n])
