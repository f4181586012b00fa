"""Implicit midpoint time stepping with trajectory and energy recording."""

from __future__ import annotations

import csv
import weakref
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla


class StepFailure(RuntimeError):
    """A time step could not be completed; ``partial`` holds the history so far."""

    def __init__(self, message: str, residual: float = float("nan"), partial=None):
        super().__init__(message)
        self.residual = residual
        self.partial = partial


class LinearMidpoint:
    """Midpoint map ``(I - dt/2 A) y+ = (I + dt/2 A) y`` with a cached LU factorization."""

    def __init__(self, op: np.ndarray, dt: float):
        op = np.asarray(op, dtype=float)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"operator must be square, got {op.shape}")
        self.dt = float(dt)
        eye = np.eye(op.shape[0])
        lhs = eye - 0.5 * self.dt * op
        self._rhs = eye + 0.5 * self.dt * op
        self._lu = sla.lu_factor(lhs, check_finite=True)
        if np.any(np.abs(np.diag(self._lu[0])) <= np.finfo(float).eps * max(1.0, np.abs(lhs).max())):
            raise np.linalg.LinAlgError("I - dt/2 A is singular")

    def step(self, y: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self._lu, self._rhs @ y, check_finite=False)

    def matrix(self) -> np.ndarray:
        """One-step propagator ``(I - dt/2 A)^{-1} (I + dt/2 A)``."""
        return sla.lu_solve(self._lu, self._rhs, check_finite=False)


_cache: dict[tuple[int, float], tuple[weakref.ref, LinearMidpoint]] = {}


def midpoint_step_linear(op: np.ndarray, y: np.ndarray, dt: float) -> np.ndarray:
    """One midpoint step of ``y' = op y``; factorizations are reused per ``(op, dt)``."""
    key = (id(op), float(dt))
    hit = _cache.get(key)
    if hit is None or hit[0]() is not op:
        if len(_cache) >= 8:
            _cache.clear()
        stepper = LinearMidpoint(op, dt)
        try:
            ref = weakref.ref(op)
        except TypeError:
            return stepper.step(np.asarray(y, dtype=float))
        _cache[key] = (ref, stepper)
    else:
        stepper = hit[1]
    return stepper.step(np.asarray(y, dtype=float))


def _fd_jacobian(F, y, fy):
    d = y.shape[0]
    Jm = np.empty((d, d))
    for j in range(d):
        h = 1e-7 * max(1.0, abs(y[j]))
        yp = y.copy()
        yp[j] += h
        Jm[:, j] = (F(yp) - fy) / h
    return Jm


def midpoint_step_nonlinear(
    F: Callable[[np.ndarray], np.ndarray],
    y: np.ndarray,
    dt: float,
    tol: float = 1e-12,
    max_iter: int = 50,
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Solve ``y+ = y + dt F((y + y+)/2)`` by Newton's method.

    Without an analytic ``jacobian`` a forward-difference Jacobian is used.
    Convergence is declared when the residual max-norm drops below
    ``tol * max(1, |y|_inf)``.
    """
    y = np.asarray(y, dtype=float)
    scale = max(1.0, float(np.abs(y).max(initial=0.0)))
    y_new = y + dt * F(y)
    eye = np.eye(y.shape[0])
    res = np.inf
    for _ in range(max_iter):
        mid = 0.5 * (y + y_new)
        fm = F(mid)
        G = y_new - y - dt * fm
        res = float(np.abs(G).max(initial=0.0))
        if not np.isfinite(res):
            raise StepFailure("midpoint Newton iterate became non-finite", float("inf"))
        if res <= tol * scale:
            return y_new
        Jf = jacobian(mid) if jacobian is not None else _fd_jacobian(F, mid, fm)
        delta = np.linalg.solve(eye - 0.5 * dt * Jf, G)
        y_new = y_new - delta
        if float(np.abs(delta).max(initial=0.0)) <= 1e-3 * tol * scale:
            G = y_new - y - dt * F(0.5 * (y + y_new))
            res = float(np.abs(G).max(initial=0.0))
            if res <= tol * scale:
                return y_new
    raise StepFailure(f"midpoint Newton solve did not converge in {max_iter} iterations", res)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniform-step state history; ``states`` has one row per recorded time."""

    times: np.ndarray
    states: np.ndarray
    step: float
    model_tag: str = ""
    blowup_time: float | None = None

    @property
    def blew_up(self) -> bool:
        return self.blowup_time is not None

    def to_csv(self, path, stride: int = 1, comment: str | None = None) -> None:
        header = ["t"] + [f"y_{i}" for i in range(1, self.states.shape[1] + 1)]
        rows = np.column_stack([self.times, self.states])[::stride]
        write_csv(path, header, rows, comment)


@dataclass(frozen=True, eq=False)
class EnergySeries:
    times: np.ndarray
    values: np.ndarray

    def max_increase(self) -> float:
        """Largest single-step increase (negative when strictly decreasing)."""
        if len(self.values) < 2:
            return float("-inf")
        return float(np.max(np.diff(self.values)))

    def is_nonincreasing(self, slack: float = 1e-12) -> bool:
        return self.max_increase() <= slack

    def max_relative_drift(self) -> float:
        return float(np.max(np.abs(self.values - self.values[0])) / abs(self.values[0]))

    def to_csv(self, path, stride: int = 1, comment: str | None = None) -> None:
        write_csv(path, ["t", "E"], np.column_stack([self.times, self.values])[::stride], comment)


def write_csv(path, header, rows, comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def step_count(dt: float, T: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T < 0:
        raise ValueError("T must be nonnegative")
    steps = int(round(T / dt))
    if abs(steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    return steps


def integrate(
    model,
    y0,
    dt: float,
    T: float,
    *,
    blowup_threshold: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple[Trajectory, EnergySeries]:
    """Fixed-step implicit midpoint integration over ``[0, T]``.

    ``model`` needs ``vector_field`` and ``energy``; when it exposes a linear
    ``operator`` the linear solver with a single factorization is used.
    If the state norm exceeds ``blowup_threshold`` the run stops there and the
    returned trajectory records ``blowup_time``.
    """
    steps = step_count(dt, T)
    y = np.array(y0, dtype=float)
    states = np.empty((steps + 1, y.shape[0]))
    energies = np.empty(steps + 1)
    states[0] = y
    energies[0] = model.energy(y)
    op = getattr(model, "operator", None)
    if op is not None:
        stepper = LinearMidpoint(op, dt).step
    else:
        jac = getattr(model, "jacobian", None)

        def stepper(v):
            return midpoint_step_nonlinear(model.vector_field, v, dt, tol, max_iter, jac)

    tag = getattr(model, "tag", "")
    blowup = None
    last = steps
    for i in range(1, steps + 1):
        try:
            y = stepper(y)
        except (StepFailure, np.linalg.LinAlgError) as exc:
            partial = (
                Trajectory(np.arange(i) * dt, states[:i].copy(), dt, tag),
                EnergySeries(np.arange(i) * dt, energies[:i].copy()),
            )
            raise StepFailure(f"step {i} (t={i * dt:g}) failed: {exc}", getattr(exc, "residual", np.nan), partial) from exc
        states[i] = y
        if blowup_threshold is not None and not (np.linalg.norm(y) <= blowup_threshold):
            blowup = i * dt
            last = i
            energies[i] = np.inf
            break
        energies[i] = model.energy(y)
    times = np.arange(last + 1) * dt
    return (
        Trajectory(times, states[: last + 1], dt, tag, blowup),
        EnergySeries(times, energies[: last + 1]),
    )
