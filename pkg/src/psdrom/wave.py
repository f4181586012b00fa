"""Damped linear wave equation ``u_tt + beta u_t - c^2 u_xx + omega0^2 u = 0`` on a periodic grid.

State layout is ``y = (q_1..q_n, p_1..p_n)`` with ``q_i = u(x_i)``, ``p_i = u_t(x_i)``
and ``x_i = i dx``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .reduction import ForcedHamiltonianModel


@dataclass(frozen=True)
class WaveParams:
    l: float = 1.0
    n: int = 500
    T: float = 50.0
    dt: float = 0.01
    beta: float = 0.1
    omega0: float = 0.05
    c: float = 0.1
    snapshot_interval: float = 0.5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"grid point count must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.l <= 0 or self.dt <= 0 or self.c <= 0 or self.T < 0:
            raise ValueError("need l > 0, dt > 0, c > 0 and T >= 0")
        if self.beta < 0 or self.omega0 < 0:
            raise ValueError("beta and omega0 must be nonnegative")
        if self.snapshot_interval <= 0:
            raise ValueError("snapshot_interval must be positive")

    @property
    def dx(self) -> float:
        return self.l / self.n

    @property
    def grid(self) -> np.ndarray:
        return np.arange(1, self.n + 1) * self.dx

    @property
    def snapshot_stride(self) -> int:
        stride = int(round(self.snapshot_interval / self.dt))
        if stride < 1 or abs(stride * self.dt - self.snapshot_interval) > 1e-9 * self.snapshot_interval:
            raise ValueError("snapshot_interval must be a multiple of dt")
        return stride

    def with_(self, **changes) -> "WaveParams":
        return replace(self, **changes)

    @classmethod
    def from_file(cls, path) -> "WaveParams":
        """Read flat ``key = value`` lines (``#`` comments allowed)."""
        return cls.from_string(Path(path).read_text())

    @classmethod
    def from_string(cls, text: str) -> "WaveParams":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        cp.read_string("[wave]\n" + text)
        raw = dict(cp["wave"])
        known = {"l", "n", "dt", "T", "beta", "omega0", "c", "snapshot_interval"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        kw = {k: (int(v) if k == "n" else float(v)) for k, v in raw.items()}
        return cls(**kw)

    def to_string(self) -> str:
        keys = ("l", "n", "dt", "T", "beta", "omega0", "c", "snapshot_interval")
        return "".join(f"{k} = {getattr(self, k)!r}\n" for k in keys)


def second_difference(n: int, dx: float) -> np.ndarray:
    """Periodic three-point Laplacian ``(1, -2, 1) / dx^2`` with wraparound rows."""
    if n < 3:
        raise ValueError("the periodic stencil needs n >= 3")
    D = -2.0 * np.eye(n)
    idx = np.arange(n)
    D[idx, (idx + 1) % n] += 1.0
    D[idx, (idx - 1) % n] += 1.0
    return D / dx**2


def assemble_wave_model(p: WaveParams) -> ForcedHamiltonianModel:
    """Linear model ``y' = (K + L) y``.

    The Poisson structure ``J / dx`` is folded into the Hamiltonian, so the
    model is canonical in ``H_d / dx`` and reports energy ``H_d`` through
    ``energy_scale = dx``.
    """
    n, dx = p.n, p.dx
    D = second_difference(n, dx)
    I = np.eye(n)
    Z = np.zeros((n, n))
    stiff = p.omega0**2 * I - p.c**2 * D
    K = np.block([[Z, I], [-stiff, Z]])
    L = np.block([[Z, Z], [Z, -p.beta * I]])
    S = np.block([[stiff, Z], [Z, I]])
    return ForcedHamiltonianModel.from_linear(K, L, S, energy_scale=dx, tag=f"wave[n={n}]")


def discrete_hamiltonian(p: WaveParams, y) -> float:
    """``H_d = dx/2 sum p^2 + omega0^2 dx/2 sum q^2 + c^2/(2 dx) sum (q_i - q_{i-1})^2``, ``q_0 = q_n``."""
    y = np.asarray(y, dtype=float)
    n, dx = p.n, p.dx
    q, mom = y[:n], y[n:]
    dq = q - np.roll(q, 1)
    return float(
        0.5 * dx * mom @ mom + 0.5 * p.omega0**2 * dx * q @ q + p.c**2 / (2.0 * dx) * dq @ dq
    )


def spline_bump(s):
    """Cubic B-spline-shaped bump: 1 at s = 0, zero for s >= 2."""
    s = np.asarray(s, dtype=float)
    inner = 1.0 - 1.5 * s**2 + 0.75 * s**3
    outer = 0.25 * (2.0 - s) ** 3
    return np.where(s <= 1.0, inner, np.where(s <= 2.0, outer, 0.0))


def initial_condition(p: WaveParams) -> np.ndarray:
    """``q_i = h(10 |x_i - 1/2|)``, ``p = 0``."""
    q = spline_bump(10.0 * np.abs(p.grid - 0.5))
    return np.concatenate([q, np.zeros(p.n)])


def dxx_eigenvalues(p: WaveParams) -> np.ndarray:
    """``-(2/dx^2) (1 - cos(2 pi i / n))`` for ``i = 1..n``."""
    i = np.arange(1, p.n + 1)
    return -(2.0 / p.dx**2) * (1.0 - np.cos(2.0 * np.pi * i / p.n))


def _discriminant(p: WaveParams, lap_eigs) -> np.ndarray:
    # beta^2 - 4 (omega0^2 - c^2 b), factored so beta = 2 omega0 cancels exactly
    return (p.beta - 2.0 * p.omega0) * (p.beta + 2.0 * p.omega0) + 4.0 * p.c**2 * np.asarray(lap_eigs)


def full_model_eigenvalues(p: WaveParams) -> np.ndarray:
    """Roots of ``lam^2 + beta lam - c^2 b_i + omega0^2 = 0``; entries ``i`` and ``i + n`` pair up."""
    root = np.sqrt(_discriminant(p, dxx_eigenvalues(p)).astype(complex))
    return np.concatenate([(-p.beta + root) / 2.0, (-p.beta - root) / 2.0])


def _fft_lap_eigs(p: WaveParams) -> np.ndarray:
    j = np.arange(p.n)
    return -(2.0 / p.dx**2) * (1.0 - np.cos(2.0 * np.pi * j / p.n))


def _modal_evolve(p: WaveParams, y0, t, stiffness) -> np.ndarray:
    """Exact flow of ``q' = p, p' = -a q - beta p`` per Fourier mode.

    ``exp(Mt) = e^{mu t} [cosh(d t) I + (M - mu I) sinh(d t)/d]`` with
    ``mu = -beta/2``, ``d^2 = mu^2 - a``; ``sinh(d t)/d -> t`` when ``d = 0``
    (repeated root).
    """
    y0 = np.asarray(y0, dtype=float)
    n = p.n
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("reference solution needs t >= 0")
    qh = np.fft.fft(y0[:n])
    ph = np.fft.fft(y0[n:])
    a = stiffness  # omega0^2 - c^2 * laplacian eigenvalue, per mode
    mu = -0.5 * p.beta
    d = np.sqrt((mu**2 - a).astype(complex))
    T = ts[:, None]
    dt_ = d[None, :] * T
    ch = np.cosh(dt_)
    safe = np.where(d == 0, 1.0, d)
    sh = np.where(d[None, :] == 0, T, np.sinh(dt_) / safe[None, :])
    e = np.exp(mu * T)
    # M - mu I = [[-mu, 1], [-a, -beta - mu]]
    q_t = e * (ch * qh + sh * (-mu * qh + ph))
    p_t = e * (ch * ph + sh * (-a * qh + (-p.beta - mu) * ph))
    out = np.hstack([np.fft.ifft(q_t, axis=1).real, np.fft.ifft(p_t, axis=1).real])
    return out[0] if np.ndim(t) == 0 else out


def reference_solution(p: WaveParams, t, y0=None) -> np.ndarray:
    """Exact solution of the semi-discrete system at time(s) ``t``.

    Returns one 2n-vector for scalar ``t`` or a (len(t) x 2n) array.
    """
    if y0 is None:
        y0 = initial_condition(p)
    a = p.omega0**2 - p.c**2 * _fft_lap_eigs(p)
    return _modal_evolve(p, y0, t, a)


def continuum_solution(p: WaveParams, t, y0=None) -> np.ndarray:
    """Trigonometric interpolant of the initial data evolved by the continuum PDE.

    Differs from :func:`reference_solution` only through the dispersion
    relation; used to report the spatial discretization gap.
    """
    if y0 is None:
        y0 = initial_condition(p)
    j = np.fft.fftfreq(p.n, d=1.0 / p.n)
    a = p.omega0**2 + p.c**2 * (2.0 * np.pi * j / p.l) ** 2
    return _modal_evolve(p, y0, t, a)


def coarse_params(p: WaveParams, k: int) -> WaveParams:
    """Parameters of the coarse model with state dimension ``k`` (``k/2`` grid points)."""
    if k % 2:
        raise ValueError(f"coarse state dimension must be even, got {k}")
    if k // 2 < 3:
        raise ValueError("coarse model needs at least 3 grid points")
    return p.with_(n=k // 2)


def coarse_model(p: WaveParams, k: int) -> tuple[ForcedHamiltonianModel, np.ndarray, WaveParams]:
    """Same discretization on ``k/2`` points; returns model, resampled initial state and parameters."""
    pc = coarse_params(p, k)
    return assemble_wave_model(pc), initial_condition(pc), pc


def interpolate_periodic(p_from: WaveParams, q, p_to: WaveParams) -> np.ndarray:
    """Periodic linear interpolation of grid values ``q`` (rows or one vector) onto another grid."""
    q = np.asarray(q, dtype=float)
    xp = p_from.grid
    x = p_to.grid
    if q.ndim == 1:
        return np.interp(x, xp, q, period=p_from.l)
    return np.vstack([np.interp(x, xp, row, period=p_from.l) for row in q])
