"""Experiment orchestration for the damped wave benchmark.

Each run integrates one model (full, coarse, POD or PSD reduced), compares it
with the exact semi-discrete solution and writes CSV files into its own
directory ``<out>/<mode>_k<k>/``.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .decomposition import (
    SnapshotEnsemble,
    build_energy_matrix,
    build_extended_matrix,
    build_state_matrix,
    cotangent_lift,
    cotangent_lift_energy,
    pod_basis,
    spectrum,
)
from .integrator import integrate, write_csv
from .reduction import reduce_pod_galerkin, reduce_structure_preserving
from .stability import psd_stability, table2_cell
from .wave import (
    WaveParams,
    assemble_wave_model,
    coarse_model,
    continuum_solution,
    initial_condition,
    interpolate_periodic,
    reference_solution,
)

log = logging.getLogger(__name__)

MODES = ("full", "coarse", "pod", "psd", "psd_energy")
BLOWUP = 1e12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep over basis sizes for a single mode.

    ``ks`` counts POD modes for ``pod``, cotangent-lift modes (reduced
    dimension ``2k``) for ``psd``/``psd_energy``, and the state dimension
    (``k/2`` grid points) for ``coarse``. ``full`` ignores it.
    """

    params: WaveParams
    mode: str
    ks: tuple[int, ...] = ()
    out: Path = Path("out")
    seed: int = 0
    repeats: int = 1
    betas: tuple[float, ...] = ()
    p_error: bool = False
    stride: int = 1
    workers: int = 1
    blowup_threshold: float = BLOWUP
    energy_weight: float = 1.0

    def validate(self) -> None:
        p = self.params
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.repeats < 1 or self.stride < 1 or self.workers < 1:
            raise ConfigError("repeats, stride and workers must be >= 1")
        try:
            p.snapshot_stride
            n_snap = int(round(p.T / p.snapshot_interval)) + 1
            int(round(p.T / p.dt))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.mode != "full" and not self.ks:
            raise ConfigError(f"mode {self.mode!r} needs at least one k")
        limits = {
            "coarse": 2 * p.n,
            "pod": min(2 * p.n, n_snap),
            "psd": min(p.n, 2 * n_snap),
            "psd_energy": min(p.n, 3 * n_snap),
        }
        for k in self.ks:
            if k < 2 or k % 2:
                raise ConfigError(f"k values must be even and >= 2, got {k}")
            if k > 2 * p.n:
                raise ConfigError(f"k={k} exceeds the full state dimension {2 * p.n}")
            if self.mode in limits and k > limits[self.mode]:
                raise ConfigError(f"k={k} exceeds the limit {limits[self.mode]} for mode {self.mode!r}")
            if self.mode == "coarse" and k // 2 < 3:
                raise ConfigError("coarse models need k >= 6")
        if any(b < 0 for b in self.betas):
            raise ConfigError("damping values must be nonnegative")

    def digest(self) -> str:
        text = "|".join(
            [self.params.to_string(), self.mode, ",".join(map(str, self.ks)), str(self.seed),
             ",".join(map(repr, self.betas)), str(self.p_error), repr(self.energy_weight)]
        )
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class RunResult:
    mode: str
    k: int
    dim: int
    total_error: float
    wall_times: list[float]
    blowup_time: float | None
    final_energy: float
    status: str = "ok"
    message: str = ""
    directory: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def mean_time(self) -> float:
        return float(np.mean(self.wall_times)) if self.wall_times else float("nan")

    @property
    def std_time(self) -> float:
        return float(np.std(self.wall_times)) if self.wall_times else float("nan")


def total_error(times, errors) -> float:
    """``sqrt(int ||e(t)||^2 dt)`` by the trapezoid rule."""
    return float(np.sqrt(np.trapezoid(np.asarray(errors) ** 2, np.asarray(times))))


def full_snapshots(p: WaveParams):
    """Integrate the full model; return (trajectory, energy series, snapshot ensemble)."""
    model = assemble_wave_model(p)
    traj, energy = integrate(model, initial_condition(p), p.dt, p.T)
    ens = SnapshotEnsemble.from_trajectory(traj.times, traj.states, p.snapshot_stride, model.force)
    return traj, energy, ens


def build_run_model(p: WaveParams, mode: str, k: int, ens: SnapshotEnsemble | None, energy_weight: float = 1.0):
    """Return ``(model, y0, to_fine_q, spectrum_values)`` for one run.

    ``to_fine_q`` maps a (steps x dim) history to q on the benchmark grid.
    """
    full = assemble_wave_model(p)
    y0 = initial_condition(p)
    n = p.n
    if mode == "full":
        return full, y0, lambda Y: Y[:, :n], None
    if mode == "coarse":
        model, yc, pc = coarse_model(p, k)
        return model, yc, lambda Y: interpolate_periodic(pc, Y[:, : pc.n], p), None
    if mode == "pod":
        M = build_state_matrix(ens)
        phi, spec = pod_basis(M, k)
        red = reduce_pod_galerkin(full, phi)
    elif mode == "psd":
        A = cotangent_lift(ens, k)
        spec = spectrum(build_extended_matrix(ens), "cotangent")
        red = reduce_structure_preserving(full, A)
    elif mode == "psd_energy":
        A = cotangent_lift_energy(ens, k, energy_weight)
        spec = spectrum(build_energy_matrix(ens, energy_weight), "cotangent_energy")
        red = reduce_structure_preserving(full, A)
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    lift = red.lift
    return red, red.reduce_state(y0), lambda Y: Y @ lift[:n].T, spec.values


def _provenance(cfg: ExperimentConfig, extra: str = "", stamp: bool = False) -> str:
    line = f"psdrom {__version__} mode={cfg.mode} config_sha256={cfg.digest()} seed={cfg.seed}"
    if stamp:
        line += f" generated={datetime.now(timezone.utc).isoformat(timespec='seconds')}"
    return line + (f" {extra}" if extra else "")


def _run_single(cfg: ExperimentConfig, k: int, ens, ref_q, ref_p) -> RunResult:
    p = cfg.params
    label = "full" if cfg.mode == "full" else f"{cfg.mode}_k{k}"
    rundir = Path(cfg.out) / label
    rundir.mkdir(parents=True, exist_ok=True)
    try:
        model, y0, to_q, spec_vals = build_run_model(p, cfg.mode, k, ens, cfg.energy_weight)
        walls = []
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            traj, energy = integrate(model, y0, p.dt, p.T, blowup_threshold=cfg.blowup_threshold)
            walls.append(time.perf_counter() - t0)
        m = len(traj.times)
        with np.errstate(over="ignore", invalid="ignore"):
            err = np.linalg.norm(to_q(traj.states) - ref_q[:m], axis=1)
            cols = [traj.times, err]
            header = ["t", "error"]
            if cfg.p_error and cfg.mode != "coarse":
                Yf = traj.states if cfg.mode == "full" else model.reconstruct(traj.states)
                cols.append(np.linalg.norm(Yf[:, p.n :] - ref_p[:m], axis=1))
                header.append("p_error")
        tot = float("inf") if traj.blew_up else total_error(traj.times, err)
        half = (len(ref_q) - 1) // 2
        energy_half = float(energy.values[half]) if half < m else float("inf")
        comment = _provenance(cfg, f"k={k} dim={len(y0)}")
        write_csv(rundir / "error.csv", header, np.column_stack(cols)[:: cfg.stride], comment)
        energy.to_csv(rundir / "energy.csv", cfg.stride, comment)
        if spec_vals is not None:
            idx = np.arange(1, len(spec_vals) + 1)
            write_csv(rundir / "spectrum.csv", ["k", "lambda_k"], np.column_stack([idx, spec_vals]), comment)
        result = RunResult(
            cfg.mode, k, len(y0), tot, walls, traj.blowup_time, float(energy.values[-1]),
            directory=str(rundir),
            extra={
                "energy_half": energy_half,
                "energy_0": float(energy.values[0]),
                "energy_max_increase": energy.max_increase(),
            },
        )
    except Exception as exc:  # recorded per run; the sweep continues
        log.exception("run %s failed", label)
        result = RunResult(cfg.mode, k, 0, float("nan"), [], None, float("nan"), "error", f"{type(exc).__name__}: {exc}", str(rundir))
    _write_summary(rundir / "summary.csv", [result], cfg)
    return result


SUMMARY_HEADER = ["mode", "k", "dim", "total_error", "wall_time_mean", "wall_time_std", "repeats", "blowup_time", "final_energy", "status"]


def _summary_row(r: RunResult) -> list:
    return [r.mode, r.k, r.dim, repr(r.total_error), repr(r.mean_time), repr(r.std_time), len(r.wall_times),
            "" if r.blowup_time is None else repr(r.blowup_time), repr(r.final_energy), r.status]


def _write_summary(path, results, cfg) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {_provenance(cfg, stamp=True)}\n")
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for r in results:
            w.writerow(_summary_row(r))


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    """Run every requested ``k`` for ``cfg.mode`` and write all CSV output."""
    cfg.validate()
    p = cfg.params
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    np.random.default_rng(cfg.seed)  # no stochastic stage yet; seed kept in provenance

    ens = None
    if cfg.mode in ("pod", "psd", "psd_energy"):
        _, _, ens = full_snapshots(p)
    times = np.arange(int(round(p.T / p.dt)) + 1) * p.dt
    ref = reference_solution(p, times)
    ref_q, ref_p = ref[:, : p.n], ref[:, p.n :]
    gap = np.linalg.norm(continuum_solution(p, times)[:, : p.n] - ref_q, axis=1)
    write_csv(out / "continuum_gap.csv", ["t", "gap"], np.column_stack([times, gap])[:: cfg.stride], _provenance(cfg))

    ks = [2 * p.n] if cfg.mode == "full" else list(cfg.ks)
    if cfg.workers > 1 and len(ks) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_single, [cfg] * len(ks), ks, [ens] * len(ks), [ref_q] * len(ks), [ref_p] * len(ks)))
    else:
        results = [_run_single(cfg, k, ens, ref_q, ref_p) for k in ks]

    _write_summary(out / "summary.csv", results, cfg)
    timing_rows = [[r.mode, r.k, repr(r.mean_time), repr(r.std_time), len(r.wall_times)] for r in results]
    _write_rows(out / "timing.csv", ["mode", "k", "mean_wall_time", "std_wall_time", "repeats"], timing_rows, _provenance(cfg, stamp=True))

    if cfg.betas:
        write_table2(cfg, out / "table2.csv")
    return results


def _write_rows(path, header, rows, comment) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def stability_table(params: WaveParams, betas, ks, mode: str = "pod"):
    """Leading-eigenvalue reports for every ``(beta, k)``; one snapshot run per ``beta``."""
    reports = []
    for beta in betas:
        pb = params.with_(beta=beta)
        _, _, ens = full_snapshots(pb)
        for k in ks:
            if mode == "pod":
                reports.append(table2_cell(pb, beta, k, ens))
            else:
                reports.append(psd_stability(pb, k, ens))
    return reports


def write_table2(cfg: ExperimentConfig, path) -> list:
    mode = "pod" if cfg.mode in ("pod", "full", "coarse") else "psd"
    reports = stability_table(cfg.params, cfg.betas, cfg.ks, mode)
    rows = [[repr(r.beta), r.k, repr(r.lambda_star.real), repr(r.a_star), str(r.stable).lower()] for r in reports]
    _write_rows(path, ["beta", "k", "re_lambda_star", "a_star", "stable"], rows, _provenance(cfg, f"basis={mode}"))
    return reports


def timing_sweep(cfg: ExperimentConfig) -> list[tuple[str, int, float, float, int]]:
    """Mean and standard deviation of online integration wall time over ``cfg.repeats`` runs."""
    cfg.validate()
    p = cfg.params
    ens = full_snapshots(p)[2] if cfg.mode in ("pod", "psd", "psd_energy") else None
    ks = [2 * p.n] if cfg.mode == "full" else list(cfg.ks)
    rows = []
    for k in ks:
        model, y0, _, _ = build_run_model(p, cfg.mode, k, ens, cfg.energy_weight)
        walls = []
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            integrate(model, y0, p.dt, p.T, blowup_threshold=cfg.blowup_threshold)
            walls.append(time.perf_counter() - t0)
        rows.append((cfg.mode, k, float(np.mean(walls)), float(np.std(walls)), cfg.repeats))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "timing.csv", ["mode", "k", "mean_wall_time", "std_wall_time", "repeats"],
                [[m, k, repr(a), repr(s), r] for m, k, a, s, r in rows], _provenance(cfg, stamp=True))
    return rows


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["out"] = str(cfg.out)
    return d
