"""Command line entry point: ``psdrom run|timing|table2``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import ConfigError, ExperimentConfig, run_experiment, timing_sweep, write_table2
from .wave import WaveParams


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psdrom", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, type=Path, help="key = value parameter file")
        sp.add_argument("--mode", default="psd", help="full, coarse, pod, psd or psd_energy")
        sp.add_argument("--k", default="", type=_ints, help="comma-separated basis sizes")
        sp.add_argument("--out", required=True, type=Path)
        sp.add_argument("--seed", default=0, type=int)
        sp.add_argument("--repeats", default=1, type=int, help="timed integrations per run")
        sp.add_argument("--betas", default="", type=_floats, help="damping sweep for table2.csv")
        sp.add_argument("--workers", default=1, type=int)
        sp.add_argument("--stride", default=1, type=int, help="row stride for time-series CSVs")
        sp.add_argument("--p-error", action="store_true", help="also report momentum error")
        sp.add_argument("--energy-weight", default=1.0, type=float, help="force-column weight for psd_energy")
        sp.add_argument("-v", "--verbose", action="store_true")

    for name, help_ in (("run", "run a sweep and write CSV output"),
                        ("timing", "time online integration only"),
                        ("table2", "leading reduced eigenvalues over a damping sweep")):
        common(sub.add_parser(name, help=help_))
    return ap


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        params = WaveParams.from_file(args.config)
        cfg = ExperimentConfig(
            params=params, mode=args.mode, ks=args.k, out=args.out, seed=args.seed,
            repeats=args.repeats, betas=args.betas, p_error=args.p_error, stride=args.stride,
            workers=args.workers, energy_weight=args.energy_weight,
        )
        cfg.validate()
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)

    try:
        if args.command == "run":
            results = run_experiment(cfg)
            failed = [r for r in results if r.status != "ok"]
            for r in results:
                print(f"{r.mode:<10} k={r.k:<4} dim={r.dim:<5} total_error={r.total_error:.6g} "
                      f"time={r.mean_time:.4g}s" + (f" blowup_t={r.blowup_time:g}" if r.blowup_time else ""))
            if failed:
                return _fail("RunFailure", "; ".join(f"k={r.k}: {r.message}" for r in failed), 3)
        elif args.command == "timing":
            for mode, k, mean, std, reps in timing_sweep(cfg):
                print(f"{mode:<10} k={k:<4} mean={mean:.4g}s std={std:.2g}s repeats={reps}")
        else:
            if not cfg.betas:
                raise ConfigError("table2 needs --betas")
            cfg.out.mkdir(parents=True, exist_ok=True)
            for r in write_table2(cfg, cfg.out / "table2.csv"):
                print(f"beta={r.beta:<8g} k={r.k:<4} Re(lambda*)={r.lambda_star.real: .4e} a*={r.a_star:.3e}")
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), 2)
    except Exception as exc:  # machine-readable failure for callers
        return _fail(type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
