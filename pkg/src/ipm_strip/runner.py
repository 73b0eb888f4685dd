"""Batch driver: configuration in, CSV + manifest + snapshots out."""

from __future__ import annotations

import csv
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import SimConfig
from .exceptions import NumericalAbort
from .galerkin import CSV_HEADER, EvolveOptions, evolve
from .initial import make_initial_data
from .spectral import TransformPlan, write_snapshot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_VERIFY = 4


@dataclass
class RunResult:
    exit_code: int
    records: list = field(default_factory=list)
    out_dir: Path | None = None
    message: str = ""


def make_plan(cfg: SimConfig, threads: int | None = None) -> TransformPlan:
    return TransformPlan(cfg.P, cfg.Q, n_x=cfg.n_x, n_y=cfg.n_y, workers=threads)


def evolve_options(cfg: SimConfig) -> EvolveOptions:
    return EvolveOptions(
        m=cfg.m,
        t_end=cfg.t_end,
        dt=cfg.dt,
        cfl=cfg.cfl,
        out_every=cfg.out_every,
        stepper=cfg.stepper,
        monitors=tuple(cfg.monitors),
        norm_style=cfg.norm_style,
        bkm_threshold=cfg.bkm_threshold,
        nonlinear=cfg.nonlinear,
        snapshot_every=cfg.snapshot_every,
    )


def manifest(cfg: SimConfig, plan: TransformPlan, status: str, message: str = "",
             threads: int | None = None) -> dict:
    return {
        "package": "ipm_strip",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "grid": list(plan.grid_shape),
        "threads": threads,
        "kappa": cfg.kappa,
        "status": status,
        "message": message,
        "config": cfg.to_ini(),
    }


def run(cfg: SimConfig, out_dir=None, threads: int | None = None, initial=None) -> RunResult:
    """Run ``cfg`` and, if ``out_dir`` is given, write its outputs there.

    Files: ``diagnostics.csv``, ``manifest.json`` (config echo + versions)
    and ``snapshots/rho_<step>.txt``.  A numerical abort keeps the rows
    produced so far and returns exit code 3.
    """
    plan = make_plan(cfg, threads)
    rho0 = make_initial_data(cfg) if initial is None else initial
    out = Path(out_dir) if out_dir is not None else None
    snap_cb = None
    if out is not None:
        (out / "snapshots").mkdir(parents=True, exist_ok=True)
        write_snapshot(rho0, out / "initial.txt", {"kind": cfg.initial_kind})

        def snap_cb(snap):
            write_snapshot(
                snap.state.rho,
                out / "snapshots" / f"rho_{snap.step:08d}.txt",
                {"t": f"{snap.state.t:.17g}", "step": snap.step, "m": snap.state.m},
            )

    records = []
    status, code, message = "ok", EXIT_OK, ""
    try:
        for rec in evolve(rho0, evolve_options(cfg), plan, on_snapshot=snap_cb):
            records.append(rec)
    except NumericalAbort as exc:
        status, code, message = "aborted", EXIT_ABORT, str(exc)
        if exc.record is not None:
            records.append(exc.record)
    if out is not None:
        write_csv(records, out / "diagnostics.csv")
        (out / "manifest.json").write_text(
            json.dumps(manifest(cfg, plan, status, message, threads), indent=2) + "\n", encoding="utf-8"
        )
    return RunResult(code, records, out, message)


def write_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.csv_row())


def read_csv(path) -> dict:
    """Columns of a diagnostics CSV; list-valued columns become 2-D arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    cols = {}
    for name in CSV_HEADER:
        raw = [r[name] for r in rows]
        if name.startswith("hk_"):
            cols[name] = np.array([[float(v) for v in r.split(";")] for r in raw])
        else:
            cols[name] = np.array([float(v) for v in raw])
    return cols
