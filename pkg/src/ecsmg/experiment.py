"""Running configured experiments and writing their results."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ExperimentConfig
from .grid import TensorGrid2D
from .krylov import SolveReport, bicgstab, rescale_guess, warm_start_guess
from .multigrid import MultigridPreconditioner, hierarchy_for, standalone_solve
from .operators import OperatorSpec, apply, build_rhs, discretize
from .preconditioners import (preconditioner_grid, preconditioner_operator_spec,
                              resolve_lambda0)
from .spectral import SpectrumReport
from .tables import table_configs

log = logging.getLogger(__name__)

SENSITIVITY_TOLS = (1e-5, 1e-6, 1e-7)


class ExperimentError(RuntimeError):
    """A stage of an experiment failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class BenchRow:
    preconditioner: str
    cycle: str
    smoother: str
    omega: float
    mg_conv: float
    mg_cycles: int
    mg_seconds: float
    cycles_per_prec: int
    iterations: int
    total_seconds: float
    converged: bool
    mg_status: str = ""
    iterations_at_tol: dict = field(default_factory=dict)
    reference: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def deltas(self) -> dict:
        out = {}
        for key in ("mg_conv", "mg_cycles", "iterations"):
            if key in self.reference and self.reference[key] is not None:
                out[key] = getattr(self, key) - self.reference[key]
        return out


@dataclass
class ExperimentResult:
    row: BenchRow
    report: SolveReport
    x: np.ndarray
    grid: TensorGrid2D


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ExperimentError:
        raise
    except Exception as exc:  # surfaced with the failing stage named
        raise ExperimentError(name, exc) from exc


def _iterations_to(residuals, bnorm, tol):
    for i, r in enumerate(residuals):
        if r <= tol * bnorm:
            return i
    return None


def run_experiment(cfg: ExperimentConfig, sensitivity: bool = False,
                   with_warm_start: Optional[bool] = None) -> ExperimentResult:
    """Standalone multigrid on the preconditioner, then preconditioned Bi-CGSTAB."""
    model = cfg.model
    grid = _stage("grid", model.grid)
    Z = _stage("discretize", discretize, OperatorSpec(model), grid)
    b = _stage("rhs", build_rhs, model, grid)

    prec = cfg.preconditioner
    lam0 = None
    if prec.kind == "qd":
        lam0 = _stage("lambda0", resolve_lambda0, model, prec, grid)
        prec = dataclasses.replace(prec, lambda0=lam0)
    mspec = _stage("preconditioner", preconditioner_operator_spec, model, prec, grid)
    mgrid = preconditioner_grid(grid, prec)
    hier = _stage("hierarchy", hierarchy_for, cfg.multigrid, mspec, mgrid)

    mg_res = _stage("standalone multigrid", standalone_solve, hier, b, cfg.multigrid)

    warm = cfg.krylov.warm_start if with_warm_start is None else with_warm_start
    t0 = time.perf_counter()
    x0, ws_cycles = None, 0
    if warm:
        x0, ws_cycles = _stage("warm start", warm_start_guess, hier, b,
                               cfg.krylov.warm_start_tol, cfg.multigrid)
        x0 = x0.reshape(-1)
        if cfg.krylov.warm_start_scale == "minres":
            x0 = rescale_guess(lambda v: apply(Z, v), x0, b)
    tol = min(SENSITIVITY_TOLS[-1], cfg.krylov.tol) if sensitivity else cfg.krylov.tol
    kcfg = dataclasses.replace(cfg.krylov, tol=tol)
    P = MultigridPreconditioner(hier, cfg.multigrid)
    x, rep = _stage("bicgstab", bicgstab, lambda v: apply(Z, v), P, b.reshape(-1), x0, kcfg)
    total = time.perf_counter() - t0 + mg_res.seconds

    bnorm = float(np.linalg.norm(b))
    iters = rep.iterations
    converged = rep.converged
    at_tol = {}
    if sensitivity:
        for t in SENSITIVITY_TOLS:
            at_tol[f"{t:g}"] = _iterations_to(rep.residuals, bnorm, t)
        hit = _iterations_to(rep.residuals, bnorm, cfg.krylov.tol)
        converged = hit is not None
        iters = hit if hit is not None else rep.iterations
    rep.mg_cycles = P.cycles + ws_cycles
    rep.warm_start_cycles = ws_cycles
    provenance = cfg.provenance()
    provenance["lambda0"] = [lam0.real, lam0.imag] if lam0 is not None else None
    provenance["grid_shape"] = list(grid.shape)
    provenance["levels"] = len(hier.levels)
    provenance["warm_start"] = warm
    rep.config = dict(provenance, outer_tol=cfg.krylov.tol)

    row = BenchRow(
        preconditioner=prec.label, cycle=cfg.multigrid.label,
        smoother=cfg.multigrid.smoother, omega=cfg.multigrid.omega,
        mg_conv=mg_res.conv_factor, mg_cycles=mg_res.cycles, mg_seconds=mg_res.seconds,
        cycles_per_prec=1, iterations=iters, total_seconds=total, converged=converged,
        mg_status=mg_res.status, iterations_at_tol=at_tol, reference=dict(cfg.reference),
        provenance=provenance)
    log.info("%s: mg %.3f/%d, bicgstab %d (%s)", cfg.name, row.mg_conv, row.mg_cycles,
             row.iterations, rep.status)
    return ExperimentResult(row, rep, x.reshape(grid.shape), grid)


def bench_table(table: int, scale: float = 1.0, sensitivity: bool = True,
                kinds: Optional[tuple] = None) -> list:
    rows = []
    for cfg in table_configs(table):
        if kinds is not None and cfg.preconditioner.kind not in kinds:
            continue
        rows.append(run_experiment(cfg.scaled(scale), sensitivity=sensitivity).row)
    return rows


# -- output ------------------------------------------------------------------

ROW_COLUMNS = ["preconditioner", "cycle", "smoother", "omega", "mg_conv", "mg_cycles",
               "mg_seconds", "cycles_per_prec", "iterations", "total_seconds", "converged",
               "iters_tol_1e-5", "iters_tol_1e-7", "reference_mg_conv", "reference_mg_cycles",
               "reference_iterations", "delta_mg_conv", "delta_mg_cycles", "delta_iterations"]


def _row_record(row: BenchRow) -> dict:
    d = row.deltas()
    return {
        "preconditioner": row.preconditioner, "cycle": row.cycle,
        "smoother": row.smoother, "omega": row.omega,
        "mg_conv": f"{row.mg_conv:.3f}", "mg_cycles": row.mg_cycles,
        "mg_seconds": f"{row.mg_seconds:.2f}", "cycles_per_prec": row.cycles_per_prec,
        "iterations": row.iterations, "total_seconds": f"{row.total_seconds:.1f}",
        "converged": row.converged,
        "iters_tol_1e-5": row.iterations_at_tol.get("1e-05", ""),
        "iters_tol_1e-7": row.iterations_at_tol.get("1e-07", ""),
        "reference_mg_conv": row.reference.get("mg_conv", ""),
        "reference_mg_cycles": row.reference.get("mg_cycles", ""),
        "reference_iterations": row.reference.get("iterations", ""),
        "delta_mg_conv": f"{d['mg_conv']:+.3f}" if "mg_conv" in d else "",
        "delta_mg_cycles": f"{d['mg_cycles']:+d}" if "mg_cycles" in d else "",
        "delta_iterations": f"{d['iterations']:+d}" if "iterations" in d else "",
    }


def write_rows_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=ROW_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(_row_record(row))


def rows_markdown(rows, title: str = "") -> str:
    head = ("| Preconditioner | cyc, smooth., omega | mg-conv., # cycles | mg cyc. per prec. "
            "| iter, cputime | reference: mg-conv., # cycles, iter |")
    lines = [f"### {title}", ""] if title else []
    lines += [head, "|" + "---|" * 6]
    for r in rows:
        p = r.reference
        lines.append(
            f"| {r.preconditioner} | {r.cycle}, {r.smoother}, {r.omega:g} "
            f"| {r.mg_conv:.2f}, {r.mg_cycles} | {r.cycles_per_prec} "
            f"| {r.iterations}, {r.total_seconds:.1f}s "
            f"| {p.get('mg_conv', '')}, {p.get('mg_cycles', '')}, {p.get('iterations', '')} |")
    return "\n".join(lines) + "\n"


def write_report_json(result: ExperimentResult, path) -> None:
    rep = result.report
    payload = {
        "row": dataclasses.asdict(result.row),
        "solve": {
            "iterations": rep.iterations, "converged": rep.converged, "status": rep.status,
            "mg_cycles": rep.mg_cycles, "warm_start_cycles": rep.warm_start_cycles,
            "seconds": rep.seconds, "residuals": [float(r) for r in rep.residuals],
            "config": rep.config,
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2, default=str) + "\n")


def export_field(u: np.ndarray, grid: TensorGrid2D, path) -> int:
    """CSV of ``x, y, re, im, abs`` at real-region unknowns.  Returns row count."""
    u = np.asarray(u).reshape(grid.shape)
    X, Y = grid.coordinates()
    mask = grid.real_mask()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "re", "im", "abs"])
        n = 0
        for x, y, v in zip(X[mask].real, Y[mask].real, u[mask]):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(v.real)),
                        repr(float(v.imag)), repr(float(abs(v)))])
            n += 1
    return n


def export_spectrum(report: SpectrumReport, path) -> int:
    """CSV of ``re, im, branch, residual``.  Returns row count."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "branch", "residual"])
        labels = report.labels or ["" for _ in report.eigenvalues]
        res = report.residuals if len(report.residuals) else [np.nan] * len(report.eigenvalues)
        for lam, lab, r in zip(report.eigenvalues, labels, res):
            w.writerow([repr(float(lam.real)), repr(float(lam.imag)), lab, repr(float(r))])
    return len(report.eigenvalues)
