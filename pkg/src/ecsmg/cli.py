"""Command-line front end.

    ecsmg run <config.json>
    ecsmg bench --table {1,2,3,4} [--scale S]
    ecsmg spectrum <config.json> [--operator pitchfork|model|preconditioner|preconditioned]
    ecsmg field <config.json>

Outputs go to the paths in the config (or ``--out``), relative to
``$ECSMG_OUTPUT_DIR`` when set.  Exit codes: 0 success, 2 solver did not
converge, 3 configuration error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import OUTPUT_DIR_ENV
from .experiment import (ExperimentError, bench_table, export_field, export_spectrum,
                         rows_markdown, run_experiment, write_report_json, write_rows_csv)
from .grid import GridError
from .operators import DENSE_CAP, ConfigurationError, OperatorSpec, assemble_dense, discretize
from .preconditioners import preconditioner_operator_spec
from .spectral import (PitchforkParams, dense_eigenvalues, find_pitchfork,
                       laplacian_1d, spectrum_report)

EXIT_OK, EXIT_NOCONV, EXIT_CONFIG, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("ecsmg")


def _out_path(path, default_name):
    base = os.environ.get(OUTPUT_DIR_ENV, ".")
    if path is None:
        path = default_name
    p = Path(path)
    if not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load(path):
    try:
        return cfgmod.load(path)
    except OSError as exc:
        raise IOError(str(exc)) from exc


def cmd_run(args):
    cfg = _load(args.config)
    res = run_experiment(cfg, sensitivity=args.sensitivity)
    out = _out_path(args.out or cfg.outputs.report, f"{cfg.name}.report.json")
    write_report_json(res, out)
    if cfg.outputs.field:
        export_field(res.x, res.grid, _out_path(cfg.outputs.field, ""))
    print(rows_markdown([res.row], cfg.name))
    print(f"report written to {out}")
    return EXIT_OK if res.row.converged else EXIT_NOCONV


def cmd_bench(args):
    rows = bench_table(args.table, args.scale, sensitivity=not args.no_sensitivity)
    stem = f"table{args.table}" + (f"_scale{args.scale:g}" if args.scale != 1 else "")
    md = rows_markdown(rows, f"Table {args.table} (scale {args.scale:g})")
    csv_path = _out_path(f"{stem}.csv", "")
    write_rows_csv(rows, csv_path)
    _out_path(f"{stem}.md", "").write_text(md)
    print(md)
    print(f"wrote {csv_path}")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOCONV


def _spectrum(cfg, which, count):
    model = cfg.model
    if which == "pitchfork":
        g = model.x_axis.build()
        if g.m_lo == 0:
            return find_pitchfork(PitchforkParams.from_grid(g), count)
        # the characteristic equation covers one-sided layers only
        log.warning("two-sided layers: falling back to the dense 1D Laplacian spectrum")
        ev = dense_eigenvalues(laplacian_1d(g).toarray())
        ev = ev[np.argsort(np.abs(ev))][:count]
        ev = ev[np.lexsort((ev.imag, ev.real))]
        return spectrum_report(ev, ["dense_1d"] * len(ev))
    grid = model.grid()
    if grid.size > DENSE_CAP:
        raise ConfigurationError(f"{grid.size} unknowns exceed the dense eigensolver cap "
                                 f"{DENSE_CAP}; use a smaller grid")
    Z = discretize(OperatorSpec(model), grid)
    if which == "model":
        ev = dense_eigenvalues(assemble_dense(Z))
    else:
        mspec = preconditioner_operator_spec(model, cfg.preconditioner, grid)
        M = assemble_dense(discretize(mspec, grid))
        if which == "preconditioner":
            ev = dense_eigenvalues(M)
        else:
            ev = dense_eigenvalues(np.linalg.solve(M, assemble_dense(Z)))
    rep = spectrum_report(ev, [which] * len(ev))
    if count is not None:
        rep.eigenvalues = rep.eigenvalues[:count]
        rep.labels = rep.labels[:count]
        rep.residuals = rep.residuals[:count]
    return rep


def cmd_spectrum(args):
    cfg = _load(args.config)
    rep = _spectrum(cfg, args.operator, args.count)
    out = _out_path(args.out or cfg.outputs.spectrum, f"{cfg.name}.spectrum.csv")
    n = export_spectrum(rep, out)
    print(f"wrote {n} eigenvalues to {out}")
    return EXIT_OK


def cmd_field(args):
    cfg = _load(args.config)
    res = run_experiment(cfg)
    out = _out_path(args.out or cfg.outputs.field, f"{cfg.name}.field.csv")
    n = export_field(res.x, res.grid, out)
    print(f"wrote {n} field values to {out}")
    return EXIT_OK if res.row.converged else EXIT_NOCONV


def build_parser():
    p = argparse.ArgumentParser(prog="ecsmg", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one configured experiment")
    r.add_argument("config")
    r.add_argument("--out")
    r.add_argument("--sensitivity", action="store_true",
                   help="also report iterations at outer tolerances 1e-5 and 1e-7")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="reproduce one of the benchmark tables")
    b.add_argument("--table", type=int, choices=(1, 2, 3, 4), required=True)
    b.add_argument("--scale", type=float, default=1.0,
                   help="multiply all cell counts (0.5 for desk-scale smoke runs)")
    b.add_argument("--no-sensitivity", action="store_true")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("spectrum", help="export a spectrum as CSV")
    s.add_argument("config")
    s.add_argument("--operator", default="pitchfork",
                   choices=("pitchfork", "model", "preconditioner", "preconditioned"))
    s.add_argument("--count", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    f = sub.add_parser("field", help="solve and export the solution field as CSV")
    f.add_argument("config")
    f.add_argument("--out")
    f.set_defaults(func=cmd_field)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, GridError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExperimentError as exc:
        if isinstance(exc.cause, (ConfigurationError, GridError)):
            print(f"configuration error in {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"solver error in {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (IOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
