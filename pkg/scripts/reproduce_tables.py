"""Run the built-in benchmark configurations and write markdown + CSV.

    python3 scripts/reproduce_tables.py --tables 1 2 3 4 --scale 1.0 --out results/

Full scale takes roughly 5 to 15 minutes per table on one core.
"""
import argparse
import logging
import time
from pathlib import Path

from ecsmg.experiment import bench_table, rows_markdown, write_rows_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--tables", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--kinds", nargs="+", choices=("csl", "csg", "qd"))
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for t in args.tables:
        t0 = time.perf_counter()
        rows = bench_table(t, args.scale, sensitivity=True,
                           kinds=tuple(args.kinds) if args.kinds else None)
        stem = out / f"table{t}_scale{args.scale:g}"
        write_rows_csv(rows, stem.with_suffix(".csv"))
        md = rows_markdown(rows, f"Table {t}, scale {args.scale:g}")
        qd = [r for r in rows if r.preconditioner.startswith("QD")]
        others = [r for r in rows if not r.preconditioner.startswith("QD")]
        if qd and others:
            ratio = qd[0].iterations / (sum(r.iterations for r in others) / len(others))
            md += f"\nQD / mean(other) iteration ratio: {ratio:.2f}\n"
        stem.with_suffix(".md").write_text(md)
        print(md)
        print(f"table {t}: {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
