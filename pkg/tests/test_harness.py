import csv
import dataclasses
import json
import math

import numpy as np
import pytest

from ecsmg import cli
from ecsmg.config import (ExperimentConfig, Outputs, dumps, from_dict, load, loads, save,
                          to_dict)
from ecsmg.experiment import (ExperimentError, bench_table, export_field, export_spectrum,
                              rows_markdown, run_experiment, write_report_json,
                              write_rows_csv)
from ecsmg.krylov import KrylovConfig
from ecsmg.multigrid import MgConfig
from ecsmg.operators import AxisSpec, ConfigurationError, ModelProblem
from ecsmg.preconditioners import PreconditionerSpec
from ecsmg.spectral import spectrum_report
from ecsmg.tables import TABLE_IDS, table_configs


def tiny_config(**kw):
    model = ModelProblem("MP1", 0.0, AxisSpec(8, 2, 2, 1.0, 0.25, math.pi / 6))
    base = dict(name="tiny", model=model, preconditioner=PreconditionerSpec("laplacian"),
                multigrid=MgConfig(smoother="jacobi", omega=0.8),
                krylov=KrylovConfig(tol=1e-8))
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.mark.parametrize("table", TABLE_IDS)
def test_config_roundtrip_benchmarks(table):
    for cfg in table_configs(table):
        assert loads(dumps(cfg)) == cfg
        assert from_dict(json.loads(json.dumps(to_dict(cfg)))) == cfg


def test_config_roundtrip_complex_lambda(tmp_path):
    cfg = tiny_config(preconditioner=PreconditionerSpec("qd", lambda0=-3 - 0.5j))
    save(cfg, tmp_path / "c.json")
    back = load(tmp_path / "c.json")
    assert back == cfg and back.preconditioner.lambda0 == -3 - 0.5j


@pytest.mark.parametrize("text", [
    "{not json", "[]", '{"name": "x"}', '{"model": {"kind": "MP1", "k": 1}}',
    '{"model": {"kind": "MP1", "k": 1, "x_axis": {"n": 4}}, "bogus": 1}',
    '{"model": {"kind": "MP1", "k": 1, "x_axis": {"n": 4, "color": 3}}}',
    '{"model": {"kind": "MP1", "k": 1, "x_axis": {"n": 4}}, '
    '"preconditioner": {"kind": "qd", "lambda0": [1, 2, 3]}}',
])
def test_config_errors(text):
    with pytest.raises(ConfigurationError):
        loads(text)


def test_shipped_configs_load():
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    names = sorted(p.name for p in root.glob("*.json"))
    assert len(names) == 3
    kinds = {load(root / n).model.kind for n in names}
    assert kinds == {"MP1", "MP2", "MP3"}


def test_scaled_config():
    cfg = table_configs(4)[0].scaled(0.5)
    ax = cfg.model.x_axis
    assert (ax.n, ax.m_lo, ax.m_hi, ax.a) == (384, 0, 64, 75.0)
    assert cfg.model.k == 4.0


def test_table_captions():
    t4 = table_configs(4)
    assert len(t4) == 3
    ax = t4[0].model.x_axis
    assert (ax.n, ax.m_hi, ax.a, t4[0].model.k) == (768, 128, 75.0, 4.0)
    assert [c.preconditioner.kind for c in table_configs(1)] == ["csl", "csg", "qd"]
    with pytest.raises(ValueError):
        table_configs(5)


def test_tiny_experiment_row_well_formed(tmp_path):
    res = run_experiment(tiny_config(), sensitivity=True)
    row = res.row
    assert row.converged and row.mg_status == "converged"
    assert row.cycles_per_prec == 1
    assert set(row.iterations_at_tol) == {"1e-05", "1e-06", "1e-07"}
    prov = row.provenance
    for key in ("rhs_sign", "rhs_kind", "lambda0_source", "multigrid", "krylov", "grid"):
        assert key in prov
    assert res.report.mg_cycles == 2 * res.report.iterations
    write_report_json(res, tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["solve"]["converged"] is True
    md = rows_markdown([row], "tiny")
    assert md.count("\n|") == 3
    write_rows_csv([row], tmp_path / "rows.csv")
    with open(tmp_path / "rows.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["preconditioner"] == "laplacian"


def test_qd_auto_lambda_recorded():
    res = run_experiment(tiny_config(
        model=ModelProblem("MP1", 10.0, AxisSpec(8, 2, 2, 1.0, 0.25, math.pi / 6)),
        preconditioner=PreconditionerSpec("qd")))
    assert res.row.provenance["lambda0"][0] < 0


def test_stage_named_on_failure():
    bad = tiny_config(multigrid=MgConfig(levels=9))
    with pytest.raises(ExperimentError) as exc:
        run_experiment(bad)
    assert exc.value.stage == "hierarchy"


def test_field_export(tmp_path):
    cfg = tiny_config()
    grid = cfg.model.grid()
    n = export_field(np.zeros(grid.shape), grid, tmp_path / "f.csv")
    assert n == grid.real_mask().sum()
    with open(tmp_path / "f.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == n and all(float(r["abs"]) == 0 for r in rows)
    assert list(rows[0]) == ["x", "y", "re", "im", "abs"]


def test_mp1_solution_symmetric_about_source():
    model = ModelProblem("MP1", 20.0, AxisSpec(32, 8, 8, 1.0, 0.25, math.pi / 6))
    cfg = tiny_config(model=model, preconditioner=PreconditionerSpec("qd"),
                      multigrid=MgConfig(smoother="rb_jacobi"))
    res = run_experiment(cfg)
    u = np.abs(res.x)
    ci = model.x_axis.m_lo + 16 - 1
    for d in (3, 6, 10):
        along_x = 0.5 * (u[ci + d, ci] + u[ci - d, ci])
        along_y = 0.5 * (u[ci, ci + d] + u[ci, ci - d])
        assert abs(along_x - along_y) <= 0.1 * along_x


def test_spectrum_export(tmp_path):
    rep = spectrum_report([1 - 1j, 2 - 0.5j, 3 + 0j])
    assert export_spectrum(rep, tmp_path / "s.csv") == 3
    with open(tmp_path / "s.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["re", "im", "branch", "residual"] and len(rows) == 4


def test_bench_table_kind_filter():
    rows = bench_table(3, scale=0.125, sensitivity=False, kinds=("qd",))
    assert len(rows) == 1 and rows[0].preconditioner.startswith("QD")
    assert rows[0].reference["iterations"] == 164
    assert "iterations" in rows[0].deltas()


# -- command line ------------------------------------------------------------

def _write(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    save(cfg, path)
    return str(path)


def test_cli_run_and_outputs(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ECSMG_OUTPUT_DIR", str(tmp_path / "out"))
    cfg = tiny_config(outputs=Outputs(report="r.json", field="f.csv"))
    assert cli.main(["run", _write(tmp_path, cfg)]) == cli.EXIT_OK
    assert (tmp_path / "out" / "r.json").exists()
    assert (tmp_path / "out" / "f.csv").exists()
    assert "report written" in capsys.readouterr().out


def test_cli_spectrum_and_field(tmp_path, monkeypatch):
    monkeypatch.setenv("ECSMG_OUTPUT_DIR", str(tmp_path))
    model = ModelProblem("MP3", 2.0, AxisSpec(8, 0, 4, 4.0, 2.0, math.pi / 6))
    path = _write(tmp_path, tiny_config(model=model))
    assert cli.main(["spectrum", path, "--count", "5", "--out", "p.csv"]) == 0
    assert len((tmp_path / "p.csv").read_text().strip().splitlines()) == 6
    assert cli.main(["spectrum", path, "--operator", "preconditioned", "--out", "q.csv"]) == 0
    assert cli.main(["field", path, "--out", "f.csv"]) == 0
    assert cli.main(["spectrum", _write(tmp_path, tiny_config()), "--out", "t.csv"]) == 0


def test_cli_exit_codes(tmp_path, monkeypatch):
    monkeypatch.setenv("ECSMG_OUTPUT_DIR", str(tmp_path))
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": {"kind": "MP7"}}')
    assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG
    slow = tiny_config(model=ModelProblem("MP1", 15.0, AxisSpec(16, 4, 4, 1.0, 0.25, 0.5)),
                       preconditioner=PreconditionerSpec("none"),
                       krylov=KrylovConfig(max_iter=2))
    assert cli.main(["run", _write(tmp_path, slow)]) == cli.EXIT_NOCONV
    big = tiny_config(model=ModelProblem("MP1", 1.0, AxisSpec(128, 32, 32, 1.0, 0.25, 0.5)))
    assert cli.main(["spectrum", _write(tmp_path, big), "--operator", "model"]) == 3


def test_cli_bench_small_scale(tmp_path, monkeypatch):
    monkeypatch.setenv("ECSMG_OUTPUT_DIR", str(tmp_path))
    code = cli.main(["bench", "--table", "1", "--scale", "0.125", "--no-sensitivity"])
    assert code in (cli.EXIT_OK, cli.EXIT_NOCONV)
    text = (tmp_path / "table1_scale0.125.csv").read_text()
    assert text.startswith("preconditioner,") and text.count("\n") == 4
